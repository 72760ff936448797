// Micro-benchmark for the solver and barycenter at study scale: per-solve
// cost at full size and under the sparsity ratios, plus one barycenter
// update. Seeded and deterministic apart from the clock.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "sspw/sspw.hpp"

using namespace sspw;

namespace {
double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}
} // namespace

int main(int argc, char** argv) {
    const int bins = argc > 1 ? std::atoi(argv[1]) : 256;
    const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 600;

    const LabeledDataset ds = make_synthetic_dataset(10, 10, bins, 3.0, seed);
    const GroundCost C = build_ground_cost(*ds.geometry, *ds.geometry, 2.0);
    const BarycenterConfig bary = default_barycenter_config(C);
    std::printf("bins=%d  epsilon=%.4f  (median cost %.2f)\n", bins, bary.epsilon,
                median_positive_cost(C));

    {
        double t0 = now_s();
        long pivots = 0;
        const int reps = 20;
        for (int i = 0; i < reps; ++i)
            pivots += solve_ot(ds.samples[static_cast<std::size_t>(i)],
                               ds.samples[static_cast<std::size_t>(i) + 20], C)
                          .pivots;
        std::printf("full solve:        %7.2f ms avg  %5ld pivots avg\n",
                    (now_s() - t0) * 1000.0 / reps, pivots / reps);
    }

    for (const double gamma : {0.8, 0.5, 0.3}) {
        double t0 = now_s();
        long pivots = 0;
        const int reps = 20;
        for (int i = 0; i < reps; ++i) {
            const auto a = shrink_vector(
                sparse_simplex_project(ds.samples[static_cast<std::size_t>(i)], gamma)
                    .projected);
            const auto b = shrink_vector(
                sparse_simplex_project(ds.samples[static_cast<std::size_t>(i) + 20], gamma)
                    .projected);
            const CostView view(C, a.support(), b.support());
            pivots += solve_ot(a, b, view).pivots;
        }
        std::printf("gamma %.1f solve:   %7.2f ms avg  %5ld pivots avg (incl. projection)\n",
                    gamma, (now_s() - t0) * 1000.0 / reps, pivots / reps);
    }

    {
        std::vector<Histogram> members(ds.samples.begin(), ds.samples.begin() + 10);
        const double t0 = now_s();
        const BarycenterResult r = barycenter(members, C, bary);
        std::printf("barycenter (10 members): %.1f ms  %d iterations%s\n",
                    (now_s() - t0) * 1000.0, r.iterations,
                    r.used_log_domain ? "  [log domain]" : "");
    }
    return 0;
}
