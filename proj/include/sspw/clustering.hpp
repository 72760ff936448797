#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "sspw/barycenter.hpp"
#include "sspw/errors.hpp"
#include "sspw/histogram.hpp"
#include "sspw/parallel.hpp"
#include "sspw/projection.hpp"
#include "sspw/random.hpp"
#include "sspw/transport.hpp"

namespace sspw {

enum class Schedule { fix, dec, inc };

// Sparsity-ratio control over outer iterations. FIX holds gamma_min; DEC
// walks 1 -> gamma_min; INC walks gamma_min -> 1. The boundary values are
// returned exactly, t outside [0, t_max] saturates, and interior values
// are clamped into [gamma_min, 1].
inline double gamma_schedule(Schedule mode, double gamma_min, int t_max, int t) {
    if (!(gamma_min > 0.0) || gamma_min > 1.0)
        throw config_error("gamma_schedule: gamma_min must be in (0, 1]");
    if (t_max < 1) throw config_error("gamma_schedule: t_max must be >= 1");
    if (mode == Schedule::fix) return gamma_min;
    if (t <= 0) return mode == Schedule::dec ? 1.0 : gamma_min;
    if (t >= t_max) return mode == Schedule::dec ? gamma_min : 1.0;
    const double frac = (1.0 - gamma_min) * static_cast<double>(t) / static_cast<double>(t_max);
    const double g = mode == Schedule::dec ? 1.0 - frac : gamma_min + frac;
    return std::clamp(g, gamma_min, 1.0);
}

struct IterationRecord {
    double gamma = 1.0;
    int changed_labels = 0;
    double assign_time_s = 0.0;
    double update_time_s = 0.0;
    double objective = 0.0;
};

struct ClusteringRun {
    std::vector<int> assignments;
    std::vector<Histogram> centroids;
    int iterations = 0;
    std::vector<IterationRecord> trace;
    bool converged = false;
    int reseeds = 0;
    // q x k distance matrix from the last assignment step; row argmin
    // equals the assignment.
    std::vector<double> final_distances;
};

struct SspwConfig {
    int k = 2;
    Schedule schedule = Schedule::fix;
    double gamma_min = 1.0;
    int t_max = 10;
    bool project_samples = true;
    bool project_centroids = true;
    bool shrink_enabled = true;
    std::uint64_t seed = 0;
    double p = 2.0; // cost power, carried along for reporting
    BarycenterConfig barycenter_cfg{1e-2, 1000, 1e-7};
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline double sq_euclidean(const std::vector<double>& x, const std::vector<double>& y) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        d2 += d * d;
    }
    return d2;
}

// argmin over a row of the distance matrix, ties to the lower index.
inline int row_argmin(const double* row, int k) {
    int best = 0;
    for (int j = 1; j < k; ++j)
        if (row[j] < row[best]) best = j;
    return best;
}

// k-means++ style seeding driven by the run RNG.
inline std::vector<int> kmeanspp_indices(const std::vector<Histogram>& samples, int k, Rng& rng) {
    const int q = static_cast<int>(samples.size());
    std::vector<int> chosen;
    chosen.reserve(static_cast<std::size_t>(k));
    chosen.push_back(static_cast<int>(rng.uniform_index(static_cast<std::size_t>(q))));

    std::vector<double> d2(static_cast<std::size_t>(q), std::numeric_limits<double>::infinity());
    std::vector<char> used(static_cast<std::size_t>(q), 0);
    used[static_cast<std::size_t>(chosen[0])] = 1;

    while (static_cast<int>(chosen.size()) < k) {
        const Histogram& last = samples[static_cast<std::size_t>(chosen.back())];
        double total = 0.0;
        for (int i = 0; i < q; ++i) {
            d2[static_cast<std::size_t>(i)] = std::min(
                d2[static_cast<std::size_t>(i)],
                sq_euclidean(samples[static_cast<std::size_t>(i)].weights(), last.weights()));
            total += d2[static_cast<std::size_t>(i)];
        }
        int pick = -1;
        if (total > 0.0) {
            const double r = rng.uniform() * total;
            double acc = 0.0;
            for (int i = 0; i < q; ++i) {
                acc += d2[static_cast<std::size_t>(i)];
                if (acc >= r) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) pick = q - 1;
            if (used[static_cast<std::size_t>(pick)]) {
                // duplicate point drawn on a boundary; fall through to the
                // first unused index
                pick = -1;
            }
        }
        if (pick < 0) {
            for (int i = 0; i < q; ++i)
                if (!used[static_cast<std::size_t>(i)]) {
                    pick = i;
                    break;
                }
        }
        used[static_cast<std::size_t>(pick)] = 1;
        chosen.push_back(pick);
    }
    return chosen;
}

// Replace each empty cluster's centroid by the unclaimed sample farthest
// from its assigned centroid. `dist` is the q x k matrix of the current
// assignment step.
inline int reseed_empty_clusters(const std::vector<Histogram>& samples,
                                 const std::vector<int>& labels,
                                 const std::vector<double>& dist, int k,
                                 const std::vector<int>& cluster_sizes,
                                 std::vector<Histogram>& centroids) {
    const int q = static_cast<int>(samples.size());
    std::vector<char> taken(static_cast<std::size_t>(q), 0);
    int reseeds = 0;
    for (int j = 0; j < k; ++j) {
        if (cluster_sizes[static_cast<std::size_t>(j)] > 0) continue;
        int far = -1;
        double far_d = -1.0;
        for (int i = 0; i < q; ++i) {
            if (taken[static_cast<std::size_t>(i)]) continue;
            const double d = dist[static_cast<std::size_t>(i) * k + labels[static_cast<std::size_t>(i)]];
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        if (far < 0) break; // more empty clusters than samples; leave as-is
        taken[static_cast<std::size_t>(far)] = 1;
        centroids[static_cast<std::size_t>(j)] = samples[static_cast<std::size_t>(far)];
        ++reseeds;
    }
    return reseeds;
}

} // namespace detail

// Lloyd's algorithm on raw histogram vectors under the squared Euclidean
// distance. Also serves as the centroid initializer for the Wasserstein
// drivers. Converges when no label changes; empty clusters are re-seeded
// with the farthest sample from its assigned centroid.
inline ClusteringRun euclidean_kmeans(const std::vector<Histogram>& samples, int k,
                                      std::uint64_t seed, int max_iters = 100) {
    const int q = static_cast<int>(samples.size());
    if (k < 1 || k > q) throw config_error("euclidean_kmeans: need 1 <= k <= sample count");

    Rng rng(seed);
    const auto seeds = detail::kmeanspp_indices(samples, k, rng);
    std::vector<Histogram> centroids;
    centroids.reserve(static_cast<std::size_t>(k));
    for (int idx : seeds) centroids.push_back(samples[static_cast<std::size_t>(idx)]);

    ClusteringRun run;
    std::vector<int> labels(static_cast<std::size_t>(q), -1);
    std::vector<int> prev(static_cast<std::size_t>(q), -1);
    std::vector<double> dist(static_cast<std::size_t>(q) * k);

    for (int t = 0; t < max_iters; ++t) {
        const auto t0 = std::chrono::steady_clock::now();
        double objective = 0.0;
        for (int i = 0; i < q; ++i) {
            double* row = dist.data() + static_cast<std::size_t>(i) * k;
            for (int j = 0; j < k; ++j)
                row[j] = detail::sq_euclidean(samples[static_cast<std::size_t>(i)].weights(),
                                              centroids[static_cast<std::size_t>(j)].weights());
            labels[static_cast<std::size_t>(i)] = detail::row_argmin(row, k);
            objective += row[labels[static_cast<std::size_t>(i)]];
        }
        int changed = 0;
        for (int i = 0; i < q; ++i)
            if (labels[static_cast<std::size_t>(i)] != prev[static_cast<std::size_t>(i)]) ++changed;
        const double assign_s = detail::seconds_since(t0);

        if (changed == 0) {
            run.trace.push_back({1.0, 0, assign_s, 0.0, objective});
            run.converged = true;
            break;
        }

        const auto t1 = std::chrono::steady_clock::now();
        std::vector<int> sizes(static_cast<std::size_t>(k), 0);
        std::vector<std::vector<double>> sums(
            static_cast<std::size_t>(k),
            std::vector<double>(samples.front().weights().size(), 0.0));
        for (int i = 0; i < q; ++i) {
            const int j = labels[static_cast<std::size_t>(i)];
            ++sizes[static_cast<std::size_t>(j)];
            const auto& w = samples[static_cast<std::size_t>(i)].weights();
            auto& acc = sums[static_cast<std::size_t>(j)];
            for (std::size_t d = 0; d < w.size(); ++d) acc[d] += w[d];
        }
        for (int j = 0; j < k; ++j) {
            if (sizes[static_cast<std::size_t>(j)] == 0) continue;
            auto& acc = sums[static_cast<std::size_t>(j)];
            for (double& x : acc) x /= sizes[static_cast<std::size_t>(j)];
            centroids[static_cast<std::size_t>(j)] =
                Histogram(std::move(acc), samples.front().geometry());
        }
        run.reseeds +=
            detail::reseed_empty_clusters(samples, labels, dist, k, sizes, centroids);
        const double update_s = detail::seconds_since(t1);

        run.trace.push_back({1.0, changed, assign_s, update_s, objective});
        prev = labels;
    }

    run.assignments = labels;
    run.centroids = std::move(centroids);
    run.iterations = static_cast<int>(run.trace.size());
    run.final_distances = std::move(dist);
    return run;
}

// Wasserstein k-means: exact-OT assignment against each centroid, then an
// entropic barycenter update per cluster. Initial centroids come from the
// Euclidean k-means above (shared seed makes runs comparable across
// methods). The assignment's OT solves run in parallel; the result is
// independent of the thread count.
inline ClusteringRun wasserstein_kmeans(const std::vector<Histogram>& samples,
                                        const GroundCost& C, int k, int t_max,
                                        const BarycenterConfig& bary_cfg, std::uint64_t seed,
                                        int threads = 1) {
    const int q = static_cast<int>(samples.size());
    if (k < 1 || k > q) throw config_error("wasserstein_kmeans: need 1 <= k <= sample count");
    if (C.rows() != C.cols()) throw config_error("wasserstein_kmeans: cost matrix must be square");
    if (samples.front().size() != C.rows())
        throw config_error("wasserstein_kmeans: sample dimension does not match cost matrix");
    if (t_max < 1) throw config_error("wasserstein_kmeans: t_max must be >= 1");

    ClusteringRun init = euclidean_kmeans(samples, k, seed);
    std::vector<Histogram> centroids = std::move(init.centroids);
    std::vector<int> prev = std::move(init.assignments);

    ClusteringRun run;
    std::vector<int> labels(static_cast<std::size_t>(q), -1);
    std::vector<double> dist(static_cast<std::size_t>(q) * k);

    for (int t = 0; t < t_max; ++t) {
        const auto t0 = std::chrono::steady_clock::now();
        parallel_for(static_cast<std::size_t>(q) * k, threads, [&](std::size_t task) {
            const int i = static_cast<int>(task / static_cast<std::size_t>(k));
            const int j = static_cast<int>(task % static_cast<std::size_t>(k));
            dist[task] = solve_ot(samples[static_cast<std::size_t>(i)],
                                  centroids[static_cast<std::size_t>(j)], C)
                             .objective;
        });
        double objective = 0.0;
        int changed = 0;
        for (int i = 0; i < q; ++i) {
            const double* row = dist.data() + static_cast<std::size_t>(i) * k;
            labels[static_cast<std::size_t>(i)] = detail::row_argmin(row, k);
            objective += row[labels[static_cast<std::size_t>(i)]];
            if (labels[static_cast<std::size_t>(i)] != prev[static_cast<std::size_t>(i)]) ++changed;
        }
        const double assign_s = detail::seconds_since(t0);

        if (changed == 0) {
            run.trace.push_back({1.0, 0, assign_s, 0.0, objective});
            run.converged = true;
            break;
        }

        const auto t1 = std::chrono::steady_clock::now();
        std::vector<std::vector<Histogram>> members(static_cast<std::size_t>(k));
        std::vector<int> sizes(static_cast<std::size_t>(k), 0);
        for (int i = 0; i < q; ++i) {
            members[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])].push_back(
                samples[static_cast<std::size_t>(i)]);
            ++sizes[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
        }
        parallel_for(static_cast<std::size_t>(k), threads, [&](std::size_t j) {
            if (!members[j].empty())
                centroids[j] = barycenter(members[j], C, bary_cfg).value;
        });
        run.reseeds +=
            detail::reseed_empty_clusters(samples, labels, dist, k, sizes, centroids);
        const double update_s = detail::seconds_since(t1);

        run.trace.push_back({1.0, changed, assign_s, update_s, objective});
        prev = labels;
    }

    run.assignments = labels;
    run.centroids = std::move(centroids);
    run.iterations = static_cast<int>(run.trace.size());
    run.final_distances = std::move(dist);
    return run;
}

// Sparse-simplex-projection Wasserstein k-means. Each outer iteration
// projects samples and/or centroids onto the gamma(t)-sparse simplex,
// shrinks away the zeros, and runs the assignment step on the shrunk
// problems through index views of the ground cost; the centroid update
// always happens on the original samples at full dimension. With
// projections disabled the shrink alone changes nothing about the
// solution, so the run reproduces the baseline exactly.
inline ClusteringRun sspw_kmeans(const std::vector<Histogram>& samples, const GroundCost& C,
                                 const SspwConfig& cfg, int threads = 1) {
    const int q = static_cast<int>(samples.size());
    if (cfg.k < 1 || cfg.k > q) throw config_error("sspw_kmeans: need 1 <= k <= sample count");
    if (C.rows() != C.cols()) throw config_error("sspw_kmeans: cost matrix must be square");
    if (samples.front().size() != C.rows())
        throw config_error("sspw_kmeans: sample dimension does not match cost matrix");
    if (cfg.t_max < 1) throw config_error("sspw_kmeans: t_max must be >= 1");
    if (!(cfg.gamma_min > 0.0) || cfg.gamma_min > 1.0)
        throw config_error("sspw_kmeans: gamma_min must be in (0, 1]");

    const int k = cfg.k;
    ClusteringRun init = euclidean_kmeans(samples, k, cfg.seed);
    std::vector<Histogram> centroids = std::move(init.centroids);
    std::vector<int> prev = std::move(init.assignments);

    ClusteringRun run;
    std::vector<int> labels(static_cast<std::size_t>(q), -1);
    std::vector<double> dist(static_cast<std::size_t>(q) * k);

    // Shrunk sample forms, recomputed when gamma changes; with the FIX
    // schedule the t = 0 projections are reused on every later iteration.
    std::vector<SparseHistogram> samples_shrunk;
    std::vector<Histogram> samples_dense; // shrink disabled path
    double cached_gamma = -1.0;

    for (int t = 0; t < cfg.t_max; ++t) {
        const double gamma = gamma_schedule(cfg.schedule, cfg.gamma_min, cfg.t_max, t);

        const auto t0 = std::chrono::steady_clock::now();
        const bool sample_cache_valid =
            cached_gamma >= 0.0 && (!cfg.project_samples || gamma == cached_gamma);
        if (!sample_cache_valid) {
            samples_shrunk.clear();
            samples_dense.clear();
            for (int i = 0; i < q; ++i) {
                Histogram h = cfg.project_samples
                                  ? sparse_simplex_project(samples[static_cast<std::size_t>(i)], gamma)
                                        .projected
                                  : samples[static_cast<std::size_t>(i)];
                if (cfg.shrink_enabled)
                    samples_shrunk.push_back(shrink_vector(h));
                else
                    samples_dense.push_back(std::move(h));
            }
            cached_gamma = gamma;
        }

        std::vector<SparseHistogram> cents_shrunk;
        std::vector<Histogram> cents_dense;
        for (int j = 0; j < k; ++j) {
            Histogram h = cfg.project_centroids
                              ? sparse_simplex_project(centroids[static_cast<std::size_t>(j)], gamma)
                                    .projected
                              : centroids[static_cast<std::size_t>(j)];
            if (cfg.shrink_enabled)
                cents_shrunk.push_back(shrink_vector(h));
            else
                cents_dense.push_back(std::move(h));
        }

        parallel_for(static_cast<std::size_t>(q) * k, threads, [&](std::size_t task) {
            const int i = static_cast<int>(task / static_cast<std::size_t>(k));
            const int j = static_cast<int>(task % static_cast<std::size_t>(k));
            if (cfg.shrink_enabled) {
                const SparseHistogram& si = samples_shrunk[static_cast<std::size_t>(i)];
                const SparseHistogram& cj = cents_shrunk[static_cast<std::size_t>(j)];
                const CostView view(C, si.support(), cj.support());
                dist[task] = solve_ot(si, cj, view).objective;
            } else {
                SolveOptions opt;
                opt.drop_zero_marginals = false;
                auto cost = [&](int r, int c) { return C(r, c); };
                dist[task] = solve_transport(
                                 std::span<const double>(
                                     samples_dense[static_cast<std::size_t>(i)].weights()),
                                 std::span<const double>(
                                     cents_dense[static_cast<std::size_t>(j)].weights()),
                                 cost, opt)
                                 .objective;
            }
        });

        double objective = 0.0;
        int changed = 0;
        for (int i = 0; i < q; ++i) {
            const double* row = dist.data() + static_cast<std::size_t>(i) * k;
            labels[static_cast<std::size_t>(i)] = detail::row_argmin(row, k);
            objective += row[labels[static_cast<std::size_t>(i)]];
            if (labels[static_cast<std::size_t>(i)] != prev[static_cast<std::size_t>(i)]) ++changed;
        }
        const double assign_s = detail::seconds_since(t0);

        if (changed == 0) {
            run.trace.push_back({gamma, 0, assign_s, 0.0, objective});
            run.converged = true;
            break;
        }

        const auto t1 = std::chrono::steady_clock::now();
        std::vector<std::vector<Histogram>> members(static_cast<std::size_t>(k));
        std::vector<int> sizes(static_cast<std::size_t>(k), 0);
        for (int i = 0; i < q; ++i) {
            members[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])].push_back(
                samples[static_cast<std::size_t>(i)]);
            ++sizes[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
        }
        parallel_for(static_cast<std::size_t>(k), threads, [&](std::size_t j) {
            if (!members[j].empty())
                centroids[j] = barycenter(members[j], C, cfg.barycenter_cfg).value;
        });
        run.reseeds +=
            detail::reseed_empty_clusters(samples, labels, dist, k, sizes, centroids);
        const double update_s = detail::seconds_since(t1);

        run.trace.push_back({gamma, changed, assign_s, update_s, objective});
        prev = labels;
    }

    run.assignments = labels;
    run.centroids = std::move(centroids);
    run.iterations = static_cast<int>(run.trace.size());
    run.final_distances = std::move(dist);
    return run;
}

} // namespace sspw
