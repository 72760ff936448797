#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "sspw/barycenter.hpp"
#include "sspw/random.hpp"

using namespace sspw;

namespace {

GeometryPtr line_geometry(int n) {
    std::vector<double> centers(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) centers[static_cast<std::size_t>(i)] = i;
    return make_line_geometry(std::move(centers));
}

Histogram random_simplex_point(int n, Rng& rng, GeometryPtr geom) {
    std::vector<double> w(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (double& x : w) {
        x = -std::log(1.0 - rng.uniform());
        sum += x;
    }
    for (double& x : w) x /= sum;
    return Histogram(std::move(w), std::move(geom));
}

double l1_distance(const Histogram& a, const Histogram& b) {
    double d = 0.0;
    for (int i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
    return d;
}

} // namespace

TEST_CASE("single member is a fixed point at small epsilon") {
    const auto g = line_geometry(8);
    const GroundCost C = build_ground_cost(*g, *g, 2.0);
    Rng rng(2);
    const Histogram member = random_simplex_point(8, rng, g);
    BarycenterConfig cfg{1e-3 * median_positive_cost(C), 2000, 1e-10};
    const BarycenterResult r = barycenter({member}, C, cfg);
    CHECK(l1_distance(r.value, member) <= 1e-6);
}

TEST_CASE("identical members reproduce the member") {
    const auto g = line_geometry(12);
    const GroundCost C = build_ground_cost(*g, *g, 2.0);
    Rng rng(3);
    const Histogram member = random_simplex_point(12, rng, g);
    BarycenterConfig cfg{1e-3 * median_positive_cost(C), 2000, 1e-10};
    const BarycenterResult r = barycenter({member, member, member}, C, cfg);
    CHECK(l1_distance(r.value, member) <= 1e-6);
}

TEST_CASE("two point masses at bins 0 and 2 peak at the midpoint bin") {
    const auto g = line_geometry(3);
    const GroundCost C = build_ground_cost(*g, *g, 2.0);
    const Histogram d0({1.0, 0.0, 0.0}, g);
    const Histogram d2({0.0, 0.0, 1.0}, g);
    BarycenterConfig cfg{1e-2 * median_positive_cost(C), 2000, 1e-10};
    const BarycenterResult r = barycenter({d0, d2}, C, cfg);
    CHECK(r.value[1] > r.value[0]);
    CHECK(r.value[1] > r.value[2]);
}

TEST_CASE("output is on the simplex") {
    Rng rng(5);
    const int n = 24;
    const auto g = line_geometry(n);
    const GroundCost C = build_ground_cost(*g, *g, 2.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Histogram> members;
        const int q = 1 + static_cast<int>(rng.uniform_index(5));
        for (int i = 0; i < q; ++i) members.push_back(random_simplex_point(n, rng, g));
        const BarycenterResult r = barycenter(members, C);
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            CHECK(r.value[i] >= 0.0);
            sum += r.value[i];
        }
        CHECK(std::abs(sum - 1.0) <= 1e-8);
    }
}

TEST_CASE("member order cannot change the output, bit for bit") {
    Rng rng(7);
    const int n = 16;
    const auto g = line_geometry(n);
    const GroundCost C = build_ground_cost(*g, *g, 2.0);
    std::vector<Histogram> members;
    for (int i = 0; i < 5; ++i) members.push_back(random_simplex_point(n, rng, g));
    const BarycenterResult fwd = barycenter(members, C);
    std::vector<Histogram> reversed(members.rbegin(), members.rend());
    const BarycenterResult rev = barycenter(reversed, C);
    for (int i = 0; i < n; ++i) CHECK(fwd.value[i] == rev.value[i]);
}

TEST_CASE("smoothing decreases as epsilon shrinks") {
    Rng rng(11);
    const int n = 16;
    const auto g = line_geometry(n);
    const GroundCost C = build_ground_cost(*g, *g, 2.0);
    const Histogram member = random_simplex_point(n, rng, g);
    const double med = median_positive_cost(C);
    double prev = std::numeric_limits<double>::infinity();
    for (const double scale : {1e-1, 1e-2, 1e-3}) {
        BarycenterConfig cfg{scale * med, 4000, 1e-11};
        const BarycenterResult r = barycenter({member}, C, cfg);
        const double d = l1_distance(r.value, member);
        CHECK(d <= prev + 1e-9);
        prev = d;
    }
}

TEST_CASE("empty member list raises the cluster-empty signal") {
    const auto g = line_geometry(4);
    const GroundCost C = build_ground_cost(*g, *g, 2.0);
    CHECK_THROWS_AS(barycenter({}, C), empty_cluster_error);
}

TEST_CASE("invalid configuration is rejected") {
    const auto g = line_geometry(4);
    const GroundCost C = build_ground_cost(*g, *g, 2.0);
    Rng rng(13);
    const Histogram m = random_simplex_point(4, rng, g);
    CHECK_THROWS_AS(barycenter({m}, C, BarycenterConfig{0.0, 100, 1e-7}), config_error);
    CHECK_THROWS_AS(barycenter({m}, C, BarycenterConfig{1.0, 0, 1e-7}), config_error);
    CHECK_THROWS_AS(barycenter({m}, C, BarycenterConfig{1.0, 100, 0.0}), config_error);
}

TEST_CASE("disjoint point masses at tiny epsilon fall back to the log domain") {
    const auto g = line_geometry(5);
    const GroundCost C = build_ground_cost(*g, *g, 2.0);
    const Histogram d0({1.0, 0.0, 0.0, 0.0, 0.0}, g);
    const Histogram d4({0.0, 0.0, 0.0, 0.0, 1.0}, g);
    BarycenterConfig cfg{1e-4 * median_positive_cost(C), 3000, 1e-10};
    const BarycenterResult r = barycenter({d0, d4}, C, cfg);
    CHECK(r.used_log_domain);
    // mass concentrates at the midpoint bin
    const int argmax = static_cast<int>(std::max_element(r.value.weights().begin(),
                                                         r.value.weights().end()) -
                                        r.value.weights().begin());
    CHECK(argmax == 2);
}
