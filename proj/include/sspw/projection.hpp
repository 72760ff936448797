#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "sspw/errors.hpp"
#include "sspw/histogram.hpp"

namespace sspw {

struct ProjectionResult {
    Histogram projected;      // dense, same dimension, at most kappa nonzeros
    int kappa;                // sparsity target floor(n * gamma), at least 1
    std::vector<int> support; // indices carrying positive weight, ascending
};

// Greedy sparse simplex projection: keep the kappa largest entries of beta
// and replace them by the exact Euclidean projection of that sub-vector
// onto the kappa-simplex (sorted-threshold rule with clipping); everything
// off the retained support becomes zero. Ties in the top-kappa selection go
// to the lower index, so results are deterministic.
//
// For beta already on the simplex the shift is tau = (1 - sum(beta|S))/kappa
// whenever no clipping occurs, which keeps the output on the simplex; a
// projection at gamma = 1 reproduces beta bit-for-bit.
inline ProjectionResult sparse_simplex_project(const Histogram& beta, double gamma) {
    if (!(gamma > 0.0) || gamma > 1.0)
        throw config_error("sparse_simplex_project: gamma must be in (0, 1]");
    const int n = beta.size();
    const int kappa = std::max(1, static_cast<int>(std::floor(n * gamma)));
    const std::vector<double>& w = beta.weights();

    // A simplex point with at most kappa nonzeros already lies in the
    // feasible set, so the projection is the identity. Returning the input
    // bit-for-bit makes the operator exactly idempotent and makes gamma = 1
    // a true no-op.
    int nnz = 0;
    for (double x : w)
        if (x > 0.0) ++nnz;
    if (nnz <= kappa) {
        std::vector<int> support;
        support.reserve(static_cast<std::size_t>(nnz));
        for (int i = 0; i < n; ++i)
            if (w[static_cast<std::size_t>(i)] > 0.0) support.push_back(i);
        return ProjectionResult{beta, kappa, std::move(support)};
    }

    // Indices ordered by (weight desc, index asc); the first kappa form S*.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (w[a] != w[b]) return w[a] > w[b];
        return a < b;
    });

    // Exact projection of the retained entries onto the kappa-simplex.
    // The retained values arrive already sorted descending.
    double prefix = 0.0;
    double tau = 0.0;
    int rho = 0;
    for (int r = 0; r < kappa; ++r) {
        const double val = w[order[r]];
        prefix += val;
        const double candidate = (1.0 - prefix) / (r + 1);
        if (val + candidate > 0.0) {
            rho = r + 1;
            tau = candidate;
        }
    }

    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    std::vector<int> support;
    support.reserve(static_cast<std::size_t>(kappa));
    for (int r = 0; r < rho; ++r) {
        const int idx = order[r];
        const double v = w[idx] + tau;
        if (v > 0.0) {
            out[static_cast<std::size_t>(idx)] = v;
            support.push_back(idx);
        }
    }
    std::sort(support.begin(), support.end());

    return ProjectionResult{Histogram(std::move(out), beta.geometry()), kappa,
                            std::move(support)};
}

// Drop zero entries, keeping the surviving weights bit-exact.
inline SparseHistogram shrink_vector(const Histogram& h) {
    std::vector<int> support;
    std::vector<double> weights;
    const std::vector<double>& w = h.weights();
    for (int i = 0; i < h.size(); ++i) {
        if (w[static_cast<std::size_t>(i)] > 0.0) {
            support.push_back(i);
            weights.push_back(w[static_cast<std::size_t>(i)]);
        }
    }
    return SparseHistogram(std::move(support), std::move(weights), h.size());
}

// Materialized submatrix C[row_support, col_support].
inline GroundCost shrink_cost(const GroundCost& C, std::span<const int> row_support,
                              std::span<const int> col_support) {
    const int m = static_cast<int>(row_support.size());
    const int n = static_cast<int>(col_support.size());
    if (m == 0 || n == 0) throw config_error("shrink_cost: empty support");
    for (int r : row_support)
        if (r < 0 || r >= C.rows()) throw config_error("shrink_cost: row index out of range");
    for (int c : col_support)
        if (c < 0 || c >= C.cols()) throw config_error("shrink_cost: col index out of range");
    std::vector<double> values(static_cast<std::size_t>(m) * n);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < n; ++b)
            values[static_cast<std::size_t>(a) * n + b] = C(row_support[a], col_support[b]);
    return GroundCost(std::move(values), m, n, C.power());
}

} // namespace sspw
