#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "sspw/errors.hpp"

namespace sspw {

struct MetricsReport {
    double purity = 0.0;
    double nmi = 0.0;
    double accuracy = 0.0;
    double wall_time_s = 0.0;
    std::vector<std::pair<double, double>> per_iteration; // (assign_s, update_s)
};

namespace detail {

inline std::vector<std::vector<long>> contingency(std::span<const int> predicted,
                                                  std::span<const int> truth, int& kp, int& kt) {
    if (predicted.size() != truth.size() || predicted.empty())
        throw config_error("metrics: label vectors empty or of different length");
    kp = 0;
    kt = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] < 0 || truth[i] < 0)
            throw config_error("metrics: negative label");
        kp = std::max(kp, predicted[i] + 1);
        kt = std::max(kt, truth[i] + 1);
    }
    std::vector<std::vector<long>> table(static_cast<std::size_t>(kp),
                                         std::vector<long>(static_cast<std::size_t>(kt), 0));
    for (std::size_t i = 0; i < predicted.size(); ++i)
        ++table[static_cast<std::size_t>(predicted[i])][static_cast<std::size_t>(truth[i])];
    return table;
}

// Minimum-cost perfect matching on a square cost matrix, O(n^3) potentials
// formulation. Returns the column matched to each row.
inline std::vector<int> hungarian_min(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    const double INF = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> match(static_cast<std::size_t>(n) + 1, 0); // match[col] = row, 1-based
    std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);

    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, INF);
        std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const int i0 = match[static_cast<std::size_t>(j0)];
            double delta = INF;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                                   u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0);
    }

    std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= n; ++j)
        if (match[static_cast<std::size_t>(j)] > 0)
            row_to_col[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
    return row_to_col;
}

} // namespace detail

// Fraction of samples covered by the majority true class of their cluster.
inline double purity(std::span<const int> predicted, std::span<const int> truth) {
    int kp, kt;
    const auto table = detail::contingency(predicted, truth, kp, kt);
    long hits = 0;
    for (const auto& row : table) hits += *std::max_element(row.begin(), row.end());
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

// Normalized mutual information with geometric-mean normalization,
// I(P;T) / sqrt(H(P) H(T)). A partition with zero entropy scores 1 against
// itself (both single-block) and 0 against anything else.
inline double nmi(std::span<const int> predicted, std::span<const int> truth) {
    int kp, kt;
    const auto table = detail::contingency(predicted, truth, kp, kt);
    const double q = static_cast<double>(predicted.size());

    std::vector<double> pp(static_cast<std::size_t>(kp), 0.0), pt(static_cast<std::size_t>(kt), 0.0);
    for (int i = 0; i < kp; ++i)
        for (int j = 0; j < kt; ++j) {
            const double pij = static_cast<double>(table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) / q;
            pp[static_cast<std::size_t>(i)] += pij;
            pt[static_cast<std::size_t>(j)] += pij;
        }

    double hp = 0.0, ht = 0.0, mi = 0.0;
    for (double x : pp)
        if (x > 0.0) hp -= x * std::log(x);
    for (double x : pt)
        if (x > 0.0) ht -= x * std::log(x);
    for (int i = 0; i < kp; ++i)
        for (int j = 0; j < kt; ++j) {
            const double pij = static_cast<double>(table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) / q;
            if (pij > 0.0)
                mi += pij * std::log(pij / (pp[static_cast<std::size_t>(i)] * pt[static_cast<std::size_t>(j)]));
        }

    if (hp == 0.0 && ht == 0.0) return 1.0; // both one block: identical partitions
    if (hp == 0.0 || ht == 0.0) return 0.0;
    return std::clamp(mi / std::sqrt(hp * ht), 0.0, 1.0);
}

// Best one-to-one cluster-to-class relabeling, scored as the fraction of
// correctly labeled samples. The matching is a Hungarian assignment on the
// negated contingency table padded to square.
inline double accuracy(std::span<const int> predicted, std::span<const int> truth) {
    int kp, kt;
    const auto table = detail::contingency(predicted, truth, kp, kt);
    const int k = std::max(kp, kt);
    std::vector<std::vector<double>> cost(static_cast<std::size_t>(k),
                                          std::vector<double>(static_cast<std::size_t>(k), 0.0));
    for (int i = 0; i < kp; ++i)
        for (int j = 0; j < kt; ++j)
            cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                -static_cast<double>(table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    const auto row_to_col = detail::hungarian_min(cost);
    long hits = 0;
    for (int i = 0; i < kp; ++i) {
        const int j = row_to_col[static_cast<std::size_t>(i)];
        if (j >= 0 && j < kt) hits += table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

} // namespace sspw
