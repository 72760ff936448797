#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "sspw/errors.hpp"
#include "sspw/histogram.hpp"

namespace sspw {

struct BarycenterConfig {
    double epsilon;       // entropic regularization, > 0
    int max_iters = 1000; // scaling rounds
    double tol = 1e-7;    // l1 change of the barycenter between rounds
};

// Scale-relative default: behavior stays uniform across geometries.
inline BarycenterConfig default_barycenter_config(const GroundCost& C) {
    return BarycenterConfig{1e-2 * median_positive_cost(C), 1000, 1e-7};
}

struct BarycenterResult {
    Histogram value;
    bool converged = false;
    int iterations = 0;
    bool used_log_domain = false; // diagnostics
};

namespace detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// One barycenter pass in the plain scaling domain. Returns false as soon
// as the iteration produces a non-finite value or a dead column that still
// carries target mass, in which case the caller retries in log domain.
inline bool ibp_scaling(const std::vector<const std::vector<double>*>& members,
                        const std::vector<double>& K, int n, const BarycenterConfig& cfg,
                        std::vector<double>& out, bool& converged, int& iterations) {
    const std::size_t q = members.size();
    std::vector<std::vector<double>> v(q, std::vector<double>(static_cast<std::size_t>(n), 1.0));
    std::vector<double> u(static_cast<std::size_t>(n));
    std::vector<double> ku(static_cast<std::size_t>(n));
    std::vector<double> log_acc(static_cast<std::size_t>(n));
    std::vector<double> p(static_cast<std::size_t>(n), 1.0 / n);
    std::vector<double> p_prev = p;
    std::vector<std::vector<double>> ktu(q, std::vector<double>(static_cast<std::size_t>(n)));

    converged = false;
    for (int it = 0; it < cfg.max_iters; ++it) {
        iterations = it + 1;
        std::fill(log_acc.begin(), log_acc.end(), 0.0);

        for (std::size_t s = 0; s < q; ++s) {
            const std::vector<double>& a = *members[s];
            const std::vector<double>& vs = v[s];
            // u = a ./ (K v)
            for (int r = 0; r < n; ++r) {
                const double* row = K.data() + static_cast<std::size_t>(r) * n;
                double acc = 0.0;
                for (int c = 0; c < n; ++c) acc += row[c] * vs[static_cast<std::size_t>(c)];
                const double ar = a[static_cast<std::size_t>(r)];
                if (ar > 0.0) {
                    if (!(acc > 0.0) || !std::isfinite(acc)) return false;
                    u[static_cast<std::size_t>(r)] = ar / acc;
                } else {
                    u[static_cast<std::size_t>(r)] = 0.0;
                }
            }
            // ku = K' u  (row-major sweep keeps this cache-friendly)
            std::fill(ku.begin(), ku.end(), 0.0);
            for (int r = 0; r < n; ++r) {
                const double ur = u[static_cast<std::size_t>(r)];
                if (ur == 0.0) continue;
                const double* row = K.data() + static_cast<std::size_t>(r) * n;
                for (int c = 0; c < n; ++c) ku[static_cast<std::size_t>(c)] += ur * row[c];
            }
            for (int c = 0; c < n; ++c) {
                const double x = ku[static_cast<std::size_t>(c)];
                if (!std::isfinite(x)) return false;
                if (x > 0.0)
                    log_acc[static_cast<std::size_t>(c)] += std::log(x);
                else
                    log_acc[static_cast<std::size_t>(c)] = kNegInf;
                ktu[s][static_cast<std::size_t>(c)] = x;
            }
        }

        // p = geometric mean of the member column marginals
        double psum = 0.0;
        for (int c = 0; c < n; ++c) {
            const double lp = log_acc[static_cast<std::size_t>(c)];
            p[static_cast<std::size_t>(c)] = (lp == kNegInf) ? 0.0 : std::exp(lp / static_cast<double>(q));
            psum += p[static_cast<std::size_t>(c)];
        }
        if (!(psum > 0.0) || !std::isfinite(psum)) return false;

        for (std::size_t s = 0; s < q; ++s) {
            for (int c = 0; c < n; ++c) {
                const double denom = ktu[s][static_cast<std::size_t>(c)];
                v[s][static_cast<std::size_t>(c)] =
                    denom > 0.0 ? p[static_cast<std::size_t>(c)] / denom : 0.0;
            }
        }

        double diff = 0.0;
        for (int c = 0; c < n; ++c)
            diff += std::abs(p[static_cast<std::size_t>(c)] / psum -
                             p_prev[static_cast<std::size_t>(c)]);
        for (int c = 0; c < n; ++c) p_prev[static_cast<std::size_t>(c)] = p[static_cast<std::size_t>(c)] / psum;
        if (diff < cfg.tol) {
            converged = true;
            break;
        }
    }
    out = p_prev;
    return true;
}

// Same iteration carried entirely in log space; slower but immune to
// under/overflow at small epsilon.
inline bool ibp_log_domain(const std::vector<const std::vector<double>*>& members,
                           const GroundCost& C, const BarycenterConfig& cfg,
                           std::vector<double>& out, bool& converged, int& iterations) {
    const int n = C.rows();
    const std::size_t q = members.size();
    const double inv_eps = 1.0 / cfg.epsilon;

    std::vector<double> logK(static_cast<std::size_t>(n) * n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            logK[static_cast<std::size_t>(r) * n + c] = -C(r, c) * inv_eps;

    std::vector<std::vector<double>> log_a(q, std::vector<double>(static_cast<std::size_t>(n)));
    for (std::size_t s = 0; s < q; ++s)
        for (int r = 0; r < n; ++r) {
            const double a = (*members[s])[static_cast<std::size_t>(r)];
            log_a[s][static_cast<std::size_t>(r)] = a > 0.0 ? std::log(a) : kNegInf;
        }

    std::vector<std::vector<double>> log_v(q, std::vector<double>(static_cast<std::size_t>(n), 0.0));
    std::vector<double> log_u(static_cast<std::size_t>(n));
    std::vector<std::vector<double>> colsum(q, std::vector<double>(static_cast<std::size_t>(n)));
    std::vector<double> log_p(static_cast<std::size_t>(n));
    std::vector<double> p(static_cast<std::size_t>(n));
    std::vector<double> p_prev(static_cast<std::size_t>(n), 1.0 / n);
    std::vector<double> tmp(static_cast<std::size_t>(n));

    auto lse = [&](const double* terms, int count) {
        double mx = kNegInf;
        for (int i = 0; i < count; ++i) mx = std::max(mx, terms[i]);
        if (mx == kNegInf) return kNegInf;
        double acc = 0.0;
        for (int i = 0; i < count; ++i) acc += std::exp(terms[i] - mx);
        return mx + std::log(acc);
    };

    converged = false;
    for (int it = 0; it < cfg.max_iters; ++it) {
        iterations = it + 1;
        for (std::size_t s = 0; s < q; ++s) {
            const std::vector<double>& lvs = log_v[s];
            // log u = log a - LSE_cols(logK + log v)
            for (int r = 0; r < n; ++r) {
                const double* row = logK.data() + static_cast<std::size_t>(r) * n;
                for (int c = 0; c < n; ++c)
                    tmp[static_cast<std::size_t>(c)] = row[c] + lvs[static_cast<std::size_t>(c)];
                const double denom = lse(tmp.data(), n);
                const double la = log_a[s][static_cast<std::size_t>(r)];
                log_u[static_cast<std::size_t>(r)] =
                    (la == kNegInf || denom == kNegInf) ? kNegInf : la - denom;
            }
            // column sums of diag(u) K in log space
            std::vector<double>& cs = colsum[s];
            for (int c = 0; c < n; ++c) cs[static_cast<std::size_t>(c)] = kNegInf;
            for (int r = 0; r < n; ++r) {
                const double lur = log_u[static_cast<std::size_t>(r)];
                if (lur == kNegInf) continue;
                const double* row = logK.data() + static_cast<std::size_t>(r) * n;
                for (int c = 0; c < n; ++c) {
                    const double term = lur + row[c];
                    double& cur = cs[static_cast<std::size_t>(c)];
                    // incremental log-sum-exp
                    if (term > cur) {
                        cur = cur == kNegInf ? term : term + std::log1p(std::exp(cur - term));
                    } else if (cur != kNegInf) {
                        cur = cur + std::log1p(std::exp(term - cur));
                    }
                }
            }
        }

        for (int c = 0; c < n; ++c) {
            double acc = 0.0;
            bool dead = false;
            for (std::size_t s = 0; s < q; ++s) {
                const double x = colsum[s][static_cast<std::size_t>(c)];
                if (x == kNegInf) {
                    dead = true;
                    break;
                }
                acc += x;
            }
            log_p[static_cast<std::size_t>(c)] = dead ? kNegInf : acc / static_cast<double>(q);
        }

        for (std::size_t s = 0; s < q; ++s)
            for (int c = 0; c < n; ++c) {
                const double lp = log_p[static_cast<std::size_t>(c)];
                const double x = colsum[s][static_cast<std::size_t>(c)];
                log_v[s][static_cast<std::size_t>(c)] =
                    (lp == kNegInf || x == kNegInf) ? kNegInf : lp - x;
            }

        // normalized p and convergence test
        double mx = kNegInf;
        for (int c = 0; c < n; ++c) mx = std::max(mx, log_p[static_cast<std::size_t>(c)]);
        if (mx == kNegInf) return false;
        double psum = 0.0;
        for (int c = 0; c < n; ++c) {
            const double lp = log_p[static_cast<std::size_t>(c)];
            p[static_cast<std::size_t>(c)] = lp == kNegInf ? 0.0 : std::exp(lp - mx);
            psum += p[static_cast<std::size_t>(c)];
        }
        double diff = 0.0;
        for (int c = 0; c < n; ++c) {
            p[static_cast<std::size_t>(c)] /= psum;
            diff += std::abs(p[static_cast<std::size_t>(c)] - p_prev[static_cast<std::size_t>(c)]);
        }
        p_prev = p;
        if (diff < cfg.tol) {
            converged = true;
            break;
        }
    }
    out = p_prev;
    return true;
}

} // namespace detail

// Wasserstein barycenter of the member histograms under uniform weights,
// by iterative Bregman projections against the entropic kernel
// K = exp(-C / epsilon). Members are processed in a canonical order
// (lexicographic by weights), so permuting the input list cannot change a
// single bit of the output. The computation runs in the plain scaling
// domain and falls back to a log-domain pass whenever scaling under- or
// overflows; the fallback trigger is deterministic.
//
// The barycenter always lives on the full original support: shrunk or
// projected forms are never involved here.
inline BarycenterResult barycenter(const std::vector<Histogram>& members, const GroundCost& C,
                                   const BarycenterConfig& cfg) {
    if (members.empty()) throw empty_cluster_error("barycenter: empty member list");
    if (C.rows() != C.cols()) throw config_error("barycenter: cost matrix must be square");
    if (!(cfg.epsilon > 0.0)) throw config_error("barycenter: epsilon must be > 0");
    if (cfg.max_iters < 1) throw config_error("barycenter: max_iters must be >= 1");
    if (!(cfg.tol > 0.0)) throw config_error("barycenter: tol must be > 0");
    const int n = C.rows();
    for (const Histogram& h : members)
        if (h.size() != n) throw config_error("barycenter: member dimension mismatch");

    // Canonical member order: output independent of list order, bit for bit.
    std::vector<const std::vector<double>*> ordered;
    ordered.reserve(members.size());
    for (const Histogram& h : members) ordered.push_back(&h.weights());
    std::sort(ordered.begin(), ordered.end(),
              [](const std::vector<double>* x, const std::vector<double>* y) { return *x < *y; });

    std::vector<double> out;
    bool converged = false;
    int iterations = 0;
    bool used_log = false;

    std::vector<double> K(static_cast<std::size_t>(n) * n);
    const double inv_eps = 1.0 / cfg.epsilon;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            K[static_cast<std::size_t>(r) * n + c] = std::exp(-C(r, c) * inv_eps);

    if (!detail::ibp_scaling(ordered, K, n, cfg, out, converged, iterations)) {
        used_log = true;
        if (!detail::ibp_log_domain(ordered, C, cfg, out, converged, iterations))
            throw numeric_error("barycenter: iteration degenerated to the zero vector");
    }

    double sum = 0.0;
    for (double x : out) sum += x;
    if (!(sum > 0.0)) throw numeric_error("barycenter: zero mass output");
    for (double& x : out) x /= sum;

    return BarycenterResult{Histogram(std::move(out), members.front().geometry()), converged,
                            iterations, used_log};
}

inline BarycenterResult barycenter(const std::vector<Histogram>& members, const GroundCost& C) {
    return barycenter(members, C, default_barycenter_config(C));
}

} // namespace sspw
