#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sspw/errors.hpp"
#include "sspw/histogram.hpp"

namespace sspw {

struct PlanEntry {
    int row;
    int col;
    double mass;
};

// Optimal coupling between two histograms: sparse entries (a basic feasible
// solution has at most m + n - 1 of them), plus the transport objective.
struct TransportPlan {
    std::vector<PlanEntry> entries;
    double objective = 0.0;
    int row_dim = 0;
    int col_dim = 0;
    int pivots = 0; // solver diagnostics
};

enum class InitRule { vogel, northwest };

struct SolveOptions {
    // Rows/columns with zero mass are removed before solving and the plan
    // re-indexed afterwards. Disable to force the solver through the
    // full-size problem (used to time unshrunk solves).
    bool drop_zero_marginals = true;
    // Basic cells at or below this mass are dropped from the final plan.
    double mass_prune = 1e-14;
    // Initial basis rule. North-west is the cheap staircase and wins on
    // the histogram workloads here; Vogel starts nearer the optimum at an
    // O(mn) setup cost.
    InitRule init = InitRule::northwest;
};

// Reads a submatrix of a ground cost through index maps, so shrinking the
// problem for a sample/centroid pair costs no copies.
class CostView {
public:
    CostView(const GroundCost& C, std::span<const int> rows, std::span<const int> cols)
        : C_(&C), rows_(rows), cols_(cols) {
        for (int r : rows_)
            if (r < 0 || r >= C.rows()) throw config_error("CostView: row index out of range");
        for (int c : cols_)
            if (c < 0 || c >= C.cols()) throw config_error("CostView: col index out of range");
    }

    double operator()(int u, int v) const {
        return (*C_)(rows_[static_cast<std::size_t>(u)], cols_[static_cast<std::size_t>(v)]);
    }
    int rows() const { return static_cast<int>(rows_.size()); }
    int cols() const { return static_cast<int>(cols_.size()); }

private:
    const GroundCost* C_;
    std::span<const int> rows_;
    std::span<const int> cols_;
};

namespace detail {

// Transportation simplex (network simplex specialized to the bipartite
// transportation polytope). The basis is a spanning tree over the m row
// nodes and n column nodes, held as m + n - 1 arc slots plus per-node
// adjacency and parent pointers rooted at row 0. Entering arcs are found
// by block pricing over row blocks; the pivot cycle comes from an LCA walk
// over the parent pointers, and only the subtree cut off by the leaving
// arc has its potentials shifted. A run of degenerate pivots switches the
// solve permanently to Bland's rule (first negative reduced cost in
// lexicographic arc order, leaving arc of smallest index among ratio
// ties), which cannot cycle. A hard pivot cap turns an unexpected stall
// into a diagnosable error instead of a hang.
template <class CostFn>
class TransportSimplex {
public:
    TransportSimplex(std::span<const double> a, std::span<const double> b, const CostFn& cost)
        : a_(a), b_(b), cost_(cost), m_(static_cast<int>(a.size())),
          n_(static_cast<int>(b.size())) {}

    void solve(InitRule init = InitRule::northwest) {
        if (init == InitRule::vogel)
            init_vogel();
        else
            init_northwest();
        build_adjacency();

        double max_cost = 0.0;
        for (int i = 0; i < m_; ++i)
            for (int j = 0; j < n_; ++j) max_cost = std::max(max_cost, cost_(i, j));
        tol_ = 1e-11 * std::max(1.0, max_cost);

        u_.assign(static_cast<std::size_t>(m_), 0.0);
        v_.assign(static_cast<std::size_t>(n_), 0.0);
        visited_.assign(static_cast<std::size_t>(m_ + n_), 0);
        parent_node_.assign(static_cast<std::size_t>(m_ + n_), -1);
        parent_arc_.assign(static_cast<std::size_t>(m_ + n_), -1);
        stack_.reserve(static_cast<std::size_t>(m_ + n_));
        build_tree();

        const long pivot_cap = 200L * (m_ + n_) + 20000L;
        const int stall_limit = 2 * (m_ + n_) + 16;
        int degenerate_run = 0;
        block_rows_ = std::max(1, m_ / 16);

        for (;;) {
            int ei, ej;
            if (!price(ei, ej)) break; // optimal
            const double theta = pivot(ei, ej);
            ++pivots_;
            if (theta < 1e-15) {
                if (++degenerate_run > stall_limit) bland_ = true;
            } else {
                degenerate_run = 0;
            }
            if (pivots_ > pivot_cap)
                throw numeric_error("transportation simplex: pivot cap exceeded (m=" +
                                    std::to_string(m_) + ", n=" + std::to_string(n_) +
                                    ", pivots=" + std::to_string(pivots_) + ")");
        }
    }

    int pivots() const { return pivots_; }
    int basis_size() const { return static_cast<int>(arc_row_.size()); }
    int arc_row(int s) const { return arc_row_[static_cast<std::size_t>(s)]; }
    int arc_col(int s) const { return arc_col_[static_cast<std::size_t>(s)]; }
    double arc_mass(int s) const { return arc_mass_[static_cast<std::size_t>(s)]; }

private:
    // Staircase initial basis: exactly m + n - 1 allocations, degenerate
    // zero allocations included, which always form a spanning tree.
    void init_northwest() {
        arc_row_.reserve(static_cast<std::size_t>(m_ + n_ - 1));
        arc_col_.reserve(static_cast<std::size_t>(m_ + n_ - 1));
        arc_mass_.reserve(static_cast<std::size_t>(m_ + n_ - 1));
        int i = 0, j = 0;
        double rem_a = a_[0], rem_b = b_[0];
        for (;;) {
            const double t = std::min(rem_a, rem_b);
            arc_row_.push_back(i);
            arc_col_.push_back(j);
            arc_mass_.push_back(t);
            rem_a -= t;
            rem_b -= t;
            if (i == m_ - 1 && j == n_ - 1) break;
            if (rem_a <= rem_b && i < m_ - 1) {
                ++i;
                rem_a = a_[static_cast<std::size_t>(i)];
            } else if (j < n_ - 1) {
                ++j;
                rem_b = b_[static_cast<std::size_t>(j)];
            } else {
                ++i;
                rem_a = a_[static_cast<std::size_t>(i)];
            }
        }
    }

    // Vogel's approximation: repeatedly allocate in the row or column with
    // the largest regret (gap between its two cheapest active cells), then
    // complete the forest of allocations to a spanning tree with zero-mass
    // arcs. Every tie breaks toward rows and lower indices.
    void init_vogel() {
        std::vector<double> rem_a(a_.begin(), a_.end());
        std::vector<double> rem_b(b_.begin(), b_.end());
        std::vector<char> row_active(static_cast<std::size_t>(m_), 1);
        std::vector<char> col_active(static_cast<std::size_t>(n_), 1);
        int active_rows = m_, active_cols = n_;

        struct Min2 {
            double c1 = 0.0, c2 = 0.0;
            int j1 = -1, j2 = -1;
        };
        std::vector<Min2> rmin(static_cast<std::size_t>(m_)), cmin(static_cast<std::size_t>(n_));
        const double INF = std::numeric_limits<double>::infinity();

        auto scan_row = [&](int i) {
            Min2 mm{INF, INF, -1, -1};
            for (int j = 0; j < n_; ++j) {
                if (!col_active[static_cast<std::size_t>(j)]) continue;
                const double c = cost_(i, j);
                if (c < mm.c1) {
                    mm.c2 = mm.c1;
                    mm.j2 = mm.j1;
                    mm.c1 = c;
                    mm.j1 = j;
                } else if (c < mm.c2) {
                    mm.c2 = c;
                    mm.j2 = j;
                }
            }
            rmin[static_cast<std::size_t>(i)] = mm;
        };
        auto scan_col = [&](int j) {
            Min2 mm{INF, INF, -1, -1};
            for (int i = 0; i < m_; ++i) {
                if (!row_active[static_cast<std::size_t>(i)]) continue;
                const double c = cost_(i, j);
                if (c < mm.c1) {
                    mm.c2 = mm.c1;
                    mm.j2 = mm.j1;
                    mm.c1 = c;
                    mm.j1 = i;
                } else if (c < mm.c2) {
                    mm.c2 = c;
                    mm.j2 = i;
                }
            }
            cmin[static_cast<std::size_t>(j)] = mm;
        };
        for (int i = 0; i < m_; ++i) scan_row(i);
        for (int j = 0; j < n_; ++j) scan_col(j);

        arc_row_.reserve(static_cast<std::size_t>(m_ + n_ - 1));
        arc_col_.reserve(static_cast<std::size_t>(m_ + n_ - 1));
        arc_mass_.reserve(static_cast<std::size_t>(m_ + n_ - 1));

        auto allocate = [&](int i, int j) {
            const double t = std::min(rem_a[static_cast<std::size_t>(i)],
                                      rem_b[static_cast<std::size_t>(j)]);
            arc_row_.push_back(i);
            arc_col_.push_back(j);
            arc_mass_.push_back(t);
            rem_a[static_cast<std::size_t>(i)] -= t;
            rem_b[static_cast<std::size_t>(j)] -= t;
        };

        while (active_rows > 1 && active_cols > 1) {
            double best_pen = -1.0;
            bool best_is_row = true;
            int best_idx = -1;
            for (int i = 0; i < m_; ++i) {
                if (!row_active[static_cast<std::size_t>(i)]) continue;
                const double pen = rmin[static_cast<std::size_t>(i)].c2 -
                                   rmin[static_cast<std::size_t>(i)].c1;
                if (pen > best_pen) {
                    best_pen = pen;
                    best_is_row = true;
                    best_idx = i;
                }
            }
            for (int j = 0; j < n_; ++j) {
                if (!col_active[static_cast<std::size_t>(j)]) continue;
                const double pen = cmin[static_cast<std::size_t>(j)].c2 -
                                   cmin[static_cast<std::size_t>(j)].c1;
                if (pen > best_pen) {
                    best_pen = pen;
                    best_is_row = false;
                    best_idx = j;
                }
            }

            int i, j;
            if (best_is_row) {
                i = best_idx;
                j = rmin[static_cast<std::size_t>(i)].j1;
            } else {
                j = best_idx;
                i = cmin[static_cast<std::size_t>(j)].j1;
            }
            allocate(i, j);

            if (rem_a[static_cast<std::size_t>(i)] <= rem_b[static_cast<std::size_t>(j)]) {
                row_active[static_cast<std::size_t>(i)] = 0;
                --active_rows;
                for (int jj = 0; jj < n_; ++jj) {
                    if (!col_active[static_cast<std::size_t>(jj)]) continue;
                    const Min2& mm = cmin[static_cast<std::size_t>(jj)];
                    if (mm.j1 == i || mm.j2 == i) scan_col(jj);
                }
            } else {
                col_active[static_cast<std::size_t>(j)] = 0;
                --active_cols;
                for (int ii = 0; ii < m_; ++ii) {
                    if (!row_active[static_cast<std::size_t>(ii)]) continue;
                    const Min2& mm = rmin[static_cast<std::size_t>(ii)];
                    if (mm.j1 == j || mm.j2 == j) scan_row(ii);
                }
            }
        }

        // One line left in one direction: drain it in index order.
        if (active_rows == 1) {
            int i = 0;
            while (!row_active[static_cast<std::size_t>(i)]) ++i;
            for (int j = 0; j < n_; ++j)
                if (col_active[static_cast<std::size_t>(j)]) allocate(i, j);
        } else {
            int j = 0;
            while (!col_active[static_cast<std::size_t>(j)]) ++j;
            for (int i = 0; i < m_; ++i)
                if (row_active[static_cast<std::size_t>(i)]) allocate(i, j);
        }

        complete_spanning_tree();
    }

    // Union-find completion: the Vogel allocations form a forest; add
    // zero-mass arcs (cheapest first, lexicographic ties) until the basis
    // spans all m + n nodes with exactly m + n - 1 arcs.
    void complete_spanning_tree() {
        std::vector<int> parent(static_cast<std::size_t>(m_ + n_));
        for (int x = 0; x < m_ + n_; ++x) parent[static_cast<std::size_t>(x)] = x;
        auto find = [&](int x) {
            while (parent[static_cast<std::size_t>(x)] != x) {
                parent[static_cast<std::size_t>(x)] =
                    parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
                x = parent[static_cast<std::size_t>(x)];
            }
            return x;
        };
        for (std::size_t s = 0; s < arc_row_.size(); ++s)
            parent[static_cast<std::size_t>(find(arc_row_[s]))] = find(m_ + arc_col_[s]);

        while (static_cast<int>(arc_row_.size()) < m_ + n_ - 1) {
            double best = std::numeric_limits<double>::infinity();
            int bi = -1, bj = -1;
            for (int i = 0; i < m_; ++i) {
                const int ri = find(i);
                for (int j = 0; j < n_; ++j) {
                    if (ri == find(m_ + j)) continue;
                    const double c = cost_(i, j);
                    if (c < best) {
                        best = c;
                        bi = i;
                        bj = j;
                    }
                }
            }
            arc_row_.push_back(bi);
            arc_col_.push_back(bj);
            arc_mass_.push_back(0.0);
            parent[static_cast<std::size_t>(find(bi))] = find(m_ + bj);
        }
    }

    void build_adjacency() {
        adj_.assign(static_cast<std::size_t>(m_ + n_), {});
        for (int s = 0; s < basis_size(); ++s) {
            adj_[static_cast<std::size_t>(arc_row_[s])].push_back(s);
            adj_[static_cast<std::size_t>(m_ + arc_col_[s])].push_back(s);
        }
    }

    // Potentials and parent pointers for the initial basis, rooted at row 0.
    void build_tree() {
        ++epoch_;
        stack_.clear();
        stack_.push_back(0);
        visited_[0] = epoch_;
        u_[0] = 0.0;
        parent_node_[0] = -1;
        parent_arc_[0] = -1;
        while (!stack_.empty()) {
            const int x = stack_.back();
            stack_.pop_back();
            for (const int s : adj_[static_cast<std::size_t>(x)]) {
                const int i = arc_row_[static_cast<std::size_t>(s)];
                const int j = arc_col_[static_cast<std::size_t>(s)];
                const int other = (x < m_) ? m_ + j : i;
                if (visited_[static_cast<std::size_t>(other)] == epoch_) continue;
                visited_[static_cast<std::size_t>(other)] = epoch_;
                if (x < m_)
                    v_[static_cast<std::size_t>(j)] = cost_(i, j) - u_[static_cast<std::size_t>(i)];
                else
                    u_[static_cast<std::size_t>(i)] = cost_(i, j) - v_[static_cast<std::size_t>(j)];
                parent_node_[static_cast<std::size_t>(other)] = x;
                parent_arc_[static_cast<std::size_t>(other)] = s;
                stack_.push_back(other);
            }
        }
    }

    // Entering arc search. Returns false when no reduced cost is below
    // -tol, i.e. the current basis is optimal. Violating arcs are harvested
    // a row block at a time into a candidate list ordered by reduced cost;
    // later pivots drain the list, re-checking each candidate against the
    // current potentials, so one scan pays for several pivots.
    bool price(int& ei, int& ej) {
        if (bland_) {
            for (int i = 0; i < m_; ++i) {
                const double ui = u_[static_cast<std::size_t>(i)];
                for (int j = 0; j < n_; ++j) {
                    if (cost_(i, j) - ui - v_[static_cast<std::size_t>(j)] < -tol_) {
                        ei = i;
                        ej = j;
                        return true;
                    }
                }
            }
            return false;
        }

        int rows_scanned = 0;
        int r = cursor_row_;
        while (rows_scanned < m_) {
            const int block = std::min(block_rows_, m_ - rows_scanned);
            double best_rc = -tol_;
            int best_i = -1, best_j = -1;
            for (int k = 0; k < block; ++k) {
                const int i = (r + k) % m_;
                const double ui = u_[static_cast<std::size_t>(i)];
                for (int j = 0; j < n_; ++j) {
                    const double rc = cost_(i, j) - ui - v_[static_cast<std::size_t>(j)];
                    if (rc < best_rc) {
                        best_rc = rc;
                        best_i = i;
                        best_j = j;
                    }
                }
            }
            rows_scanned += block;
            r = (r + block) % m_;
            if (best_i >= 0) {
                cursor_row_ = r;
                ei = best_i;
                ej = best_j;
                return true;
            }
        }
        return false;
    }

    // Brings arc (ei, ej) into the basis. Returns theta, the mass shifted
    // around the unique tree cycle.
    double pivot(int ei, int ej) {
        const int a0 = ei, b0 = m_ + ej;
        const double rc = cost_(ei, ej) - u_[static_cast<std::size_t>(ei)] -
                          v_[static_cast<std::size_t>(ej)];

        // Cycle discovery: walk both endpoints toward the root with
        // collision marking; the first touch of the other walk is the LCA.
        ++epoch_;
        visited_[static_cast<std::size_t>(a0)] = epoch_;
        visited_[static_cast<std::size_t>(b0)] = epoch_;
        nodes_a_.clear();
        nodes_b_.clear();
        int xa = a0, xb = b0, lca = -1;
        bool a_done = false, b_done = false;
        while (lca < 0) {
            if (!a_done) {
                const int pa = parent_node_[static_cast<std::size_t>(xa)];
                if (pa < 0) {
                    a_done = true;
                } else {
                    nodes_a_.push_back(pa);
                    if (visited_[static_cast<std::size_t>(pa)] == epoch_) {
                        lca = pa;
                        break;
                    }
                    visited_[static_cast<std::size_t>(pa)] = epoch_;
                    xa = pa;
                }
            }
            if (!b_done) {
                const int pb = parent_node_[static_cast<std::size_t>(xb)];
                if (pb < 0) {
                    b_done = true;
                } else {
                    nodes_b_.push_back(pb);
                    if (visited_[static_cast<std::size_t>(pb)] == epoch_) {
                        lca = pb;
                        break;
                    }
                    visited_[static_cast<std::size_t>(pb)] = epoch_;
                    xb = pb;
                }
            }
        }
        // Trim both walks at the LCA (one of them may have overshot).
        std::size_t len_a = nodes_a_.size();
        for (std::size_t t = 0; t < nodes_a_.size(); ++t)
            if (nodes_a_[t] == lca) {
                len_a = t + 1;
                break;
            }
        if (lca == a0) len_a = 0;
        std::size_t len_b = nodes_b_.size();
        for (std::size_t t = 0; t < nodes_b_.size(); ++t)
            if (nodes_b_[t] == lca) {
                len_b = t + 1;
                break;
            }
        if (lca == b0) len_b = 0;

        // Cycle arc order: up from the column endpoint, then down to the
        // row endpoint; signs alternate -, +, -, ... from the column side.
        const std::size_t cycle_len = len_a + len_b;
        auto cycle_arc = [&](std::size_t pos) {
            if (pos < len_b) {
                const int node = pos == 0 ? b0 : nodes_b_[pos - 1];
                return parent_arc_[static_cast<std::size_t>(node)];
            }
            const std::size_t ia = cycle_len - 1 - pos; // runs len_a-1 .. 0
            const int node = ia == 0 ? a0 : nodes_a_[ia - 1];
            return parent_arc_[static_cast<std::size_t>(node)];
        };

        double theta = std::numeric_limits<double>::infinity();
        int leaving = -1;
        std::size_t leaving_pos = 0;
        long leaving_key = 0;
        for (std::size_t pos = 0; pos < cycle_len; pos += 2) {
            const int s = cycle_arc(pos);
            const double mass = arc_mass_[static_cast<std::size_t>(s)];
            const long key = static_cast<long>(arc_row_[static_cast<std::size_t>(s)]) * n_ +
                             arc_col_[static_cast<std::size_t>(s)];
            if (mass < theta || (mass == theta && key < leaving_key)) {
                theta = mass;
                leaving = s;
                leaving_pos = pos;
                leaving_key = key;
            }
        }

        for (std::size_t pos = 0; pos < cycle_len; ++pos) {
            const int s = cycle_arc(pos);
            if (pos % 2 == 0)
                arc_mass_[static_cast<std::size_t>(s)] -= theta;
            else
                arc_mass_[static_cast<std::size_t>(s)] += theta;
        }

        // The leaving arc cuts off a subtree; its child-side node and the
        // entering endpoint inside it determine the reattachment.
        const bool leaving_in_b = leaving_pos < len_b;
        int child_node;
        if (leaving_in_b)
            child_node = leaving_pos == 0 ? b0 : nodes_b_[leaving_pos - 1];
        else {
            const std::size_t ia = cycle_len - 1 - leaving_pos;
            child_node = ia == 0 ? a0 : nodes_a_[ia - 1];
        }
        const int e_away = leaving_in_b ? b0 : a0;
        const int e_root = leaving_in_b ? a0 : b0;

        // Shift potentials of the cut subtree so the entering arc prices
        // to zero: column-side subtree gets +rc on columns / -rc on rows,
        // row-side subtree the mirror image.
        ++epoch_;
        stack_.clear();
        stack_.push_back(child_node);
        visited_[static_cast<std::size_t>(child_node)] = epoch_;
        const double row_shift = leaving_in_b ? -rc : rc;
        while (!stack_.empty()) {
            const int x = stack_.back();
            stack_.pop_back();
            if (x < m_)
                u_[static_cast<std::size_t>(x)] += row_shift;
            else
                v_[static_cast<std::size_t>(x - m_)] -= row_shift;
            for (const int s : adj_[static_cast<std::size_t>(x)]) {
                if (s == leaving) continue;
                const int other = (x < m_) ? m_ + arc_col_[static_cast<std::size_t>(s)]
                                           : arc_row_[static_cast<std::size_t>(s)];
                if (visited_[static_cast<std::size_t>(other)] == epoch_) continue;
                visited_[static_cast<std::size_t>(other)] = epoch_;
                stack_.push_back(other);
            }
        }

        // Swap the arc slot and reattach the subtree: reverse parent
        // pointers from the entering endpoint up to the cut.
        detach_arc(leaving);
        arc_row_[static_cast<std::size_t>(leaving)] = ei;
        arc_col_[static_cast<std::size_t>(leaving)] = ej;
        arc_mass_[static_cast<std::size_t>(leaving)] = theta;
        adj_[static_cast<std::size_t>(ei)].push_back(leaving);
        adj_[static_cast<std::size_t>(m_ + ej)].push_back(leaving);

        int prev_node = e_root;
        int prev_arc = leaving; // slot now holds the entering arc
        int x = e_away;
        for (;;) {
            const int old_parent = parent_node_[static_cast<std::size_t>(x)];
            const int old_arc = parent_arc_[static_cast<std::size_t>(x)];
            parent_node_[static_cast<std::size_t>(x)] = prev_node;
            parent_arc_[static_cast<std::size_t>(x)] = prev_arc;
            if (x == child_node) break;
            prev_node = x;
            prev_arc = old_arc;
            x = old_parent;
        }
        return theta;
    }

    void detach_arc(int s) {
        auto remove_from = [&](int node) {
            auto& lst = adj_[static_cast<std::size_t>(node)];
            lst.erase(std::find(lst.begin(), lst.end(), s));
        };
        remove_from(arc_row_[static_cast<std::size_t>(s)]);
        remove_from(m_ + arc_col_[static_cast<std::size_t>(s)]);
    }

    std::span<const double> a_, b_;
    const CostFn& cost_;
    int m_, n_;
    double tol_ = 1e-11;
    bool bland_ = false;
    int cursor_row_ = 0;
    int block_rows_ = 1;
    long pivots_ = 0;
    int epoch_ = 0;

    std::vector<int> arc_row_, arc_col_;
    std::vector<double> arc_mass_;
    std::vector<std::vector<int>> adj_;
    std::vector<double> u_, v_;
    std::vector<int> visited_, parent_node_, parent_arc_, stack_;
    std::vector<int> nodes_a_, nodes_b_;
};

} // namespace detail

// Exact optimal transport between marginals a and b under an arbitrary
// cost accessor cost(i, j). Zero-mass rows/columns are dropped up front
// (exactly the shrink operation, applied defensively) unless disabled.
template <class CostFn>
TransportPlan solve_transport(std::span<const double> a, std::span<const double> b,
                              const CostFn& cost, const SolveOptions& opt = {}) {
    const int full_m = static_cast<int>(a.size());
    const int full_n = static_cast<int>(b.size());
    if (full_m < 1 || full_n < 1) throw config_error("solve_transport: empty marginal");

    std::vector<int> row_map, col_map;
    std::vector<double> ar, br;
    std::span<const double> as = a, bs = b;
    bool mapped = false;
    if (opt.drop_zero_marginals) {
        for (int i = 0; i < full_m; ++i)
            if (a[static_cast<std::size_t>(i)] > 0.0) row_map.push_back(i);
        for (int j = 0; j < full_n; ++j)
            if (b[static_cast<std::size_t>(j)] > 0.0) col_map.push_back(j);
        if (row_map.empty() || col_map.empty())
            throw data_error("solve_transport: marginal has no positive mass");
        mapped = static_cast<int>(row_map.size()) != full_m ||
                 static_cast<int>(col_map.size()) != full_n;
        if (mapped) {
            ar.reserve(row_map.size());
            br.reserve(col_map.size());
            for (int i : row_map) ar.push_back(a[static_cast<std::size_t>(i)]);
            for (int j : col_map) br.push_back(b[static_cast<std::size_t>(j)]);
            as = ar;
            bs = br;
        }
    }

    TransportPlan plan;
    plan.row_dim = full_m;
    plan.col_dim = full_n;

    auto run = [&](const auto& reduced_cost) {
        detail::TransportSimplex<std::decay_t<decltype(reduced_cost)>> simplex(as, bs,
                                                                               reduced_cost);
        simplex.solve(opt.init);
        plan.pivots = simplex.pivots();
        plan.entries.reserve(static_cast<std::size_t>(simplex.basis_size()));
        for (int s = 0; s < simplex.basis_size(); ++s) {
            if (simplex.arc_mass(s) > opt.mass_prune) {
                const int i = simplex.arc_row(s);
                const int j = simplex.arc_col(s);
                plan.entries.push_back(
                    {mapped ? row_map[static_cast<std::size_t>(i)] : i,
                     mapped ? col_map[static_cast<std::size_t>(j)] : j,
                     simplex.arc_mass(s)});
            }
        }
        std::sort(plan.entries.begin(), plan.entries.end(), [](const PlanEntry& x, const PlanEntry& y) {
            return x.row != y.row ? x.row < y.row : x.col < y.col;
        });
        double obj = 0.0;
        for (const PlanEntry& e : plan.entries) {
            const int i = mapped ? static_cast<int>(std::lower_bound(row_map.begin(), row_map.end(), e.row) - row_map.begin())
                                 : e.row;
            const int j = mapped ? static_cast<int>(std::lower_bound(col_map.begin(), col_map.end(), e.col) - col_map.begin())
                                 : e.col;
            obj += e.mass * reduced_cost(i, j);
        }
        plan.objective = obj;
    };

    if (mapped) {
        auto reduced = [&](int i, int j) {
            return cost(row_map[static_cast<std::size_t>(i)], col_map[static_cast<std::size_t>(j)]);
        };
        run(reduced);
    } else {
        auto direct = [&](int i, int j) { return cost(i, j); };
        run(direct);
    }
    return plan;
}

inline TransportPlan solve_ot(const Histogram& a, const Histogram& b, const GroundCost& C,
                              const SolveOptions& opt = {}) {
    if (a.size() != C.rows() || b.size() != C.cols())
        throw config_error("solve_ot: histogram dimensions do not match cost matrix");
    auto cost = [&](int i, int j) { return C(i, j); };
    return solve_transport(std::span<const double>(a.weights()),
                           std::span<const double>(b.weights()), cost, opt);
}

// Shrunk problem: C must already be the |supp(a)| x |supp(b)| submatrix.
inline TransportPlan solve_ot(const SparseHistogram& a, const SparseHistogram& b,
                              const GroundCost& C, const SolveOptions& opt = {}) {
    if (a.size() != C.rows() || b.size() != C.cols())
        throw config_error("solve_ot: sparse histogram sizes do not match cost matrix");
    auto cost = [&](int i, int j) { return C(i, j); };
    return solve_transport(std::span<const double>(a.weights()),
                           std::span<const double>(b.weights()), cost, opt);
}

// Shrunk problem through an index view of the full cost matrix.
inline TransportPlan solve_ot(const SparseHistogram& a, const SparseHistogram& b,
                              const CostView& view, const SolveOptions& opt = {}) {
    if (a.size() != view.rows() || b.size() != view.cols())
        throw config_error("solve_ot: sparse histogram sizes do not match cost view");
    return solve_transport(std::span<const double>(a.weights()),
                           std::span<const double>(b.weights()), view, opt);
}

template <class A, class B, class C>
double wasserstein_distance(const A& a, const B& b, const C& cost,
                            const SolveOptions& opt = {}) {
    return solve_ot(a, b, cost, opt).objective;
}

// Independent oracle for 1-D problems on a shared sorted line geometry.
// For p = 1 this is the CDF formula; for general p the cost of the
// monotone coupling, which is optimal on the line for convex costs.
inline double solve_ot_1d_closedform(const Histogram& a, const Histogram& b, double p) {
    const BinGeometry& ga = *a.geometry();
    const BinGeometry& gb = *b.geometry();
    if (ga.kind() != GeometryKind::line1d || gb.kind() != GeometryKind::line1d)
        throw config_error("solve_ot_1d_closedform: geometry is not line1d");
    if (ga.size() != gb.size() || ga.coords() != gb.coords())
        throw config_error("solve_ot_1d_closedform: histograms do not share a geometry");
    const std::vector<double>& x = ga.coords();
    const int n = ga.size();
    for (int i = 0; i + 1 < n; ++i)
        if (x[static_cast<std::size_t>(i)] > x[static_cast<std::size_t>(i + 1)])
            throw config_error("solve_ot_1d_closedform: bin centers not sorted");

    if (p == 1.0) {
        double total = 0.0, cdf_a = 0.0, cdf_b = 0.0;
        for (int i = 0; i + 1 < n; ++i) {
            cdf_a += a[i];
            cdf_b += b[i];
            total += std::abs(cdf_a - cdf_b) *
                     (x[static_cast<std::size_t>(i + 1)] - x[static_cast<std::size_t>(i)]);
        }
        return total;
    }

    // North-west corner coupling via two pointers.
    double total = 0.0;
    int i = 0, j = 0;
    double rem_a = a[0], rem_b = b[0];
    while (i < n && j < n) {
        const double t = std::min(rem_a, rem_b);
        if (t > 0.0)
            total += t * std::pow(std::abs(x[static_cast<std::size_t>(i)] -
                                           x[static_cast<std::size_t>(j)]),
                                  p);
        rem_a -= t;
        rem_b -= t;
        if (rem_a <= rem_b) {
            ++i;
            if (i < n) rem_a = a[i];
        } else {
            ++j;
            if (j < n) rem_b = b[j];
        }
    }
    return total;
}

} // namespace sspw
