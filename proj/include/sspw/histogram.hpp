#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sspw/errors.hpp"

namespace sspw {

enum class GeometryKind { line1d, grid2d, explicit_points };

// Bin support of a histogram: one point in R^dim per bin. Pairwise
// Euclidean distances between these points (raised to a power) form the
// ground cost matrix.
class BinGeometry {
public:
    static BinGeometry line(std::vector<double> centers) {
        BinGeometry g;
        g.kind_ = GeometryKind::line1d;
        g.dim_ = 1;
        g.coords_ = std::move(centers);
        g.validate();
        return g;
    }

    // Pixel grid; bin (r, c) sits at coordinates (r, c), row-major order.
    static BinGeometry grid(int rows, int cols) {
        if (rows < 1 || cols < 1)
            throw config_error("BinGeometry::grid: rows and cols must be >= 1");
        BinGeometry g;
        g.kind_ = GeometryKind::grid2d;
        g.dim_ = 2;
        g.rows_ = rows;
        g.cols_ = cols;
        g.coords_.reserve(static_cast<std::size_t>(rows) * cols * 2);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                g.coords_.push_back(static_cast<double>(r));
                g.coords_.push_back(static_cast<double>(c));
            }
        }
        g.validate();
        return g;
    }

    // Arbitrary points, flat row-major [n x dim].
    static BinGeometry points(std::vector<double> coords, int dim) {
        if (dim < 1) throw config_error("BinGeometry::points: dim must be >= 1");
        if (coords.empty() || coords.size() % static_cast<std::size_t>(dim) != 0)
            throw config_error("BinGeometry::points: coordinate count not a multiple of dim");
        BinGeometry g;
        g.kind_ = GeometryKind::explicit_points;
        g.dim_ = dim;
        g.coords_ = std::move(coords);
        g.validate();
        return g;
    }

    GeometryKind kind() const { return kind_; }
    int size() const { return static_cast<int>(coords_.size()) / dim_; }
    int dim() const { return dim_; }
    int grid_rows() const { return rows_; }
    int grid_cols() const { return cols_; }

    std::span<const double> point(int i) const {
        return {coords_.data() + static_cast<std::size_t>(i) * dim_,
                static_cast<std::size_t>(dim_)};
    }

    const std::vector<double>& coords() const { return coords_; }

    double squared_distance(int i, const BinGeometry& other, int j) const {
        const double* a = coords_.data() + static_cast<std::size_t>(i) * dim_;
        const double* b = other.coords_.data() + static_cast<std::size_t>(j) * other.dim_;
        double d2 = 0.0;
        for (int d = 0; d < dim_; ++d) {
            const double diff = a[d] - b[d];
            d2 += diff * diff;
        }
        return d2;
    }

private:
    BinGeometry() = default;

    void validate() const {
        if (coords_.empty()) throw config_error("BinGeometry: empty geometry");
        for (double c : coords_)
            if (!std::isfinite(c)) throw config_error("BinGeometry: non-finite coordinate");
    }

    GeometryKind kind_ = GeometryKind::explicit_points;
    int dim_ = 1;
    int rows_ = 0, cols_ = 0;
    std::vector<double> coords_;
};

using GeometryPtr = std::shared_ptr<const BinGeometry>;

inline GeometryPtr make_line_geometry(std::vector<double> centers) {
    return std::make_shared<const BinGeometry>(BinGeometry::line(std::move(centers)));
}
inline GeometryPtr make_grid_geometry(int rows, int cols) {
    return std::make_shared<const BinGeometry>(BinGeometry::grid(rows, cols));
}
inline GeometryPtr make_points_geometry(std::vector<double> coords, int dim) {
    return std::make_shared<const BinGeometry>(BinGeometry::points(std::move(coords), dim));
}

// Construction tolerances for simplex membership. Deviations up to
// kSimplexAccept pass through untouched; up to kSimplexRenorm the weights
// are renormalized (file round-trips drift a little); anything beyond is
// rejected as corrupt data.
inline constexpr double kSimplexAccept = 1e-9;
inline constexpr double kSimplexRenorm = 1e-6;

// A point on the probability simplex with an attached bin geometry.
// Immutable after construction.
class Histogram {
public:
    Histogram(std::vector<double> weights, GeometryPtr geometry)
        : weights_(std::move(weights)), geometry_(std::move(geometry)) {
        if (!geometry_) throw config_error("Histogram: null geometry");
        if (static_cast<int>(weights_.size()) != geometry_->size())
            throw config_error("Histogram: weight count does not match geometry size");
        double sum = 0.0;
        for (double w : weights_) {
            if (!(w >= 0.0) || !std::isfinite(w))
                throw data_error("Histogram: negative or non-finite weight");
            sum += w;
        }
        const double dev = std::abs(sum - 1.0);
        if (dev > kSimplexRenorm)
            throw data_error("Histogram: weights sum to " + std::to_string(sum) +
                             ", too far from 1");
        if (dev > kSimplexAccept) {
            for (double& w : weights_) w /= sum;
        }
    }

    int size() const { return static_cast<int>(weights_.size()); }
    const std::vector<double>& weights() const { return weights_; }
    double operator[](int i) const { return weights_[static_cast<std::size_t>(i)]; }
    const GeometryPtr& geometry() const { return geometry_; }

    int nonzero_count() const {
        int nz = 0;
        for (double w : weights_)
            if (w > 0.0) ++nz;
        return nz;
    }

private:
    std::vector<double> weights_;
    GeometryPtr geometry_;
};

// Zero bins removed: sorted original indices plus the surviving positive
// weights. The weights are copied bit-exactly, never rescaled.
class SparseHistogram {
public:
    SparseHistogram(std::vector<int> support, std::vector<double> weights, int original_dim)
        : support_(std::move(support)), weights_(std::move(weights)),
          original_dim_(original_dim) {
        if (support_.size() != weights_.size())
            throw config_error("SparseHistogram: support/weight size mismatch");
        if (support_.empty()) throw data_error("SparseHistogram: empty support");
        if (static_cast<int>(support_.size()) > original_dim_)
            throw config_error("SparseHistogram: support larger than original dimension");
        double sum = 0.0;
        int prev = -1;
        for (std::size_t i = 0; i < support_.size(); ++i) {
            if (support_[i] <= prev || support_[i] >= original_dim_)
                throw config_error("SparseHistogram: support not sorted/unique/in-range");
            prev = support_[i];
            if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i]))
                throw data_error("SparseHistogram: non-positive weight");
            sum += weights_[i];
        }
        if (std::abs(sum - 1.0) > kSimplexAccept)
            throw data_error("SparseHistogram: weights sum to " + std::to_string(sum));
    }

    int size() const { return static_cast<int>(support_.size()); }
    int original_dim() const { return original_dim_; }
    const std::vector<int>& support() const { return support_; }
    const std::vector<double>& weights() const { return weights_; }

    // Scatter weights back to a dense vector of the original dimension.
    std::vector<double> to_dense() const {
        std::vector<double> dense(static_cast<std::size_t>(original_dim_), 0.0);
        for (std::size_t i = 0; i < support_.size(); ++i)
            dense[static_cast<std::size_t>(support_[i])] = weights_[i];
        return dense;
    }

private:
    std::vector<int> support_;
    std::vector<double> weights_;
    int original_dim_;
};

// Pairwise bin-to-bin distances raised to `power`, row-major.
class GroundCost {
public:
    GroundCost(std::vector<double> values, int rows, int cols, double power)
        : values_(std::move(values)), rows_(rows), cols_(cols), power_(power) {
        if (rows_ < 1 || cols_ < 1 ||
            values_.size() != static_cast<std::size_t>(rows_) * cols_)
            throw config_error("GroundCost: shape mismatch");
        if (!(power_ >= 1.0)) throw config_error("GroundCost: power must be >= 1");
        for (double v : values_)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw config_error("GroundCost: negative or non-finite entry");
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double power() const { return power_; }
    double operator()(int u, int v) const {
        return values_[static_cast<std::size_t>(u) * cols_ + v];
    }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> values_;
    int rows_, cols_;
    double power_;
};

// C[u][v] = (Euclidean distance between row point u and column point v)^p.
// With identical geometries the result is symmetric with a zero diagonal.
inline GroundCost build_ground_cost(const BinGeometry& geom_rows,
                                    const BinGeometry& geom_cols, double p = 2.0) {
    if (geom_rows.dim() != geom_cols.dim())
        throw config_error("build_ground_cost: geometry dimensions differ");
    if (!(p >= 1.0)) throw config_error("build_ground_cost: p must be >= 1");
    const int m = geom_rows.size();
    const int n = geom_cols.size();
    std::vector<double> values(static_cast<std::size_t>(m) * n);
    for (int u = 0; u < m; ++u) {
        for (int v = 0; v < n; ++v) {
            const double d2 = geom_rows.squared_distance(u, geom_cols, v);
            double c;
            if (p == 2.0) c = d2;
            else if (p == 1.0) c = std::sqrt(d2);
            else c = std::pow(d2, p / 2.0);
            values[static_cast<std::size_t>(u) * n + v] = c;
        }
    }
    return GroundCost(std::move(values), m, n, p);
}

// raw / sum(raw). Rejects all-zero and negative inputs.
inline Histogram normalize_to_histogram(std::span<const double> raw, GeometryPtr geometry) {
    double sum = 0.0;
    for (double r : raw) {
        if (r < 0.0 || !std::isfinite(r))
            throw data_error("normalize_to_histogram: negative or non-finite entry");
        sum += r;
    }
    if (sum <= 0.0) throw data_error("normalize_to_histogram: all-zero input");
    std::vector<double> w(raw.begin(), raw.end());
    for (double& x : w) x /= sum;
    return Histogram(std::move(w), std::move(geometry));
}

inline double median_positive_cost(const GroundCost& C) {
    std::vector<double> pos;
    pos.reserve(C.values().size());
    for (double v : C.values())
        if (v > 0.0) pos.push_back(v);
    if (pos.empty()) return 1.0;
    const std::size_t mid = pos.size() / 2;
    std::nth_element(pos.begin(), pos.begin() + mid, pos.end());
    return pos[mid];
}

} // namespace sspw
