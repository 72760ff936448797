#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "sspw/clustering.hpp"
#include "sspw/errors.hpp"
#include "sspw/evaluation.hpp"
#include "sspw/histogram.hpp"
#include "sspw/random.hpp"

namespace sspw {

struct LabeledDataset {
    std::vector<Histogram> samples;
    std::vector<int> labels;              // class id per sample
    std::vector<std::string> label_names; // id -> original label string
    GeometryPtr geometry;
    std::string name;
};

// 1-D intensity histogram over [1, 255] (drop_zero) or [0, 255]. With the
// canonical bins = 255 / drop_zero = true setting every intensity value
// gets its own bin and the bin centers sit at the intensity values.
inline Histogram intensity_histogram_1d(const std::vector<std::vector<int>>& pixel_matrix,
                                        int bins = 255, bool drop_zero = true,
                                        GeometryPtr geometry = nullptr) {
    if (bins < 1) throw config_error("intensity_histogram_1d: bins must be >= 1");
    const int lo = drop_zero ? 1 : 0;
    if (!geometry) {
        std::vector<double> centers(static_cast<std::size_t>(bins));
        for (int b = 0; b < bins; ++b)
            centers[static_cast<std::size_t>(b)] =
                bins == 1 ? lo : lo + static_cast<double>(b) * (255.0 - lo) / (bins - 1);
        geometry = make_line_geometry(std::move(centers));
    }
    std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
    bool any = false;
    for (const auto& row : pixel_matrix) {
        for (int v : row) {
            if (v < 0 || v > 255)
                throw data_error("intensity_histogram_1d: pixel value out of [0, 255]");
            if (drop_zero && v == 0) continue;
            int b = static_cast<int>((static_cast<double>(v - lo) * bins) / (256.0 - lo));
            b = std::min(b, bins - 1);
            counts[static_cast<std::size_t>(b)] += 1.0;
            any = true;
        }
    }
    if (!any) throw data_error("intensity_histogram_1d: no pixels left after dropping zeros");
    return normalize_to_histogram(counts, std::move(geometry));
}

// 2-D pixel histogram: intensity per pixel, normalized to total mass one,
// on a grid geometry of the image shape. Inputs in [-1, 1] are first
// mapped affinely onto [0, 255].
inline Histogram pixel_histogram_2d(const std::vector<std::vector<double>>& pixel_matrix,
                                    GeometryPtr geometry = nullptr) {
    const int rows = static_cast<int>(pixel_matrix.size());
    if (rows == 0 || pixel_matrix.front().empty())
        throw data_error("pixel_histogram_2d: empty matrix");
    const int cols = static_cast<int>(pixel_matrix.front().size());
    bool negative = false;
    for (const auto& row : pixel_matrix) {
        if (static_cast<int>(row.size()) != cols)
            throw data_error("pixel_histogram_2d: ragged matrix");
        for (double v : row)
            if (v < 0.0) negative = true;
    }
    if (!geometry) geometry = make_grid_geometry(rows, cols);
    std::vector<double> intensity;
    intensity.reserve(static_cast<std::size_t>(rows) * cols);
    for (const auto& row : pixel_matrix)
        for (double v : row) {
            const double x = negative ? (v + 1.0) * 127.5 : v;
            intensity.push_back(std::max(x, 0.0));
        }
    return normalize_to_histogram(intensity, std::move(geometry));
}

// Plain-text matrix: one row per line, whitespace-separated integers.
inline std::vector<std::vector<int>> load_pixel_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("load_pixel_matrix: cannot open " + path);
    std::vector<std::vector<int>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::vector<int> row;
        int v;
        while (ss >> v) row.push_back(v);
        if (!ss.eof())
            throw data_error("load_pixel_matrix: non-integer token at line " +
                             std::to_string(rows.size() + 1));
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw data_error("load_pixel_matrix: empty file " + path);
    return rows;
}

// Synthetic labeled dataset: each class is a two-component Gaussian
// mixture over the bin geometry, class centers on a deterministic lattice,
// per-sample centers jittered inversely to `separation`, per-bin
// multiplicative noise, and a small positive floor so every bin carries
// mass. A perfect-square bin count produces a 2-D grid geometry (the
// interesting regime for transport solves); anything else gets a line.
inline LabeledDataset make_synthetic_dataset(int classes, int per_class, int n_bins,
                                             double separation, std::uint64_t seed) {
    if (classes < 2) throw config_error("make_synthetic_dataset: classes must be >= 2");
    if (per_class < 1) throw config_error("make_synthetic_dataset: per_class must be >= 1");
    if (n_bins < 2) throw config_error("make_synthetic_dataset: n_bins must be >= 2");
    if (!(separation > 0.0)) throw config_error("make_synthetic_dataset: separation must be > 0");

    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_bins))));
    const bool grid = side >= 2 && side * side == n_bins;
    GeometryPtr geometry;
    if (grid) {
        geometry = make_grid_geometry(side, side);
    } else {
        std::vector<double> centers(static_cast<std::size_t>(n_bins));
        for (int i = 0; i < n_bins; ++i) centers[static_cast<std::size_t>(i)] = i;
        geometry = make_line_geometry(std::move(centers));
    }
    const int dim = geometry->dim();
    const double extent = grid ? side - 1 : n_bins - 1;

    Rng rng(seed);

    // Class anchors on a lattice over the middle of the box, so classes
    // can never collide regardless of the seed.
    const int lattice = grid ? static_cast<int>(std::ceil(std::sqrt(static_cast<double>(classes))))
                             : classes;
    std::vector<std::vector<double>> anchors;
    for (int c = 0; c < classes; ++c) {
        std::vector<double> a(static_cast<std::size_t>(dim));
        if (grid) {
            const int gx = c % lattice, gy = c / lattice;
            a[0] = extent * (0.15 + 0.7 * (lattice == 1 ? 0.5 : static_cast<double>(gy) / (lattice - 1)));
            a[1] = extent * (0.15 + 0.7 * (lattice == 1 ? 0.5 : static_cast<double>(gx) / (lattice - 1)));
        } else {
            a[0] = extent * (0.1 + 0.8 * (classes == 1 ? 0.5 : static_cast<double>(c) / (classes - 1)));
        }
        anchors.push_back(std::move(a));
    }
    const double spacing = grid ? extent * 0.7 / std::max(1, lattice - 1)
                                : extent * 0.8 / std::max(1, classes - 1);

    // Per-class mixture blueprint: two components near the anchor.
    struct Component {
        std::vector<double> center;
        double weight;
        double sigma;
    };
    std::vector<std::vector<Component>> blueprint(static_cast<std::size_t>(classes));
    for (int c = 0; c < classes; ++c) {
        const double w0 = rng.uniform(0.35, 0.65);
        for (int comp = 0; comp < 2; ++comp) {
            Component k;
            k.center = anchors[static_cast<std::size_t>(c)];
            for (int d = 0; d < dim; ++d) k.center[static_cast<std::size_t>(d)] += rng.normal() * 0.10 * spacing;
            k.weight = comp == 0 ? w0 : 1.0 - w0;
            k.sigma = std::max(0.5, 0.10 * extent * rng.uniform(0.8, 1.25));
            blueprint[static_cast<std::size_t>(c)].push_back(std::move(k));
        }
    }
    const double jitter = 0.5 * spacing / separation;

    LabeledDataset ds;
    ds.geometry = geometry;
    ds.name = "synthetic-c" + std::to_string(classes) + "-p" + std::to_string(per_class) +
              "-n" + std::to_string(n_bins);
    for (int c = 0; c < classes; ++c) {
        ds.label_names.push_back("class" + std::to_string(c));
        for (int s = 0; s < per_class; ++s) {
            // Jittered copy of the class mixture.
            std::vector<Component> comps = blueprint[static_cast<std::size_t>(c)];
            for (Component& k : comps)
                for (int d = 0; d < dim; ++d)
                    k.center[static_cast<std::size_t>(d)] += rng.normal() * jitter;
            std::vector<double> w(static_cast<std::size_t>(n_bins), 0.0);
            for (int b = 0; b < n_bins; ++b) {
                const auto pt = geometry->point(b);
                double val = 0.0;
                for (const Component& k : comps) {
                    double d2 = 0.0;
                    for (int d = 0; d < dim; ++d) {
                        const double diff = pt[static_cast<std::size_t>(d)] -
                                            k.center[static_cast<std::size_t>(d)];
                        d2 += diff * diff;
                    }
                    val += k.weight * std::exp(-d2 / (2.0 * k.sigma * k.sigma));
                }
                const double noise = 1.0 + 0.15 * (2.0 * rng.uniform() - 1.0);
                w[static_cast<std::size_t>(b)] = val * noise + 1e-6;
            }
            ds.samples.push_back(normalize_to_histogram(w, geometry));
            ds.labels.push_back(c);
        }
    }
    return ds;
}

namespace detail {

inline nlohmann::json geometry_to_json(const BinGeometry& g) {
    nlohmann::json j;
    switch (g.kind()) {
    case GeometryKind::line1d:
        j["kind"] = "line1d";
        j["centers"] = g.coords();
        break;
    case GeometryKind::grid2d:
        j["kind"] = "grid2d";
        j["shape"] = {g.grid_rows(), g.grid_cols()};
        break;
    case GeometryKind::explicit_points:
        j["kind"] = "explicit";
        j["dim"] = g.dim();
        j["points"] = g.coords();
        break;
    }
    return j;
}

inline GeometryPtr geometry_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "line1d")
        return make_line_geometry(j.at("centers").get<std::vector<double>>());
    if (kind == "grid2d") {
        const auto shape = j.at("shape").get<std::vector<int>>();
        if (shape.size() != 2) throw data_error("dataset header: grid2d shape must have 2 entries");
        return make_grid_geometry(shape[0], shape[1]);
    }
    if (kind == "explicit")
        return make_points_geometry(j.at("points").get<std::vector<double>>(),
                                    j.at("dim").get<int>());
    throw data_error("dataset header: unknown geometry kind '" + kind + "'");
}

} // namespace detail

// JSON-lines dataset: the first line is a header with the shared geometry
// and dimension, each following line one sample:
//   {"geometry": {...}, "n": <int>}
//   {"label": "<string>", "weights": [...]}
inline void save_dataset(const LabeledDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("save_dataset: cannot open " + path);
    nlohmann::json header;
    header["geometry"] = detail::geometry_to_json(*ds.geometry);
    header["n"] = ds.geometry->size();
    out << header.dump() << '\n';
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        nlohmann::json rec;
        rec["label"] = ds.label_names[static_cast<std::size_t>(ds.labels[i])];
        rec["weights"] = ds.samples[i].weights();
        out << rec.dump() << '\n';
    }
}

inline LabeledDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("load_dataset: cannot open " + path);
    std::string line;
    std::size_t lineno = 0;

    auto parse_line = [&](const std::string& text) {
        try {
            return nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw data_error("load_dataset: " + path + ":" + std::to_string(lineno) + ": " +
                             e.what());
        }
    };

    if (!std::getline(in, line)) throw data_error("load_dataset: empty file " + path);
    ++lineno;
    const nlohmann::json header = parse_line(line);
    if (!header.contains("geometry") || !header.contains("n"))
        throw data_error("load_dataset: " + path + ":1: header must carry geometry and n");
    GeometryPtr geometry = detail::geometry_from_json(header.at("geometry"));
    const int n = header.at("n").get<int>();
    if (geometry->size() != n)
        throw data_error("load_dataset: " + path + ":1: n does not match geometry size");

    LabeledDataset ds;
    ds.geometry = geometry;
    ds.name = path;
    std::map<std::string, int> ids;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const nlohmann::json rec = parse_line(line);
        if (!rec.contains("label") || !rec.contains("weights"))
            throw data_error("load_dataset: " + path + ":" + std::to_string(lineno) +
                             ": record needs label and weights fields");
        auto weights = rec.at("weights").get<std::vector<double>>();
        if (static_cast<int>(weights.size()) != n)
            throw data_error("load_dataset: " + path + ":" + std::to_string(lineno) +
                             ": weight count != n");
        const std::string label = rec.at("label").get<std::string>();
        auto [it, inserted] = ids.emplace(label, static_cast<int>(ds.label_names.size()));
        if (inserted) ds.label_names.push_back(label);
        try {
            ds.samples.emplace_back(std::move(weights), geometry);
        } catch (const std::exception& e) {
            throw data_error("load_dataset: " + path + ":" + std::to_string(lineno) + ": " +
                             e.what());
        }
        ds.labels.push_back(it->second);
    }
    if (ds.samples.empty()) throw data_error("load_dataset: " + path + " has no samples");
    return ds;
}

namespace detail {

inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string fmt_time(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return buf;
}

} // namespace detail

// Full per-iteration trace, wall times included.
inline void save_trace_csv(const ClusteringRun& run, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("save_trace_csv: cannot open " + path);
    out << "t,gamma,changed_labels,assign_time_s,update_time_s,objective\n";
    for (std::size_t t = 0; t < run.trace.size(); ++t) {
        const IterationRecord& r = run.trace[t];
        out << t << ',' << detail::fmt_g17(r.gamma) << ',' << r.changed_labels << ','
            << detail::fmt_time(r.assign_time_s) << ',' << detail::fmt_time(r.update_time_s)
            << ',' << detail::fmt_g17(r.objective) << '\n';
    }
}

// Timing-free companion of the trace: identical bytes for identical
// (config, seed) runs regardless of thread count or machine load.
inline void save_result_csv(const ClusteringRun& run, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("save_result_csv: cannot open " + path);
    out << "t,gamma,changed_labels,objective\n";
    for (std::size_t t = 0; t < run.trace.size(); ++t) {
        const IterationRecord& r = run.trace[t];
        out << t << ',' << detail::fmt_g17(r.gamma) << ',' << r.changed_labels << ','
            << detail::fmt_g17(r.objective) << '\n';
    }
}

inline void save_labels_csv(const std::vector<int>& assignments, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("save_labels_csv: cannot open " + path);
    out << "sample,label\n";
    for (std::size_t i = 0; i < assignments.size(); ++i)
        out << i << ',' << assignments[i] << '\n';
}

inline void save_summary_json(const MetricsReport& metrics, const nlohmann::json& config_echo,
                              double total_time_s, const std::string& path) {
    nlohmann::json j;
    j["metrics"] = {{"purity", metrics.purity}, {"nmi", metrics.nmi}, {"accuracy", metrics.accuracy}};
    j["config"] = config_echo;
    j["total_time_s"] = total_time_s;
    std::ofstream out(path);
    if (!out) throw data_error("save_summary_json: cannot open " + path);
    out << j.dump(2) << '\n';
}

} // namespace sspw
