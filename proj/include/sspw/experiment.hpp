#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sspw/clustering.hpp"
#include "sspw/dataio.hpp"
#include "sspw/errors.hpp"
#include "sspw/evaluation.hpp"
#include "sspw/random.hpp"

namespace sspw {

enum class ProjectTarget { sample, centroid, both, none };

inline const char* to_string(Schedule s) {
    switch (s) {
    case Schedule::fix: return "fix";
    case Schedule::dec: return "dec";
    case Schedule::inc: return "inc";
    }
    return "?";
}

inline const char* to_string(ProjectTarget t) {
    switch (t) {
    case ProjectTarget::sample: return "sample";
    case ProjectTarget::centroid: return "centroid";
    case ProjectTarget::both: return "both";
    case ProjectTarget::none: return "none";
    }
    return "?";
}

struct SyntheticSpec {
    int classes = 10;
    int per_class = 10;
    int bins = 256;
    double sep = 3.0;
};

struct ExperimentSpec {
    std::string dataset_path;              // file input, or
    std::optional<SyntheticSpec> synthetic; // generated per repeat
    int k = 10;
    double p = 2.0;
    int repeats = 1;
    std::uint64_t seed = 0;
    std::vector<Schedule> schedules{Schedule::fix};
    std::vector<double> gamma_mins{0.5};
    std::vector<ProjectTarget> projects{ProjectTarget::both};
    bool shrink = true;
    int t_max = 10;
    std::string out_dir = "out";
    int threads = 0; // 0 = hardware concurrency
};

struct RunOutcome {
    bool failed = false;
    std::string error;
    double purity = 0.0, nmi = 0.0, accuracy = 0.0;
    double time_s = 0.0;
    std::vector<int> assignments;
    std::vector<double> objectives; // per iteration
};

struct CellResult {
    std::string name;
    std::string schedule = "-";
    std::string gamma = "-";
    std::string project = "-";
    bool shrink = false;
    std::vector<RunOutcome> runs;
    double mean_purity = 0.0, mean_nmi = 0.0, mean_accuracy = 0.0, mean_time_s = 0.0;
    double speedup_vs_baseline = 0.0;
    int failures = 0;
};

struct ExperimentReport {
    std::vector<CellResult> cells;
    int failures = 0;
    std::string aggregate_csv_path;
};

// Deterministic per-repeat seed; runs within a repeat share it, so every
// method starts from the same Euclidean initialization.
inline std::uint64_t repeat_seed(std::uint64_t master, int repeat) {
    return derive_seed(master, static_cast<std::uint64_t>(repeat));
}

namespace detail {

struct CellSpec {
    std::string name;
    bool is_kmeans = false;
    bool is_baseline = false;
    Schedule schedule = Schedule::fix;
    double gamma_min = 1.0;
    ProjectTarget project = ProjectTarget::both;
    bool shrink = true;
};

inline std::string gamma_label(double g) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", g);
    return buf;
}

inline std::vector<CellSpec> enumerate_cells(const ExperimentSpec& spec) {
    std::vector<CellSpec> cells;
    {
        CellSpec km;
        km.name = "kmeans";
        km.is_kmeans = true;
        cells.push_back(km);
    }
    {
        CellSpec base;
        base.name = "baseline";
        base.is_baseline = true;
        cells.push_back(base);
    }
    bool none_emitted = false;
    for (const Schedule sched : spec.schedules) {
        for (const ProjectTarget proj : spec.projects) {
            if (proj == ProjectTarget::none) {
                // schedule and gamma have no effect without projection;
                // one shrink-only cell covers it
                if (!none_emitted) {
                    CellSpec c;
                    c.name = std::string("shrink_only") + (spec.shrink ? "" : "_noshrink");
                    c.schedule = sched;
                    c.gamma_min = 1.0;
                    c.project = ProjectTarget::none;
                    c.shrink = spec.shrink;
                    cells.push_back(c);
                    none_emitted = true;
                }
                continue;
            }
            for (const double g : spec.gamma_mins) {
                CellSpec c;
                c.schedule = sched;
                c.gamma_min = g;
                c.project = proj;
                c.shrink = spec.shrink;
                c.name = std::string(to_string(sched)) + "_g" + gamma_label(g) + "_" +
                         to_string(proj) + (spec.shrink ? "" : "_noshrink");
                cells.push_back(c);
            }
        }
    }
    return cells;
}

inline nlohmann::json config_echo(const ExperimentSpec& spec, const CellSpec& cell,
                                  std::uint64_t run_seed, const BarycenterConfig& bary) {
    nlohmann::json j;
    j["method"] = cell.is_kmeans ? "kmeans" : (cell.is_baseline ? "baseline" : "sspw");
    j["cell"] = cell.name;
    j["k"] = spec.k;
    j["p"] = spec.p;
    j["t_max"] = spec.t_max;
    j["seed"] = run_seed;
    j["master_seed"] = spec.seed;
    if (!cell.is_kmeans && !cell.is_baseline) {
        j["schedule"] = to_string(cell.schedule);
        j["gamma_min"] = cell.gamma_min;
        j["project"] = to_string(cell.project);
        j["shrink"] = cell.shrink;
    }
    if (!cell.is_kmeans) {
        j["barycenter_epsilon"] = bary.epsilon;
        j["barycenter_max_iters"] = bary.max_iters;
        j["barycenter_tol"] = bary.tol;
    }
    return j;
}

} // namespace detail

// Runs the full study grid: Euclidean k-means and the Wasserstein baseline
// as reference rows, then one cell per (schedule, gamma_min, projection
// target). Each repeat regenerates the synthetic dataset (or reuses the
// loaded file) under a repeat-indexed seed shared by all methods. Every
// run writes trace/result/labels/summary files; the aggregate table
// carries mean metrics, mean time, and speedup against the baseline.
// Failed runs are recorded and the rest of the grid still executes.
inline ExperimentReport run_experiment(const ExperimentSpec& spec) {
    if (spec.repeats < 1) throw config_error("run_experiment: repeats must be >= 1");
    if (spec.k < 1) throw config_error("run_experiment: k must be >= 1");
    if (spec.schedules.empty() || spec.projects.empty() || spec.gamma_mins.empty())
        throw config_error("run_experiment: empty grid");
    for (double g : spec.gamma_mins)
        if (!(g > 0.0) || g > 1.0)
            throw config_error("run_experiment: gamma_min values must be in (0, 1]");
    if (spec.dataset_path.empty() == !spec.synthetic.has_value())
        throw config_error("run_experiment: exactly one of dataset path or synthetic spec");

    namespace fs = std::filesystem;
    fs::create_directories(spec.out_dir);

    std::optional<LabeledDataset> file_dataset;
    if (!spec.dataset_path.empty()) file_dataset = load_dataset(spec.dataset_path);

    auto cells_spec = detail::enumerate_cells(spec);
    ExperimentReport report;
    report.cells.resize(cells_spec.size());
    for (std::size_t ci = 0; ci < cells_spec.size(); ++ci) {
        CellResult& cr = report.cells[ci];
        cr.name = cells_spec[ci].name;
        if (!cells_spec[ci].is_kmeans && !cells_spec[ci].is_baseline) {
            cr.schedule = to_string(cells_spec[ci].schedule);
            cr.gamma = cells_spec[ci].project == ProjectTarget::none
                           ? "-"
                           : detail::gamma_label(cells_spec[ci].gamma_min);
            cr.project = to_string(cells_spec[ci].project);
            cr.shrink = cells_spec[ci].shrink;
        }
        cr.runs.resize(static_cast<std::size_t>(spec.repeats));
    }

    for (int r = 0; r < spec.repeats; ++r) {
        const std::uint64_t run_seed = repeat_seed(spec.seed, r);
        LabeledDataset ds = file_dataset
                                ? *file_dataset
                                : make_synthetic_dataset(spec.synthetic->classes,
                                                         spec.synthetic->per_class,
                                                         spec.synthetic->bins,
                                                         spec.synthetic->sep, run_seed);
        const GroundCost C = build_ground_cost(*ds.geometry, *ds.geometry, spec.p);
        const BarycenterConfig bary = default_barycenter_config(C);

        for (std::size_t ci = 0; ci < cells_spec.size(); ++ci) {
            const detail::CellSpec& cell = cells_spec[ci];
            RunOutcome& outcome = report.cells[ci].runs[static_cast<std::size_t>(r)];
            const fs::path run_dir = fs::path(spec.out_dir) / cell.name / ("rep" + std::to_string(r));
            fs::create_directories(run_dir);
            try {
                ClusteringRun run;
                const auto t0 = std::chrono::steady_clock::now();
                if (cell.is_kmeans) {
                    run = euclidean_kmeans(ds.samples, spec.k, run_seed);
                } else if (cell.is_baseline) {
                    run = wasserstein_kmeans(ds.samples, C, spec.k, spec.t_max, bary, run_seed,
                                             spec.threads);
                } else {
                    SspwConfig cfg;
                    cfg.k = spec.k;
                    cfg.schedule = cell.schedule;
                    cfg.gamma_min = cell.gamma_min;
                    cfg.t_max = spec.t_max;
                    cfg.project_samples = cell.project == ProjectTarget::sample ||
                                          cell.project == ProjectTarget::both;
                    cfg.project_centroids = cell.project == ProjectTarget::centroid ||
                                            cell.project == ProjectTarget::both;
                    cfg.shrink_enabled = cell.shrink;
                    cfg.seed = run_seed;
                    cfg.p = spec.p;
                    cfg.barycenter_cfg = bary;
                    run = sspw_kmeans(ds.samples, C, cfg, spec.threads);
                }
                const double total_s =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

                MetricsReport metrics;
                metrics.purity = purity(run.assignments, ds.labels);
                metrics.nmi = nmi(run.assignments, ds.labels);
                metrics.accuracy = accuracy(run.assignments, ds.labels);
                metrics.wall_time_s = total_s;
                for (const auto& rec : run.trace)
                    metrics.per_iteration.emplace_back(rec.assign_time_s, rec.update_time_s);

                outcome.purity = metrics.purity;
                outcome.nmi = metrics.nmi;
                outcome.accuracy = metrics.accuracy;
                outcome.time_s = total_s;
                outcome.assignments = run.assignments;
                outcome.objectives.reserve(run.trace.size());
                for (const auto& rec : run.trace) outcome.objectives.push_back(rec.objective);

                save_trace_csv(run, (run_dir / "trace.csv").string());
                save_result_csv(run, (run_dir / "result.csv").string());
                save_labels_csv(run.assignments, (run_dir / "labels.csv").string());
                save_summary_json(metrics, detail::config_echo(spec, cell, run_seed, bary),
                                  total_s, (run_dir / "summary.json").string());
            } catch (const std::exception& e) {
                outcome.failed = true;
                outcome.error = e.what();
                ++report.cells[ci].failures;
                ++report.failures;
                std::ofstream err(run_dir / "error.txt");
                err << e.what() << '\n';
            }
        }
    }

    // Aggregate means over successful runs; speedup against the baseline row.
    double baseline_time = 0.0;
    for (CellResult& cr : report.cells) {
        int ok = 0;
        for (const RunOutcome& o : cr.runs) {
            if (o.failed) continue;
            cr.mean_purity += o.purity;
            cr.mean_nmi += o.nmi;
            cr.mean_accuracy += o.accuracy;
            cr.mean_time_s += o.time_s;
            ++ok;
        }
        if (ok > 0) {
            cr.mean_purity /= ok;
            cr.mean_nmi /= ok;
            cr.mean_accuracy /= ok;
            cr.mean_time_s /= ok;
        }
        if (cr.name == "baseline") baseline_time = cr.mean_time_s;
    }
    for (CellResult& cr : report.cells)
        cr.speedup_vs_baseline = cr.mean_time_s > 0.0 ? baseline_time / cr.mean_time_s : 0.0;

    const fs::path agg = fs::path(spec.out_dir) / "aggregate.csv";
    {
        std::ofstream out(agg);
        out << "method,schedule,gamma_min,project,shrink,purity,nmi,accuracy,mean_time_s,"
               "speedup_vs_baseline\n";
        for (const CellResult& cr : report.cells) {
            out << cr.name << ',' << cr.schedule << ',' << cr.gamma << ',' << cr.project << ','
                << (cr.name == "kmeans" || cr.name == "baseline" ? "-"
                                                                 : (cr.shrink ? "yes" : "no"))
                << ',' << detail::fmt_g17(cr.mean_purity) << ',' << detail::fmt_g17(cr.mean_nmi)
                << ',' << detail::fmt_g17(cr.mean_accuracy) << ','
                << detail::fmt_time(cr.mean_time_s) << ','
                << detail::fmt_time(cr.speedup_vs_baseline) << '\n';
        }
    }
    report.aggregate_csv_path = agg.string();
    return report;
}

} // namespace sspw
