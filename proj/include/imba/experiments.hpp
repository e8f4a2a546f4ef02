#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "imba/cv.hpp"
#include "imba/dataset.hpp"
#include "imba/error.hpp"
#include "imba/learners.hpp"
#include "imba/metrics.hpp"
#include "imba/profile.hpp"
#include "imba/resample.hpp"
#include "imba/rng.hpp"
#include "imba/stats.hpp"
#include "imba/synthgen.hpp"

namespace imba {

enum class ExperimentId { STAGE1, B1, B2, C1, C2, C3, VAL_A, VAL_B };

inline std::string experiment_name(ExperimentId id) {
    switch (id) {
        case ExperimentId::STAGE1: return "stage1";
        case ExperimentId::B1: return "b1";
        case ExperimentId::B2: return "b2";
        case ExperimentId::C1: return "c1";
        case ExperimentId::C2: return "c2";
        case ExperimentId::C3: return "c3";
        case ExperimentId::VAL_A: return "val_a";
        case ExperimentId::VAL_B: return "val_b";
    }
    return "?";
}

inline ExperimentId parse_experiment(std::string name) {
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    for (ExperimentId id : {ExperimentId::STAGE1, ExperimentId::B1, ExperimentId::B2,
                            ExperimentId::C1, ExperimentId::C2, ExperimentId::C3,
                            ExperimentId::VAL_A, ExperimentId::VAL_B}) {
        if (experiment_name(id) == name) return id;
    }
    throw invalid_argument_error("unknown experiment: " + name);
}

struct ExperimentConfig {
    ExperimentId id = ExperimentId::B2;
    std::vector<std::string> dataset_csvs;            // stage1 / b1 inputs
    std::vector<double> ir_grid;                      // b1 target IRs (empty = default)
    std::vector<LearnerKind> learners = {LearnerKind::LOGISTIC, LearnerKind::TREE};
    std::vector<std::uint64_t> seeds = {17, 29, 43};
    int folds = 5;
    MetricKind primary = MetricKind::AUC_ROC;
    int threads = 0; // 0 = hardware concurrency
};

struct VariantInfo {
    std::string id;
    double ir = 0.0;           // realized
    double sep_target = 0.0;
    double sep_realized = 0.0;
    int clusters = 0;
    std::size_t n_total = 0;
    std::size_t n_minority = 0;
};

struct RowRecord {
    VariantInfo variant;
    std::uint64_t seed = 0;
    MetricReport report;
    // improvement vs BASELINE on the same variant, learner, and folds
    std::array<double, 8> abs_improve{};
    std::array<std::optional<double>, 8> rel_improve{};
    // primary-metric improvement per scored fold, paired with the baseline
    std::vector<double> fold_deltas;
};

struct Headline {
    std::string name;
    std::string x_col;
    std::string y_col;
    stats::CorrelationResult corr;
    std::vector<double> x;
    std::vector<double> y;
    bool fdr_reject = false;
    bool small_n = false; // n < 15, Fisher CI is rough
};

struct ExperimentResult {
    ExperimentId id = ExperimentId::B2;
    std::vector<RowRecord> rows;
    std::vector<Headline> headlines;
    nlohmann::ordered_json extras = nlohmann::ordered_json::object();
    std::vector<std::string> flags;
};

namespace exp_detail {

template <class F>
inline void parallel_for(std::size_t n, int threads, F&& f) {
    if (threads <= 0) {
        threads = static_cast<int>(std::thread::hardware_concurrency());
        if (threads <= 0) threads = 1;
    }
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    f(i);
                } catch (...) {
                    std::scoped_lock lk(error_mu);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

struct VariantTask {
    VariantInfo info;
    Dataset data;
};

// All (method, learner) reports for one (variant, seed), with improvements
// against the BASELINE rows. Folds are shared across methods so improvements
// are paired.
inline std::vector<RowRecord> evaluate_variant(const VariantTask& task,
                                               const std::vector<MethodId>& methods,
                                               const ExperimentConfig& cfg,
                                               std::uint64_t seed) {
    const RngSeed root{seed, 0};
    const auto folds = stratified_folds(
        task.data, cfg.folds, derive_stream(root, "variant/" + task.info.id + "/folds"));

    std::map<LearnerKind, MetricReport> baseline;
    for (LearnerKind lk : cfg.learners) {
        LearnerSpec spec{lk, {}};
        baseline[lk] = evaluate_pipeline(
            task.data, MethodId::BASELINE, spec, folds,
            derive_stream(root, "variant/" + task.info.id + "/BASELINE/" + learner_name(lk)));
    }
    std::vector<RowRecord> rows;
    for (MethodId method : methods) {
        for (LearnerKind lk : cfg.learners) {
            RowRecord row;
            row.variant = task.info;
            row.seed = seed;
            if (method == MethodId::BASELINE) {
                row.report = baseline[lk];
            } else {
                LearnerSpec spec{lk, {}};
                row.report = evaluate_pipeline(
                    task.data, method, spec, folds,
                    derive_stream(root, "variant/" + task.info.id + "/" + method_name(method) +
                                            "/" + learner_name(lk)));
            }
            for (std::size_t m = 0; m < kAllMetrics.size(); ++m) {
                const double base = baseline[lk].mean[m];
                row.abs_improve[m] = row.report.mean[m] - base;
                row.rel_improve[m] = relative_improvement(base, row.report.mean[m]);
            }
            // folds are shared, so per-fold values pair up one to one
            const auto pi = static_cast<std::size_t>(cfg.primary);
            for (std::size_t f = 0; f < row.report.per_fold.size(); ++f) {
                row.fold_deltas.push_back(row.report.per_fold[f][pi] -
                                          baseline[lk].per_fold[f][pi]);
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

// Runs the (variant x seed) grid, deterministically ordered regardless of
// scheduling.
inline std::vector<RowRecord> run_grid(const std::vector<VariantTask>& variants,
                                       const std::vector<MethodId>& methods,
                                       const ExperimentConfig& cfg) {
    struct Task {
        std::size_t variant;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (std::size_t v = 0; v < variants.size(); ++v) {
        for (std::uint64_t s : cfg.seeds) tasks.push_back({v, s});
    }
    std::vector<std::vector<RowRecord>> results(tasks.size());
    parallel_for(tasks.size(), cfg.threads, [&](std::size_t i) {
        results[i] = evaluate_variant(variants[tasks[i].variant], methods, cfg, tasks[i].seed);
    });
    std::vector<RowRecord> rows;
    for (auto& r : results) {
        rows.insert(rows.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
    }
    return rows;
}

// One evaluation job with its own dataset realization: generated experiments
// draw a fresh dataset per (variant, seed) so seed replicates capture
// sampling variability, not just fold noise.
struct SeededTask {
    VariantTask task;
    std::uint64_t seed = 0;
};

inline std::vector<RowRecord> run_seeded(const std::vector<SeededTask>& jobs,
                                         const std::vector<MethodId>& methods,
                                         const ExperimentConfig& cfg) {
    std::vector<std::vector<RowRecord>> results(jobs.size());
    parallel_for(jobs.size(), cfg.threads, [&](std::size_t i) {
        results[i] = evaluate_variant(jobs[i].task, methods, cfg, jobs[i].seed);
    });
    std::vector<RowRecord> rows;
    for (auto& r : results) {
        rows.insert(rows.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
    }
    return rows;
}

// Mean improvement of `method` on `metric` for one (variant, seed), averaged
// over learners.
inline double delta_for(const std::vector<RowRecord>& rows, const std::string& variant_id,
                        std::uint64_t seed, MethodId method, MetricKind metric) {
    double total = 0.0;
    std::size_t n = 0;
    for (const auto& r : rows) {
        if (r.variant.id == variant_id && r.seed == seed && r.report.method == method) {
            total += r.abs_improve[static_cast<std::size_t>(metric)];
            ++n;
        }
    }
    return total / static_cast<double>(n);
}

struct DeltaTable {
    std::vector<std::string> variant_ids; // unique, in first-seen order
    std::map<std::string, VariantInfo> info;
    // per variant: per seed delta (averaged over learners)
    std::map<std::string, std::vector<double>> per_seed;

    double variant_mean(const std::string& id) const {
        const auto& v = per_seed.at(id);
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    }
};

inline DeltaTable delta_table(const std::vector<RowRecord>& rows, const ExperimentConfig& cfg,
                              MethodId method, MetricKind metric) {
    DeltaTable t;
    for (const auto& r : rows) {
        if (r.report.method != method) continue;
        if (!t.per_seed.contains(r.variant.id)) {
            t.variant_ids.push_back(r.variant.id);
            t.info[r.variant.id] = r.variant;
            t.per_seed[r.variant.id] = {};
        }
    }
    for (const auto& id : t.variant_ids) {
        for (std::uint64_t s : cfg.seeds) {
            t.per_seed[id].push_back(delta_for(rows, id, s, method, metric));
        }
    }
    return t;
}

inline Headline make_headline(std::string name, std::string x_col, std::string y_col,
                              std::vector<double> x, std::vector<double> y) {
    Headline h;
    h.name = std::move(name);
    h.x_col = std::move(x_col);
    h.y_col = std::move(y_col);
    h.corr = stats::pearson(x, y);
    h.small_n = h.corr.n < 15;
    h.x = std::move(x);
    h.y = std::move(y);
    return h;
}

inline GenSpec grid_spec(double ir, double sep, int clusters, int n_total, RngSeed gen_seed,
                         const std::string& label) {
    GenSpec spec;
    spec.ir = ir;
    spec.sep_target = sep;
    spec.clusters = clusters;
    spec.n_total = n_total;
    spec.dim = 5;
    spec.seed = derive_stream(gen_seed, label);
    return spec;
}

inline VariantTask make_variant(const GenSpec& spec, const std::string& id) {
    const auto outcome = generate(spec);
    VariantTask task;
    task.info.id = id;
    task.info.ir = outcome.realized_ir;
    task.info.sep_target = spec.sep_target;
    task.info.sep_realized = outcome.realized_sep;
    task.info.clusters = spec.clusters;
    task.info.n_total = outcome.dataset.size();
    task.info.n_minority = class_counts(outcome.dataset).n_minority;
    task.data = std::move(outcome.dataset);
    return task;
}

// The 12-configuration IR sweep: all 8 levels once, the 4 largest twice.
// Each root seed gets its own dataset realization of every configuration.
// IR sweep at fixed separability and cluster count. n_total = 800 keeps the
// top of the IR grid in the minority-scarcity regime (IR = 80 leaves only 10
// minority rows), where interpolation-based oversampling degrades; larger
// totals wash the IR moderation effect out.
inline std::vector<SeededTask> b2_variants(const ExperimentConfig& cfg) {
    std::vector<std::pair<double, int>> points;
    for (double ir : {2.0, 5.0, 10.0, 15.0, 20.0, 30.0, 50.0, 80.0}) points.emplace_back(ir, 0);
    for (double ir : {20.0, 30.0, 50.0, 80.0}) points.emplace_back(ir, 1);
    std::vector<SeededTask> jobs;
    jobs.reserve(points.size() * cfg.seeds.size());
    for (auto [ir, rep] : points) {
        const std::string id = "ir" + std::to_string(static_cast<int>(ir)) + "_rep" + std::to_string(rep);
        for (std::uint64_t seed : cfg.seeds) {
            jobs.push_back(
                {make_variant(grid_spec(ir, 1.0, 3, 800, {seed, 0}, "b2/" + id), id), seed});
        }
    }
    return jobs;
}

} // namespace exp_detail

// Cross-dataset baseline: per real dataset, profile plus the advantage of the
// boundary-focused method over plain SMOTE; headline correlations against IR.
inline ExperimentResult run_stage1(const std::vector<std::pair<std::string, Dataset>>& datasets,
                                   const ExperimentConfig& cfg) {
    if (datasets.size() < 5) throw invalid_argument_error("stage1: need at least 5 datasets");
    ExperimentResult result;
    result.id = ExperimentId::STAGE1;

    std::vector<exp_detail::VariantTask> variants;
    std::vector<DataProfile> profiles;
    for (const auto& [name, data] : datasets) {
        try {
            data.validate();
            const auto profile = profile_dataset(data, derive_stream({cfg.seeds.at(0), 0}, "stage1/profile/" + name));
            exp_detail::VariantTask task;
            task.info.id = name;
            task.info.ir = profile.ir;
            task.info.sep_realized = profile.separability;
            task.info.clusters = profile.cluster_estimate;
            task.info.n_total = data.size();
            task.info.n_minority = profile.n_minority;
            task.data = data;
            variants.push_back(std::move(task));
            profiles.push_back(profile);
        } catch (const degenerate_dataset_error& e) {
            result.flags.push_back("skipped dataset " + name + ": " + e.what());
        }
    }
    const std::vector<MethodId> methods = {MethodId::BASELINE, MethodId::SMOTE,
                                           MethodId::BORDERLINE_SMOTE};
    result.rows = exp_detail::run_grid(variants, methods, cfg);

    std::vector<double> ir, advantage, sep;
    for (std::size_t v = 0; v < variants.size(); ++v) {
        const auto& id = variants[v].info.id;
        double adv = 0.0;
        for (std::uint64_t s : cfg.seeds) {
            adv += exp_detail::delta_for(result.rows, id, s, MethodId::BORDERLINE_SMOTE, cfg.primary) -
                   exp_detail::delta_for(result.rows, id, s, MethodId::SMOTE, cfg.primary);
        }
        adv /= static_cast<double>(cfg.seeds.size());
        ir.push_back(variants[v].info.ir);
        advantage.push_back(adv);
        sep.push_back(profiles[v].separability);
    }
    result.headlines.push_back(exp_detail::make_headline(
        "pearson_ir_vs_advantage", "ir", "advantage_borderline_minus_smote", ir, advantage));
    result.headlines.push_back(
        exp_detail::make_headline("pearson_ir_vs_separability", "ir", "separability", ir, sep));
    return result;
}

// Within-dataset IR manipulation via class subsampling.
inline ExperimentResult run_b1(const Dataset& data, std::vector<double> ir_grid,
                               const ExperimentConfig& cfg) {
    ExperimentResult result;
    result.id = ExperimentId::B1;
    const auto counts = class_counts(data);
    const double natural = imbalance_ratio(counts);
    if (ir_grid.empty()) ir_grid = {2, 5, 10, 15, 20, 30, 50};
    const auto min_count = static_cast<std::size_t>(2 * cfg.folds);
    const RngSeed root{cfg.seeds.at(0), 0};

    std::vector<exp_detail::VariantTask> variants;
    for (double target : ir_grid) {
        Dataset variant;
        if (std::fabs(target - natural) / natural < 1e-9) {
            variant = data;
        } else if (target > natural) {
            const auto keep = static_cast<std::size_t>(
                std::llround(static_cast<double>(counts.n_majority) / target));
            if (keep < min_count || keep > counts.n_minority) {
                result.flags.push_back("b1: target IR " + std::to_string(target) + " unachievable");
                continue;
            }
            variant = subsample_class(data, 1, keep,
                                      derive_stream(root, "b1/ir" + std::to_string(target)));
        } else {
            const auto keep = static_cast<std::size_t>(
                std::llround(static_cast<double>(counts.n_minority) * target));
            if (keep < min_count || keep > counts.n_majority) {
                result.flags.push_back("b1: target IR " + std::to_string(target) + " unachievable");
                continue;
            }
            variant = subsample_class(data, 0, keep,
                                      derive_stream(root, "b1/ir" + std::to_string(target)));
        }
        exp_detail::VariantTask task;
        task.info.id = "ir" + std::to_string(target);
        task.info.ir = imbalance_ratio(class_counts(variant));
        task.info.sep_realized = separability(variant);
        task.info.n_total = variant.size();
        task.info.n_minority = class_counts(variant).n_minority;
        task.data = std::move(variant);
        variants.push_back(std::move(task));
    }
    const std::vector<MethodId> methods = {MethodId::BASELINE, MethodId::SMOTE};
    result.rows = exp_detail::run_grid(variants, methods, cfg);

    std::vector<double> x, y;
    const auto table = exp_detail::delta_table(result.rows, cfg, MethodId::SMOTE, cfg.primary);
    for (const auto& id : table.variant_ids) {
        for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
            x.push_back(table.info.at(id).ir);
            y.push_back(table.per_seed.at(id)[s]);
        }
    }
    result.headlines.push_back(
        exp_detail::make_headline("pearson_ir_vs_delta_auc_smote", "ir", "delta_auc_smote", x, y));
    return result;
}

// Controlled IR sweep at fixed S = 1.0 and 3 minority clusters.
inline ExperimentResult run_b2(const ExperimentConfig& cfg) {
    ExperimentResult result;
    result.id = ExperimentId::B2;
    const auto jobs = exp_detail::b2_variants(cfg);
    const std::vector<MethodId> methods = {MethodId::BASELINE, MethodId::SMOTE};
    result.rows = exp_detail::run_seeded(jobs, methods, cfg);

    const auto table = exp_detail::delta_table(result.rows, cfg, MethodId::SMOTE, cfg.primary);
    std::vector<double> x, y;
    for (const auto& id : table.variant_ids) {
        x.push_back(table.info.at(id).ir);
        y.push_back(table.variant_mean(id));
    }
    result.headlines.push_back(
        exp_detail::make_headline("pearson_ir_vs_delta_auc_smote", "ir", "delta_auc_smote", x, y));

    double worst_sep = 0.0;
    for (const auto& j : jobs) {
        worst_sep = std::max(worst_sep, std::fabs(j.task.info.sep_realized - 1.0));
    }
    result.extras["held_constant"] = {{"sep_target", 1.0},
                                      {"max_abs_sep_error", worst_sep},
                                      {"clusters", 3}};
    return result;
}

// Separability sweep at fixed IR = 10 and 3 clusters.
inline ExperimentResult run_c1(const ExperimentConfig& cfg) {
    ExperimentResult result;
    result.id = ExperimentId::C1;
    // Eight replicate datasets per separability level: the per-variant SMOTE
    // delta is small relative to fold noise, so the headline needs many
    // independent dataset realizations to resolve it. dim = 2 keeps the
    // high-separability baselines near their ceiling, which is the regime
    // where oversampling stops paying off.
    constexpr int kC1Reps = 8;
    constexpr int kC1Dim = 2;
    constexpr int kC1NTotal = 1500;
    std::vector<exp_detail::SeededTask> jobs;
    for (double s : {0.3, 0.5, 0.8, 1.0, 1.2, 1.5}) {
        for (int rep = 0; rep < kC1Reps; ++rep) {
            const std::string id = "s" + std::to_string(s) + "_rep" + std::to_string(rep);
            for (std::uint64_t seed : cfg.seeds) {
                GenSpec spec;
                spec.ir = 10.0;
                spec.sep_target = s;
                spec.clusters = 3;
                spec.n_total = kC1NTotal;
                spec.dim = kC1Dim;
                spec.seed = derive_stream({seed, 0}, "c1/" + id);
                jobs.push_back({exp_detail::make_variant(spec, id), seed});
            }
        }
    }
    const std::vector<MethodId> methods = {MethodId::BASELINE, MethodId::SMOTE};
    result.rows = exp_detail::run_seeded(jobs, methods, cfg);

    const auto table = exp_detail::delta_table(result.rows, cfg, MethodId::SMOTE, cfg.primary);
    // One point per variant: delta averaged over learners and seeds, against
    // the mean realized separability of that variant's seed datasets.
    std::vector<double> x, y;
    std::vector<double> low_group, high_group;
    for (const auto& id : table.variant_ids) {
        double sep = 0.0;
        int count = 0;
        for (const auto& j : jobs) {
            if (j.task.info.id == id) {
                sep += j.task.info.sep_realized;
                ++count;
            }
        }
        x.push_back(sep / count);
        y.push_back(table.variant_mean(id));
        if (id.rfind("s0.3", 0) == 0) low_group.push_back(table.variant_mean(id));
        if (id.rfind("s1.5", 0) == 0) high_group.push_back(table.variant_mean(id));
    }
    result.headlines.push_back(
        exp_detail::make_headline("pearson_sep_vs_delta_auc_smote", "sep_realized", "delta_auc_smote", x, y));
    {
        Headline h;
        h.name = "spearman_sep_vs_delta_auc_smote";
        h.x_col = "sep_realized";
        h.y_col = "delta_auc_smote";
        h.corr = stats::spearman(x, y);
        h.small_n = h.corr.n < 15;
        h.x = x;
        h.y = y;
        result.headlines.push_back(std::move(h));
    }
    result.extras["group_mean_delta_auc"] = {{"s0.3", stats::mean(low_group)},
                                             {"s1.5", stats::mean(high_group)}};
    return result;
}

// Cluster-structure contrast at fixed IR = 10 and S = 1.0.
inline ExperimentResult run_c2(const ExperimentConfig& cfg) {
    ExperimentResult result;
    result.id = ExperimentId::C2;
    std::vector<exp_detail::SeededTask> jobs;
    for (int k : {1, 2, 3, 5}) {
        const std::string id = "k" + std::to_string(k);
        for (std::uint64_t seed : cfg.seeds) {
            jobs.push_back({exp_detail::make_variant(
                                exp_detail::grid_spec(10.0, 1.0, k, 1100, {seed, 0}, "c2/" + id), id),
                            seed});
        }
    }
    const std::vector<MethodId> methods = {MethodId::BASELINE, MethodId::SMOTE, MethodId::ADASYN};
    result.rows = exp_detail::run_seeded(jobs, methods, cfg);

    for (MethodId method : {MethodId::SMOTE, MethodId::ADASYN}) {
        const auto table = exp_detail::delta_table(result.rows, cfg, method, cfg.primary);
        std::vector<double> multi, single; // per (variant, seed) deltas
        for (const auto& id : table.variant_ids) {
            const int k = table.info.at(id).clusters;
            for (double v : table.per_seed.at(id)) {
                if (k >= 3) multi.push_back(v);
                else if (k == 1) single.push_back(v);
            }
        }
        nlohmann::ordered_json contrast;
        contrast["group_mean_multi_cluster"] = stats::mean(multi);
        contrast["group_mean_single_cluster"] = stats::mean(single);
        contrast["mean_difference"] = stats::mean(multi) - stats::mean(single);
        try {
            const auto effect = stats::cohens_d(multi, single);
            contrast["cohens_d"] = effect.d;
            contrast["effect_label"] = effect.label;
        } catch (const undefined_effect_error&) {
            contrast["cohens_d"] = nullptr;
        } catch (const invalid_argument_error&) {
            // fewer than 2 points per group (e.g. single-seed runs)
            contrast["cohens_d"] = nullptr;
        }
        result.extras["contrast_" + method_name(method)] = contrast;
    }
    return result;
}

// Sample-size sweep at fixed IR = 10, S = 1.0, 3 clusters.
inline ExperimentResult run_c3(const ExperimentConfig& cfg) {
    ExperimentResult result;
    result.id = ExperimentId::C3;
    std::vector<exp_detail::SeededTask> jobs;
    for (int n : {200, 500, 800, 1100, 1500, 2000}) {
        const std::string id = "n" + std::to_string(n);
        bool valid = true;
        for (std::uint64_t seed : cfg.seeds) {
            GenSpec spec = exp_detail::grid_spec(10.0, 1.0, 3, n, {seed, 0}, "c3/" + id);
            try {
                gen_detail::validate_spec(spec);
            } catch (const invalid_argument_error& e) {
                result.flags.push_back("c3: n_total " + std::to_string(n) + " skipped: " + e.what());
                valid = false;
                break;
            }
            jobs.push_back({exp_detail::make_variant(spec, id), seed});
        }
        if (!valid && !jobs.empty() && jobs.back().task.info.id == id) {
            while (!jobs.empty() && jobs.back().task.info.id == id) jobs.pop_back();
        }
    }
    const std::vector<MethodId> methods = {MethodId::BASELINE, MethodId::SMOTE};
    result.rows = exp_detail::run_seeded(jobs, methods, cfg);

    const auto table = exp_detail::delta_table(result.rows, cfg, MethodId::SMOTE, cfg.primary);
    std::vector<double> x, y, small_group, large_group;
    for (const auto& id : table.variant_ids) {
        const auto n_min = static_cast<double>(table.info.at(id).n_minority);
        for (double v : table.per_seed.at(id)) {
            x.push_back(n_min);
            y.push_back(v);
        }
    }
    // Variance comparison uses fold-level paired deltas, which expose the
    // estimation noise that per-seed averaging would smooth away.
    for (const auto& r : result.rows) {
        if (r.report.method != MethodId::SMOTE) continue;
        const auto n_min = r.variant.n_minority;
        for (double v : r.fold_deltas) {
            if (n_min < 50) small_group.push_back(v);
            if (n_min >= 100) large_group.push_back(v);
        }
    }
    result.headlines.push_back(
        exp_detail::make_headline("pearson_nmin_vs_delta_auc_smote", "n_minority", "delta_auc_smote", x, y));
    result.extras["variance_comparison"] = {
        {"sd_small_nmin_lt_50", small_group.size() > 1 ? stats::stddev(small_group) : 0.0},
        {"sd_large_nmin_ge_100", large_group.size() > 1 ? stats::stddev(large_group) : 0.0},
        {"mean_small", small_group.empty() ? 0.0 : stats::mean(small_group)},
        {"mean_large", large_group.empty() ? 0.0 : stats::mean(large_group)}};
    return result;
}

namespace exp_detail {

// Per-variant absolute and relative improvement of SMOTE for one metric,
// averaged over learners and seeds; relative records with base == 1 excluded.
struct ImprovementColumns {
    std::vector<double> ir;
    std::vector<double> absolute;
    std::vector<double> ir_rel;
    std::vector<double> relative;
};

inline ImprovementColumns improvement_columns(const std::vector<RowRecord>& rows,
                                              const ExperimentConfig& cfg, MetricKind metric) {
    ImprovementColumns cols;
    std::vector<std::string> ids;
    std::map<std::string, double> irs;
    for (const auto& r : rows) {
        if (r.report.method != MethodId::SMOTE) continue;
        if (!irs.contains(r.variant.id)) {
            ids.push_back(r.variant.id);
            irs[r.variant.id] = r.variant.ir;
        }
    }
    const auto mi = static_cast<std::size_t>(metric);
    for (const auto& id : ids) {
        double abs_sum = 0.0, rel_sum = 0.0;
        std::size_t abs_n = 0, rel_n = 0;
        for (const auto& r : rows) {
            if (r.variant.id != id || r.report.method != MethodId::SMOTE) continue;
            abs_sum += r.abs_improve[mi];
            ++abs_n;
            if (r.rel_improve[mi]) {
                rel_sum += *r.rel_improve[mi];
                ++rel_n;
            }
        }
        cols.ir.push_back(irs[id]);
        cols.absolute.push_back(abs_sum / static_cast<double>(abs_n));
        if (rel_n > 0) {
            cols.ir_rel.push_back(irs[id]);
            cols.relative.push_back(rel_sum / static_cast<double>(rel_n));
        }
    }
    return cols;
}

} // namespace exp_detail

// Ceiling-effect control: absolute vs relative improvement correlations over
// the B2-style IR sweep for four metrics.
inline ExperimentResult run_val_a(const ExperimentConfig& cfg) {
    ExperimentResult result;
    result.id = ExperimentId::VAL_A;
    const auto jobs = exp_detail::b2_variants(cfg);
    const std::vector<MethodId> methods = {MethodId::BASELINE, MethodId::SMOTE};
    result.rows = exp_detail::run_seeded(jobs, methods, cfg);

    for (MetricKind metric : {MetricKind::AUC_ROC, MetricKind::AUC_PR, MetricKind::F1, MetricKind::GMEAN}) {
        const auto cols = exp_detail::improvement_columns(result.rows, cfg, metric);
        result.headlines.push_back(exp_detail::make_headline(
            "pearson_ir_vs_abs_" + metric_name(metric), "ir", "abs_improve_" + metric_name(metric),
            cols.ir, cols.absolute));
        result.headlines.push_back(exp_detail::make_headline(
            "pearson_ir_vs_rel_" + metric_name(metric), "ir", "rel_improve_" + metric_name(metric),
            cols.ir_rel, cols.relative));
    }
    return result;
}

// Multi-metric validation: IR vs relative improvement for all eight metrics,
// with FDR flags across the family and the mean r reported.
inline ExperimentResult run_val_b(const ExperimentConfig& cfg) {
    ExperimentResult result;
    result.id = ExperimentId::VAL_B;
    const auto jobs = exp_detail::b2_variants(cfg);
    const std::vector<MethodId> methods = {MethodId::BASELINE, MethodId::SMOTE};
    result.rows = exp_detail::run_seeded(jobs, methods, cfg);

    std::vector<double> pvals;
    double r_sum = 0.0;
    for (MetricKind metric : kAllMetrics) {
        const auto cols = exp_detail::improvement_columns(result.rows, cfg, metric);
        auto h = exp_detail::make_headline("pearson_ir_vs_rel_" + metric_name(metric), "ir",
                                           "rel_improve_" + metric_name(metric), cols.ir_rel,
                                           cols.relative);
        pvals.push_back(h.corr.p_two_tailed);
        r_sum += h.corr.r;
        result.headlines.push_back(std::move(h));
    }
    const auto reject = stats::benjamini_hochberg(pvals, 0.05);
    for (std::size_t i = 0; i < reject.size(); ++i) result.headlines[i].fdr_reject = reject[i];
    result.extras["mean_r"] = r_sum / static_cast<double>(kAllMetrics.size());
    result.extras["fdr_q"] = 0.05;
    return result;
}

// Recompute the primary headline excluding rows with IR > 100.
inline stats::CorrelationResult sensitivity_extreme_ir(const ExperimentResult& result,
                                                       double ir_cutoff = 100.0) {
    if (result.headlines.empty()) throw invalid_argument_error("sensitivity: no headlines");
    const auto& h = result.headlines.front();
    std::vector<double> x, y;
    for (std::size_t i = 0; i < h.x.size(); ++i) {
        if (h.x[i] <= ir_cutoff) {
            x.push_back(h.x[i]);
            y.push_back(h.y[i]);
        }
    }
    return stats::pearson(x, y);
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.id) {
        case ExperimentId::STAGE1: {
            std::vector<std::pair<std::string, Dataset>> datasets;
            for (const auto& path : cfg.dataset_csvs) {
                datasets.emplace_back(std::filesystem::path(path).stem().string(),
                                      read_csv_file(path));
            }
            return run_stage1(datasets, cfg);
        }
        case ExperimentId::B1: {
            if (cfg.dataset_csvs.size() != 1) {
                throw invalid_argument_error("b1: exactly one dataset csv required");
            }
            return run_b1(read_csv_file(cfg.dataset_csvs.front()), cfg.ir_grid, cfg);
        }
        case ExperimentId::B2: return run_b2(cfg);
        case ExperimentId::C1: return run_c1(cfg);
        case ExperimentId::C2: return run_c2(cfg);
        case ExperimentId::C3: return run_c3(cfg);
        case ExperimentId::VAL_A: return run_val_a(cfg);
        case ExperimentId::VAL_B: return run_val_b(cfg);
    }
    throw invalid_argument_error("run_experiment: unknown experiment");
}

// ---- emission ----

namespace exp_detail {

inline std::string csv_double(double v) {
    std::string s;
    detail::append_double(s, v);
    return s;
}

} // namespace exp_detail

inline std::string rows_csv(const ExperimentResult& result) {
    std::string out = "variant,ir,sep_target,sep_realized,clusters,n_total,n_minority,seed,"
                      "method,learner,effective_folds,skipped_folds";
    for (MetricKind m : kAllMetrics) {
        out += "," + metric_name(m) + "_mean," + metric_name(m) + "_sd";
    }
    for (MetricKind m : kAllMetrics) {
        out += ",abs_improve_" + metric_name(m) + ",rel_improve_" + metric_name(m);
    }
    out += "\n";
    for (const auto& r : result.rows) {
        out += r.variant.id;
        out += "," + exp_detail::csv_double(r.variant.ir);
        out += "," + exp_detail::csv_double(r.variant.sep_target);
        out += "," + exp_detail::csv_double(r.variant.sep_realized);
        out += "," + std::to_string(r.variant.clusters);
        out += "," + std::to_string(r.variant.n_total);
        out += "," + std::to_string(r.variant.n_minority);
        out += "," + std::to_string(r.seed);
        out += "," + method_name(r.report.method);
        out += "," + learner_name(r.report.learner);
        out += "," + std::to_string(r.report.effective_folds);
        out += "," + std::to_string(r.report.skipped_folds);
        for (std::size_t m = 0; m < kAllMetrics.size(); ++m) {
            out += "," + exp_detail::csv_double(r.report.mean[m]);
            out += "," + exp_detail::csv_double(r.report.sd[m]);
        }
        for (std::size_t m = 0; m < kAllMetrics.size(); ++m) {
            out += "," + exp_detail::csv_double(r.abs_improve[m]);
            out += ",";
            if (r.rel_improve[m]) out += exp_detail::csv_double(*r.rel_improve[m]);
        }
        out += "\n";
    }
    return out;
}

inline nlohmann::ordered_json headline_json(const ExperimentResult& result) {
    nlohmann::ordered_json j;
    j["experiment"] = experiment_name(result.id);
    j["headlines"] = nlohmann::ordered_json::array();
    for (const auto& h : result.headlines) {
        nlohmann::ordered_json e;
        e["name"] = h.name;
        e["x_col"] = h.x_col;
        e["y_col"] = h.y_col;
        e["n"] = h.corr.n;
        e["r"] = h.corr.r;
        e["p_two_tailed"] = h.corr.p_two_tailed;
        e["ci_low"] = h.corr.ci_low;
        e["ci_high"] = h.corr.ci_high;
        e["fdr_reject"] = h.fdr_reject;
        e["small_n"] = h.small_n;
        j["headlines"].push_back(std::move(e));
    }
    j["extras"] = result.extras;
    j["flags"] = result.flags;
    return j;
}

inline nlohmann::ordered_json manifest_json(const ExperimentConfig& cfg) {
    nlohmann::ordered_json j;
    j["experiment"] = experiment_name(cfg.id);
    j["seeds"] = cfg.seeds;
    j["folds"] = cfg.folds;
    j["primary_metric"] = metric_name(cfg.primary);
    j["learners"] = nlohmann::ordered_json::array();
    for (LearnerKind lk : cfg.learners) j["learners"].push_back(learner_name(lk));
    j["dataset_csvs"] = cfg.dataset_csvs;
    j["ir_grid"] = cfg.ir_grid;
    return j;
}

inline void write_experiment(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                             const ExperimentResult& result) {
    std::filesystem::create_directories(dir);
    write_file_atomic(dir / "rows.csv", rows_csv(result));
    write_file_atomic(dir / "headline.json", headline_json(result).dump(2) + "\n");
    write_file_atomic(dir / "manifest.json", manifest_json(cfg).dump(2) + "\n");
}

} // namespace imba
