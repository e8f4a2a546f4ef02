// Command-line front end: generate / profile / resample / evaluate / select /
// experiment subcommands with deterministic outputs.
//
// Exit codes: 0 success, 2 invalid arguments, 3 degenerate-dataset or
// calibration errors. Diagnostics go to stderr only.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "imba/cv.hpp"
#include "imba/dataset.hpp"
#include "imba/experiments.hpp"
#include "imba/learners.hpp"
#include "imba/metrics.hpp"
#include "imba/profile.hpp"
#include "imba/resample.hpp"
#include "imba/selector.hpp"
#include "imba/synthgen.hpp"

namespace {

using nlohmann::ordered_json;

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

imba::Dataset load_dataset(const std::string& path) {
    if (!std::filesystem::exists(path)) {
        throw imba::invalid_argument_error("no such file: " + path);
    }
    return imba::read_csv_file(path);
}

ordered_json profile_json(const imba::DataProfile& p) {
    ordered_json j;
    j["ir"] = p.ir;
    j["separability"] = p.separability;
    j["n_minority"] = p.n_minority;
    j["cluster_estimate"] = p.cluster_estimate;
    if (p.silhouette_best) {
        j["silhouette_best"] = *p.silhouette_best;
    } else {
        j["silhouette_best"] = nullptr;
    }
    return j;
}

int cmd_generate(const imba::GenSpec& spec, const std::string& out_path) {
    const auto outcome = imba::generate(spec);
    imba::write_csv_file(out_path, outcome.dataset);
    ordered_json meta;
    meta["ir"] = spec.ir;
    meta["sep_target"] = spec.sep_target;
    meta["realized_sep"] = outcome.realized_sep;
    meta["realized_ir"] = outcome.realized_ir;
    meta["clusters"] = spec.clusters;
    meta["n_total"] = outcome.dataset.size();
    meta["dim"] = spec.dim;
    meta["seed"] = spec.seed.seed;
    meta["delta_used"] = outcome.delta_used;
    auto meta_path = std::filesystem::path(out_path);
    meta_path.replace_extension(".meta.json");
    imba::write_file_atomic(meta_path, meta.dump(2) + "\n");
    return 0;
}

int cmd_evaluate(const std::string& in, const std::string& methods_arg,
                 const std::string& learners_arg, int folds, std::uint64_t seed,
                 const std::string& out_path) {
    const auto data = load_dataset(in);
    std::vector<imba::MethodId> methods;
    for (const auto& m : split_list(methods_arg)) methods.push_back(imba::parse_method(m));
    std::vector<imba::LearnerKind> learners;
    for (const auto& l : split_list(learners_arg)) learners.push_back(imba::parse_learner(l));
    if (methods.empty() || learners.empty()) {
        throw imba::invalid_argument_error("evaluate: need at least one method and learner");
    }

    const imba::RngSeed root{seed, 0};
    const auto plan = imba::stratified_folds(data, folds, imba::derive_stream(root, "folds"));
    ordered_json reports = ordered_json::array();
    ordered_json improvements = ordered_json::array();
    std::map<imba::LearnerKind, imba::MetricReport> baseline;
    for (imba::LearnerKind lk : learners) {
        baseline[lk] = imba::evaluate_pipeline(
            data, imba::MethodId::BASELINE, {lk, {}}, plan,
            imba::derive_stream(root, "BASELINE/" + imba::learner_name(lk)));
    }
    for (imba::MethodId method : methods) {
        for (imba::LearnerKind lk : learners) {
            const auto rep =
                method == imba::MethodId::BASELINE
                    ? baseline[lk]
                    : imba::evaluate_pipeline(
                          data, method, {lk, {}}, plan,
                          imba::derive_stream(root, imba::method_name(method) + "/" +
                                                        imba::learner_name(lk)));
            ordered_json r;
            r["method"] = imba::method_name(method);
            r["learner"] = imba::learner_name(lk);
            r["effective_folds"] = rep.effective_folds;
            r["skipped_folds"] = rep.skipped_folds;
            for (imba::MetricKind m : imba::kAllMetrics) {
                r[imba::metric_name(m)] = {{"mean", rep.mean_of(m)}, {"sd", rep.sd_of(m)}};
            }
            reports.push_back(std::move(r));
            if (method != imba::MethodId::BASELINE) {
                for (imba::MetricKind m : imba::kAllMetrics) {
                    ordered_json imp;
                    imp["method"] = imba::method_name(method);
                    imp["learner"] = imba::learner_name(lk);
                    imp["metric"] = imba::metric_name(m);
                    const double base = baseline[lk].mean_of(m);
                    const double over = rep.mean_of(m);
                    imp["absolute"] = over - base;
                    const auto rel = imba::relative_improvement(base, over);
                    if (rel) {
                        imp["relative"] = *rel;
                    } else {
                        imp["relative"] = nullptr;
                    }
                    improvements.push_back(std::move(imp));
                }
            }
        }
    }
    ordered_json out;
    out["reports"] = std::move(reports);
    out["improvements"] = std::move(improvements);
    imba::write_file_atomic(out_path, out.dump(2) + "\n");
    return 0;
}

imba::ExperimentConfig config_from_json(const nlohmann::json& j, imba::ExperimentConfig cfg) {
    if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("folds")) cfg.folds = j["folds"].get<int>();
    if (j.contains("primary_metric")) cfg.primary = imba::parse_metric(j["primary_metric"]);
    if (j.contains("learners")) {
        cfg.learners.clear();
        for (const auto& l : j["learners"]) cfg.learners.push_back(imba::parse_learner(l));
    }
    if (j.contains("dataset_csvs")) cfg.dataset_csvs = j["dataset_csvs"].get<std::vector<std::string>>();
    if (j.contains("ir_grid")) cfg.ir_grid = j["ir_grid"].get<std::vector<double>>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"imbalanced-classification experiment toolkit"};
    app.require_subcommand(1);

    // generate
    auto* generate = app.add_subcommand("generate", "emit a controlled Gaussian-mixture dataset");
    imba::GenSpec spec;
    std::uint64_t gen_seed = 17;
    std::string gen_out;
    generate->add_option("--ir", spec.ir, "target imbalance ratio")->required();
    generate->add_option("--sep", spec.sep_target, "target separability")->required();
    generate->add_option("--clusters", spec.clusters, "minority cluster count");
    generate->add_option("--n", spec.n_total, "total sample count");
    generate->add_option("--dim", spec.dim, "feature dimension");
    generate->add_option("--seed", gen_seed, "root seed");
    generate->add_option("--out", gen_out, "output csv path")->required();

    // profile
    auto* profile = app.add_subcommand("profile", "print the measured data profile as JSON");
    std::string profile_in;
    std::uint64_t profile_seed = 17;
    profile->add_option("input", profile_in, "dataset csv")->required();
    profile->add_option("--seed", profile_seed, "root seed");

    // resample
    auto* resample = app.add_subcommand("resample", "apply one resampling method");
    std::string rs_method, rs_in, rs_out;
    std::uint64_t rs_seed = 17;
    resample->add_option("--method", rs_method, "method name")->required();
    resample->add_option("--in", rs_in, "input csv")->required();
    resample->add_option("--out", rs_out, "output csv")->required();
    resample->add_option("--seed", rs_seed, "root seed");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "cross-validated metric report");
    std::string ev_in, ev_methods = "smote", ev_learners = "logistic,tree", ev_out = "report.json";
    int ev_folds = 5;
    std::uint64_t ev_seed = 17;
    evaluate->add_option("--in", ev_in, "input csv")->required();
    evaluate->add_option("--methods", ev_methods, "comma-separated methods");
    evaluate->add_option("--learners", ev_learners, "comma-separated learners");
    evaluate->add_option("--folds", ev_folds, "fold count");
    evaluate->add_option("--seed", ev_seed, "root seed");
    evaluate->add_option("--out", ev_out, "report path");

    // select
    auto* select = app.add_subcommand("select", "data-aware method recommendation");
    std::string sel_in;
    std::uint64_t sel_seed = 17;
    imba::SelectorThresholds thresholds;
    select->add_option("input", sel_in, "dataset csv")->required();
    select->add_option("--seed", sel_seed, "root seed");
    select->add_option("--sep-low", thresholds.sep_low, "low-separability threshold");
    select->add_option("--sep-high", thresholds.sep_high, "high-separability threshold");
    select->add_option("--ir-low", thresholds.ir_low, "IR bound for the low-separability branch");
    select->add_option("--ir-high", thresholds.ir_high, "IR bound for the high-separability branch");

    // experiment
    auto* experiment = app.add_subcommand("experiment", "run a named experiment");
    std::string ex_name, ex_config, ex_out = "results";
    std::uint64_t ex_seed = 0;
    bool ex_seed_given = false;
    int ex_threads = 0;
    experiment->add_option("--name", ex_name, "experiment name")->required();
    experiment->add_option("--config", ex_config, "config json path");
    experiment->add_option("--out", ex_out, "output directory");
    experiment->add_option("--seed", ex_seed, "single root seed (overrides config seeds)")
        ->each([&](const std::string&) { ex_seed_given = true; });
    experiment->add_option("--threads", ex_threads, "worker threads (0 = all cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*generate) {
            spec.seed = {gen_seed, 0};
            return cmd_generate(spec, gen_out);
        }
        if (*profile) {
            const auto p = imba::profile_dataset(load_dataset(profile_in), {profile_seed, 0});
            std::cout << profile_json(p).dump(2) << "\n";
            return 0;
        }
        if (*resample) {
            const auto method = imba::parse_method(rs_method);
            const auto result = imba::apply_method(method, load_dataset(rs_in), {rs_seed, 0});
            imba::write_csv_file(rs_out, result.data);
            return 0;
        }
        if (*evaluate) {
            return cmd_evaluate(ev_in, ev_methods, ev_learners, ev_folds, ev_seed, ev_out);
        }
        if (*select) {
            const auto p = imba::profile_dataset(load_dataset(sel_in), {sel_seed, 0});
            const auto decision = imba::select(p, thresholds);
            ordered_json j;
            j["profile"] = profile_json(p);
            j["branch"] = decision.branch;
            j["recommendation"] = imba::recommendation_name(decision.recommendation);
            j["methods"] = imba::recommendation_methods(decision.recommendation);
            std::cout << j.dump(2) << "\n";
            return 0;
        }
        if (*experiment) {
            imba::ExperimentConfig cfg;
            cfg.id = imba::parse_experiment(ex_name);
            if (!ex_config.empty()) {
                if (!std::filesystem::exists(ex_config)) {
                    throw imba::invalid_argument_error("no such file: " + ex_config);
                }
                std::ifstream f(ex_config);
                cfg = config_from_json(nlohmann::json::parse(f), cfg);
            }
            if (ex_seed_given) cfg.seeds = {ex_seed};
            if (ex_threads > 0) cfg.threads = ex_threads;
            const auto result = imba::run_experiment(cfg);
            imba::write_experiment(ex_out, cfg, result);
            return 0;
        }
    } catch (const imba::invalid_argument_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const imba::degenerate_dataset_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const imba::calibration_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
