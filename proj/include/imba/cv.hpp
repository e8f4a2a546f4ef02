#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "imba/dataset.hpp"
#include "imba/error.hpp"
#include "imba/learners.hpp"
#include "imba/metrics.hpp"
#include "imba/resample.hpp"
#include "imba/rng.hpp"

namespace imba {

struct FoldPlan {
    int k = 5;
    std::vector<int> assignments; // per-row fold index in [0, k)
};

// Within each class: shuffle, then deal round-robin.
inline FoldPlan stratified_folds(const Dataset& data, int k, RngSeed rng) {
    if (k < 2) throw invalid_argument_error("stratified_folds: k must be >= 2");
    FoldPlan plan;
    plan.k = k;
    plan.assignments.assign(data.size(), -1);
    for (int label : {0, 1}) {
        auto rows = data.rows_of(label);
        if (rows.size() < static_cast<std::size_t>(k)) {
            throw invalid_argument_error("stratified_folds: class smaller than k");
        }
        Rng gen(derive_stream(rng, "folds/class" + std::to_string(label)));
        gen.shuffle(rows);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            plan.assignments[rows[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
        }
    }
    return plan;
}

struct MetricReport {
    MethodId method = MethodId::BASELINE;
    LearnerKind learner = LearnerKind::LOGISTIC;
    std::array<double, 8> mean{};  // indexed by MetricKind order of kAllMetrics
    std::array<double, 8> sd{};
    std::vector<std::array<double, 8>> per_fold; // scored folds, in fold order
    int effective_folds = 0;       // folds actually scored
    int skipped_folds = 0;         // single-class test folds

    double mean_of(MetricKind m) const { return mean[static_cast<std::size_t>(m)]; }
    double sd_of(MetricKind m) const { return sd[static_cast<std::size_t>(m)]; }
};

// Stratified CV with resampling confined to training folds: for each fold,
// resample only the rows outside it, train, score the held-out rows.
inline MetricReport evaluate_pipeline(const Dataset& data, MethodId method,
                                      const LearnerSpec& learner, const FoldPlan& folds,
                                      RngSeed rng) {
    if (folds.assignments.size() != data.size()) {
        throw invalid_argument_error("evaluate_pipeline: fold plan does not cover data");
    }
    MetricReport report;
    report.method = method;
    report.learner = learner.kind;
    std::array<std::vector<double>, 8> per_fold;
    for (int f = 0; f < folds.k; ++f) {
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t i = 0; i < data.size(); ++i) {
            (folds.assignments[i] == f ? test_rows : train_rows).push_back(i);
        }
        const Dataset test = data.subset(test_rows);
        bool has_pos = false, has_neg = false;
        for (int y : test.labels) (y == 1 ? has_pos : has_neg) = true;
        if (!has_pos || !has_neg) {
            ++report.skipped_folds;
            continue;
        }
        const Dataset train_fold = data.subset(train_rows);
        const auto fold_rng = derive_stream(rng, "fold" + std::to_string(f));
        const auto resampled = apply_method(method, train_fold, derive_stream(fold_rng, "resample"));
        LearnerSpec spec = learner;
        spec.seed = derive_stream(fold_rng, "learner");
        const auto model = train(spec, resampled.data);
        const auto scores = model->score(test.features);
        std::array<double, 8> fold_values{};
        for (std::size_t m = 0; m < kAllMetrics.size(); ++m) {
            fold_values[m] = metric_value(kAllMetrics[m], scores, test.labels);
            per_fold[m].push_back(fold_values[m]);
        }
        report.per_fold.push_back(fold_values);
        ++report.effective_folds;
    }
    if (report.effective_folds == 0) {
        throw degenerate_dataset_error("evaluate_pipeline: every test fold was single-class");
    }
    for (std::size_t m = 0; m < kAllMetrics.size(); ++m) {
        const auto& v = per_fold[m];
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        report.mean[m] = mean;
        report.sd[m] = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
    }
    return report;
}

} // namespace imba
