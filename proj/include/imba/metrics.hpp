#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "imba/error.hpp"
#include "imba/stats.hpp"

namespace imba {

enum class MetricKind { AUC_ROC, AUC_PR, F1, GMEAN, RECALL, SPECIFICITY, PRECISION, BAL_ACC };

inline constexpr std::array<MetricKind, 8> kAllMetrics = {
    MetricKind::AUC_ROC, MetricKind::AUC_PR,  MetricKind::F1,        MetricKind::GMEAN,
    MetricKind::RECALL,  MetricKind::SPECIFICITY, MetricKind::PRECISION, MetricKind::BAL_ACC};

inline std::string metric_name(MetricKind m) {
    switch (m) {
        case MetricKind::AUC_ROC: return "auc_roc";
        case MetricKind::AUC_PR: return "auc_pr";
        case MetricKind::F1: return "f1";
        case MetricKind::GMEAN: return "gmean";
        case MetricKind::RECALL: return "recall";
        case MetricKind::SPECIFICITY: return "specificity";
        case MetricKind::PRECISION: return "precision";
        case MetricKind::BAL_ACC: return "bal_acc";
    }
    return "?";
}

inline MetricKind parse_metric(std::string name) {
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    for (MetricKind m : kAllMetrics) {
        if (metric_name(m) == name) return m;
    }
    throw invalid_argument_error("unknown metric: " + name);
}

// Rank-based (Mann-Whitney) AUC with average ranks for tied scores.
inline double auc_roc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw invalid_argument_error("auc_roc: length mismatch");
    std::size_t n_pos = 0;
    for (int y : labels) n_pos += (y == 1);
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) throw undefined_metric_error("auc_roc: single-class labels");
    const auto r = stats::ranks(scores);
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) rank_sum += r[i];
    }
    const double np = static_cast<double>(n_pos);
    const double u = rank_sum - np * (np + 1.0) / 2.0;
    return u / (np * static_cast<double>(n_neg));
}

// Average precision: thresholds at distinct scores descending, tied scores
// grouped into one step; AP = sum (R_i - R_{i-1}) * P_i.
inline double auc_pr(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw invalid_argument_error("auc_pr: length mismatch");
    std::size_t n_pos = 0;
    for (int y : labels) n_pos += (y == 1);
    if (n_pos == 0) throw undefined_metric_error("auc_pr: no positive labels");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    double ap = 0.0;
    double prev_recall = 0.0;
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    const std::size_t n = order.size();
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        for (std::size_t k = i; k <= j; ++k) {
            if (labels[order[k]] == 1) ++tp; else ++fp;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j + 1;
    }
    return ap;
}

struct ConfusionMetrics {
    double recall = 0.0;
    double specificity = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
    double gmean = 0.0;
    double bal_acc = 0.0;
};

// Predict positive iff score >= threshold.
inline ConfusionMetrics confusion_metrics(const std::vector<double>& scores,
                                          const std::vector<int>& labels,
                                          double threshold = 0.5) {
    if (scores.size() != labels.size()) throw invalid_argument_error("confusion_metrics: length mismatch");
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool pred = scores[i] >= threshold;
        if (labels[i] == 1) {
            pred ? ++tp : ++fn;
        } else {
            pred ? ++fp : ++tn;
        }
    }
    if (tp + fn == 0 || tn + fp == 0) throw undefined_metric_error("confusion_metrics: single-class labels");
    ConfusionMetrics m;
    m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    m.specificity = static_cast<double>(tn) / static_cast<double>(tn + fp);
    m.precision = (tp + fp) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    m.f1 = (m.precision + m.recall) == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    m.gmean = std::sqrt(m.recall * m.specificity);
    m.bal_acc = 0.5 * (m.recall + m.specificity);
    return m;
}

inline double metric_value(MetricKind kind, const std::vector<double>& scores,
                           const std::vector<int>& labels, double threshold = 0.5) {
    switch (kind) {
        case MetricKind::AUC_ROC: return auc_roc(scores, labels);
        case MetricKind::AUC_PR: return auc_pr(scores, labels);
        default: break;
    }
    const auto m = confusion_metrics(scores, labels, threshold);
    switch (kind) {
        case MetricKind::F1: return m.f1;
        case MetricKind::GMEAN: return m.gmean;
        case MetricKind::RECALL: return m.recall;
        case MetricKind::SPECIFICITY: return m.specificity;
        case MetricKind::PRECISION: return m.precision;
        case MetricKind::BAL_ACC: return m.bal_acc;
        default: break;
    }
    throw invalid_argument_error("metric_value: unknown metric");
}

// Ceiling-normalized improvement; undefined (nullopt) when base == 1.
inline std::optional<double> relative_improvement(double base, double over) {
    if (base >= 1.0) return std::nullopt;
    return (over - base) / (1.0 - base);
}

} // namespace imba
