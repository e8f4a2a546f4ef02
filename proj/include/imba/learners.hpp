#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "imba/dataset.hpp"
#include "imba/error.hpp"
#include "imba/rng.hpp"

namespace imba {

enum class LearnerKind { LOGISTIC, TREE, FOREST };

inline std::string learner_name(LearnerKind k) {
    switch (k) {
        case LearnerKind::LOGISTIC: return "logistic";
        case LearnerKind::TREE: return "tree";
        case LearnerKind::FOREST: return "forest";
    }
    return "?";
}

inline LearnerKind parse_learner(std::string name) {
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    if (name == "logistic") return LearnerKind::LOGISTIC;
    if (name == "tree") return LearnerKind::TREE;
    if (name == "forest") return LearnerKind::FOREST;
    throw invalid_argument_error("unknown learner: " + name);
}

struct LearnerSpec {
    LearnerKind kind = LearnerKind::LOGISTIC;
    RngSeed seed; // FOREST only
};

// Scores are minority-class probabilities in [0, 1]; scoring is pure.
class Model {
public:
    virtual ~Model() = default;
    virtual std::vector<double> score(const Matrix& rows) const = 0;
};

using TrainedModel = std::unique_ptr<const Model>;

inline constexpr double kLogisticLambda = 1e-4;
inline constexpr double kLogisticStep = 0.1;
inline constexpr int kLogisticMaxEpochs = 1000;
inline constexpr double kLogisticGradTol = 1e-6;
inline constexpr int kTreeMaxDepth = 10;
inline constexpr int kForestTrees = 100;

namespace learner_detail {

struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const Matrix& x) {
        const std::size_t n = x.rows(), d = x.cols();
        Standardizer s;
        s.mean.assign(d, 0.0);
        s.scale.assign(d, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = x.row(i);
            for (std::size_t j = 0; j < d; ++j) s.mean[j] += r[j];
        }
        for (double& v : s.mean) v /= static_cast<double>(n);
        std::vector<double> var(d, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = x.row(i);
            for (std::size_t j = 0; j < d; ++j) {
                const double dev = r[j] - s.mean[j];
                var[j] += dev * dev;
            }
        }
        for (std::size_t j = 0; j < d; ++j) {
            const double sd = std::sqrt(var[j] / static_cast<double>(n));
            if (sd > 0.0) {
                s.scale[j] = sd;
            } else {
                // zero-variance feature passes through unscaled
                s.mean[j] = 0.0;
                s.scale[j] = 1.0;
            }
        }
        return s;
    }

    Matrix apply(const Matrix& x) const {
        Matrix out(x.rows(), x.cols());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const auto r = x.row(i);
            auto o = out.row(i);
            for (std::size_t j = 0; j < x.cols(); ++j) o[j] = (r[j] - mean[j]) / scale[j];
        }
        return out;
    }
};

inline double sigmoid(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

} // namespace learner_detail

// Mean L2-regularized log-loss and its gradient; weights layout is [w_0..w_{d-1}, bias],
// regularization excludes the bias.
inline double logistic_loss(const std::vector<double>& w, const Matrix& x,
                            const std::vector<int>& y, double lambda) {
    const std::size_t n = x.rows(), d = x.cols();
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = x.row(i);
        double z = w[d];
        for (std::size_t j = 0; j < d; ++j) z += w[j] * r[j];
        // log(1 + exp(-m)) with m = z for y=1, -z for y=0, stable form
        const double m = y[i] == 1 ? z : -z;
        loss += m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
    }
    loss /= static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) loss += 0.5 * lambda * w[j] * w[j];
    return loss;
}

inline std::vector<double> logistic_gradient(const std::vector<double>& w, const Matrix& x,
                                             const std::vector<int>& y, double lambda) {
    const std::size_t n = x.rows(), d = x.cols();
    std::vector<double> g(d + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = x.row(i);
        double z = w[d];
        for (std::size_t j = 0; j < d; ++j) z += w[j] * r[j];
        const double err = learner_detail::sigmoid(z) - static_cast<double>(y[i]);
        for (std::size_t j = 0; j < d; ++j) g[j] += err * r[j];
        g[d] += err;
    }
    for (double& v : g) v /= static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) g[j] += lambda * w[j];
    return g;
}

namespace learner_detail {

class LogisticModel final : public Model {
public:
    Standardizer standardizer;
    std::vector<double> weights; // [w..., bias]

    std::vector<double> score(const Matrix& rows) const override {
        if (rows.cols() + 1 != weights.size()) {
            throw invalid_argument_error("score: feature dimension mismatch");
        }
        const Matrix z = standardizer.apply(rows);
        std::vector<double> out(rows.rows());
        const std::size_t d = rows.cols();
        for (std::size_t i = 0; i < rows.rows(); ++i) {
            const auto r = z.row(i);
            double s = weights[d];
            for (std::size_t j = 0; j < d; ++j) s += weights[j] * r[j];
            out[i] = sigmoid(s);
        }
        return out;
    }
};

inline TrainedModel train_logistic(const Dataset& data) {
    auto model = std::make_unique<LogisticModel>();
    model->standardizer = Standardizer::fit(data.features);
    const Matrix x = model->standardizer.apply(data.features);
    const std::size_t d = x.cols();
    std::vector<double> w(d + 1, 0.0);
    double step = kLogisticStep;
    double loss = logistic_loss(w, x, data.labels, kLogisticLambda);
    for (int epoch = 0; epoch < kLogisticMaxEpochs; ++epoch) {
        const auto g = logistic_gradient(w, x, data.labels, kLogisticLambda);
        double gmax = 0.0;
        for (double v : g) gmax = std::max(gmax, std::fabs(v));
        if (gmax < kLogisticGradTol) break;
        // fixed step with halving when the loss rises
        int halvings = 0;
        while (true) {
            std::vector<double> w_next = w;
            for (std::size_t j = 0; j <= d; ++j) w_next[j] -= step * g[j];
            const double next = logistic_loss(w_next, x, data.labels, kLogisticLambda);
            if (next <= loss + 1e-12 || halvings >= 20) {
                w = std::move(w_next);
                loss = next;
                break;
            }
            step *= 0.5;
            ++halvings;
        }
    }
    model->weights = std::move(w);
    return model;
}

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0; // leaf minority fraction
};

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
};

// Best Gini split over the candidate features; ties broken by (lower feature
// index, lower threshold) via strict improvement in iteration order.
inline SplitChoice best_split(const Matrix& x, const std::vector<int>& y,
                              const std::vector<std::size_t>& rows,
                              const std::vector<int>& features) {
    const std::size_t n = rows.size();
    std::size_t total_pos = 0;
    for (std::size_t i : rows) total_pos += (y[i] == 1);
    SplitChoice best;
    best.impurity = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, int>> vals(n);
    for (int f : features) {
        for (std::size_t i = 0; i < n; ++i) {
            vals[i] = {x(rows[i], static_cast<std::size_t>(f)), y[rows[i]]};
        }
        std::sort(vals.begin(), vals.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::size_t left_pos = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left_pos += (vals[i].second == 1);
            if (vals[i].first == vals[i + 1].first) continue;
            const double nl = static_cast<double>(i + 1);
            const double nr = static_cast<double>(n - i - 1);
            const double pl = static_cast<double>(left_pos) / nl;
            const double pr = static_cast<double>(total_pos - left_pos) / nr;
            const double gini = (nl * 2.0 * pl * (1.0 - pl) + nr * 2.0 * pr * (1.0 - pr)) /
                                static_cast<double>(n);
            if (gini < best.impurity) {
                best.found = true;
                best.impurity = gini;
                best.feature = f;
                best.threshold = 0.5 * (vals[i].first + vals[i + 1].first);
            }
        }
    }
    return best;
}

class TreeModel final : public Model {
public:
    std::vector<TreeNode> nodes;
    std::size_t dim = 0;

    double score_row(std::span<const double> r) const {
        int at = 0;
        while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
            const auto& nd = nodes[static_cast<std::size_t>(at)];
            at = r[static_cast<std::size_t>(nd.feature)] < nd.threshold ? nd.left : nd.right;
        }
        return nodes[static_cast<std::size_t>(at)].value;
    }

    std::vector<double> score(const Matrix& rows) const override {
        if (rows.cols() != dim) throw invalid_argument_error("score: feature dimension mismatch");
        std::vector<double> out(rows.rows());
        for (std::size_t i = 0; i < rows.rows(); ++i) out[i] = score_row(rows.row(i));
        return out;
    }
};

// Grows one CART node; `pick_features` supplies the candidate feature set
// (all features for a plain tree, a random subset per split for forests).
template <class FeaturePicker>
inline int grow_tree(TreeModel& tree, const Matrix& x, const std::vector<int>& y,
                     std::vector<std::size_t> rows, int depth, FeaturePicker&& pick_features) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    std::size_t pos = 0;
    for (std::size_t i : rows) pos += (y[i] == 1);
    const bool pure = pos == 0 || pos == rows.size();
    if (depth >= kTreeMaxDepth || rows.size() < 2 || pure) {
        tree.nodes[static_cast<std::size_t>(id)].value =
            static_cast<double>(pos) / static_cast<double>(rows.size());
        return id;
    }
    const auto split = best_split(x, y, rows, pick_features());
    if (!split.found) {
        tree.nodes[static_cast<std::size_t>(id)].value =
            static_cast<double>(pos) / static_cast<double>(rows.size());
        return id;
    }
    std::vector<std::size_t> left, right;
    for (std::size_t i : rows) {
        (x(i, static_cast<std::size_t>(split.feature)) < split.threshold ? left : right).push_back(i);
    }
    if (left.empty() || right.empty()) {
        tree.nodes[static_cast<std::size_t>(id)].value =
            static_cast<double>(pos) / static_cast<double>(rows.size());
        return id;
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow_tree(tree, x, y, std::move(left), depth + 1, pick_features);
    const int r = grow_tree(tree, x, y, std::move(right), depth + 1, pick_features);
    auto& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return id;
}

inline TrainedModel train_tree(const Dataset& data) {
    auto model = std::make_unique<TreeModel>();
    model->dim = data.dim();
    std::vector<std::size_t> rows(data.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::vector<int> all(data.dim());
    std::iota(all.begin(), all.end(), 0);
    grow_tree(*model, data.features, data.labels, std::move(rows), 0, [&all] { return all; });
    return model;
}

class ForestModel final : public Model {
public:
    std::vector<TreeModel> trees;
    std::size_t dim = 0;

    std::vector<double> score(const Matrix& rows) const override {
        if (rows.cols() != dim) throw invalid_argument_error("score: feature dimension mismatch");
        std::vector<double> out(rows.rows(), 0.0);
        for (const auto& t : trees) {
            for (std::size_t i = 0; i < rows.rows(); ++i) out[i] += t.score_row(rows.row(i));
        }
        for (double& v : out) v /= static_cast<double>(trees.size());
        return out;
    }
};

inline TrainedModel train_forest(const Dataset& data, RngSeed seed) {
    auto model = std::make_unique<ForestModel>();
    model->dim = data.dim();
    const std::size_t n = data.size();
    const std::size_t d = data.dim();
    const auto mtry = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
    std::vector<int> all(d);
    std::iota(all.begin(), all.end(), 0);
    model->trees.resize(kForestTrees);
    for (int t = 0; t < kForestTrees; ++t) {
        Rng gen(derive_stream(seed, "forest/tree" + std::to_string(t)));
        std::vector<std::size_t> rows(n);
        for (std::size_t i = 0; i < n; ++i) rows[i] = gen.index(n);
        auto& tree = model->trees[static_cast<std::size_t>(t)];
        tree.dim = d;
        grow_tree(tree, data.features, data.labels, std::move(rows), 0, [&] {
            auto picks = gen.sample_without_replacement(d, mtry);
            std::sort(picks.begin(), picks.end());
            std::vector<int> feats(picks.size());
            for (std::size_t i = 0; i < picks.size(); ++i) feats[i] = static_cast<int>(picks[i]);
            return feats;
        });
    }
    return model;
}

} // namespace learner_detail

inline TrainedModel train(const LearnerSpec& spec, const Dataset& data) {
    if (data.size() < 4) throw degenerate_dataset_error("train: need n >= 4");
    const auto counts = class_counts(data);
    if (counts.n_majority == 0 || counts.n_minority == 0) {
        throw degenerate_dataset_error("train: single-class training data");
    }
    switch (spec.kind) {
        case LearnerKind::LOGISTIC: return learner_detail::train_logistic(data);
        case LearnerKind::TREE: return learner_detail::train_tree(data);
        case LearnerKind::FOREST: return learner_detail::train_forest(data, spec.seed);
    }
    throw invalid_argument_error("train: unknown learner");
}

} // namespace imba
