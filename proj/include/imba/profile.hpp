#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "imba/dataset.hpp"
#include "imba/error.hpp"
#include "imba/rng.hpp"

namespace imba {

struct DataProfile {
    double ir = 0.0;
    double separability = 0.0;
    std::size_t n_minority = 0;
    int cluster_estimate = 1;
    std::optional<double> silhouette_best; // undefined when cluster_estimate == 1
};

namespace detail {

struct ClassMoments {
    std::vector<double> mean;
    double mean_variance = 0.0; // mean over features of per-feature (n-1) variance
};

inline ClassMoments class_moments(const Dataset& data, int label) {
    const auto rows = data.rows_of(label);
    if (rows.size() < 2) throw degenerate_dataset_error("separability: class needs >= 2 samples");
    const std::size_t d = data.dim();
    ClassMoments m;
    m.mean.assign(d, 0.0);
    for (std::size_t i : rows) {
        const auto r = data.features.row(i);
        for (std::size_t j = 0; j < d; ++j) m.mean[j] += r[j];
    }
    for (double& v : m.mean) v /= static_cast<double>(rows.size());
    double total = 0.0;
    for (std::size_t i : rows) {
        const auto r = data.features.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            const double dev = r[j] - m.mean[j];
            total += dev * dev;
        }
    }
    m.mean_variance = total / static_cast<double>((rows.size() - 1) * d);
    return m;
}

} // namespace detail

// ||mu_maj - mu_min|| / sqrt((var_maj + var_min)/2), variances pooled as the
// mean of per-feature sample variances.
inline double separability(const Dataset& data) {
    const auto maj = detail::class_moments(data, 0);
    const auto min = detail::class_moments(data, 1);
    double num = 0.0;
    for (std::size_t j = 0; j < data.dim(); ++j) {
        const double d = maj.mean[j] - min.mean[j];
        num += d * d;
    }
    return std::sqrt(num) / std::sqrt(0.5 * (maj.mean_variance + min.mean_variance));
}

struct KMeansResult {
    std::vector<int> assignments;
    Matrix centers;
    double inertia = 0.0;
};

namespace detail {

inline double assign_points(const Matrix& pts, const Matrix& centers, std::vector<int>& assign) {
    double inertia = 0.0;
    for (std::size_t i = 0; i < pts.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        int who = 0;
        for (std::size_t c = 0; c < centers.rows(); ++c) {
            const double d = squared_distance(pts.row(i), centers.row(c));
            if (d < best) {
                best = d;
                who = static_cast<int>(c);
            }
        }
        assign[i] = who;
        inertia += best;
    }
    return inertia;
}

inline KMeansResult kmeans_single(const Matrix& pts, std::size_t k, Rng& gen) {
    const std::size_t n = pts.rows();
    const std::size_t d = pts.cols();
    Matrix centers(k, d);

    // k-means++ seeding
    std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
    {
        const std::size_t first = gen.index(n);
        std::copy_n(pts.row(first).begin(), d, centers.row(0).begin());
    }
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            dist2[i] = std::min(dist2[i], squared_distance(pts.row(i), centers.row(c - 1)));
            total += dist2[i];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            const double target = gen.uniform01() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += dist2[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = gen.index(n);
        }
        std::copy_n(pts.row(pick).begin(), d, centers.row(c).begin());
    }

    KMeansResult res;
    res.assignments.assign(n, -1);
    std::vector<int> prev(n, -2);
    std::vector<std::size_t> counts(k);
    for (int iter = 0; iter < 100; ++iter) {
        res.inertia = assign_points(pts, centers, res.assignments);
        if (res.assignments == prev) break;
        prev = res.assignments;
        // update step
        Matrix sums(k, d);
        std::fill(counts.begin(), counts.end(), std::size_t{0});
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = pts.row(i);
            auto s = sums.row(static_cast<std::size_t>(res.assignments[i]));
            for (std::size_t j = 0; j < d; ++j) s[j] += r[j];
            ++counts[static_cast<std::size_t>(res.assignments[i])];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // relocate an empty cluster to the point farthest from its center
                double worst = -1.0;
                std::size_t who = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double dd = squared_distance(
                        pts.row(i), centers.row(static_cast<std::size_t>(res.assignments[i])));
                    if (dd > worst) {
                        worst = dd;
                        who = i;
                    }
                }
                std::copy_n(pts.row(who).begin(), d, centers.row(c).begin());
            } else {
                auto s = sums.row(c);
                auto cc = centers.row(c);
                for (std::size_t j = 0; j < d; ++j) cc[j] = s[j] / static_cast<double>(counts[c]);
            }
        }
    }
    res.inertia = assign_points(pts, centers, res.assignments);
    res.centers = std::move(centers);
    return res;
}

} // namespace detail

// Lloyd iterations from k-means++ seeding, 10 restarts, best inertia wins
// (lowest restart index on ties).
inline KMeansResult kmeans(const Matrix& points, std::size_t k, RngSeed rng) {
    if (points.rows() == 0) throw invalid_argument_error("kmeans: empty input");
    if (k < 1 || k > points.rows()) throw invalid_argument_error("kmeans: k out of range");
    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < 10; ++restart) {
        Rng gen(derive_stream(rng, "kmeans/restart" + std::to_string(restart)));
        auto res = detail::kmeans_single(points, k, gen);
        if (res.inertia < best.inertia) best = std::move(res);
    }
    return best;
}

// Mean silhouette of `points` under `assign`; singleton clusters score 0.
inline double mean_silhouette(const Matrix& points, const std::vector<int>& assign, int k) {
    const std::size_t n = points.rows();
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (int a : assign) ++counts[static_cast<std::size_t>(a)];
    double total = 0.0;
    std::vector<double> cluster_dist(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(cluster_dist.begin(), cluster_dist.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            cluster_dist[static_cast<std::size_t>(assign[j])] +=
                std::sqrt(squared_distance(points.row(i), points.row(j)));
        }
        const auto own = static_cast<std::size_t>(assign[i]);
        if (counts[own] <= 1) continue; // s = 0 for singletons
        const double a = cluster_dist[own] / static_cast<double>(counts[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            if (c == own || counts[c] == 0) continue;
            b = std::min(b, cluster_dist[c] / static_cast<double>(counts[c]));
        }
        if (!std::isfinite(b)) continue;
        total += (b - a) / std::max(a, b);
    }
    return total / static_cast<double>(n);
}

inline constexpr double kSilhouetteThreshold = 0.2;
inline constexpr std::size_t kSilhouetteSubsample = 500;

// Minority cluster count via k in {2..5} and the best mean silhouette;
// falls back to 1 when no k clears the threshold or the minority is tiny.
inline std::pair<int, std::optional<double>> estimate_clusters(const Dataset& data, RngSeed rng) {
    const auto minority = data.rows_of(1);
    if (minority.size() < 10) return {1, std::nullopt};

    // silhouette cost is O(n^2); bound it with a uniform subsample
    std::vector<std::size_t> sample = minority;
    if (sample.size() > kSilhouetteSubsample) {
        Rng gen(derive_stream(rng, "silhouette/subsample"));
        auto picks = gen.sample_without_replacement(sample.size(), kSilhouetteSubsample);
        std::sort(picks.begin(), picks.end());
        std::vector<std::size_t> sub;
        sub.reserve(picks.size());
        for (std::size_t p : picks) sub.push_back(minority[p]);
        sample = std::move(sub);
    }
    Matrix pts(0, data.dim());
    pts.reserve_rows(minority.size());
    for (std::size_t i : minority) pts.append_row(data.features.row(i));
    Matrix sub_pts(0, data.dim());
    sub_pts.reserve_rows(sample.size());
    for (std::size_t i : sample) sub_pts.append_row(data.features.row(i));

    int best_k = 1;
    double best_sil = -2.0;
    const std::size_t k_max = std::min<std::size_t>(5, minority.size());
    for (std::size_t k = 2; k <= k_max; ++k) {
        auto km = kmeans(pts, k, derive_stream(rng, "clusters/k" + std::to_string(k)));
        // silhouette on the subsample with its kmeans assignments
        std::vector<int> sub_assign;
        sub_assign.reserve(sample.size());
        {
            std::size_t pos = 0;
            for (std::size_t s = 0; s < sample.size(); ++s) {
                while (minority[pos] != sample[s]) ++pos;
                sub_assign.push_back(km.assignments[pos]);
            }
        }
        const double sil = mean_silhouette(sub_pts, sub_assign, static_cast<int>(k));
        if (sil > best_sil) { // strict: ties keep the smaller k
            best_sil = sil;
            best_k = static_cast<int>(k);
        }
    }
    if (best_sil >= kSilhouetteThreshold) return {best_k, best_sil};
    return {1, std::nullopt};
}

inline DataProfile profile_dataset(const Dataset& data, RngSeed rng) {
    DataProfile p;
    const auto counts = class_counts(data);
    p.ir = imbalance_ratio(counts);
    p.separability = separability(data);
    p.n_minority = counts.n_minority;
    auto [k, sil] = estimate_clusters(data, rng);
    p.cluster_estimate = k;
    p.silhouette_best = sil;
    return p;
}

} // namespace imba
