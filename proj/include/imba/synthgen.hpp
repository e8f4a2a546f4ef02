#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "imba/dataset.hpp"
#include "imba/error.hpp"
#include "imba/profile.hpp"
#include "imba/rng.hpp"

namespace imba {

struct GenSpec {
    double ir = 10.0;
    double sep_target = 1.0;
    int clusters = 1;
    int n_total = 1100;
    int dim = 5;
    RngSeed seed;
};

struct GenOutcome {
    Dataset dataset;
    double realized_sep = 0.0;
    double realized_ir = 0.0;
    double delta_used = 0.0;
};

inline constexpr double kClusterRadius = 2.0;     // center spread for k >= 2
inline constexpr double kSepTolerance = 0.05;     // relative band on realized S
inline constexpr double kSepBisectTol = 1e-3;     // absolute tolerance on S(delta)
inline constexpr int kSepBisectSteps = 60;

namespace gen_detail {

inline std::size_t implied_minority(const GenSpec& spec) {
    return static_cast<std::size_t>(std::llround(spec.n_total / (1.0 + spec.ir)));
}

inline void validate_spec(const GenSpec& spec) {
    if (spec.ir <= 0.0) throw invalid_argument_error("genspec: ir must be > 0");
    if (spec.sep_target < 0.1 || spec.sep_target > 5.0) {
        throw invalid_argument_error("genspec: sep_target outside calibration range [0.1, 5.0]");
    }
    if (spec.clusters < 1) throw invalid_argument_error("genspec: clusters must be >= 1");
    if (spec.n_total < 20) throw invalid_argument_error("genspec: n_total must be >= 20");
    if (spec.dim < 2) throw invalid_argument_error("genspec: dim must be >= 2");
    if (implied_minority(spec) < 2 * static_cast<std::size_t>(spec.clusters)) {
        throw invalid_argument_error("genspec: implied minority count below 2 per cluster");
    }
}

// One standardized draw per seed; calibration moves the minority centroid
// without resampling, so the bisection never chases sampling noise.
struct NoiseCache {
    Matrix majority;            // centered unit draws
    Matrix minority;            // centered unit draws + cluster offsets
    std::vector<int> cluster_of;
    std::size_t n_maj = 0;
    std::size_t n_min = 0;
};

inline void center_rows(Matrix& m) {
    const std::size_t d = m.cols();
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto r = m.row(i);
        for (std::size_t j = 0; j < d; ++j) mean[j] += r[j];
    }
    for (double& v : mean) v /= static_cast<double>(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto r = m.row(i);
        for (std::size_t j = 0; j < d; ++j) r[j] -= mean[j];
    }
}

inline NoiseCache draw_noise(const GenSpec& spec) {
    NoiseCache cache;
    const auto d = static_cast<std::size_t>(spec.dim);
    const auto k = static_cast<std::size_t>(spec.clusters);
    cache.n_min = implied_minority(spec);
    cache.n_maj = static_cast<std::size_t>(std::llround(spec.ir * static_cast<double>(cache.n_min)));

    Rng gen(derive_stream(spec.seed, "synthgen/noise"));
    cache.majority = Matrix(cache.n_maj, d);
    for (std::size_t i = 0; i < cache.n_maj; ++i) {
        auto r = cache.majority.row(i);
        for (std::size_t j = 0; j < d; ++j) r[j] = gen.normal();
    }
    cache.minority = Matrix(cache.n_min, d);
    for (std::size_t i = 0; i < cache.n_min; ++i) {
        auto r = cache.minority.row(i);
        for (std::size_t j = 0; j < d; ++j) r[j] = gen.normal();
    }
    // Empirically center each class so the inter-centroid distance is exactly
    // the calibrated delta.
    center_rows(cache.majority);
    center_rows(cache.minority);

    // Cluster sizes as even as possible; assignment round-robin over points.
    cache.cluster_of.resize(cache.n_min);
    std::vector<std::size_t> cluster_sizes(k, 0);
    for (std::size_t i = 0; i < cache.n_min; ++i) {
        cache.cluster_of[i] = static_cast<int>(i % k);
        ++cluster_sizes[i % k];
    }

    if (k >= 2) {
        // Maximally separated center directions (regular simplex when the
        // dimension allows, else equally spaced on a circle), recentred so the
        // point-weighted mean offset is zero, then scaled to mean norm
        // kClusterRadius.
        Matrix offsets(k, d);
        if (k <= d) {
            for (std::size_t c = 0; c < k; ++c) {
                auto r = offsets.row(c);
                double norm = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    r[j] = (j == c ? 1.0 : 0.0) - (j < k ? 1.0 / static_cast<double>(k) : 0.0);
                    norm += r[j] * r[j];
                }
                norm = std::sqrt(norm);
                for (std::size_t j = 0; j < d; ++j) r[j] /= norm;
            }
        } else {
            constexpr double two_pi = 6.283185307179586;
            for (std::size_t c = 0; c < k; ++c) {
                auto r = offsets.row(c);
                const double angle = two_pi * static_cast<double>(c) / static_cast<double>(k);
                r[0] = std::cos(angle);
                r[1] = std::sin(angle);
            }
        }
        std::vector<double> wmean(d, 0.0);
        for (std::size_t c = 0; c < k; ++c) {
            const auto r = offsets.row(c);
            for (std::size_t j = 0; j < d; ++j) {
                wmean[j] += static_cast<double>(cluster_sizes[c]) * r[j];
            }
        }
        for (double& v : wmean) v /= static_cast<double>(cache.n_min);
        double mean_norm = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            auto r = offsets.row(c);
            double norm = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                r[j] -= wmean[j];
                norm += r[j] * r[j];
            }
            mean_norm += std::sqrt(norm);
        }
        mean_norm /= static_cast<double>(k);
        const double scale = kClusterRadius / mean_norm;
        for (std::size_t i = 0; i < cache.n_min; ++i) {
            auto r = cache.minority.row(i);
            const auto off = offsets.row(static_cast<std::size_t>(cache.cluster_of[i]));
            for (std::size_t j = 0; j < d; ++j) r[j] += scale * off[j];
        }
        // offsets shift the point-weighted centroid by ~0; re-center exactly
        center_rows(cache.minority);
    }
    return cache;
}

inline Dataset assemble(const NoiseCache& cache, double delta) {
    Dataset data;
    const std::size_t d = cache.majority.cols();
    data.features = Matrix(0, d);
    data.features.reserve_rows(cache.n_maj + cache.n_min);
    std::vector<double> row(d);
    for (std::size_t i = 0; i < cache.n_maj; ++i) {
        data.features.append_row(cache.majority.row(i));
        data.labels.push_back(0);
    }
    for (std::size_t i = 0; i < cache.n_min; ++i) {
        const auto r = cache.minority.row(i);
        std::copy(r.begin(), r.end(), row.begin());
        row[0] += delta; // minority centroid sits at distance delta on axis 0
        data.features.append_row(row);
        data.labels.push_back(1);
    }
    return data;
}

} // namespace gen_detail

// Bisection on delta in [0, 20] so the measured S hits sep_target.
inline double calibrate_delta(const GenSpec& spec, const gen_detail::NoiseCache& cache) {
    const auto s_of = [&](double delta) { return separability(gen_detail::assemble(cache, delta)); };
    double lo = 0.0, hi = 20.0;
    if (s_of(lo) > spec.sep_target || s_of(hi) < spec.sep_target) {
        throw calibration_error("calibrate_delta: sep_target not bracketed on [0, 20]");
    }
    double mid = 0.0;
    for (int step = 0; step < kSepBisectSteps; ++step) {
        mid = 0.5 * (lo + hi);
        const double s = s_of(mid);
        if (std::fabs(s - spec.sep_target) <= kSepBisectTol) return mid;
        (s < spec.sep_target ? lo : hi) = mid;
    }
    mid = 0.5 * (lo + hi);
    if (std::fabs(s_of(mid) - spec.sep_target) / spec.sep_target > kSepTolerance) {
        throw calibration_error("calibrate_delta: no convergence in 60 bisection steps");
    }
    return mid;
}

// Majority: isotropic unit Gaussian at the origin. Minority: unit Gaussians
// split evenly over `clusters` centers on a sphere of radius kClusterRadius
// about a centroid placed `delta` along axis 0, delta calibrated to hit
// sep_target.
inline GenOutcome generate(const GenSpec& spec) {
    gen_detail::validate_spec(spec);
    const auto cache = gen_detail::draw_noise(spec);
    GenOutcome out;
    out.delta_used = calibrate_delta(spec, cache);
    out.dataset = gen_detail::assemble(cache, out.delta_used);
    out.realized_sep = separability(out.dataset);
    out.realized_ir = static_cast<double>(cache.n_maj) / static_cast<double>(cache.n_min);
    return out;
}

struct FactorialSpec {
    GenSpec spec;
    bool flagged = false; // violates the >= 2 points per cluster invariant
};

inline constexpr double kGridIr[] = {2, 5, 10, 15, 20, 30, 50, 80};
inline constexpr double kGridSep[] = {0.3, 0.5, 0.8, 1.0, 1.5, 2.0};
inline constexpr int kGridClusters[] = {1, 2, 3, 5};

// Full 8 x 6 x 4 factorial grid (192 specs) at n_total = 1100, dim = 5.
inline std::vector<FactorialSpec> factorial_specs(RngSeed seed, int n_total = 1100, int dim = 5) {
    std::vector<FactorialSpec> out;
    out.reserve(192);
    for (double ir : kGridIr) {
        for (double s : kGridSep) {
            for (int k : kGridClusters) {
                FactorialSpec f;
                f.spec.ir = ir;
                f.spec.sep_target = s;
                f.spec.clusters = k;
                f.spec.n_total = n_total;
                f.spec.dim = dim;
                f.spec.seed = derive_stream(
                    seed, "grid/ir" + std::to_string(ir) + "/s" + std::to_string(s) +
                              "/k" + std::to_string(k));
                f.flagged = gen_detail::implied_minority(f.spec) <
                            2 * static_cast<std::size_t>(k);
                out.push_back(f);
            }
        }
    }
    return out;
}

} // namespace imba
