#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "imba/dataset.hpp"
#include "imba/error.hpp"
#include "imba/knn.hpp"
#include "imba/rng.hpp"

namespace imba {

enum class MethodId { BASELINE, ROS, RUS, SMOTE, BORDERLINE_SMOTE, ADASYN, TOMEK_LINKS };

inline constexpr MethodId kAllMethods[] = {
    MethodId::BASELINE, MethodId::ROS,    MethodId::RUS,        MethodId::SMOTE,
    MethodId::BORDERLINE_SMOTE, MethodId::ADASYN, MethodId::TOMEK_LINKS};

inline std::string method_name(MethodId m) {
    switch (m) {
        case MethodId::BASELINE: return "BASELINE";
        case MethodId::ROS: return "ROS";
        case MethodId::RUS: return "RUS";
        case MethodId::SMOTE: return "SMOTE";
        case MethodId::BORDERLINE_SMOTE: return "BORDERLINE_SMOTE";
        case MethodId::ADASYN: return "ADASYN";
        case MethodId::TOMEK_LINKS: return "TOMEK_LINKS";
    }
    return "?";
}

inline MethodId parse_method(std::string name) {
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
    for (MethodId m : kAllMethods) {
        if (method_name(m) == name) return m;
    }
    throw invalid_argument_error("unknown resampling method: " + name);
}

// Provenance of one synthetic row: new = base + u * (neighbor - base).
struct SynthRecord {
    std::size_t base;     // row index in the input dataset
    std::size_t neighbor; // row index in the input dataset
    double u;             // in [0, 1)
};

struct ResampleResult {
    Dataset data;
    std::vector<SynthRecord> synthetic; // one per appended row, SMOTE family only
};

inline constexpr int kSmoteK = 5;
inline constexpr int kBorderlineM = 10;

namespace resample_detail {

inline Dataset copy(const Dataset& data) { return data; }

// Minority kNN lists among minority rows only; returned indices are into the
// full dataset. k_eff = min(k, n_min - 1).
inline std::vector<std::vector<std::size_t>> minority_neighbors(const Dataset& data,
                                                                const std::vector<std::size_t>& minority,
                                                                std::size_t k_eff) {
    Matrix pts(0, data.dim());
    pts.reserve_rows(minority.size());
    for (std::size_t i : minority) pts.append_row(data.features.row(i));
    NeighborIndex index(pts);
    std::vector<std::vector<std::size_t>> out(minority.size());
    for (std::size_t i = 0; i < minority.size(); ++i) {
        auto local = index.query_row(i, k_eff);
        out[i].reserve(local.size());
        for (std::size_t l : local) out[i].push_back(minority[l]);
    }
    return out;
}

inline void append_interpolation(ResampleResult& res, const Dataset& input, std::size_t base,
                                 std::size_t neighbor, double u) {
    const auto a = input.features.row(base);
    const auto b = input.features.row(neighbor);
    std::vector<double> row(a.size());
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = a[j] + u * (b[j] - a[j]);
    res.data.features.append_row(row);
    res.data.labels.push_back(1);
    res.synthetic.push_back({base, neighbor, u});
}

// Largest-remainder apportionment of `total` into weights w (sum 1); ties on
// remainders break toward the lower index.
inline std::vector<std::size_t> largest_remainder(const std::vector<double>& w, std::size_t total) {
    const std::size_t n = w.size();
    std::vector<std::size_t> alloc(n);
    std::vector<std::pair<double, std::size_t>> rem(n);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double exact = w[i] * static_cast<double>(total);
        alloc[i] = static_cast<std::size_t>(std::floor(exact));
        assigned += alloc[i];
        rem[i] = {exact - std::floor(exact), i};
    }
    std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (std::size_t i = 0; assigned < total; ++i, ++assigned) {
        ++alloc[rem[i % n].second];
    }
    return alloc;
}

} // namespace resample_detail

// Random minority oversampling with replacement until classes are equal.
inline ResampleResult ros(const Dataset& data, RngSeed rng) {
    const auto counts = class_counts(data);
    if (counts.n_minority == 0 || counts.n_majority == 0) {
        throw degenerate_dataset_error("ros: both classes required");
    }
    ResampleResult res{resample_detail::copy(data), {}};
    if (counts.n_minority >= counts.n_majority) return res;
    const auto minority = data.rows_of(1);
    Rng gen(rng);
    for (std::size_t g = counts.n_majority - counts.n_minority; g > 0; --g) {
        const std::size_t pick = minority[gen.index(minority.size())];
        res.data.features.append_row(data.features.row(pick));
        res.data.labels.push_back(1);
    }
    return res;
}

// Majority subsampled without replacement down to the minority count.
inline ResampleResult rus(const Dataset& data, RngSeed rng) {
    const auto counts = class_counts(data);
    if (counts.n_minority == 0 || counts.n_majority == 0) {
        throw degenerate_dataset_error("rus: both classes required");
    }
    if (counts.n_majority <= counts.n_minority) return {resample_detail::copy(data), {}};
    return {subsample_class(data, 0, counts.n_minority, rng), {}};
}

inline ResampleResult smote(const Dataset& data, RngSeed rng, int k = kSmoteK) {
    const auto minority = data.rows_of(1);
    if (minority.size() < 2) throw degenerate_dataset_error("smote: minority count < 2");
    const auto counts = class_counts(data);
    ResampleResult res{resample_detail::copy(data), {}};
    if (counts.n_majority <= counts.n_minority) return res;

    const std::size_t k_eff = std::min<std::size_t>(static_cast<std::size_t>(k), minority.size() - 1);
    const auto neighbors = resample_detail::minority_neighbors(data, minority, k_eff);
    Rng gen(derive_stream(rng, "smote"));
    const std::size_t g = counts.n_majority - counts.n_minority;
    for (std::size_t s = 0; s < g; ++s) {
        const std::size_t i = gen.index(minority.size());
        const std::size_t nn = neighbors[i][gen.index(k_eff)];
        resample_detail::append_interpolation(res, data, minority[i], nn, gen.uniform01());
    }
    return res;
}

// Borderline-1: generation bases are minority rows whose whole-data
// neighborhood is majority-dominated but not pure majority. Falls back to
// plain SMOTE when the danger set is empty.
inline ResampleResult borderline_smote(const Dataset& data, RngSeed rng, int k = kSmoteK,
                                       int m = kBorderlineM) {
    const auto minority = data.rows_of(1);
    if (minority.size() < 2) throw degenerate_dataset_error("borderline_smote: minority count < 2");
    const auto counts = class_counts(data);
    ResampleResult res{resample_detail::copy(data), {}};
    if (counts.n_majority <= counts.n_minority) return res;

    const std::size_t m_eff = std::min<std::size_t>(static_cast<std::size_t>(m), data.size() - 1);
    NeighborIndex whole(data.features);
    std::vector<std::size_t> danger; // positions into `minority`
    for (std::size_t i = 0; i < minority.size(); ++i) {
        const auto nn = whole.query_row(minority[i], m_eff);
        std::size_t maj = 0;
        for (std::size_t j : nn) maj += (data.labels[j] == 0);
        const double count = static_cast<double>(maj);
        if (count >= static_cast<double>(m_eff) / 2.0 && maj < m_eff) danger.push_back(i);
        // maj == m_eff is NOISE, the rest SAFE; neither generates
    }
    if (danger.empty()) return smote(data, rng, k);

    const std::size_t k_eff = std::min<std::size_t>(static_cast<std::size_t>(k), minority.size() - 1);
    const auto neighbors = resample_detail::minority_neighbors(data, minority, k_eff);
    Rng gen(derive_stream(rng, "borderline_smote"));
    const std::size_t g = counts.n_majority - counts.n_minority;
    for (std::size_t s = 0; s < g; ++s) {
        const std::size_t i = danger[gen.index(danger.size())];
        const std::size_t nn = neighbors[i][gen.index(k_eff)];
        resample_detail::append_interpolation(res, data, minority[i], nn, gen.uniform01());
    }
    return res;
}

// Density-weighted generation: harder minority rows (more majority neighbors
// in the whole data) receive more synthetic samples. Falls back to SMOTE when
// every hardness score is zero.
inline ResampleResult adasyn(const Dataset& data, RngSeed rng, int k = kSmoteK) {
    const auto minority = data.rows_of(1);
    if (minority.size() < 2) throw degenerate_dataset_error("adasyn: minority count < 2");
    const auto counts = class_counts(data);
    ResampleResult res{resample_detail::copy(data), {}};
    if (counts.n_majority <= counts.n_minority) return res;

    const std::size_t k_whole = std::min<std::size_t>(static_cast<std::size_t>(k), data.size() - 1);
    NeighborIndex whole(data.features);
    std::vector<double> r(minority.size());
    double r_sum = 0.0;
    for (std::size_t i = 0; i < minority.size(); ++i) {
        const auto nn = whole.query_row(minority[i], k_whole);
        std::size_t maj = 0;
        for (std::size_t j : nn) maj += (data.labels[j] == 0);
        r[i] = static_cast<double>(maj) / static_cast<double>(k_whole);
        r_sum += r[i];
    }
    if (r_sum == 0.0) return smote(data, rng, k);

    for (double& v : r) v /= r_sum;
    const std::size_t g = counts.n_majority - counts.n_minority;
    const auto alloc = resample_detail::largest_remainder(r, g);

    const std::size_t k_eff = std::min<std::size_t>(static_cast<std::size_t>(k), minority.size() - 1);
    const auto neighbors = resample_detail::minority_neighbors(data, minority, k_eff);
    Rng gen(derive_stream(rng, "adasyn"));
    for (std::size_t i = 0; i < minority.size(); ++i) {
        for (std::size_t s = 0; s < alloc[i]; ++s) {
            const std::size_t nn = neighbors[i][gen.index(k_eff)];
            resample_detail::append_interpolation(res, data, minority[i], nn, gen.uniform01());
        }
    }
    return res;
}

// Tomek links: opposite-label pairs that are mutual single nearest neighbors
// (ties toward the lower row index). The majority member of each link is
// removed. Deterministic, no rng.
inline ResampleResult tomek_links(const Dataset& data) {
    const auto counts = class_counts(data);
    if (counts.n_minority == 0 || counts.n_majority == 0) {
        throw degenerate_dataset_error("tomek_links: both classes required");
    }
    NeighborIndex index(data.features);
    const std::size_t n = data.size();
    std::vector<std::size_t> nn(n);
    for (std::size_t i = 0; i < n; ++i) nn[i] = index.nearest_of(i);
    std::vector<bool> drop(n, false);
    for (std::size_t a = 0; a < n; ++a) {
        const std::size_t b = nn[a];
        if (b > a && nn[b] == a && data.labels[a] != data.labels[b]) {
            drop[data.labels[a] == 0 ? a : b] = true;
        }
    }
    std::vector<std::size_t> keep;
    keep.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!drop[i]) keep.push_back(i);
    }
    return {data.subset(keep), {}};
}

inline ResampleResult apply_method(MethodId method, const Dataset& data, RngSeed rng) {
    switch (method) {
        case MethodId::BASELINE: return {resample_detail::copy(data), {}};
        case MethodId::ROS: return ros(data, rng);
        case MethodId::RUS: return rus(data, rng);
        case MethodId::SMOTE: return smote(data, rng);
        case MethodId::BORDERLINE_SMOTE: return borderline_smote(data, rng);
        case MethodId::ADASYN: return adasyn(data, rng);
        case MethodId::TOMEK_LINKS: return tomek_links(data);
    }
    throw invalid_argument_error("apply_method: unknown method");
}

} // namespace imba
