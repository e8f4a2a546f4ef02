#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "imba/resample.hpp"
#include "test_util.hpp"

using namespace imba;

namespace {

// Independent O(n^2) kNN oracle (squared distances, index tie-break).
std::vector<std::size_t> knn_oracle(const Matrix& pts, std::span<const double> q, std::size_t k,
                                    std::size_t self) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t i = 0; i < pts.rows(); ++i) {
        if (i == self) continue;
        d.emplace_back(squared_distance(q, pts.row(i)), i);
    }
    std::sort(d.begin(), d.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(d[i].second);
    return out;
}

// Checks that every appended row is base + u*(neighbor - base) with the
// recorded provenance, that u is in [0,1), and that the neighbor really is
// one of the base's k nearest minority neighbors.
void check_synthetic_rows(const Dataset& input, const ResampleResult& res, int k) {
    const std::size_t n0 = input.size();
    REQUIRE(res.data.size() == n0 + res.synthetic.size());
    // originals intact
    for (std::size_t i = 0; i < n0; ++i) {
        CHECK(std::equal(input.features.row(i).begin(), input.features.row(i).end(),
                         res.data.features.row(i).begin()));
        CHECK(res.data.labels[i] == input.labels[i]);
    }
    const auto minority = input.rows_of(1);
    Matrix min_pts(0, input.dim());
    for (std::size_t i : minority) min_pts.append_row(input.features.row(i));
    const std::size_t k_eff = std::min<std::size_t>(k, minority.size() - 1);

    for (std::size_t s = 0; s < res.synthetic.size(); ++s) {
        const auto& rec = res.synthetic[s];
        CHECK(res.data.labels[n0 + s] == 1);
        CHECK(rec.u >= 0.0);
        CHECK(rec.u < 1.0);
        CHECK(input.labels[rec.base] == 1);
        CHECK(input.labels[rec.neighbor] == 1);
        // neighbor verified against the oracle
        const auto pos = static_cast<std::size_t>(
            std::find(minority.begin(), minority.end(), rec.base) - minority.begin());
        const auto oracle = knn_oracle(min_pts, input.features.row(rec.base), k_eff, pos);
        bool found = false;
        for (std::size_t o : oracle) {
            if (minority[o] == rec.neighbor) found = true;
        }
        CHECK(found);
        // interpolation residual
        const auto a = input.features.row(rec.base);
        const auto b = input.features.row(rec.neighbor);
        const auto out = res.data.features.row(n0 + s);
        double residual = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) {
            residual = std::max(residual, std::fabs(out[j] - (a[j] + rec.u * (b[j] - a[j]))));
        }
        CHECK(residual <= 1e-9);
    }
}

// Independent mutual-1NN Tomek oracle.
std::set<std::pair<std::size_t, std::size_t>> tomek_oracle(const Dataset& d) {
    const std::size_t n = d.size();
    std::vector<std::size_t> nn(n);
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t who = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double dist = squared_distance(d.features.row(i), d.features.row(j));
            if (dist < best) {
                best = dist;
                who = j;
            }
        }
        nn[i] = who;
    }
    std::set<std::pair<std::size_t, std::size_t>> links;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = nn[i];
        if (nn[j] == i && d.labels[i] != d.labels[j]) {
            links.insert({std::min(i, j), std::max(i, j)});
        }
    }
    return links;
}

Dataset one_dim(std::vector<std::pair<double, int>> rows) {
    Dataset d;
    d.features = Matrix(0, 1);
    for (auto [v, y] : rows) {
        d.features.append_row({&v, 1});
        d.labels.push_back(y);
    }
    return d;
}

} // namespace

TEST_CASE("method name parsing") {
    CHECK(parse_method("smote") == MethodId::SMOTE);
    CHECK(parse_method("Borderline_Smote") == MethodId::BORDERLINE_SMOTE);
    CHECK(parse_method("TOMEK_LINKS") == MethodId::TOMEK_LINKS);
    CHECK_THROWS_AS(parse_method("safe_level_smote"), invalid_argument_error);
}

TEST_CASE("query_knn tie-breaks and self-exclusion") {
    Matrix pts(3, 1);
    pts(0, 0) = 0.0;
    pts(1, 0) = 1.0;
    pts(2, 0) = 2.0;
    NeighborIndex idx(pts);
    CHECK(idx.query_row(0, 1) == std::vector<std::size_t>{1});
    // equidistant pair: lower index first
    CHECK(idx.query_row(1, 2) == std::vector<std::size_t>{0, 2});
    CHECK_THROWS_AS(idx.query_row(0, 3), invalid_argument_error);
    // external query point does not exclude anyone
    const double q[1] = {1.0};
    CHECK(idx.query({q, 1}, 1) == std::vector<std::size_t>{1});
}

TEST_CASE("ros balances by duplicating minority rows") {
    const auto data = test_util::blobs(90, 10, 3.0);
    const auto res = ros(data, {50, 0});
    const auto counts = class_counts(res.data);
    CHECK(counts.n_majority == 90);
    CHECK(counts.n_minority == 90);
    const auto originals = test_util::row_multiset(data);
    for (std::size_t i = data.size(); i < res.data.size(); ++i) {
        const auto r = res.data.features.row(i);
        CHECK(originals.contains(std::vector<double>(r.begin(), r.end())));
        CHECK(res.data.labels[i] == 1);
    }
    // identity on balanced input
    const auto balanced = test_util::blobs(10, 10, 3.0);
    CHECK(ros(balanced, {50, 1}).data.size() == balanced.size());
    // determinism
    CHECK(to_csv(ros(data, {50, 2}).data) == to_csv(ros(data, {50, 2}).data));
}

TEST_CASE("rus subsamples the majority to balance") {
    const auto data = test_util::blobs(90, 10, 3.0);
    const auto res = rus(data, {51, 0});
    const auto counts = class_counts(res.data);
    CHECK(counts.n_majority == 10);
    CHECK(counts.n_minority == 10);
    const auto originals = test_util::row_multiset(data);
    for (std::size_t i = 0; i < res.data.size(); ++i) {
        const auto r = res.data.features.row(i);
        CHECK(originals.contains(std::vector<double>(r.begin(), r.end())));
    }
    const auto balanced = test_util::blobs(10, 10, 3.0);
    CHECK(rus(balanced, {51, 1}).data.size() == balanced.size());
}

TEST_CASE("smote appends exactly the balancing count of interpolations") {
    const auto data = test_util::blobs(90, 10, 3.0);
    const auto res = smote(data, {52, 0});
    CHECK(res.synthetic.size() == 80);
    const auto counts = class_counts(res.data);
    CHECK(counts.n_majority == counts.n_minority);
    check_synthetic_rows(data, res, kSmoteK);
}

TEST_CASE("smote with a two-point minority stays on the segment") {
    Dataset data;
    data.features = Matrix(0, 2);
    for (int i = 0; i < 8; ++i) {
        const double row[2] = {5.0 + i, 5.0};
        data.features.append_row(row);
        data.labels.push_back(0);
    }
    const double m0[2] = {0.0, 0.0};
    const double m1[2] = {1.0, 1.0};
    data.features.append_row(m0);
    data.labels.push_back(1);
    data.features.append_row(m1);
    data.labels.push_back(1);

    const auto res = smote(data, {53, 0});
    CHECK(res.synthetic.size() == 6);
    for (std::size_t i = data.size(); i < res.data.size(); ++i) {
        const auto r = res.data.features.row(i);
        CHECK(r[0] == doctest::Approx(r[1]).epsilon(1e-12)); // on the diagonal
        CHECK(r[0] >= 0.0);
        CHECK(r[0] < 1.0);
    }
    CHECK_THROWS_AS(smote(test_util::blobs(20, 1, 3.0), {53, 1}), degenerate_dataset_error);
}

TEST_CASE("smote family synthetic rows stay in the minority bounding box") {
    Rng gen({54, 0});
    for (int trial = 0; trial < 10; ++trial) {
        const auto data = test_util::random_dataset(gen);
        const auto minority = data.rows_of(1);
        std::vector<double> lo(data.dim(), 1e300), hi(data.dim(), -1e300);
        for (std::size_t i : minority) {
            const auto r = data.features.row(i);
            for (std::size_t j = 0; j < r.size(); ++j) {
                lo[j] = std::min(lo[j], r[j]);
                hi[j] = std::max(hi[j], r[j]);
            }
        }
        for (MethodId m : {MethodId::SMOTE, MethodId::BORDERLINE_SMOTE, MethodId::ADASYN}) {
            const auto res = apply_method(m, data, {54, static_cast<std::uint64_t>(trial)});
            for (std::size_t i = data.size(); i < res.data.size(); ++i) {
                const auto r = res.data.features.row(i);
                for (std::size_t j = 0; j < r.size(); ++j) {
                    CHECK(r[j] >= lo[j] - 1e-12);
                    CHECK(r[j] <= hi[j] + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("borderline_smote falls back to smote on separated blobs") {
    const auto data = test_util::blobs(60, 12, 40.0);
    const RngSeed rng{55, 0};
    CHECK(to_csv(borderline_smote(data, rng).data) == to_csv(smote(data, rng).data));
}

TEST_CASE("borderline_smote generates only from the danger set") {
    // heavily overlapping blobs so a danger set exists
    const auto data = test_util::blobs(120, 30, 0.8);
    const auto res = borderline_smote(data, {55, 1});
    const auto counts = class_counts(res.data);
    CHECK(counts.n_majority == counts.n_minority);
    check_synthetic_rows(data, res, kSmoteK);

    // recompute DANGER with the O(n^2) oracle and check every base
    const std::size_t m_eff = std::min<std::size_t>(kBorderlineM, data.size() - 1);
    std::set<std::size_t> danger;
    for (std::size_t i : data.rows_of(1)) {
        const auto nn = knn_oracle(data.features, data.features.row(i), m_eff, i);
        std::size_t maj = 0;
        for (std::size_t j : nn) maj += (data.labels[j] == 0);
        if (static_cast<double>(maj) >= static_cast<double>(m_eff) / 2.0 && maj < m_eff) {
            danger.insert(i);
        }
    }
    REQUIRE(!danger.empty());
    for (const auto& rec : res.synthetic) CHECK(danger.contains(rec.base));
}

TEST_CASE("borderline_smote excludes pure-majority-neighborhood noise points") {
    // overlapping blobs (nonempty danger set) plus one minority point stranded
    // on the far side of the majority blob
    auto data = test_util::blobs(120, 30, 0.8);
    // tight majority clump far from everything, with the noise point inside it
    Rng clump({56, 0});
    for (int i = 0; i < 12; ++i) {
        const double row[2] = {-9.0 + 0.1 * clump.normal(), 0.1 * clump.normal()};
        data.features.append_row(row);
        data.labels.push_back(0);
    }
    const double noise_pt[2] = {-9.0, 0.0};
    data.features.append_row(noise_pt);
    data.labels.push_back(1);
    const std::size_t noise_idx = data.size() - 1;

    // oracle confirms the stranded point really is noise (all m neighbors majority)
    const std::size_t m_eff = std::min<std::size_t>(kBorderlineM, data.size() - 1);
    const auto nn = knn_oracle(data.features, data.features.row(noise_idx), m_eff, noise_idx);
    std::size_t maj = 0;
    for (std::size_t j : nn) maj += (data.labels[j] == 0);
    REQUIRE(maj == m_eff);

    const auto res = borderline_smote(data, {56, 1});
    REQUIRE(!res.synthetic.empty());
    for (const auto& rec : res.synthetic) CHECK(rec.base != noise_idx);
}

TEST_CASE("adasyn allocates by hardness with exact total") {
    const auto data = test_util::blobs(120, 30, 0.8);
    const auto res = adasyn(data, {57, 0});
    CHECK(res.synthetic.size() == 90);
    const auto counts = class_counts(res.data);
    CHECK(counts.n_majority == counts.n_minority);
    check_synthetic_rows(data, res, kSmoteK);
}

TEST_CASE("adasyn falls back to smote when all hardness scores are zero") {
    const auto data = test_util::blobs(60, 12, 40.0);
    const RngSeed rng{57, 1};
    CHECK(to_csv(adasyn(data, rng).data) == to_csv(smote(data, rng).data));
}

TEST_CASE("largest-remainder allocation sums exactly") {
    Rng gen({58, 0});
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + gen.index(20);
        std::vector<double> w(n);
        double sum = 0.0;
        for (auto& v : w) {
            v = gen.uniform01() + 1e-6;
            sum += v;
        }
        for (auto& v : w) v /= sum;
        const std::size_t total = gen.index(200);
        const auto alloc = resample_detail::largest_remainder(w, total);
        std::size_t got = 0;
        for (std::size_t a : alloc) got += a;
        CHECK(got == total);
        // oracle: every allocation is floor or floor+1 of the exact share
        for (std::size_t i = 0; i < n; ++i) {
            const double exact = w[i] * static_cast<double>(total);
            CHECK(alloc[i] >= static_cast<std::size_t>(std::floor(exact)));
            CHECK(alloc[i] <= static_cast<std::size_t>(std::floor(exact)) + 1);
        }
    }
}

TEST_CASE("tomek_links on the 1-D example") {
    const auto data = one_dim({{0.0, 0}, {0.1, 1}, {5.0, 0}});
    const auto res = tomek_links(data);
    // majority 0.0 removed; minority and the far majority point remain
    REQUIRE(res.data.size() == 2);
    CHECK(res.data.features(0, 0) == 0.1);
    CHECK(res.data.labels[0] == 1);
    CHECK(res.data.features(1, 0) == 5.0);
}

TEST_CASE("tomek_links leaves separated blobs untouched") {
    const auto data = test_util::blobs(40, 10, 30.0);
    const auto res = tomek_links(data);
    CHECK(to_csv(res.data) == to_csv(data));
}

TEST_CASE("tomek_links matches the mutual-1NN oracle") {
    Rng gen({59, 0});
    for (int trial = 0; trial < 20; ++trial) {
        const auto data = test_util::random_dataset(gen, 120);
        const auto links = tomek_oracle(data);
        std::set<std::size_t> removed_expected;
        for (const auto& [a, b] : links) removed_expected.insert(data.labels[a] == 0 ? a : b);
        const auto res = tomek_links(data);
        CHECK(res.data.size() == data.size() - removed_expected.size());
        CHECK(class_counts(res.data).n_minority == class_counts(data).n_minority);
    }
}

TEST_CASE("apply_method dispatch") {
    const auto data = test_util::blobs(90, 10, 3.0);
    CHECK(to_csv(apply_method(MethodId::BASELINE, data, {60, 0}).data) == to_csv(data));
    const auto sm = apply_method(MethodId::SMOTE, data, {60, 1});
    const auto counts = class_counts(sm.data);
    CHECK(counts.n_majority == 90);
    CHECK(counts.n_minority == 90);
    const auto separated = test_util::blobs(40, 10, 30.0);
    CHECK(to_csv(apply_method(MethodId::TOMEK_LINKS, separated, {60, 2}).data) == to_csv(separated));
}
