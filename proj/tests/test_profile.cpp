#include <doctest.h>

#include <cmath>
#include <vector>

#include "imba/profile.hpp"
#include "imba/synthgen.hpp"
#include "test_util.hpp"

using namespace imba;

namespace {

Dataset one_dim(const std::vector<double>& maj, const std::vector<double>& min) {
    Dataset d;
    d.features = Matrix(0, 1);
    for (double v : maj) {
        d.features.append_row({&v, 1});
        d.labels.push_back(0);
    }
    for (double v : min) {
        d.features.append_row({&v, 1});
        d.labels.push_back(1);
    }
    return d;
}

} // namespace

TEST_CASE("separability: coincident centroids give zero") {
    const auto d = one_dim({-1, 1}, {-2, 2});
    CHECK(separability(d) == 0.0);
}

TEST_CASE("separability: 1-D classes at means 0 and 2 with unit variances") {
    const double h = std::sqrt(0.5); // two points at mean +/- h have (n-1) variance 1
    const auto d = one_dim({-h, h}, {2 - h, 2 + h});
    CHECK(separability(d) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("separability requires two samples per class") {
    CHECK_THROWS_AS(separability(one_dim({0, 1}, {5})), degenerate_dataset_error);
}

TEST_CASE("separability invariances") {
    auto d = test_util::blobs(60, 40, 3.0, 2, 5);
    const double base = separability(d);

    // translation
    Dataset shifted = d;
    for (std::size_t i = 0; i < shifted.size(); ++i) {
        auto r = shifted.features.row(i);
        r[0] += 13.5;
        r[1] -= 2.25;
    }
    CHECK(separability(shifted) == doctest::Approx(base).epsilon(1e-12));

    // rotation
    const double theta = 0.83;
    Dataset rotated = d;
    for (std::size_t i = 0; i < rotated.size(); ++i) {
        auto r = rotated.features.row(i);
        const double x = r[0], y = r[1];
        r[0] = std::cos(theta) * x - std::sin(theta) * y;
        r[1] = std::sin(theta) * x + std::cos(theta) * y;
    }
    CHECK(separability(rotated) == doctest::Approx(base).epsilon(1e-10));

    // positive scaling of all features
    Dataset scaled = d;
    for (std::size_t i = 0; i < scaled.size(); ++i) {
        for (auto& v : scaled.features.row(i)) v *= 4.2;
    }
    CHECK(separability(scaled) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("kmeans closed forms") {
    Matrix pts(4, 2);
    pts(0, 0) = 0; pts(0, 1) = 0;
    pts(1, 0) = 2; pts(1, 1) = 0;
    pts(2, 0) = 0; pts(2, 1) = 2;
    pts(3, 0) = 2; pts(3, 1) = 2;

    // k = 1: center is the mean, inertia the total squared deviation
    const auto one = kmeans(pts, 1, {5, 0});
    CHECK(one.centers(0, 0) == doctest::Approx(1.0));
    CHECK(one.centers(0, 1) == doctest::Approx(1.0));
    CHECK(one.inertia == doctest::Approx(8.0));

    // k = n: zero inertia
    const auto all = kmeans(pts, 4, {5, 1});
    CHECK(all.inertia == doctest::Approx(0.0));

    CHECK_THROWS_AS(kmeans(pts, 5, {5, 2}), invalid_argument_error);
    CHECK_THROWS_AS(kmeans(Matrix(0, 2), 1, {5, 3}), invalid_argument_error);
}

TEST_CASE("kmeans recovers three well-separated blobs") {
    Rng gen({6, 0});
    Matrix pts(0, 2);
    std::vector<int> truth;
    const double centers[3][2] = {{0, 0}, {10, 0}, {0, 10}};
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < 50; ++i) {
            const double row[2] = {centers[c][0] + gen.normal(), centers[c][1] + gen.normal()};
            pts.append_row(row);
            truth.push_back(c);
        }
    }
    const auto res = kmeans(pts, 3, {6, 1});
    // assignment purity: within each true blob, the modal cluster covers >= 99%
    std::size_t agree = 0;
    for (int c = 0; c < 3; ++c) {
        std::size_t counts[3] = {0, 0, 0};
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (truth[i] == c) ++counts[res.assignments[i]];
        }
        agree += *std::max_element(counts, counts + 3);
    }
    CHECK(static_cast<double>(agree) / 150.0 >= 0.99);
}

TEST_CASE("estimate_clusters: one blob stays at 1") {
    const auto d = test_util::blobs(50, 500, 3.0, 5, 7);
    const auto [k, sil] = estimate_clusters(d, {9, 0});
    CHECK(k == 1);
    CHECK(!sil.has_value());
}

TEST_CASE("estimate_clusters: tiny minority falls back to 1") {
    const auto d = test_util::blobs(50, 5, 3.0, 2, 8);
    const auto [k, sil] = estimate_clusters(d, {9, 1});
    CHECK(k == 1);
    CHECK(!sil.has_value());
}

TEST_CASE("estimate_clusters recovers generated cluster structure") {
    GenSpec spec;
    spec.ir = 10.0;
    spec.sep_target = 1.0;
    spec.clusters = 3;
    spec.n_total = 1100;
    spec.dim = 5;
    spec.seed = {11, 0};
    const auto out = generate(spec);
    const auto [k, sil] = estimate_clusters(out.dataset, {9, 2});
    CHECK(k == 3);
    CHECK(sil.has_value());
    CHECK(*sil >= kSilhouetteThreshold);
}

TEST_CASE("profile_dataset on a separable toy") {
    const auto d = test_util::blobs(50, 50, 4.0, 5, 10);
    const auto p = profile_dataset(d, {12, 0});
    CHECK(p.ir == 1.0);
    CHECK(p.separability == doctest::Approx(4.0).epsilon(0.15));
    CHECK(p.cluster_estimate == 1);
    CHECK(p.n_minority == 50);
}

TEST_CASE("profile_dataset round-trips generator targets") {
    GenSpec spec;
    spec.ir = 10.0;
    spec.sep_target = 0.3;
    spec.clusters = 1;
    spec.n_total = 1100;
    spec.dim = 5;
    spec.seed = {13, 0};
    const auto out = generate(spec);
    const auto p = profile_dataset(out.dataset, {13, 1});
    CHECK(p.ir == 10.0);
    CHECK(std::fabs(p.separability - 0.3) / 0.3 <= 0.05);
    CHECK(p.cluster_estimate == 1);
}

TEST_CASE("profile_dataset rejects a single-row minority") {
    const auto d = test_util::blobs(20, 1, 3.0, 2, 11);
    CHECK_THROWS_AS(profile_dataset(d, {14, 0}), degenerate_dataset_error);
}
