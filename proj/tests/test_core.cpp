#include <doctest.h>

#include <numeric>
#include <set>
#include <sstream>

#include "imba/dataset.hpp"
#include "imba/rng.hpp"
#include "test_util.hpp"

using namespace imba;

namespace {

Dataset labeled_dataset(std::size_t n_maj, std::size_t n_min) {
    Dataset d;
    d.features = Matrix(0, 1);
    for (std::size_t i = 0; i < n_maj + n_min; ++i) {
        const double v[1] = {static_cast<double>(i)};
        d.features.append_row(v);
        d.labels.push_back(i < n_maj ? 0 : 1);
    }
    return d;
}

} // namespace

TEST_CASE("class_counts counts labels exactly") {
    auto counts = class_counts(labeled_dataset(900, 100));
    CHECK(counts.n_majority == 900);
    CHECK(counts.n_minority == 100);

    counts = class_counts(labeled_dataset(0, 10));
    CHECK(counts.n_majority == 0);
    CHECK(counts.n_minority == 10);

    counts = class_counts(labeled_dataset(10923, 260));
    CHECK(counts.n_majority == 10923);
    CHECK(counts.n_minority == 260);
}

TEST_CASE("imbalance_ratio") {
    CHECK(imbalance_ratio({50, 50}) == 1.0);
    CHECK(imbalance_ratio({900, 100}) == 9.0);
    CHECK(imbalance_ratio({10923, 260}) == doctest::Approx(42.01).epsilon(0.001));
    CHECK_THROWS_AS(imbalance_ratio({10, 0}), degenerate_dataset_error);
}

TEST_CASE("subsample_class keeps counts and never fabricates rows") {
    auto data = test_util::blobs(900, 100, 3.0);
    const auto out = subsample_class(data, 1, 45, {7, 0});
    const auto counts = class_counts(out);
    CHECK(counts.n_majority == 900);
    CHECK(counts.n_minority == 45);
    CHECK(imbalance_ratio(counts) == 20.0);

    // every output row occurs in the input
    const auto input_rows = test_util::row_multiset(data);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto r = out.features.row(i);
        CHECK(input_rows.contains(std::vector<double>(r.begin(), r.end())));
    }
}

TEST_CASE("subsample_class with keep = class size is the identity up to order") {
    auto data = test_util::blobs(30, 10, 3.0);
    const auto out = subsample_class(data, 1, 10, {7, 1});
    CHECK(test_util::row_multiset(out) == test_util::row_multiset(data));
}

TEST_CASE("subsample_class: distinct streams give distinct subsets") {
    auto data = test_util::blobs(200, 100, 3.0);
    const auto a = subsample_class(data, 1, 30, {7, 1});
    const auto b = subsample_class(data, 1, 30, {7, 2});
    CHECK(class_counts(a).n_minority == 30);
    CHECK(class_counts(b).n_minority == 30);
    CHECK(test_util::row_multiset(a) != test_util::row_multiset(b));
}

TEST_CASE("subsample_class rejects keep out of range") {
    auto data = test_util::blobs(30, 10, 3.0);
    CHECK_THROWS_AS(subsample_class(data, 1, 11, {7, 0}), invalid_argument_error);
    CHECK_THROWS_AS(subsample_class(data, 1, 0, {7, 0}), invalid_argument_error);
}

TEST_CASE("imbalance ratio is invariant under row permutation") {
    auto data = test_util::blobs(90, 10, 3.0);
    std::vector<std::size_t> perm(data.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng gen({3, 3});
    gen.shuffle(perm);
    const auto shuffled = data.subset(perm);
    CHECK(imbalance_ratio(class_counts(shuffled)) == imbalance_ratio(class_counts(data)));
}

TEST_CASE("derive_stream") {
    const RngSeed root{42, 0};
    const auto a = derive_stream(root, "fold0");
    const auto b = derive_stream(root, "fold0");
    CHECK(a.seed == b.seed);
    CHECK(a.stream_id == b.stream_id);

    const auto c = derive_stream(root, "fold1");
    CHECK(a.stream_id != c.stream_id);

    // streams differ in their outputs, not just ids
    Rng ga(a), gc(c);
    bool differ = false;
    for (int i = 0; i < 8; ++i) {
        if (ga.next_u64() != gc.next_u64()) differ = true;
    }
    CHECK(differ);

    // no special case for seed 0 / empty label
    Rng g0(derive_stream({0, 0}, ""));
    CHECK(g0.uniform01() >= 0.0);
}

TEST_CASE("rng basics") {
    Rng gen({123, 5});
    for (int i = 0; i < 1000; ++i) {
        const double u = gen.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(gen.below(7) < 7);
    }
    auto picks = gen.sample_without_replacement(10, 10);
    std::set<std::size_t> unique(picks.begin(), picks.end());
    CHECK(unique.size() == 10);
}

TEST_CASE("csv round trip is exact") {
    Rng gen({99, 0});
    for (int trial = 0; trial < 10; ++trial) {
        auto data = test_util::random_dataset(gen);
        const auto text = to_csv(data);
        std::istringstream in(text);
        const auto back = from_csv(in);
        CHECK(back.labels == data.labels);
        CHECK(back.features == data.features);
        CHECK(to_csv(back) == text);
    }
}

TEST_CASE("csv rejects malformed input") {
    std::istringstream missing_label("f0,f1\n1,2\n");
    CHECK_THROWS_AS(from_csv(missing_label), invalid_argument_error);
    std::istringstream bad_label("f0,label\n1,2\n");
    CHECK_THROWS_AS(from_csv(bad_label), invalid_argument_error);
    std::istringstream bad_header("f1,f0,label\n");
    CHECK_THROWS_AS(from_csv(bad_header), invalid_argument_error);
}
