#include <doctest.h>

#include <vector>

#include "imba/selector.hpp"

using namespace imba;

namespace {

DataProfile profile_of(double sep, double ir, int clusters) {
    DataProfile p;
    p.separability = sep;
    p.ir = ir;
    p.cluster_estimate = clusters;
    p.n_minority = 100;
    return p;
}

// Hand-evaluated reference decision, written independently of select().
Recommendation reference(double sep, double ir, int clusters) {
    const bool low_sep_low_ir = sep < 0.5 && ir < 20.0;
    const bool high_sep_high_ir = sep > 1.0 && ir > 10.0;
    if (low_sep_low_ir) return Recommendation::STRUCTURE_PRESERVING;
    if (high_sep_high_ir) return Recommendation::CLEANING;
    if (clusters >= 2) return Recommendation::BOUNDARY;
    return Recommendation::SIMPLE;
}

} // namespace

TEST_CASE("selector truth table across threshold boundaries") {
    const std::vector<double> seps = {0.49, 0.5, 0.51, 1.0, 1.01};
    const std::vector<double> irs = {9, 10, 11, 19, 20, 21};
    const std::vector<int> ks = {1, 3};
    int cases = 0;
    for (double s : seps) {
        for (double ir : irs) {
            for (int k : ks) {
                const auto d = select(profile_of(s, ir, k));
                CHECK(d.recommendation == reference(s, ir, k));
                ++cases;
            }
        }
    }
    CHECK(cases == 60);
}

TEST_CASE("selector published examples") {
    CHECK(select(profile_of(0.3, 10.0, 1)).recommendation ==
          Recommendation::STRUCTURE_PRESERVING);
    CHECK(select(profile_of(1.2, 15.0, 1)).recommendation == Recommendation::CLEANING);
    CHECK(select(profile_of(0.8, 10.0, 1)).recommendation == Recommendation::SIMPLE);
}

TEST_CASE("strict inequalities at the exact thresholds") {
    // S == 0.5 fails branch 1, IR == 20 fails branch 1
    CHECK(select(profile_of(0.5, 5.0, 1)).branch != 1);
    CHECK(select(profile_of(0.3, 20.0, 1)).branch != 1);
    // S == 1.0 fails branch 2, IR == 10 fails branch 2
    CHECK(select(profile_of(1.0, 30.0, 1)).branch != 2);
    CHECK(select(profile_of(1.5, 10.0, 1)).branch != 2);
    // clusters == 2 hits branch 3 when the first two fail
    CHECK(select(profile_of(0.7, 30.0, 2)).branch == 3);
}

TEST_CASE("branch numbering follows evaluation order") {
    CHECK(select(profile_of(0.3, 10.0, 3)).branch == 1);  // branch 1 wins over clusters
    CHECK(select(profile_of(1.2, 15.0, 3)).branch == 2);  // branch 2 wins over clusters
    CHECK(select(profile_of(0.8, 15.0, 3)).branch == 3);
    CHECK(select(profile_of(0.8, 15.0, 1)).branch == 4);
}

TEST_CASE("custom thresholds shift the decision boundaries") {
    SelectorThresholds t;
    t.sep_low = 0.6;
    const auto p = profile_of(0.55, 5.0, 1);
    CHECK(select(p).recommendation == Recommendation::SIMPLE);
    CHECK(select(p, t).recommendation == Recommendation::STRUCTURE_PRESERVING);

    SelectorThresholds t2;
    t2.ir_high = 5.0;
    const auto q = profile_of(1.2, 8.0, 1);
    CHECK(select(q).recommendation == Recommendation::SIMPLE);
    CHECK(select(q, t2).recommendation == Recommendation::CLEANING);
}

TEST_CASE("small perturbations flip the decision only across a threshold") {
    // just inside / outside branch 1 in S
    CHECK(select(profile_of(0.45, 10.0, 1)).branch == 1);
    CHECK(select(profile_of(0.55, 10.0, 1)).branch == 4);
    // just inside / outside branch 2 in IR
    CHECK(select(profile_of(1.2, 12.0, 1)).branch == 2);
    CHECK(select(profile_of(1.2, 8.0, 1)).branch == 4);
    // far from any threshold, +-0.1 in S changes nothing
    CHECK(select(profile_of(0.2, 5.0, 1)).branch == select(profile_of(0.3, 5.0, 1)).branch);
}

TEST_CASE("names for recommendations and their method families") {
    CHECK(recommendation_name(Recommendation::BOUNDARY) == "BOUNDARY");
    CHECK(recommendation_methods(Recommendation::CLEANING) == "TomekLinks");
    CHECK(recommendation_methods(Recommendation::SIMPLE) == "Baseline/ROS");
}
