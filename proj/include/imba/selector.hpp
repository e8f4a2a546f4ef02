#pragma once

#include <string>

#include "imba/error.hpp"
#include "imba/profile.hpp"

namespace imba {

enum class Recommendation { STRUCTURE_PRESERVING, CLEANING, BOUNDARY, SIMPLE };

inline std::string recommendation_name(Recommendation r) {
    switch (r) {
        case Recommendation::STRUCTURE_PRESERVING: return "STRUCTURE_PRESERVING";
        case Recommendation::CLEANING: return "CLEANING";
        case Recommendation::BOUNDARY: return "BOUNDARY";
        case Recommendation::SIMPLE: return "SIMPLE";
    }
    return "?";
}

inline std::string recommendation_methods(Recommendation r) {
    switch (r) {
        case Recommendation::STRUCTURE_PRESERVING: return "SMOTE/ADASYN";
        case Recommendation::CLEANING: return "TomekLinks";
        case Recommendation::BOUNDARY: return "BorderlineSMOTE/ADASYN";
        case Recommendation::SIMPLE: return "Baseline/ROS";
    }
    return "?";
}

// Decision thresholds, defaults as published; configurable so the threshold
// sensitivity sweep runs without code changes.
struct SelectorThresholds {
    double sep_low = 0.5;   // S below this counts as low separability
    double sep_high = 1.0;  // S above this counts as high separability
    double ir_low = 20.0;   // IR below this pairs with low separability
    double ir_high = 10.0;  // IR above this pairs with high separability
};

struct SelectionDecision {
    Recommendation recommendation = Recommendation::SIMPLE;
    int branch = 4; // 1..4 in evaluation order
    DataProfile profile;
};

// Branches evaluated strictly in order; all inequalities strict.
inline SelectionDecision select(const DataProfile& profile,
                                const SelectorThresholds& t = {}) {
    SelectionDecision d;
    d.profile = profile;
    if (profile.separability < t.sep_low && profile.ir < t.ir_low) {
        d.recommendation = Recommendation::STRUCTURE_PRESERVING;
        d.branch = 1;
    } else if (profile.separability > t.sep_high && profile.ir > t.ir_high) {
        d.recommendation = Recommendation::CLEANING;
        d.branch = 2;
    } else if (profile.cluster_estimate >= 2) {
        d.recommendation = Recommendation::BOUNDARY;
        d.branch = 3;
    } else {
        d.recommendation = Recommendation::SIMPLE;
        d.branch = 4;
    }
    return d;
}

} // namespace imba
