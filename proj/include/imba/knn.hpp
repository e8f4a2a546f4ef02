#pragma once

#include <algorithm>
#include <limits>
#include <span>
#include <vector>

#include "imba/dataset.hpp"
#include "imba/error.hpp"

namespace imba {

// Exact brute-force nearest neighbors under Euclidean distance. Datasets are
// desk-scale, so O(n^2) keeps everything deterministic with index tie-breaks.
class NeighborIndex {
public:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    explicit NeighborIndex(const Matrix& reference) : ref_(&reference) {}

    std::size_t size() const { return ref_->rows(); }

    // k nearest reference rows to `point`; `self` (if not npos) is excluded.
    // Ties broken toward the lower row index.
    std::vector<std::size_t> query(std::span<const double> point, std::size_t k,
                                   std::size_t self = npos) const {
        const std::size_t n = ref_->rows();
        const std::size_t available = n - (self != npos ? 1 : 0);
        if (k < 1 || k > available) {
            throw invalid_argument_error("query_knn: k out of range");
        }
        std::vector<std::pair<double, std::size_t>> dist;
        dist.reserve(available);
        for (std::size_t i = 0; i < n; ++i) {
            if (i == self) continue;
            dist.emplace_back(squared_distance(point, ref_->row(i)), i);
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        std::vector<std::size_t> out(k);
        for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
        return out;
    }

    // Neighbors of reference row i (self-excluding).
    std::vector<std::size_t> query_row(std::size_t i, std::size_t k) const {
        return query(ref_->row(i), k, i);
    }

    // Single nearest neighbor of reference row i, tie toward lower index.
    std::size_t nearest_of(std::size_t i) const {
        const std::size_t n = ref_->rows();
        double best = std::numeric_limits<double>::infinity();
        std::size_t who = npos;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = squared_distance(ref_->row(i), ref_->row(j));
            if (d < best) {
                best = d;
                who = j;
            }
        }
        return who;
    }

private:
    const Matrix* ref_;
};

} // namespace imba
