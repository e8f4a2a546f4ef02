#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "imba/dataset.hpp"
#include "imba/rng.hpp"

namespace test_util {

// Two Gaussian blobs: n_maj at the origin, n_min at `distance` along axis 0.
inline imba::Dataset blobs(std::size_t n_maj, std::size_t n_min, double distance,
                           std::size_t dim = 2, std::uint64_t seed = 1) {
    imba::Rng gen({seed, 0});
    imba::Dataset data;
    data.features = imba::Matrix(0, dim);
    std::vector<double> row(dim);
    for (std::size_t i = 0; i < n_maj; ++i) {
        for (auto& v : row) v = gen.normal();
        data.features.append_row(row);
        data.labels.push_back(0);
    }
    for (std::size_t i = 0; i < n_min; ++i) {
        for (auto& v : row) v = gen.normal();
        row[0] += distance;
        data.features.append_row(row);
        data.labels.push_back(1);
    }
    return data;
}

inline imba::Dataset random_dataset(imba::Rng& gen, std::size_t n_max = 200, std::size_t dim = 3) {
    const std::size_t n_min = 2 + gen.index(n_max / 4);
    const std::size_t n_maj = n_min + gen.index(n_max / 2);
    imba::Dataset data;
    data.features = imba::Matrix(0, dim);
    std::vector<double> row(dim);
    for (std::size_t i = 0; i < n_maj + n_min; ++i) {
        for (auto& v : row) v = 4.0 * gen.uniform01() - 2.0;
        data.features.append_row(row);
        data.labels.push_back(i < n_maj ? 0 : 1);
    }
    return data;
}

inline std::multiset<std::vector<double>> row_multiset(const imba::Dataset& data) {
    std::multiset<std::vector<double>> rows;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto r = data.features.row(i);
        rows.insert(std::vector<double>(r.begin(), r.end()));
    }
    return rows;
}

} // namespace test_util
