#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "imba/error.hpp"
#include "imba/rng.hpp"

namespace imba {

// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    void append_row(std::span<const double> r) {
        data_.insert(data_.end(), r.begin(), r.end());
        ++rows_;
    }

    void reserve_rows(std::size_t n) { data_.reserve(n * cols_); }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

// Binary dataset: label 0 = majority, 1 = minority.
struct Dataset {
    Matrix features;
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return features.cols(); }

    std::vector<std::size_t> rows_of(int label) const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == label) idx.push_back(i);
        }
        return idx;
    }

    Dataset subset(const std::vector<std::size_t>& rows) const {
        Dataset out;
        out.features = Matrix(0, features.cols());
        out.features.reserve_rows(rows.size());
        out.labels.reserve(rows.size());
        for (std::size_t i : rows) {
            out.features.append_row(features.row(i));
            out.labels.push_back(labels[i]);
        }
        return out;
    }

    void validate() const {
        if (features.rows() != labels.size()) {
            throw invalid_argument_error("dataset: row count does not match label count");
        }
        for (std::size_t i = 0; i < features.rows(); ++i) {
            for (double v : features.row(i)) {
                if (!std::isfinite(v)) throw invalid_argument_error("dataset: non-finite feature value");
            }
        }
        for (int y : labels) {
            if (y != 0 && y != 1) throw invalid_argument_error("dataset: labels must be 0 or 1");
        }
    }
};

struct ClassCounts {
    std::size_t n_majority = 0;
    std::size_t n_minority = 0;
};

inline ClassCounts class_counts(const Dataset& data) {
    ClassCounts c;
    for (int y : data.labels) {
        if (y == 1) ++c.n_minority; else ++c.n_majority;
    }
    return c;
}

inline double imbalance_ratio(const ClassCounts& counts) {
    if (counts.n_minority == 0) {
        throw degenerate_dataset_error("imbalance_ratio: zero minority count");
    }
    return static_cast<double>(counts.n_majority) / static_cast<double>(counts.n_minority);
}

// Keep all rows of the other class and a uniform without-replacement sample
// of `keep` rows of `which_class`. Original row order is preserved.
inline Dataset subsample_class(const Dataset& data, int which_class, std::size_t keep, RngSeed rng) {
    const auto klass = data.rows_of(which_class);
    if (keep < 1 || keep > klass.size()) {
        throw invalid_argument_error("subsample_class: keep out of range for class size " +
                                     std::to_string(klass.size()));
    }
    Rng gen(rng);
    auto picks = gen.sample_without_replacement(klass.size(), keep);
    std::vector<bool> kept(data.size(), false);
    for (std::size_t p : picks) kept[klass[p]] = true;
    std::vector<std::size_t> rows;
    rows.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.labels[i] != which_class || kept[i]) rows.push_back(i);
    }
    return data.subset(rows);
}

namespace detail {

inline void append_double(std::string& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

} // namespace detail

// CSV contract: header f0,...,f{d-1},label; shortest round-trip decimals;
// label is literal 0 or 1; '\n' line endings.
inline std::string to_csv(const Dataset& data) {
    std::string out;
    const std::size_t d = data.dim();
    for (std::size_t j = 0; j < d; ++j) {
        out += "f" + std::to_string(j) + ",";
    }
    out += "label\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto row = data.features.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            detail::append_double(out, row[j]);
            out += ',';
        }
        out += data.labels[i] == 1 ? '1' : '0';
        out += '\n';
    }
    return out;
}

inline Dataset from_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw invalid_argument_error("csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t d = 0;
    {
        std::stringstream hdr(line);
        std::string col;
        std::vector<std::string> cols;
        while (std::getline(hdr, col, ',')) cols.push_back(col);
        if (cols.empty() || cols.back() != "label") {
            throw invalid_argument_error("csv: last header column must be 'label'");
        }
        d = cols.size() - 1;
        for (std::size_t j = 0; j < d; ++j) {
            if (cols[j] != "f" + std::to_string(j)) {
                throw invalid_argument_error("csv: header column " + std::to_string(j) +
                                             " must be f" + std::to_string(j));
            }
        }
    }
    Dataset data;
    data.features = Matrix(0, d);
    std::vector<double> row(d);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (std::size_t j = 0; j < d; ++j) {
            auto res = std::from_chars(p, end, row[j]);
            if (res.ec != std::errc{} || res.ptr == end || *res.ptr != ',') {
                throw invalid_argument_error("csv: malformed feature value");
            }
            p = res.ptr + 1;
        }
        if (p + 1 != end || (*p != '0' && *p != '1')) {
            throw invalid_argument_error("csv: label must be literal 0 or 1");
        }
        data.features.append_row(row);
        data.labels.push_back(*p - '0');
    }
    data.validate();
    return data;
}

inline Dataset read_csv_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw invalid_argument_error("cannot open " + path.string());
    return from_csv(f);
}

// Atomic file write: temp file in the same directory, then rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw invalid_argument_error("cannot write " + tmp.string());
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
    }
    std::filesystem::rename(tmp, path);
}

inline void write_csv_file(const std::filesystem::path& path, const Dataset& data) {
    write_file_atomic(path, to_csv(data));
}

} // namespace imba
