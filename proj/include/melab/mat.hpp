#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace melab {

// Dense row-major matrix of doubles. Rows are handed around as spans.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return a[r * cols + c]; }

    double* row_ptr(std::size_t r) { return a.data() + r * cols; }
    const double* row_ptr(std::size_t r) const { return a.data() + r * cols; }

    std::span<double> row(std::size_t r) { return {row_ptr(r), cols}; }
    std::span<const double> row(std::size_t r) const { return {row_ptr(r), cols}; }

    void push_row(std::span<const double> v) {
        a.insert(a.end(), v.begin(), v.end());
        ++rows;
    }

    bool empty() const { return rows == 0; }
};

}  // namespace melab
