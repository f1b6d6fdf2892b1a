#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace traject {

/// Dense row-major matrix of doubles. Row vectors (1 x n) double as
/// biases and per-row features; 1 x 1 tensors carry scalars.
struct Tensor2 {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Tensor2() = default;
    Tensor2(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}
    Tensor2(int r, int c, std::initializer_list<double> values);

    static Tensor2 zeros(int r, int c) { return Tensor2(r, c); }
    static Tensor2 full(int r, int c, double v);
    static Tensor2 identity(int n);
    static Tensor2 scalar(double v);

    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    size_t size() const { return data.size(); }
    bool same_shape(const Tensor2& o) const { return rows == o.rows && cols == o.cols; }
    bool all_finite() const;

    std::string shape_str() const;
};

Tensor2 matmul(const Tensor2& a, const Tensor2& b);

/// max_i |a_i - b_i|; shapes must match.
double max_abs_diff(const Tensor2& a, const Tensor2& b);

}  // namespace traject
