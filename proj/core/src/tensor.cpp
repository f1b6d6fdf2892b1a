#include "traject/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace traject {

Tensor2::Tensor2(int r, int c, std::initializer_list<double> values) : rows(r), cols(c), data(values) {
    if (data.size() != static_cast<size_t>(r) * c) {
        throw std::invalid_argument("Tensor2: initializer size does not match " + shape_str());
    }
}

Tensor2 Tensor2::full(int r, int c, double v) {
    Tensor2 t(r, c);
    for (auto& x : t.data) x = v;
    return t;
}

Tensor2 Tensor2::identity(int n) {
    Tensor2 t(n, n);
    for (int i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
}

Tensor2 Tensor2::scalar(double v) {
    Tensor2 t(1, 1);
    t.data[0] = v;
    return t;
}

bool Tensor2::all_finite() const {
    for (double x : data) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

std::string Tensor2::shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

Tensor2 matmul(const Tensor2& a, const Tensor2& b) {
    if (a.cols != b.rows) {
        throw std::invalid_argument("matmul: shape mismatch " + a.shape_str() + " * " + b.shape_str());
    }
    Tensor2 c(a.rows, b.cols);
    // i-k-j order keeps the inner loop contiguous in both b and c.
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = a.data.data() + static_cast<size_t>(i) * a.cols;
        double* crow = c.data.data() + static_cast<size_t>(i) * c.cols;
        for (int k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.data.data() + static_cast<size_t>(k) * b.cols;
            for (int j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

double max_abs_diff(const Tensor2& a, const Tensor2& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument("max_abs_diff: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    }
    double m = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

}  // namespace traject
