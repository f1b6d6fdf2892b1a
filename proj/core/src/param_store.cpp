#include "traject/param_store.hpp"

#include <cmath>
#include <stdexcept>

#include "traject/rng.hpp"

namespace traject::nn {

ParamEntry& ParamStore::ensure(const std::string& name, int rows, int cols, Init init) {
    auto it = entries_.find(name);
    if (it != entries_.end()) {
        auto& e = it->second;
        if (e.value.rows != rows || e.value.cols != cols) {
            throw std::invalid_argument("param '" + name + "' exists with shape " + e.value.shape_str() +
                                        ", requested " + std::to_string(rows) + "x" + std::to_string(cols));
        }
        return e;
    }
    ParamEntry e;
    e.value = Tensor2(rows, cols);
    if (init == Init::XavierUniform) {
        Rng rng(splitmix64(init_seed_ ^ fnv1a64(name)));
        const double limit = std::sqrt(6.0 / (rows + cols));
        for (auto& x : e.value.data) x = rng.uniform(-limit, limit);
    }
    e.grad = Tensor2(rows, cols);
    e.adam_m = Tensor2(rows, cols);
    e.adam_v = Tensor2(rows, cols);
    return entries_.emplace(name, std::move(e)).first->second;
}

ParamEntry& ParamStore::at(const std::string& name) {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw std::out_of_range("no such param: " + name);
    return it->second;
}

const ParamEntry& ParamStore::at(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw std::out_of_range("no such param: " + name);
    return it->second;
}

void ParamStore::zero_grads() {
    for (auto& [name, e] : entries_) {
        for (auto& g : e.grad.data) g = 0.0;
    }
}

void ParamStore::scale_grads(double s) {
    for (auto& [name, e] : entries_) {
        for (auto& g : e.grad.data) g *= s;
    }
}

double ParamStore::clip_grad_norm(double max_norm) {
    double sq = 0.0;
    for (auto& [name, e] : entries_) {
        for (double g : e.grad.data) sq += g * g;
    }
    const double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        const double s = max_norm / norm;
        scale_grads(s);
    }
    return norm;
}

void ParamStore::adam_step(double lr, double beta1, double beta2, double eps) {
    ++step_;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_));
    for (auto& [name, e] : entries_) {
        for (size_t i = 0; i < e.value.data.size(); ++i) {
            const double g = e.grad.data[i];
            e.adam_m.data[i] = beta1 * e.adam_m.data[i] + (1.0 - beta1) * g;
            e.adam_v.data[i] = beta2 * e.adam_v.data[i] + (1.0 - beta2) * g * g;
            const double mhat = e.adam_m.data[i] / bc1;
            const double vhat = e.adam_v.data[i] / bc2;
            e.value.data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
        for (auto& g : e.grad.data) g = 0.0;
    }
}

}  // namespace traject::nn
