#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "traject/tensor.hpp"

namespace traject::nn {

struct ParamEntry {
    Tensor2 value;
    Tensor2 grad;
    Tensor2 adam_m;
    Tensor2 adam_v;
};

enum class Init { Zeros, XavierUniform };

/// Named parameter tensors with their gradients and Adam moments.
/// The map is ordered by name, which fixes the optimizer update order
/// and the checkpoint layout.
class ParamStore {
public:
    explicit ParamStore(uint64_t init_seed = 0) : init_seed_(init_seed) {}

    /// Returns the entry for `name`, creating it on first use. Creation is
    /// order-independent: the initializer is seeded from (init_seed, name).
    ParamEntry& ensure(const std::string& name, int rows, int cols, Init init);

    bool contains(const std::string& name) const { return entries_.count(name) != 0; }
    ParamEntry& at(const std::string& name);
    const ParamEntry& at(const std::string& name) const;

    void zero_grads();

    /// Multiplies every gradient by `s` (batch averaging).
    void scale_grads(double s);

    /// Clips gradients to a global L2 norm; no-op when already within.
    /// Returns the pre-clip norm.
    double clip_grad_norm(double max_norm);

    auto begin() { return entries_.begin(); }
    auto end() { return entries_.end(); }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }
    size_t size() const { return entries_.size(); }

    int64_t step_count() const { return step_; }
    void set_step_count(int64_t s) { step_ = s; }
    uint64_t init_seed() const { return init_seed_; }

    /// Bias-corrected Adam on all parameters in name order; zeroes the
    /// gradients afterwards.
    void adam_step(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

private:
    std::map<std::string, ParamEntry> entries_;
    uint64_t init_seed_ = 0;
    int64_t step_ = 0;
};

}  // namespace traject::nn
