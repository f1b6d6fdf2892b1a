#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "traject/param_store.hpp"
#include "traject/tape.hpp"

namespace traject::nn {

/// x @ W + b with parameters `prefix + ".w"` and `prefix + ".b"`, created on
/// first use (Xavier for W, zeros for b).
Var affine(Graph& g, ParamStore& ps, const std::string& prefix, Var x, int out_dim);

/// Multi-layer perceptron: affine followed by tanh for every entry of
/// `widths` except the last, which stays affine. Parameters live under
/// `prefix + ".w0"`, `prefix + ".b0"`, `prefix + ".w1"`, ...
Var mlp_forward(Graph& g, ParamStore& ps, const std::string& prefix, Var x,
                const std::vector<int>& widths);

/// One GRU step. x is (N x Dx), h is (N x H); returns the new hidden state.
///
///   z = sigmoid(x Wzx + h Wzh + bz)
///   r = sigmoid(x Wrx + h Wrh + br)
///   c = tanh(x Wcx + (r * h) Wch + bc)
///   h' = z * h + (1 - z) * c
///
/// so driving bz strongly positive makes h' track h.
Var gru_step(Graph& g, ParamStore& ps, const std::string& prefix, Var x, Var h);

struct GradCheckReport {
    double max_rel_err = 0.0;
    int n_checked = 0;
    std::string worst_param;
    int worst_index = -1;
    double worst_fd = 0.0;
    double worst_bp = 0.0;
};

/// Central-difference check of backprop gradients. `build_loss` must rebuild
/// the same scalar loss from the store's current parameter values on every
/// call. Checks up to `n_samples` coordinates sampled across all parameters
/// (all of them when there are fewer). The relative error for a coordinate is
/// |fd - bp| / max(|fd|, floor), so a gradient corrupted by a factor of two
/// shows up as an error near 1.
GradCheckReport grad_check(ParamStore& ps,
                           const std::function<Var(Graph&, ParamStore&)>& build_loss,
                           int n_samples = 200, double h = 1e-5, double floor = 1e-4,
                           uint64_t seed = 12345);

}  // namespace traject::nn
