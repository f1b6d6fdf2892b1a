#include "traject/nn.hpp"

#include <cmath>
#include <stdexcept>

#include "traject/rng.hpp"

namespace traject::nn {

Var affine(Graph& g, ParamStore& ps, const std::string& prefix, Var x, int out_dim) {
    ParamEntry& w = ps.ensure(prefix + ".w", x.cols(), out_dim, Init::XavierUniform);
    ParamEntry& b = ps.ensure(prefix + ".b", 1, out_dim, Init::Zeros);
    Var wv = g.param(w, prefix + ".w");
    Var bv = g.param(b, prefix + ".b");
    return g.add_rowvec(g.matmul(x, wv), bv);
}

Var mlp_forward(Graph& g, ParamStore& ps, const std::string& prefix, Var x,
                const std::vector<int>& widths) {
    if (widths.empty()) throw std::invalid_argument("mlp_forward: widths must not be empty");
    Var h = x;
    for (size_t l = 0; l < widths.size(); ++l) {
        const std::string layer = prefix + ".w" + std::to_string(l);
        ParamEntry& w = ps.ensure(layer, h.cols(), widths[l], Init::XavierUniform);
        ParamEntry& b = ps.ensure(prefix + ".b" + std::to_string(l), 1, widths[l], Init::Zeros);
        h = g.add_rowvec(g.matmul(h, g.param(w, layer)),
                         g.param(b, prefix + ".b" + std::to_string(l)));
        if (l + 1 < widths.size()) h = g.tanh(h);
    }
    return h;
}

Var gru_step(Graph& g, ParamStore& ps, const std::string& prefix, Var x, Var h) {
    const int dx = x.cols();
    const int dh = h.cols();
    auto gate = [&](const char* wx_name, const char* wh_name, const char* b_name, Var hin) {
        Var wx = g.param(ps.ensure(prefix + "." + wx_name, dx, dh, Init::XavierUniform),
                         prefix + "." + wx_name);
        Var wh = g.param(ps.ensure(prefix + "." + wh_name, dh, dh, Init::XavierUniform),
                         prefix + "." + wh_name);
        Var b = g.param(ps.ensure(prefix + "." + b_name, 1, dh, Init::Zeros),
                        prefix + "." + b_name);
        return g.add_rowvec(g.add(g.matmul(x, wx), g.matmul(hin, wh)), b);
    };
    Var z = g.sigmoid(gate("wzx", "wzh", "bz", h));
    Var r = g.sigmoid(gate("wrx", "wrh", "br", h));
    Var c = g.tanh(gate("wcx", "wch", "bc", g.mul(r, h)));
    // h' = z * h + (1 - z) * c
    Var one_minus_z = g.add_const(g.scale(z, -1.0), 1.0);
    return g.add(g.mul(z, h), g.mul(one_minus_z, c));
}

GradCheckReport grad_check(ParamStore& ps,
                           const std::function<Var(Graph&, ParamStore&)>& build_loss,
                           int n_samples, double h, double floor, uint64_t seed) {
    // Analytic pass. This also creates any parameters the loss needs, so the
    // coordinate list below is complete.
    ps.zero_grads();
    {
        Graph g;
        Var loss = build_loss(g, ps);
        g.backward(loss);
    }

    struct Coord {
        std::string name;
        size_t index;
    };
    std::vector<Coord> coords;
    for (const auto& [name, entry] : ps) {
        for (size_t i = 0; i < entry.value.data.size(); ++i) coords.push_back({name, i});
    }

    std::vector<size_t> picks;
    if (static_cast<int>(coords.size()) <= n_samples) {
        picks.resize(coords.size());
        for (size_t i = 0; i < coords.size(); ++i) picks[i] = i;
    } else {
        Rng rng(seed);
        for (int i = 0; i < n_samples; ++i) picks.push_back(rng.below(coords.size()));
    }

    auto eval = [&]() {
        Graph g;
        Var loss = build_loss(g, ps);
        return g.val(loss).at(0, 0);
    };

    GradCheckReport report;
    for (size_t pick : picks) {
        const Coord& c = coords[pick];
        ParamEntry& entry = ps.at(c.name);
        const double bp = entry.grad.data[c.index];
        const double saved = entry.value.data[c.index];
        entry.value.data[c.index] = saved + h;
        const double f_plus = eval();
        entry.value.data[c.index] = saved - h;
        const double f_minus = eval();
        entry.value.data[c.index] = saved;
        const double fd = (f_plus - f_minus) / (2.0 * h);
        const double rel = std::abs(fd - bp) / std::max(std::abs(fd), floor);
        ++report.n_checked;
        if (rel > report.max_rel_err) {
            report.max_rel_err = rel;
            report.worst_param = c.name;
            report.worst_index = static_cast<int>(c.index);
            report.worst_fd = fd;
            report.worst_bp = bp;
        }
    }
    // The FD evaluations above did not run backward, so the analytic
    // gradients are still intact in the store when this returns.
    return report;
}

}  // namespace traject::nn
