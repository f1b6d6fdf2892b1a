#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "traject/param_store.hpp"
#include "traject/tensor.hpp"

namespace traject::nn {

class Graph;

// Handle to a node in a Graph. Cheap to copy; only valid for the graph that
// created it and only while that graph is alive.
struct Var {
    Graph* g = nullptr;
    int idx = -1;

    bool valid() const { return g != nullptr && idx >= 0; }
    int rows() const;
    int cols() const;
};

// Reverse-mode autodiff tape. Every op appends a node holding its output
// value, a gradient buffer and a backward closure; backward() replays the
// closures in reverse creation order. The tape is rebuilt for every forward
// pass, which keeps control flow (per-step frame recomputation, masked
// branches) exact instead of approximated by a frozen graph.
class Graph {
public:
    Graph() = default;
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    // Leaf holding a constant. No gradient is reported for it, but one is
    // still accumulated internally so it can be inspected in tests.
    Var input(Tensor2 v, std::string tag = "input");

    // Leaf bound to a ParamStore entry; backward() adds the accumulated
    // gradient into entry.grad.
    Var param(ParamEntry& e, std::string tag);

    Var matmul(Var a, Var b);
    Var add(Var a, Var b);
    // a (R x C) + bias (1 x C) broadcast over rows.
    Var add_rowvec(Var a, Var bias);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var scale(Var a, double s);
    Var add_const(Var a, double c);
    Var tanh(Var a);
    Var sigmoid(Var a);
    Var sin(Var a);
    Var cos(Var a);
    // Elementwise atan2(y, x); shapes must match. The backward pass floors
    // x^2 + y^2 to keep masked-out zero-velocity rows from producing NaN.
    Var atan2(Var y, Var x);
    Var concat_cols(const std::vector<Var>& xs);
    Var slice_cols(Var a, int c0, int c1);
    // out row k = a row rows[k]; backward scatter-adds.
    Var gather_rows(Var a, std::vector<int> rows);
    // out row d = mean of input rows k with dest[k] == d; groups with no
    // members produce a zero row. dest values must lie in [0, n_out).
    Var scatter_mean_rows(Var a, std::vector<int> dest, int n_out);
    // out[i][j] = a[i][j] * col[i][0]; col is (R x 1).
    Var scale_rows(Var a, Var col);
    // Row-wise select: out row i = mask[i] ? a row : b row. The mask is a
    // constant, so no gradient flows through the branch decision and the
    // untaken side receives exactly zero gradient.
    Var where_rows(std::vector<double> mask, Var a, Var b);
    Var softmax_rows(Var a);
    // Mean of -log(probs[r][labels[r]]) over rows, clamped away from log(0).
    Var ce_loss(Var probs, std::vector<int> labels);
    // Mean of (pred - target)^2 over all elements.
    Var mse_loss(Var pred, Tensor2 target);
    Var sum_all(Var a);

    const Tensor2& val(Var v) const;
    const Tensor2& grad(Var v) const;

    // Seeds d(loss)/d(loss) = 1, runs all backward closures in reverse and
    // then adds each bound parameter's accumulated gradient into its
    // ParamStore entry. loss must be 1x1.
    void backward(Var loss);

    // Tag of the first node (in creation order) holding a non-finite value,
    // or nullopt if the whole tape is finite.
    std::optional<std::string> first_nonfinite() const;

    size_t size() const { return nodes_.size(); }

private:
    friend struct Var;

    struct Node {
        Tensor2 val;
        Tensor2 grad;
        std::string tag;
        std::function<void(Graph&)> back;
        ParamEntry* bound = nullptr;
    };

    Var push(Tensor2 val, std::string tag, std::function<void(Graph&)> back,
             ParamEntry* bound = nullptr);
    Node& node(Var v);
    const Node& node(Var v) const;
    void check_same_graph(Var v, const char* op) const;

    std::vector<Node> nodes_;
    // Index of the node whose backward closure is currently running; lets
    // closures reach their own output value and gradient without capturing
    // pointers into nodes_ (which reallocates as the tape grows).
    size_t cursor_ = 0;
};

}  // namespace traject::nn
