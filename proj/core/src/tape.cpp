#include "traject/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace traject::nn {

int Var::rows() const { return g->val(*this).rows; }
int Var::cols() const { return g->val(*this).cols; }

Var Graph::push(Tensor2 val, std::string tag, std::function<void(Graph&)> back, ParamEntry* bound) {
    Node n;
    n.grad = Tensor2(val.rows, val.cols);
    n.val = std::move(val);
    n.tag = std::move(tag);
    n.back = std::move(back);
    n.bound = bound;
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Graph::Node& Graph::node(Var v) { return nodes_.at(static_cast<size_t>(v.idx)); }
const Graph::Node& Graph::node(Var v) const { return nodes_.at(static_cast<size_t>(v.idx)); }

void Graph::check_same_graph(Var v, const char* op) const {
    if (v.g != this || v.idx < 0 || static_cast<size_t>(v.idx) >= nodes_.size()) {
        throw std::invalid_argument(std::string(op) + ": Var does not belong to this graph");
    }
}

const Tensor2& Graph::val(Var v) const {
    check_same_graph(v, "val");
    return node(v).val;
}

const Tensor2& Graph::grad(Var v) const {
    check_same_graph(v, "grad");
    return node(v).grad;
}

Var Graph::input(Tensor2 v, std::string tag) {
    return push(std::move(v), std::move(tag), nullptr);
}

Var Graph::param(ParamEntry& e, std::string tag) {
    return push(e.value, std::move(tag), nullptr, &e);
}

Var Graph::matmul(Var a, Var b) {
    check_same_graph(a, "matmul");
    check_same_graph(b, "matmul");
    Tensor2 out = traject::matmul(node(a).val, node(b).val);
    int ai = a.idx, bi = b.idx;
    return push(std::move(out), "matmul", [ai, bi](Graph& g) {
        Node& self = g.nodes_[g.cursor_];
        Node& na = g.nodes_[ai];
        Node& nb = g.nodes_[bi];
        const Tensor2& gc = self.grad;
        const Tensor2& A = na.val;
        const Tensor2& B = nb.val;
        // dA += gc * B^T
        for (int i = 0; i < A.rows; ++i) {
            for (int k = 0; k < B.cols; ++k) {
                const double gv = gc.at(i, k);
                if (gv == 0.0) continue;
                for (int j = 0; j < A.cols; ++j) {
                    na.grad.at(i, j) += gv * B.at(j, k);
                }
            }
        }
        // dB += A^T * gc
        for (int i = 0; i < A.rows; ++i) {
            for (int j = 0; j < A.cols; ++j) {
                const double av = A.at(i, j);
                if (av == 0.0) continue;
                for (int k = 0; k < B.cols; ++k) {
                    nb.grad.at(j, k) += av * gc.at(i, k);
                }
            }
        }
    });
}

Var Graph::add(Var a, Var b) {
    check_same_graph(a, "add");
    check_same_graph(b, "add");
    const Tensor2& A = node(a).val;
    const Tensor2& B = node(b).val;
    if (!A.same_shape(B)) {
        throw std::invalid_argument("add: shape mismatch " + A.shape_str() + " vs " + B.shape_str());
    }
    Tensor2 out(A.rows, A.cols);
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = A.data[i] + B.data[i];
    int ai = a.idx, bi = b.idx;
    return push(std::move(out), "add", [ai, bi](Graph& g) {
        const Tensor2& gc = g.nodes_[g.cursor_].grad;
        Tensor2& da = g.nodes_[ai].grad;
        Tensor2& db = g.nodes_[bi].grad;
        for (size_t i = 0; i < gc.data.size(); ++i) {
            da.data[i] += gc.data[i];
            db.data[i] += gc.data[i];
        }
    });
}

Var Graph::add_rowvec(Var a, Var bias) {
    check_same_graph(a, "add_rowvec");
    check_same_graph(bias, "add_rowvec");
    const Tensor2& A = node(a).val;
    const Tensor2& B = node(bias).val;
    if (B.rows != 1 || B.cols != A.cols) {
        throw std::invalid_argument("add_rowvec: bias must be 1x" + std::to_string(A.cols) +
                                    ", got " + B.shape_str());
    }
    Tensor2 out(A.rows, A.cols);
    for (int i = 0; i < A.rows; ++i) {
        for (int j = 0; j < A.cols; ++j) out.at(i, j) = A.at(i, j) + B.at(0, j);
    }
    int ai = a.idx, bi = bias.idx;
    return push(std::move(out), "add_rowvec", [ai, bi](Graph& g) {
        const Tensor2& gc = g.nodes_[g.cursor_].grad;
        Tensor2& da = g.nodes_[ai].grad;
        Tensor2& db = g.nodes_[bi].grad;
        for (int i = 0; i < gc.rows; ++i) {
            for (int j = 0; j < gc.cols; ++j) {
                da.at(i, j) += gc.at(i, j);
                db.at(0, j) += gc.at(i, j);
            }
        }
    });
}

Var Graph::sub(Var a, Var b) {
    check_same_graph(a, "sub");
    check_same_graph(b, "sub");
    const Tensor2& A = node(a).val;
    const Tensor2& B = node(b).val;
    if (!A.same_shape(B)) {
        throw std::invalid_argument("sub: shape mismatch " + A.shape_str() + " vs " + B.shape_str());
    }
    Tensor2 out(A.rows, A.cols);
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = A.data[i] - B.data[i];
    int ai = a.idx, bi = b.idx;
    return push(std::move(out), "sub", [ai, bi](Graph& g) {
        const Tensor2& gc = g.nodes_[g.cursor_].grad;
        Tensor2& da = g.nodes_[ai].grad;
        Tensor2& db = g.nodes_[bi].grad;
        for (size_t i = 0; i < gc.data.size(); ++i) {
            da.data[i] += gc.data[i];
            db.data[i] -= gc.data[i];
        }
    });
}

Var Graph::mul(Var a, Var b) {
    check_same_graph(a, "mul");
    check_same_graph(b, "mul");
    const Tensor2& A = node(a).val;
    const Tensor2& B = node(b).val;
    if (!A.same_shape(B)) {
        throw std::invalid_argument("mul: shape mismatch " + A.shape_str() + " vs " + B.shape_str());
    }
    Tensor2 out(A.rows, A.cols);
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = A.data[i] * B.data[i];
    int ai = a.idx, bi = b.idx;
    return push(std::move(out), "mul", [ai, bi](Graph& g) {
        const Tensor2& gc = g.nodes_[g.cursor_].grad;
        Node& na = g.nodes_[ai];
        Node& nb = g.nodes_[bi];
        for (size_t i = 0; i < gc.data.size(); ++i) {
            na.grad.data[i] += gc.data[i] * nb.val.data[i];
            nb.grad.data[i] += gc.data[i] * na.val.data[i];
        }
    });
}

Var Graph::scale(Var a, double s) {
    check_same_graph(a, "scale");
    const Tensor2& A = node(a).val;
    Tensor2 out(A.rows, A.cols);
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = A.data[i] * s;
    int ai = a.idx;
    return push(std::move(out), "scale", [ai, s](Graph& g) {
        const Tensor2& gc = g.nodes_[g.cursor_].grad;
        Tensor2& da = g.nodes_[ai].grad;
        for (size_t i = 0; i < gc.data.size(); ++i) da.data[i] += gc.data[i] * s;
    });
}

Var Graph::add_const(Var a, double c) {
    check_same_graph(a, "add_const");
    const Tensor2& A = node(a).val;
    Tensor2 out(A.rows, A.cols);
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = A.data[i] + c;
    int ai = a.idx;
    return push(std::move(out), "add_const", [ai](Graph& g) {
        const Tensor2& gc = g.nodes_[g.cursor_].grad;
        Tensor2& da = g.nodes_[ai].grad;
        for (size_t i = 0; i < gc.data.size(); ++i) da.data[i] += gc.data[i];
    });
}

Var Graph::tanh(Var a) {
    check_same_graph(a, "tanh");
    const Tensor2& A = node(a).val;
    Tensor2 out(A.rows, A.cols);
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = std::tanh(A.data[i]);
    int ai = a.idx;
    return push(std::move(out), "tanh", [ai](Graph& g) {
        Node& self = g.nodes_[g.cursor_];
        Tensor2& da = g.nodes_[ai].grad;
        for (size_t i = 0; i < self.grad.data.size(); ++i) {
            const double t = self.val.data[i];
            da.data[i] += self.grad.data[i] * (1.0 - t * t);
        }
    });
}

Var Graph::sigmoid(Var a) {
    check_same_graph(a, "sigmoid");
    const Tensor2& A = node(a).val;
    Tensor2 out(A.rows, A.cols);
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = 1.0 / (1.0 + std::exp(-A.data[i]));
    int ai = a.idx;
    return push(std::move(out), "sigmoid", [ai](Graph& g) {
        Node& self = g.nodes_[g.cursor_];
        Tensor2& da = g.nodes_[ai].grad;
        for (size_t i = 0; i < self.grad.data.size(); ++i) {
            const double s = self.val.data[i];
            da.data[i] += self.grad.data[i] * s * (1.0 - s);
        }
    });
}

Var Graph::sin(Var a) {
    check_same_graph(a, "sin");
    const Tensor2& A = node(a).val;
    Tensor2 out(A.rows, A.cols);
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = std::sin(A.data[i]);
    int ai = a.idx;
    return push(std::move(out), "sin", [ai](Graph& g) {
        Node& self = g.nodes_[g.cursor_];
        Node& na = g.nodes_[ai];
        for (size_t i = 0; i < self.grad.data.size(); ++i) {
            na.grad.data[i] += self.grad.data[i] * std::cos(na.val.data[i]);
        }
    });
}

Var Graph::cos(Var a) {
    check_same_graph(a, "cos");
    const Tensor2& A = node(a).val;
    Tensor2 out(A.rows, A.cols);
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = std::cos(A.data[i]);
    int ai = a.idx;
    return push(std::move(out), "cos", [ai](Graph& g) {
        Node& self = g.nodes_[g.cursor_];
        Node& na = g.nodes_[ai];
        for (size_t i = 0; i < self.grad.data.size(); ++i) {
            na.grad.data[i] -= self.grad.data[i] * std::sin(na.val.data[i]);
        }
    });
}

Var Graph::atan2(Var y, Var x) {
    check_same_graph(y, "atan2");
    check_same_graph(x, "atan2");
    const Tensor2& Y = node(y).val;
    const Tensor2& X = node(x).val;
    if (!Y.same_shape(X)) {
        throw std::invalid_argument("atan2: shape mismatch " + Y.shape_str() + " vs " + X.shape_str());
    }
    Tensor2 out(Y.rows, Y.cols);
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = std::atan2(Y.data[i], X.data[i]);
    int yi = y.idx, xi = x.idx;
    return push(std::move(out), "atan2", [yi, xi](Graph& g) {
        const Tensor2& gc = g.nodes_[g.cursor_].grad;
        Node& ny = g.nodes_[yi];
        Node& nx = g.nodes_[xi];
        for (size_t i = 0; i < gc.data.size(); ++i) {
            const double yv = ny.val.data[i];
            const double xv = nx.val.data[i];
            const double denom = std::max(xv * xv + yv * yv, 1e-18);
            ny.grad.data[i] += gc.data[i] * xv / denom;
            nx.grad.data[i] -= gc.data[i] * yv / denom;
        }
    });
}

Var Graph::concat_cols(const std::vector<Var>& xs) {
    if (xs.empty()) throw std::invalid_argument("concat_cols: empty input list");
    int rows = -1;
    int total_cols = 0;
    for (Var v : xs) {
        check_same_graph(v, "concat_cols");
        const Tensor2& t = node(v).val;
        if (rows < 0) rows = t.rows;
        if (t.rows != rows) {
            throw std::invalid_argument("concat_cols: row mismatch, " + std::to_string(rows) +
                                        " vs " + t.shape_str());
        }
        total_cols += t.cols;
    }
    Tensor2 out(rows, total_cols);
    std::vector<int> srcs;
    std::vector<int> offsets;
    int off = 0;
    for (Var v : xs) {
        const Tensor2& t = node(v).val;
        for (int i = 0; i < t.rows; ++i) {
            for (int j = 0; j < t.cols; ++j) out.at(i, off + j) = t.at(i, j);
        }
        srcs.push_back(v.idx);
        offsets.push_back(off);
        off += t.cols;
    }
    return push(std::move(out), "concat_cols",
                [srcs = std::move(srcs), offsets = std::move(offsets)](Graph& g) {
                    const Tensor2& gc = g.nodes_[g.cursor_].grad;
                    for (size_t k = 0; k < srcs.size(); ++k) {
                        Tensor2& da = g.nodes_[srcs[k]].grad;
                        for (int i = 0; i < da.rows; ++i) {
                            for (int j = 0; j < da.cols; ++j) {
                                da.at(i, j) += gc.at(i, offsets[k] + j);
                            }
                        }
                    }
                });
}

Var Graph::slice_cols(Var a, int c0, int c1) {
    check_same_graph(a, "slice_cols");
    const Tensor2& A = node(a).val;
    if (c0 < 0 || c1 > A.cols || c0 >= c1) {
        throw std::invalid_argument("slice_cols: bad range [" + std::to_string(c0) + ", " +
                                    std::to_string(c1) + ") for " + A.shape_str());
    }
    Tensor2 out(A.rows, c1 - c0);
    for (int i = 0; i < A.rows; ++i) {
        for (int j = c0; j < c1; ++j) out.at(i, j - c0) = A.at(i, j);
    }
    int ai = a.idx;
    return push(std::move(out), "slice_cols", [ai, c0](Graph& g) {
        const Tensor2& gc = g.nodes_[g.cursor_].grad;
        Tensor2& da = g.nodes_[ai].grad;
        for (int i = 0; i < gc.rows; ++i) {
            for (int j = 0; j < gc.cols; ++j) da.at(i, c0 + j) += gc.at(i, j);
        }
    });
}

Var Graph::gather_rows(Var a, std::vector<int> rows) {
    check_same_graph(a, "gather_rows");
    const Tensor2& A = node(a).val;
    Tensor2 out(static_cast<int>(rows.size()), A.cols);
    for (size_t k = 0; k < rows.size(); ++k) {
        if (rows[k] < 0 || rows[k] >= A.rows) {
            throw std::invalid_argument("gather_rows: index " + std::to_string(rows[k]) +
                                        " out of range for " + A.shape_str());
        }
        for (int j = 0; j < A.cols; ++j) out.at(static_cast<int>(k), j) = A.at(rows[k], j);
    }
    int ai = a.idx;
    return push(std::move(out), "gather_rows", [ai, rows = std::move(rows)](Graph& g) {
        const Tensor2& gc = g.nodes_[g.cursor_].grad;
        Tensor2& da = g.nodes_[ai].grad;
        for (size_t k = 0; k < rows.size(); ++k) {
            for (int j = 0; j < gc.cols; ++j) {
                da.at(rows[k], j) += gc.at(static_cast<int>(k), j);
            }
        }
    });
}

Var Graph::scatter_mean_rows(Var a, std::vector<int> dest, int n_out) {
    check_same_graph(a, "scatter_mean_rows");
    const Tensor2& A = node(a).val;
    if (static_cast<int>(dest.size()) != A.rows) {
        throw std::invalid_argument("scatter_mean_rows: dest size " + std::to_string(dest.size()) +
                                    " != rows of " + A.shape_str());
    }
    std::vector<int> counts(static_cast<size_t>(n_out), 0);
    for (int d : dest) {
        if (d < 0 || d >= n_out) {
            throw std::invalid_argument("scatter_mean_rows: dest " + std::to_string(d) +
                                        " out of range [0, " + std::to_string(n_out) + ")");
        }
        ++counts[static_cast<size_t>(d)];
    }
    Tensor2 out(n_out, A.cols);
    for (int k = 0; k < A.rows; ++k) {
        for (int j = 0; j < A.cols; ++j) out.at(dest[static_cast<size_t>(k)], j) += A.at(k, j);
    }
    for (int d = 0; d < n_out; ++d) {
        if (counts[static_cast<size_t>(d)] > 1) {
            const double inv = 1.0 / counts[static_cast<size_t>(d)];
            for (int j = 0; j < A.cols; ++j) out.at(d, j) *= inv;
        }
    }
    int ai = a.idx;
    return push(std::move(out), "scatter_mean_rows",
                [ai, dest = std::move(dest), counts = std::move(counts)](Graph& g) {
                    const Tensor2& gc = g.nodes_[g.cursor_].grad;
                    Tensor2& da = g.nodes_[ai].grad;
                    for (size_t k = 0; k < dest.size(); ++k) {
                        const double inv = 1.0 / counts[static_cast<size_t>(dest[k])];
                        for (int j = 0; j < gc.cols; ++j) {
                            da.at(static_cast<int>(k), j) += gc.at(dest[k], j) * inv;
                        }
                    }
                });
}

Var Graph::scale_rows(Var a, Var col) {
    check_same_graph(a, "scale_rows");
    check_same_graph(col, "scale_rows");
    const Tensor2& A = node(a).val;
    const Tensor2& C = node(col).val;
    if (C.rows != A.rows || C.cols != 1) {
        throw std::invalid_argument("scale_rows: col must be " + std::to_string(A.rows) +
                                    "x1, got " + C.shape_str());
    }
    Tensor2 out(A.rows, A.cols);
    for (int i = 0; i < A.rows; ++i) {
        for (int j = 0; j < A.cols; ++j) out.at(i, j) = A.at(i, j) * C.at(i, 0);
    }
    int ai = a.idx, ci = col.idx;
    return push(std::move(out), "scale_rows", [ai, ci](Graph& g) {
        const Tensor2& gc = g.nodes_[g.cursor_].grad;
        Node& na = g.nodes_[ai];
        Node& nc = g.nodes_[ci];
        for (int i = 0; i < gc.rows; ++i) {
            const double cv = nc.val.at(i, 0);
            double acc = 0.0;
            for (int j = 0; j < gc.cols; ++j) {
                na.grad.at(i, j) += gc.at(i, j) * cv;
                acc += gc.at(i, j) * na.val.at(i, j);
            }
            nc.grad.at(i, 0) += acc;
        }
    });
}

Var Graph::where_rows(std::vector<double> mask, Var a, Var b) {
    check_same_graph(a, "where_rows");
    check_same_graph(b, "where_rows");
    const Tensor2& A = node(a).val;
    const Tensor2& B = node(b).val;
    if (!A.same_shape(B)) {
        throw std::invalid_argument("where_rows: shape mismatch " + A.shape_str() + " vs " +
                                    B.shape_str());
    }
    if (static_cast<int>(mask.size()) != A.rows) {
        throw std::invalid_argument("where_rows: mask size " + std::to_string(mask.size()) +
                                    " != rows of " + A.shape_str());
    }
    Tensor2 out(A.rows, A.cols);
    for (int i = 0; i < A.rows; ++i) {
        const bool take_a = mask[static_cast<size_t>(i)] != 0.0;
        for (int j = 0; j < A.cols; ++j) out.at(i, j) = take_a ? A.at(i, j) : B.at(i, j);
    }
    int ai = a.idx, bi = b.idx;
    return push(std::move(out), "where_rows", [ai, bi, mask = std::move(mask)](Graph& g) {
        const Tensor2& gc = g.nodes_[g.cursor_].grad;
        Tensor2& da = g.nodes_[ai].grad;
        Tensor2& db = g.nodes_[bi].grad;
        for (int i = 0; i < gc.rows; ++i) {
            Tensor2& dst = mask[static_cast<size_t>(i)] != 0.0 ? da : db;
            for (int j = 0; j < gc.cols; ++j) dst.at(i, j) += gc.at(i, j);
        }
    });
}

Var Graph::softmax_rows(Var a) {
    check_same_graph(a, "softmax_rows");
    const Tensor2& A = node(a).val;
    Tensor2 out(A.rows, A.cols);
    for (int i = 0; i < A.rows; ++i) {
        double mx = A.at(i, 0);
        for (int j = 1; j < A.cols; ++j) mx = std::max(mx, A.at(i, j));
        double sum = 0.0;
        for (int j = 0; j < A.cols; ++j) {
            out.at(i, j) = std::exp(A.at(i, j) - mx);
            sum += out.at(i, j);
        }
        for (int j = 0; j < A.cols; ++j) out.at(i, j) /= sum;
    }
    int ai = a.idx;
    return push(std::move(out), "softmax_rows", [ai](Graph& g) {
        Node& self = g.nodes_[g.cursor_];
        Tensor2& da = g.nodes_[ai].grad;
        const Tensor2& p = self.val;
        const Tensor2& gp = self.grad;
        for (int i = 0; i < p.rows; ++i) {
            double dot = 0.0;
            for (int j = 0; j < p.cols; ++j) dot += gp.at(i, j) * p.at(i, j);
            for (int j = 0; j < p.cols; ++j) {
                da.at(i, j) += p.at(i, j) * (gp.at(i, j) - dot);
            }
        }
    });
}

Var Graph::ce_loss(Var probs, std::vector<int> labels) {
    check_same_graph(probs, "ce_loss");
    const Tensor2& P = node(probs).val;
    if (static_cast<int>(labels.size()) != P.rows) {
        throw std::invalid_argument("ce_loss: labels size " + std::to_string(labels.size()) +
                                    " != rows of " + P.shape_str());
    }
    constexpr double kFloor = 1e-12;
    double total = 0.0;
    for (int i = 0; i < P.rows; ++i) {
        const int l = labels[static_cast<size_t>(i)];
        if (l < 0 || l >= P.cols) {
            throw std::invalid_argument("ce_loss: label " + std::to_string(l) +
                                        " out of range for " + P.shape_str());
        }
        total -= std::log(std::max(P.at(i, l), kFloor));
    }
    Tensor2 out(1, 1);
    out.at(0, 0) = P.rows > 0 ? total / P.rows : 0.0;
    int pi = probs.idx;
    return push(std::move(out), "ce_loss", [pi, labels = std::move(labels)](Graph& g) {
        const double gl = g.nodes_[g.cursor_].grad.at(0, 0);
        Node& np = g.nodes_[pi];
        const int n = np.val.rows;
        if (n == 0) return;
        for (int i = 0; i < n; ++i) {
            const int l = labels[static_cast<size_t>(i)];
            const double p = std::max(np.val.at(i, l), 1e-12);
            np.grad.at(i, l) -= gl / (n * p);
        }
    });
}

Var Graph::mse_loss(Var pred, Tensor2 target) {
    check_same_graph(pred, "mse_loss");
    const Tensor2& P = node(pred).val;
    if (!P.same_shape(target)) {
        throw std::invalid_argument("mse_loss: shape mismatch " + P.shape_str() + " vs " +
                                    target.shape_str());
    }
    const size_t n = P.data.size();
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double d = P.data[i] - target.data[i];
        total += d * d;
    }
    Tensor2 out(1, 1);
    out.at(0, 0) = n > 0 ? total / static_cast<double>(n) : 0.0;
    int pi = pred.idx;
    return push(std::move(out), "mse_loss", [pi, target = std::move(target)](Graph& g) {
        const double gl = g.nodes_[g.cursor_].grad.at(0, 0);
        Node& np = g.nodes_[pi];
        const size_t n = np.val.data.size();
        if (n == 0) return;
        const double s = 2.0 * gl / static_cast<double>(n);
        for (size_t i = 0; i < n; ++i) {
            np.grad.data[i] += s * (np.val.data[i] - target.data[i]);
        }
    });
}

Var Graph::sum_all(Var a) {
    check_same_graph(a, "sum_all");
    const Tensor2& A = node(a).val;
    double total = 0.0;
    for (double x : A.data) total += x;
    Tensor2 out(1, 1);
    out.at(0, 0) = total;
    int ai = a.idx;
    return push(std::move(out), "sum_all", [ai](Graph& g) {
        const double gl = g.nodes_[g.cursor_].grad.at(0, 0);
        Tensor2& da = g.nodes_[ai].grad;
        for (auto& x : da.data) x += gl;
    });
}

void Graph::backward(Var loss) {
    check_same_graph(loss, "backward");
    Node& ln = node(loss);
    if (ln.val.rows != 1 || ln.val.cols != 1) {
        throw std::invalid_argument("backward: loss must be 1x1, got " + ln.val.shape_str());
    }
    ln.grad.at(0, 0) = 1.0;
    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
        if (nodes_[static_cast<size_t>(i)].back) {
            cursor_ = static_cast<size_t>(i);
            nodes_[static_cast<size_t>(i)].back(*this);
        }
    }
    for (auto& n : nodes_) {
        if (n.bound != nullptr) {
            for (size_t i = 0; i < n.grad.data.size(); ++i) {
                n.bound->grad.data[i] += n.grad.data[i];
            }
        }
    }
}

std::optional<std::string> Graph::first_nonfinite() const {
    for (const auto& n : nodes_) {
        if (!n.val.all_finite()) return n.tag;
    }
    return std::nullopt;
}

}  // namespace traject::nn
