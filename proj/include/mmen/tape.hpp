#pragma once

#include "mmen/param_store.hpp"
#include "mmen/tensor.hpp"

#include <cmath>
#include <initializer_list>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mmen {

enum class Op {
    constant,
    variable,
    param,
    matmul,
    add,
    mul,
    concat,
    leaky_relu,
    elu,
    relu,
    sigmoid,
    exp,
    log,
    row_softmax,
    segment_softmax,
    segment_sum,
    layer_norm,
    mean_rows,
    sum,
    scalar_mul,
    add_scalar,
    transpose,
    gather_rows,
    slice_cols,
    clamp_max,
};

inline const char *op_name(Op op) {
    switch (op) {
    case Op::constant: return "constant";
    case Op::variable: return "variable";
    case Op::param: return "param";
    case Op::matmul: return "matmul";
    case Op::add: return "add";
    case Op::mul: return "mul";
    case Op::concat: return "concat";
    case Op::leaky_relu: return "leaky_relu";
    case Op::elu: return "elu";
    case Op::relu: return "relu";
    case Op::sigmoid: return "sigmoid";
    case Op::exp: return "exp";
    case Op::log: return "log";
    case Op::row_softmax: return "row_softmax";
    case Op::segment_softmax: return "segment_softmax";
    case Op::segment_sum: return "segment_sum";
    case Op::layer_norm: return "layer_norm";
    case Op::mean_rows: return "mean_rows";
    case Op::sum: return "sum";
    case Op::scalar_mul: return "scalar_mul";
    case Op::add_scalar: return "add_scalar";
    case Op::transpose: return "transpose";
    case Op::gather_rows: return "gather_rows";
    case Op::slice_cols: return "slice_cols";
    case Op::clamp_max: return "clamp_max";
    }
    return "?";
}

/// Row-to-segment assignment for segment_softmax / segment_sum.
struct Segments {
    std::vector<std::uint32_t> ids; ///< segment of each input row
    std::size_t count = 0;          ///< number of segments (output rows of segment_sum)

    Segments() = default;
    Segments(std::vector<std::uint32_t> segment_ids, std::size_t n) : ids(std::move(segment_ids)), count(n) {
        for (auto s : ids)
            if (s >= count) throw ArgumentError("segment id out of range");
    }
};

using Index = std::vector<std::uint32_t>;

struct OpAttrs {
    double scalar = 0.0; ///< alpha / epsilon / factor / offset / bound
    std::size_t start = 0;
    std::size_t count = 0;
    std::shared_ptr<const Segments> segments{};
    std::shared_ptr<const Index> index{};
};

/// Handle to a node recorded on a Tape.
struct Var {
    std::size_t id = std::numeric_limits<std::size_t>::max();
};

/// Eager-forward, taped-backward reverse-mode engine over 2-D tensors.
/// Single-threaded; use one tape per graph.
class Tape {
  public:
    struct Node {
        Op op;
        std::vector<std::size_t> inputs;
        OpAttrs attrs;
        Tensor value;
        bool requires_grad = false;
        std::size_t param_index = 0;
    };

    Var constant(Tensor t) { return push(Op::constant, {}, {}, std::move(t), false); }

    /// Leaf that receives a gradient but is not part of a ParamStore.
    Var variable(Tensor t) { return push(Op::variable, {}, {}, std::move(t), true); }

    Var param(const ParamStore &ps, std::size_t index) {
        Var v = push(Op::param, {}, {}, ps.value(index), true);
        nodes_.back().param_index = index;
        return v;
    }
    Var param(const ParamStore &ps, std::string_view name) { return param(ps, ps.index(name)); }

    /// Records `op` applied to `inputs`, computing its value immediately.
    Var record(Op op, std::span<const Var> inputs, const OpAttrs &attrs = {});
    Var record(Op op, std::initializer_list<Var> inputs, const OpAttrs &attrs = {}) {
        return record(op, std::span<const Var>(inputs.begin(), inputs.size()), attrs);
    }

    Var matmul(Var a, Var b) { return record(Op::matmul, {a, b}); }
    Var add(Var a, Var b) { return record(Op::add, {a, b}); }
    Var mul(Var a, Var b) { return record(Op::mul, {a, b}); }
    Var concat(std::initializer_list<Var> xs) { return record(Op::concat, std::span<const Var>(xs.begin(), xs.size())); }
    Var concat(const std::vector<Var> &xs) { return record(Op::concat, xs); }
    Var leaky_relu(Var x, double alpha) { return record(Op::leaky_relu, {x}, {.scalar = alpha}); }
    Var elu(Var x) { return record(Op::elu, {x}); }
    Var relu(Var x) { return record(Op::relu, {x}); }
    Var sigmoid(Var x) { return record(Op::sigmoid, {x}); }
    Var exp(Var x) { return record(Op::exp, {x}); }
    Var log(Var x) { return record(Op::log, {x}); }
    Var row_softmax(Var x) { return record(Op::row_softmax, {x}); }
    Var segment_softmax(Var x, std::shared_ptr<const Segments> seg) {
        return record(Op::segment_softmax, {x}, {.segments = std::move(seg)});
    }
    Var segment_sum(Var x, std::shared_ptr<const Segments> seg) {
        return record(Op::segment_sum, {x}, {.segments = std::move(seg)});
    }
    Var layer_norm(Var x, double eps = 1e-5) { return record(Op::layer_norm, {x}, {.scalar = eps}); }
    Var mean_rows(Var x) { return record(Op::mean_rows, {x}); }
    Var sum(Var x) { return record(Op::sum, {x}); }
    Var scalar_mul(Var x, double c) { return record(Op::scalar_mul, {x}, {.scalar = c}); }
    Var add_scalar(Var x, double c) { return record(Op::add_scalar, {x}, {.scalar = c}); }
    Var transpose(Var x) { return record(Op::transpose, {x}); }
    Var gather_rows(Var x, std::shared_ptr<const Index> idx) {
        return record(Op::gather_rows, {x}, {.index = std::move(idx)});
    }
    Var slice_cols(Var x, std::size_t start, std::size_t count) {
        return record(Op::slice_cols, {x}, {.start = start, .count = count});
    }
    Var clamp_max(Var x, double bound) { return record(Op::clamp_max, {x}, {.scalar = bound}); }

    const Tensor &value(Var v) const { return nodes_.at(v.id).value; }
    const Node &node(Var v) const { return nodes_.at(v.id); }
    std::size_t size() const noexcept { return nodes_.size(); }

    /// Reverse sweep from a scalar node. Returns dLoss/dParam for every tensor
    /// of `ps` (zeros for parameters not on the tape); gradients of interior
    /// nodes stay available through grad().
    Gradients backward(Var loss, const ParamStore &ps);

    /// Gradient of an interior node from the last backward(); empty when the
    /// node does not influence the loss or does not require a gradient.
    const Tensor &grad(Var v) const {
        static const Tensor kEmpty;
        return v.id < grads_.size() ? grads_[v.id] : kEmpty;
    }

    /// First node (in recording order) holding a NaN or Inf, as "op#index".
    std::optional<std::string> first_nonfinite() const {
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            for (double x : nodes_[i].value.data)
                if (!std::isfinite(x)) return std::string(op_name(nodes_[i].op)) + "#" + std::to_string(i);
        return std::nullopt;
    }

    /// Signs of every input to a non-smooth op relative to its kink. Two
    /// evaluations with different signatures straddle a kink.
    std::vector<signed char> kink_signature() const {
        std::vector<signed char> sig;
        for (const auto &n : nodes_) {
            double kink;
            if (n.op == Op::leaky_relu || n.op == Op::relu)
                kink = 0.0;
            else if (n.op == Op::clamp_max)
                kink = n.attrs.scalar;
            else
                continue;
            for (double x : nodes_[n.inputs[0]].value.data)
                sig.push_back(static_cast<signed char>((x > kink) - (x < kink)));
        }
        return sig;
    }

  private:
    Var push(Op op, std::vector<std::size_t> inputs, OpAttrs attrs, Tensor value, bool requires_grad) {
        nodes_.push_back(Node{op, std::move(inputs), std::move(attrs), std::move(value), requires_grad, 0});
        return Var{nodes_.size() - 1};
    }

    [[noreturn]] void shape_error(Op op, std::span<const Var> inputs, const std::string &why) const {
        std::string msg = std::string(op_name(op)) + ": " + why + "; input shapes";
        for (Var v : inputs) msg += " " + nodes_[v.id].value.shape_str();
        throw NumericError(msg);
    }

    void backward_node(std::size_t i);

    std::vector<Node> nodes_;
    std::vector<Tensor> grads_;
};

namespace detail {

enum class Broadcast { same, row, col, scalar };

inline std::optional<Broadcast> broadcast_kind(const Tensor &a, const Tensor &b) {
    if (a.same_shape(b)) return Broadcast::same;
    if (b.rows == 1 && b.cols == 1) return Broadcast::scalar;
    if (b.rows == 1 && b.cols == a.cols) return Broadcast::row;
    if (b.cols == 1 && b.rows == a.rows) return Broadcast::col;
    return std::nullopt;
}

inline std::size_t bindex(Broadcast k, std::size_t r, std::size_t c, std::size_t cols) {
    switch (k) {
    case Broadcast::same: return r * cols + c;
    case Broadcast::row: return c;
    case Broadcast::col: return r;
    case Broadcast::scalar: return 0;
    }
    return 0;
}

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace detail

inline Var Tape::record(Op op, std::span<const Var> inputs, const OpAttrs &attrs) {
    for (Var v : inputs)
        if (v.id >= nodes_.size()) throw ArgumentError(std::string(op_name(op)) + ": unknown input");
    auto in = [&](std::size_t k) -> const Tensor & { return nodes_[inputs[k].id].value; };
    auto need = [&](std::size_t n) {
        if (inputs.size() != n) shape_error(op, inputs, "expected " + std::to_string(n) + " input(s)");
    };

    Tensor out;
    switch (op) {
    case Op::constant:
    case Op::variable:
    case Op::param:
        throw ArgumentError("leaves are created with constant()/variable()/param()");
    case Op::matmul: {
        need(2);
        const Tensor &a = in(0), &b = in(1);
        if (a.cols != b.rows) shape_error(op, inputs, "inner dimensions differ");
        out = Tensor(a.rows, b.cols);
        if (a.rows && b.cols && a.cols) as_matrix(out).noalias() = as_matrix(a) * as_matrix(b);
        break;
    }
    case Op::add:
    case Op::mul: {
        need(2);
        const Tensor &a = in(0), &b = in(1);
        const auto kind = detail::broadcast_kind(a, b);
        if (!kind) shape_error(op, inputs, "shapes do not broadcast");
        out = Tensor(a.rows, a.cols);
        for (std::size_t r = 0; r < a.rows; ++r)
            for (std::size_t c = 0; c < a.cols; ++c) {
                const double bv = b.data[detail::bindex(*kind, r, c, a.cols)];
                out(r, c) = op == Op::add ? a(r, c) + bv : a(r, c) * bv;
            }
        break;
    }
    case Op::concat: {
        if (inputs.empty()) shape_error(op, inputs, "no inputs");
        std::size_t cols = 0;
        for (std::size_t k = 0; k < inputs.size(); ++k) {
            if (in(k).rows != in(0).rows) shape_error(op, inputs, "row counts differ");
            cols += in(k).cols;
        }
        out = Tensor(in(0).rows, cols);
        std::size_t off = 0;
        for (std::size_t k = 0; k < inputs.size(); ++k) {
            const Tensor &x = in(k);
            for (std::size_t r = 0; r < x.rows; ++r)
                std::copy_n(x.data.begin() + static_cast<std::ptrdiff_t>(r * x.cols), x.cols,
                            out.data.begin() + static_cast<std::ptrdiff_t>(r * cols + off));
            off += x.cols;
        }
        break;
    }
    case Op::leaky_relu:
    case Op::elu:
    case Op::relu:
    case Op::sigmoid:
    case Op::exp:
    case Op::log:
    case Op::scalar_mul:
    case Op::add_scalar:
    case Op::clamp_max: {
        need(1);
        out = in(0);
        const double s = attrs.scalar;
        for (double &x : out.data) {
            switch (op) {
            case Op::leaky_relu: x = x > 0.0 ? x : s * x; break;
            case Op::elu: x = x > 0.0 ? x : std::expm1(x); break;
            case Op::relu: x = x > 0.0 ? x : 0.0; break;
            case Op::sigmoid: x = detail::sigmoid(x); break;
            case Op::exp: x = std::exp(x); break;
            case Op::log: x = std::log(x); break;
            case Op::scalar_mul: x *= s; break;
            case Op::add_scalar: x += s; break;
            case Op::clamp_max: x = std::min(x, s); break;
            default: break;
            }
        }
        break;
    }
    case Op::row_softmax: {
        need(1);
        out = in(0);
        for (std::size_t r = 0; r < out.rows; ++r) {
            double *row = out.data.data() + r * out.cols;
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < out.cols; ++c) mx = std::max(mx, row[c]);
            double z = 0.0;
            for (std::size_t c = 0; c < out.cols; ++c) z += (row[c] = std::exp(row[c] - mx));
            for (std::size_t c = 0; c < out.cols; ++c) row[c] /= z;
        }
        break;
    }
    case Op::segment_softmax: {
        need(1);
        const Tensor &x = in(0);
        const auto &seg = attrs.segments;
        if (!seg || seg->ids.size() != x.rows) shape_error(op, inputs, "segment ids must cover every row");
        Tensor mx(seg->count, x.cols, -std::numeric_limits<double>::infinity());
        for (std::size_t r = 0; r < x.rows; ++r)
            for (std::size_t c = 0; c < x.cols; ++c) mx(seg->ids[r], c) = std::max(mx(seg->ids[r], c), x(r, c));
        out = Tensor(x.rows, x.cols);
        Tensor z(seg->count, x.cols, 0.0);
        for (std::size_t r = 0; r < x.rows; ++r)
            for (std::size_t c = 0; c < x.cols; ++c) {
                out(r, c) = std::exp(x(r, c) - mx(seg->ids[r], c));
                z(seg->ids[r], c) += out(r, c);
            }
        for (std::size_t r = 0; r < x.rows; ++r)
            for (std::size_t c = 0; c < x.cols; ++c) out(r, c) /= z(seg->ids[r], c);
        break;
    }
    case Op::segment_sum: {
        need(1);
        const Tensor &x = in(0);
        const auto &seg = attrs.segments;
        if (!seg || seg->ids.size() != x.rows) shape_error(op, inputs, "segment ids must cover every row");
        out = Tensor(seg->count, x.cols, 0.0);
        for (std::size_t r = 0; r < x.rows; ++r) {
            double *dst = out.data.data() + seg->ids[r] * x.cols;
            const double *src = x.data.data() + r * x.cols;
            for (std::size_t c = 0; c < x.cols; ++c) dst[c] += src[c];
        }
        break;
    }
    case Op::layer_norm: {
        need(1);
        out = in(0);
        const double n = static_cast<double>(out.cols);
        for (std::size_t r = 0; r < out.rows; ++r) {
            double *row = out.data.data() + r * out.cols;
            double mean = 0.0;
            for (std::size_t c = 0; c < out.cols; ++c) mean += row[c];
            mean /= n;
            double var = 0.0;
            for (std::size_t c = 0; c < out.cols; ++c) var += (row[c] - mean) * (row[c] - mean);
            const double inv = 1.0 / std::sqrt(var / n + attrs.scalar);
            for (std::size_t c = 0; c < out.cols; ++c) row[c] = (row[c] - mean) * inv;
        }
        break;
    }
    case Op::mean_rows: {
        need(1);
        const Tensor &x = in(0);
        if (x.rows == 0) shape_error(op, inputs, "no rows to average");
        out = Tensor(1, x.cols, 0.0);
        for (std::size_t r = 0; r < x.rows; ++r)
            for (std::size_t c = 0; c < x.cols; ++c) out.data[c] += x(r, c);
        for (double &v : out.data) v /= static_cast<double>(x.rows);
        break;
    }
    case Op::sum: {
        need(1);
        double total = 0.0;
        for (double v : in(0).data) total += v;
        out = Tensor::scalar(total);
        break;
    }
    case Op::transpose: {
        need(1);
        const Tensor &x = in(0);
        out = Tensor(x.cols, x.rows);
        for (std::size_t r = 0; r < x.rows; ++r)
            for (std::size_t c = 0; c < x.cols; ++c) out(c, r) = x(r, c);
        break;
    }
    case Op::gather_rows: {
        need(1);
        const Tensor &x = in(0);
        if (!attrs.index) shape_error(op, inputs, "missing index");
        out = Tensor(attrs.index->size(), x.cols);
        for (std::size_t r = 0; r < attrs.index->size(); ++r) {
            const auto src = (*attrs.index)[r];
            if (src >= x.rows) shape_error(op, inputs, "row index " + std::to_string(src) + " out of range");
            std::copy_n(x.data.begin() + static_cast<std::ptrdiff_t>(src * x.cols), x.cols,
                        out.data.begin() + static_cast<std::ptrdiff_t>(r * x.cols));
        }
        break;
    }
    case Op::slice_cols: {
        need(1);
        const Tensor &x = in(0);
        if (attrs.start + attrs.count > x.cols) shape_error(op, inputs, "column slice out of range");
        out = Tensor(x.rows, attrs.count);
        for (std::size_t r = 0; r < x.rows; ++r)
            std::copy_n(x.data.begin() + static_cast<std::ptrdiff_t>(r * x.cols + attrs.start), attrs.count,
                        out.data.begin() + static_cast<std::ptrdiff_t>(r * attrs.count));
        break;
    }
    }

    std::vector<std::size_t> ids;
    ids.reserve(inputs.size());
    bool rg = false;
    for (Var v : inputs) {
        ids.push_back(v.id);
        rg = rg || nodes_[v.id].requires_grad;
    }
    return push(op, std::move(ids), attrs, std::move(out), rg);
}

inline Gradients Tape::backward(Var loss, const ParamStore &ps) {
    if (loss.id >= nodes_.size()) throw ArgumentError("backward: unknown loss node");
    if (nodes_[loss.id].value.numel() != 1)
        throw NumericError("backward: loss must be a scalar, got " + nodes_[loss.id].value.shape_str());
    grads_.assign(nodes_.size(), Tensor{});
    grads_[loss.id] = Tensor::scalar(1.0);
    for (std::size_t i = loss.id + 1; i-- > 0;)
        if (!grads_[i].empty() && nodes_[i].requires_grad) backward_node(i);

    Gradients out = ps.zero_gradients();
    for (std::size_t i = 0; i <= loss.id; ++i) {
        const Node &n = nodes_[i];
        if (n.op != Op::param || grads_[i].empty()) continue;
        if (n.param_index >= out.size() || !out[n.param_index].same_shape(grads_[i]))
            throw ArgumentError("backward: parameter store does not match the tape");
        for (std::size_t k = 0; k < grads_[i].numel(); ++k) out[n.param_index].data[k] += grads_[i].data[k];
    }
    return out;
}

inline void Tape::backward_node(std::size_t i) {
    const Node &n = nodes_[i];
    const Tensor &g = grads_[i];
    const Tensor &y = n.value;
    auto input_grad = [&](std::size_t k) -> Tensor * {
        const std::size_t id = n.inputs[k];
        if (!nodes_[id].requires_grad) return nullptr;
        if (grads_[id].empty()) grads_[id] = Tensor(nodes_[id].value.rows, nodes_[id].value.cols, 0.0);
        return &grads_[id];
    };
    auto x = [&](std::size_t k) -> const Tensor & { return nodes_[n.inputs[k]].value; };

    switch (n.op) {
    case Op::constant:
    case Op::variable:
    case Op::param:
        break;
    case Op::matmul: {
        if (Tensor *ga = input_grad(0)) as_matrix(*ga).noalias() += as_matrix(g) * as_matrix(x(1)).transpose();
        if (Tensor *gb = input_grad(1)) as_matrix(*gb).noalias() += as_matrix(x(0)).transpose() * as_matrix(g);
        break;
    }
    case Op::add:
    case Op::mul: {
        const Tensor &a = x(0), &b = x(1);
        const auto kind = *detail::broadcast_kind(a, b);
        if (Tensor *ga = input_grad(0)) {
            for (std::size_t k = 0; k < g.numel(); ++k) {
                const double bv = b.data[detail::bindex(kind, k / a.cols, k % a.cols, a.cols)];
                ga->data[k] += n.op == Op::add ? g.data[k] : g.data[k] * bv;
            }
        }
        if (Tensor *gb = input_grad(1)) {
            for (std::size_t k = 0; k < g.numel(); ++k) {
                const std::size_t j = detail::bindex(kind, k / a.cols, k % a.cols, a.cols);
                gb->data[j] += n.op == Op::add ? g.data[k] : g.data[k] * a.data[k];
            }
        }
        break;
    }
    case Op::concat: {
        std::size_t off = 0;
        for (std::size_t k = 0; k < n.inputs.size(); ++k) {
            const std::size_t w = x(k).cols;
            if (Tensor *gk = input_grad(k))
                for (std::size_t r = 0; r < g.rows; ++r)
                    for (std::size_t c = 0; c < w; ++c) (*gk)(r, c) += g(r, off + c);
            off += w;
        }
        break;
    }
    case Op::leaky_relu:
    case Op::elu:
    case Op::relu:
    case Op::sigmoid:
    case Op::exp:
    case Op::log:
    case Op::scalar_mul:
    case Op::add_scalar:
    case Op::clamp_max: {
        Tensor *gx = input_grad(0);
        if (!gx) break;
        const Tensor &in = x(0);
        const double s = n.attrs.scalar;
        for (std::size_t k = 0; k < g.numel(); ++k) {
            const double xi = in.data[k];
            double d = 0.0;
            switch (n.op) {
            case Op::leaky_relu: d = xi > 0.0 ? 1.0 : s; break;
            case Op::elu: d = xi > 0.0 ? 1.0 : y.data[k] + 1.0; break;
            case Op::relu: d = xi > 0.0 ? 1.0 : 0.0; break;
            case Op::sigmoid: d = y.data[k] * (1.0 - y.data[k]); break;
            case Op::exp: d = y.data[k]; break;
            case Op::log: d = 1.0 / xi; break;
            case Op::scalar_mul: d = s; break;
            case Op::add_scalar: d = 1.0; break;
            case Op::clamp_max: d = xi < s ? 1.0 : 0.0; break;
            default: break;
            }
            gx->data[k] += g.data[k] * d;
        }
        break;
    }
    case Op::row_softmax: {
        Tensor *gx = input_grad(0);
        if (!gx) break;
        for (std::size_t r = 0; r < y.rows; ++r) {
            double dot = 0.0;
            for (std::size_t c = 0; c < y.cols; ++c) dot += y(r, c) * g(r, c);
            for (std::size_t c = 0; c < y.cols; ++c) (*gx)(r, c) += y(r, c) * (g(r, c) - dot);
        }
        break;
    }
    case Op::segment_softmax: {
        Tensor *gx = input_grad(0);
        if (!gx) break;
        const auto &seg = *n.attrs.segments;
        Tensor dot(seg.count, y.cols, 0.0);
        for (std::size_t r = 0; r < y.rows; ++r)
            for (std::size_t c = 0; c < y.cols; ++c) dot(seg.ids[r], c) += y(r, c) * g(r, c);
        for (std::size_t r = 0; r < y.rows; ++r)
            for (std::size_t c = 0; c < y.cols; ++c) (*gx)(r, c) += y(r, c) * (g(r, c) - dot(seg.ids[r], c));
        break;
    }
    case Op::segment_sum: {
        Tensor *gx = input_grad(0);
        if (!gx) break;
        const auto &seg = *n.attrs.segments;
        for (std::size_t r = 0; r < gx->rows; ++r) {
            const double *src = g.data.data() + seg.ids[r] * g.cols;
            double *dst = gx->data.data() + r * g.cols;
            for (std::size_t c = 0; c < g.cols; ++c) dst[c] += src[c];
        }
        break;
    }
    case Op::layer_norm: {
        Tensor *gx = input_grad(0);
        if (!gx) break;
        const Tensor &in = x(0);
        const double m = static_cast<double>(in.cols);
        for (std::size_t r = 0; r < in.rows; ++r) {
            double mean = 0.0;
            for (std::size_t c = 0; c < in.cols; ++c) mean += in(r, c);
            mean /= m;
            double var = 0.0;
            for (std::size_t c = 0; c < in.cols; ++c) var += (in(r, c) - mean) * (in(r, c) - mean);
            const double inv = 1.0 / std::sqrt(var / m + n.attrs.scalar);
            double g_mean = 0.0, gy_mean = 0.0;
            for (std::size_t c = 0; c < in.cols; ++c) {
                g_mean += g(r, c);
                gy_mean += g(r, c) * y(r, c);
            }
            g_mean /= m;
            gy_mean /= m;
            for (std::size_t c = 0; c < in.cols; ++c)
                (*gx)(r, c) += inv * (g(r, c) - g_mean - y(r, c) * gy_mean);
        }
        break;
    }
    case Op::mean_rows: {
        Tensor *gx = input_grad(0);
        if (!gx) break;
        const double scale = 1.0 / static_cast<double>(gx->rows);
        for (std::size_t r = 0; r < gx->rows; ++r)
            for (std::size_t c = 0; c < gx->cols; ++c) (*gx)(r, c) += g.data[c] * scale;
        break;
    }
    case Op::sum: {
        Tensor *gx = input_grad(0);
        if (!gx) break;
        for (double &v : gx->data) v += g.data[0];
        break;
    }
    case Op::transpose: {
        Tensor *gx = input_grad(0);
        if (!gx) break;
        for (std::size_t r = 0; r < gx->rows; ++r)
            for (std::size_t c = 0; c < gx->cols; ++c) (*gx)(r, c) += g(c, r);
        break;
    }
    case Op::gather_rows: {
        Tensor *gx = input_grad(0);
        if (!gx) break;
        const auto &idx = *n.attrs.index;
        for (std::size_t r = 0; r < idx.size(); ++r) {
            double *dst = gx->data.data() + idx[r] * gx->cols;
            const double *src = g.data.data() + r * gx->cols;
            for (std::size_t c = 0; c < gx->cols; ++c) dst[c] += src[c];
        }
        break;
    }
    case Op::slice_cols: {
        Tensor *gx = input_grad(0);
        if (!gx) break;
        for (std::size_t r = 0; r < g.rows; ++r)
            for (std::size_t c = 0; c < g.cols; ++c) (*gx)(r, n.attrs.start + c) += g(r, c);
        break;
    }
    }
}

} // namespace mmen
