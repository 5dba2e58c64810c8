#include "tape.hpp"

#include <cmath>
#include <stdexcept>

#include "error.hpp"

namespace tmoe {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw ShapeError(msg);
}

std::string two(const char* kind, const Tensor& a, const Tensor& b) {
    return std::string(kind) + ": incompatible shapes " + shape_str(a.shape) + " and " +
           shape_str(b.shape);
}

// Elementwise binary layouts: Equal shapes, or a rank-1 vector broadcast
// across the rows of a rank-2 matrix (either operand order).
enum class BinLayout { Equal, VecRight, VecLeft };

BinLayout bin_layout(const char* kind, const Tensor& a, const Tensor& b) {
    if (a.shape == b.shape) return BinLayout::Equal;
    if (a.rank() == 2 && b.rank() == 1 && a.cols() == b.dim(0)) return BinLayout::VecRight;
    if (a.rank() == 1 && b.rank() == 2 && b.cols() == a.dim(0)) return BinLayout::VecLeft;
    throw ShapeError(two(kind, a, b));
}

}  // namespace

const char* op_kind_name(OpKind kind) {
    switch (kind) {
        case OpKind::Leaf: return "leaf";
        case OpKind::MatMul: return "matmul";
        case OpKind::Add: return "add";
        case OpKind::Sub: return "sub";
        case OpKind::Mul: return "mul";
        case OpKind::Tanh: return "tanh";
        case OpKind::Sigmoid: return "sigmoid";
        case OpKind::Relu: return "relu";
        case OpKind::SoftmaxRows: return "softmax-rows";
        case OpKind::ConcatLastDim: return "concat-last-dim";
        case OpKind::SumRows: return "sum-rows";
        case OpKind::SumAll: return "sum-all";
        case OpKind::Scale: return "scale-by-constant";
        case OpKind::MaskedFill: return "masked-fill";
        case OpKind::Dropout: return "dropout";
        case OpKind::Log: return "log";
        case OpKind::Clamp: return "clamp";
        case OpKind::Transpose: return "transpose";
        case OpKind::Reshape: return "reshape";
        case OpKind::GatherRows: return "gather-rows";
    }
    return "?";
}

TensorId Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<TensorId>(nodes_.size() - 1);
}

const Tensor& Tape::in(const std::vector<TensorId>& inputs, size_t i) const {
    return node(inputs[i]).value;
}

bool Tape::any_requires(const std::vector<TensorId>& inputs) const {
    for (TensorId id : inputs)
        if (node(id).requires_grad) return true;
    return false;
}

TensorId Tape::leaf(Tensor t) {
    validate_shape(t.shape, "leaf");
    Node n;
    n.kind = OpKind::Leaf;
    n.requires_grad = t.requires_grad;
    n.value = std::move(t);
    return push(std::move(n));
}

TensorId Tape::constant(Tensor t) {
    t.requires_grad = false;
    return leaf(std::move(t));
}

TensorId Tape::param(ParamSet& params, const std::string& name) {
    auto it = param_ids_.find(name);
    if (it != param_ids_.end()) return it->second;
    const Tensor& p = params.at(name);
    Node n;
    n.kind = OpKind::Leaf;
    n.value = p;
    n.value.grad.clear();
    n.value.requires_grad = true;
    n.requires_grad = true;
    n.param_name = name;
    TensorId id = push(std::move(n));
    param_ids_.emplace(name, id);
    return id;
}

const Tensor& Tape::value(TensorId id) const {
    if (id < 0 || static_cast<size_t>(id) >= nodes_.size())
        throw std::logic_error("Tape::value: bad tensor id");
    return node(id).value;
}

TensorId Tape::apply(OpKind kind, const std::vector<TensorId>& inputs, const OpArgs& args) {
    for (TensorId id : inputs)
        if (id < 0 || static_cast<size_t>(id) >= nodes_.size())
            throw std::logic_error("Tape::apply: bad input tensor id");

    auto arity = [&](size_t k) {
        if (inputs.size() != k)
            throw ShapeError(std::string(op_kind_name(kind)) + ": expects " + std::to_string(k) +
                             " inputs, got " + std::to_string(inputs.size()));
    };

    Node n;
    n.kind = kind;
    n.inputs = inputs;
    n.requires_grad = any_requires(inputs);

    switch (kind) {
        case OpKind::Leaf:
            throw std::logic_error("Tape::apply: leaf is not a primitive");

        case OpKind::MatMul: {
            arity(2);
            const Tensor &a = in(inputs, 0), &b = in(inputs, 1);
            require(a.rank() == 2 && b.rank() == 2 && a.cols() == b.rows(),
                    two("matmul", a, b));
            const int m = a.rows(), k = a.cols(), p = b.cols();
            Tensor out = Tensor::zeros({m, p});
            for (int i = 0; i < m; ++i) {
                const double* arow = &a.values[static_cast<size_t>(i) * k];
                double* orow = &out.values[static_cast<size_t>(i) * p];
                for (int t = 0; t < k; ++t) {
                    const double av = arow[t];
                    if (av == 0.0) continue;
                    const double* brow = &b.values[static_cast<size_t>(t) * p];
                    for (int j = 0; j < p; ++j) orow[j] += av * brow[j];
                }
            }
            n.value = std::move(out);
            break;
        }

        case OpKind::Add:
        case OpKind::Sub:
        case OpKind::Mul: {
            arity(2);
            const Tensor &a = in(inputs, 0), &b = in(inputs, 1);
            BinLayout lay = bin_layout(op_kind_name(kind), a, b);
            const Tensor& mat = (lay == BinLayout::VecLeft) ? b : a;
            Tensor out = Tensor::zeros(mat.shape);
            const size_t len = mat.numel();
            const int ncols = (lay == BinLayout::Equal) ? 0 : mat.cols();
            for (size_t i = 0; i < len; ++i) {
                double av, bv;
                if (lay == BinLayout::Equal) {
                    av = a.values[i];
                    bv = b.values[i];
                } else if (lay == BinLayout::VecRight) {
                    av = a.values[i];
                    bv = b.values[i % static_cast<size_t>(ncols)];
                } else {
                    av = a.values[i % static_cast<size_t>(ncols)];
                    bv = b.values[i];
                }
                double r = 0;
                if (kind == OpKind::Add) r = av + bv;
                else if (kind == OpKind::Sub) r = av - bv;
                else r = av * bv;
                out.values[i] = r;
            }
            n.value = std::move(out);
            break;
        }

        case OpKind::Tanh:
        case OpKind::Sigmoid:
        case OpKind::Relu:
        case OpKind::Log: {
            arity(1);
            const Tensor& x = in(inputs, 0);
            Tensor out = Tensor::zeros(x.shape);
            for (size_t i = 0; i < x.numel(); ++i) {
                double v = x.values[i];
                if (kind == OpKind::Tanh) out.values[i] = std::tanh(v);
                else if (kind == OpKind::Sigmoid) out.values[i] = 1.0 / (1.0 + std::exp(-v));
                else if (kind == OpKind::Relu) out.values[i] = v > 0 ? v : 0.0;
                else out.values[i] = std::log(v);
            }
            n.value = std::move(out);
            break;
        }

        case OpKind::SoftmaxRows: {
            arity(1);
            const Tensor& x = in(inputs, 0);
            require(x.rank() == 2, "softmax-rows: expects rank 2, got " + shape_str(x.shape));
            Tensor out = Tensor::zeros(x.shape);
            const int m = x.rows(), c = x.cols();
            for (int i = 0; i < m; ++i) {
                const double* xr = &x.values[static_cast<size_t>(i) * c];
                double* orow = &out.values[static_cast<size_t>(i) * c];
                double mx = xr[0];
                for (int j = 1; j < c; ++j) mx = std::max(mx, xr[j]);
                double sum = 0;
                for (int j = 0; j < c; ++j) {
                    orow[j] = std::exp(xr[j] - mx);
                    sum += orow[j];
                }
                for (int j = 0; j < c; ++j) orow[j] /= sum;
            }
            n.value = std::move(out);
            break;
        }

        case OpKind::ConcatLastDim: {
            if (inputs.empty()) throw ShapeError("concat-last-dim: no inputs");
            const Tensor& first = in(inputs, 0);
            require(first.rank() <= 2,
                    "concat-last-dim: expects rank 1 or 2, got " + shape_str(first.shape));
            int total = 0;
            for (size_t i = 0; i < inputs.size(); ++i) {
                const Tensor& t = in(inputs, i);
                require(t.rank() == first.rank() &&
                            (t.rank() == 1 || t.rows() == first.rows()),
                        two("concat-last-dim", first, t));
                total += t.shape.back();
            }
            if (first.rank() == 1) {
                Tensor out = Tensor::zeros({total});
                size_t o = 0;
                for (size_t i = 0; i < inputs.size(); ++i)
                    for (double v : in(inputs, i).values) out.values[o++] = v;
                n.value = std::move(out);
            } else {
                const int m = first.rows();
                Tensor out = Tensor::zeros({m, total});
                int off = 0;
                for (size_t i = 0; i < inputs.size(); ++i) {
                    const Tensor& t = in(inputs, i);
                    const int c = t.cols();
                    for (int r = 0; r < m; ++r)
                        for (int j = 0; j < c; ++j) out.at(r, off + j) = t.at(r, j);
                    off += c;
                }
                n.value = std::move(out);
            }
            break;
        }

        case OpKind::SumRows: {
            arity(1);
            const Tensor& x = in(inputs, 0);
            require(x.rank() == 2, "sum-rows: expects rank 2, got " + shape_str(x.shape));
            Tensor out = Tensor::zeros({x.cols()});
            for (int i = 0; i < x.rows(); ++i)
                for (int j = 0; j < x.cols(); ++j) out.at(j) += x.at(i, j);
            n.value = std::move(out);
            break;
        }

        case OpKind::SumAll: {
            arity(1);
            const Tensor& x = in(inputs, 0);
            double s = 0;
            for (double v : x.values) s += v;
            n.value = Tensor::scalar(s);
            break;
        }

        case OpKind::Scale: {
            arity(1);
            const Tensor& x = in(inputs, 0);
            Tensor out = Tensor::zeros(x.shape);
            for (size_t i = 0; i < x.numel(); ++i) out.values[i] = x.values[i] * args.scale;
            n.c0 = args.scale;
            n.value = std::move(out);
            break;
        }

        case OpKind::MaskedFill: {
            arity(1);
            const Tensor& x = in(inputs, 0);
            require(x.rank() == 2, "masked-fill: expects rank 2, got " + shape_str(x.shape));
            require(static_cast<int>(args.keep.size()) == x.cols(),
                    "masked-fill: mask size " + std::to_string(args.keep.size()) +
                        " does not match columns of " + shape_str(x.shape));
            Tensor out = Tensor::zeros(x.shape);
            for (int i = 0; i < x.rows(); ++i)
                for (int j = 0; j < x.cols(); ++j)
                    out.at(i, j) = args.keep[static_cast<size_t>(j)] ? x.at(i, j) : args.fill;
            n.keep = args.keep;
            n.c0 = args.fill;
            n.value = std::move(out);
            break;
        }

        case OpKind::Dropout: {
            arity(1);
            const Tensor& x = in(inputs, 0);
            if (!(args.rate >= 0.0 && args.rate < 1.0))
                throw DataError("dropout: rate must be in [0,1), got " + std::to_string(args.rate));
            Tensor out = x;
            out.requires_grad = false;
            out.grad.clear();
            if (args.training && args.rate > 0.0) {
                if (args.rng == nullptr) throw std::logic_error("dropout: missing rng");
                const double inv_keep = 1.0 / (1.0 - args.rate);
                n.aux.resize(x.numel());
                for (size_t i = 0; i < x.numel(); ++i) {
                    const double factor = args.rng->uniform01() < args.rate ? 0.0 : inv_keep;
                    n.aux[i] = factor;
                    out.values[i] = x.values[i] * factor;
                }
            }
            // Evaluation mode (or rate 0) is the identity; aux stays empty.
            n.value = std::move(out);
            break;
        }

        case OpKind::Clamp: {
            arity(1);
            const Tensor& x = in(inputs, 0);
            if (!(args.lo <= args.hi)) throw DataError("clamp: lo > hi");
            Tensor out = Tensor::zeros(x.shape);
            for (size_t i = 0; i < x.numel(); ++i)
                out.values[i] = std::min(std::max(x.values[i], args.lo), args.hi);
            n.c0 = args.lo;
            n.c1 = args.hi;
            n.value = std::move(out);
            break;
        }

        case OpKind::Transpose: {
            arity(1);
            const Tensor& x = in(inputs, 0);
            require(x.rank() == 2, "transpose: expects rank 2, got " + shape_str(x.shape));
            Tensor out = Tensor::zeros({x.cols(), x.rows()});
            for (int i = 0; i < x.rows(); ++i)
                for (int j = 0; j < x.cols(); ++j) out.at(j, i) = x.at(i, j);
            n.value = std::move(out);
            break;
        }

        case OpKind::Reshape: {
            arity(1);
            const Tensor& x = in(inputs, 0);
            validate_shape(args.ints, "reshape");
            require(shape_numel(args.ints) == x.numel(),
                    "reshape: " + shape_str(x.shape) + " to " + shape_str(args.ints));
            Tensor out = x;
            out.requires_grad = false;
            out.grad.clear();
            out.shape = args.ints;
            n.ints = x.shape;  // restore shape on backward
            n.value = std::move(out);
            break;
        }

        case OpKind::GatherRows: {
            arity(1);
            const Tensor& x = in(inputs, 0);
            require(x.rank() == 2, "gather-rows: expects rank 2, got " + shape_str(x.shape));
            if (args.ints.empty()) throw ShapeError("gather-rows: empty id list");
            for (int id : args.ints)
                if (id < 0 || id >= x.rows())
                    throw DataError("gather-rows: row id " + std::to_string(id) +
                                    " out of range for " + shape_str(x.shape));
            Tensor out = Tensor::zeros({static_cast<int>(args.ints.size()), x.cols()});
            for (size_t r = 0; r < args.ints.size(); ++r)
                for (int j = 0; j < x.cols(); ++j)
                    out.at(static_cast<int>(r), j) = x.at(args.ints[r], j);
            n.ints = args.ints;
            n.value = std::move(out);
            break;
        }

        default:
            throw DataError("unknown primitive kind");
    }

    n.value.requires_grad = n.requires_grad;
    return push(std::move(n));
}

TensorId Tape::matmul(TensorId a, TensorId b) { return apply(OpKind::MatMul, {a, b}); }
TensorId Tape::add(TensorId a, TensorId b) { return apply(OpKind::Add, {a, b}); }
TensorId Tape::sub(TensorId a, TensorId b) { return apply(OpKind::Sub, {a, b}); }
TensorId Tape::mul(TensorId a, TensorId b) { return apply(OpKind::Mul, {a, b}); }
TensorId Tape::tanh(TensorId x) { return apply(OpKind::Tanh, {x}); }
TensorId Tape::sigmoid(TensorId x) { return apply(OpKind::Sigmoid, {x}); }
TensorId Tape::relu(TensorId x) { return apply(OpKind::Relu, {x}); }
TensorId Tape::softmax_rows(TensorId x) { return apply(OpKind::SoftmaxRows, {x}); }
TensorId Tape::concat_last(const std::vector<TensorId>& xs) {
    return apply(OpKind::ConcatLastDim, xs);
}
TensorId Tape::sum_rows(TensorId x) { return apply(OpKind::SumRows, {x}); }
TensorId Tape::sum_all(TensorId x) { return apply(OpKind::SumAll, {x}); }
TensorId Tape::scale(TensorId x, double c) {
    OpArgs a;
    a.scale = c;
    return apply(OpKind::Scale, {x}, a);
}
TensorId Tape::masked_fill(TensorId x, std::vector<uint8_t> keep, double fill) {
    OpArgs a;
    a.keep = std::move(keep);
    a.fill = fill;
    return apply(OpKind::MaskedFill, {x}, a);
}
TensorId Tape::dropout(TensorId x, double rate, Rng& rng, bool training) {
    OpArgs a;
    a.rate = rate;
    a.rng = &rng;
    a.training = training;
    return apply(OpKind::Dropout, {x}, a);
}
TensorId Tape::log(TensorId x) { return apply(OpKind::Log, {x}); }
TensorId Tape::clamp(TensorId x, double lo, double hi) {
    OpArgs a;
    a.lo = lo;
    a.hi = hi;
    return apply(OpKind::Clamp, {x}, a);
}
TensorId Tape::transpose(TensorId x) { return apply(OpKind::Transpose, {x}); }
TensorId Tape::reshape(TensorId x, std::vector<int> shape) {
    OpArgs a;
    a.ints = std::move(shape);
    return apply(OpKind::Reshape, {x}, a);
}
TensorId Tape::gather_rows(TensorId table, std::vector<int> ids) {
    OpArgs a;
    a.ints = std::move(ids);
    return apply(OpKind::GatherRows, {table}, a);
}

GradMap Tape::backward(TensorId loss, const ParamSet& params) {
    if (consumed_) throw std::logic_error("backward: tape already consumed");
    if (loss < 0 || static_cast<size_t>(loss) >= nodes_.size())
        throw std::logic_error("backward: bad loss id");
    const Tensor& lv = node(loss).value;
    if (lv.shape != std::vector<int>{1})
        throw ShapeError("backward: loss must have shape [1], got " + shape_str(lv.shape));
    consumed_ = true;

    std::vector<std::vector<double>> grads(nodes_.size());
    auto g = [&](TensorId id) -> std::vector<double>& {
        auto& buf = grads[static_cast<size_t>(id)];
        if (buf.empty()) buf.assign(node(id).value.numel(), 0.0);
        return buf;
    };
    g(loss)[0] = 1.0;

    for (TensorId id = static_cast<TensorId>(nodes_.size()) - 1; id >= 0; --id) {
        Node& nd = node(id);
        if (!nd.requires_grad) continue;
        const auto& gout = grads[static_cast<size_t>(id)];
        if (gout.empty()) continue;  // never reached the loss

        switch (nd.kind) {
            case OpKind::Leaf:
                break;

            case OpKind::MatMul: {
                const Tensor &a = in(nd.inputs, 0), &b = in(nd.inputs, 1);
                const int m = a.rows(), k = a.cols(), p = b.cols();
                if (node(nd.inputs[0]).requires_grad) {
                    auto& ga = g(nd.inputs[0]);
                    for (int i = 0; i < m; ++i)
                        for (int t = 0; t < k; ++t) {
                            double s = 0;
                            const double* grow = &gout[static_cast<size_t>(i) * p];
                            const double* brow = &b.values[static_cast<size_t>(t) * p];
                            for (int j = 0; j < p; ++j) s += grow[j] * brow[j];
                            ga[static_cast<size_t>(i) * k + t] += s;
                        }
                }
                if (node(nd.inputs[1]).requires_grad) {
                    auto& gb = g(nd.inputs[1]);
                    for (int t = 0; t < k; ++t)
                        for (int i = 0; i < m; ++i) {
                            const double av = a.values[static_cast<size_t>(i) * k + t];
                            if (av == 0.0) continue;
                            const double* grow = &gout[static_cast<size_t>(i) * p];
                            double* gbrow = &gb[static_cast<size_t>(t) * p];
                            for (int j = 0; j < p; ++j) gbrow[j] += av * grow[j];
                        }
                }
                break;
            }

            case OpKind::Add:
            case OpKind::Sub:
            case OpKind::Mul: {
                const Tensor &a = in(nd.inputs, 0), &b = in(nd.inputs, 1);
                BinLayout lay = bin_layout(op_kind_name(nd.kind), a, b);
                const size_t len = nd.value.numel();
                const int ncols = (lay == BinLayout::Equal) ? 0 : nd.value.cols();
                const bool need_a = node(nd.inputs[0]).requires_grad;
                const bool need_b = node(nd.inputs[1]).requires_grad;
                auto aval = [&](size_t i) {
                    return lay == BinLayout::VecLeft ? a.values[i % static_cast<size_t>(ncols)]
                                                     : a.values[i];
                };
                auto bval = [&](size_t i) {
                    return lay == BinLayout::VecRight ? b.values[i % static_cast<size_t>(ncols)]
                                                      : b.values[i];
                };
                for (size_t i = 0; i < len; ++i) {
                    const double go = gout[i];
                    if (go == 0.0) continue;
                    if (need_a) {
                        double da = (nd.kind == OpKind::Mul) ? go * bval(i) : go;
                        size_t ai = (lay == BinLayout::VecLeft) ? i % static_cast<size_t>(ncols) : i;
                        g(nd.inputs[0])[ai] += da;
                    }
                    if (need_b) {
                        double db;
                        if (nd.kind == OpKind::Mul) db = go * aval(i);
                        else if (nd.kind == OpKind::Sub) db = -go;
                        else db = go;
                        size_t bi = (lay == BinLayout::VecRight) ? i % static_cast<size_t>(ncols) : i;
                        g(nd.inputs[1])[bi] += db;
                    }
                }
                break;
            }

            case OpKind::Tanh: {
                auto& gx = g(nd.inputs[0]);
                for (size_t i = 0; i < gout.size(); ++i) {
                    const double y = nd.value.values[i];
                    gx[i] += gout[i] * (1.0 - y * y);
                }
                break;
            }

            case OpKind::Sigmoid: {
                auto& gx = g(nd.inputs[0]);
                for (size_t i = 0; i < gout.size(); ++i) {
                    const double y = nd.value.values[i];
                    gx[i] += gout[i] * y * (1.0 - y);
                }
                break;
            }

            case OpKind::Relu: {
                const Tensor& x = in(nd.inputs, 0);
                auto& gx = g(nd.inputs[0]);
                for (size_t i = 0; i < gout.size(); ++i)
                    if (x.values[i] > 0) gx[i] += gout[i];
                break;
            }

            case OpKind::Log: {
                const Tensor& x = in(nd.inputs, 0);
                auto& gx = g(nd.inputs[0]);
                for (size_t i = 0; i < gout.size(); ++i) gx[i] += gout[i] / x.values[i];
                break;
            }

            case OpKind::SoftmaxRows: {
                auto& gx = g(nd.inputs[0]);
                const int m = nd.value.rows(), c = nd.value.cols();
                for (int i = 0; i < m; ++i) {
                    const double* y = &nd.value.values[static_cast<size_t>(i) * c];
                    const double* go = &gout[static_cast<size_t>(i) * c];
                    double dot = 0;
                    for (int j = 0; j < c; ++j) dot += go[j] * y[j];
                    double* gr = &gx[static_cast<size_t>(i) * c];
                    for (int j = 0; j < c; ++j) gr[j] += y[j] * (go[j] - dot);
                }
                break;
            }

            case OpKind::ConcatLastDim: {
                if (nd.value.rank() == 1) {
                    size_t off = 0;
                    for (TensorId src : nd.inputs) {
                        const size_t len = node(src).value.numel();
                        if (node(src).requires_grad) {
                            auto& gs = g(src);
                            for (size_t i = 0; i < len; ++i) gs[i] += gout[off + i];
                        }
                        off += len;
                    }
                } else {
                    const int m = nd.value.rows(), total = nd.value.cols();
                    int off = 0;
                    for (TensorId src : nd.inputs) {
                        const int c = node(src).value.cols();
                        if (node(src).requires_grad) {
                            auto& gs = g(src);
                            for (int r = 0; r < m; ++r)
                                for (int j = 0; j < c; ++j)
                                    gs[static_cast<size_t>(r) * c + j] +=
                                        gout[static_cast<size_t>(r) * total + off + j];
                        }
                        off += c;
                    }
                }
                break;
            }

            case OpKind::SumRows: {
                const Tensor& x = in(nd.inputs, 0);
                auto& gx = g(nd.inputs[0]);
                for (int i = 0; i < x.rows(); ++i)
                    for (int j = 0; j < x.cols(); ++j)
                        gx[static_cast<size_t>(i) * x.cols() + j] += gout[static_cast<size_t>(j)];
                break;
            }

            case OpKind::SumAll: {
                auto& gx = g(nd.inputs[0]);
                for (size_t i = 0; i < gx.size(); ++i) gx[i] += gout[0];
                break;
            }

            case OpKind::Scale: {
                auto& gx = g(nd.inputs[0]);
                for (size_t i = 0; i < gout.size(); ++i) gx[i] += gout[i] * nd.c0;
                break;
            }

            case OpKind::MaskedFill: {
                auto& gx = g(nd.inputs[0]);
                const int c = nd.value.cols();
                for (size_t i = 0; i < gout.size(); ++i)
                    if (nd.keep[i % static_cast<size_t>(c)]) gx[i] += gout[i];
                break;
            }

            case OpKind::Dropout: {
                auto& gx = g(nd.inputs[0]);
                if (nd.aux.empty()) {
                    for (size_t i = 0; i < gout.size(); ++i) gx[i] += gout[i];
                } else {
                    for (size_t i = 0; i < gout.size(); ++i) gx[i] += gout[i] * nd.aux[i];
                }
                break;
            }

            case OpKind::Clamp: {
                const Tensor& x = in(nd.inputs, 0);
                auto& gx = g(nd.inputs[0]);
                for (size_t i = 0; i < gout.size(); ++i)
                    if (x.values[i] > nd.c0 && x.values[i] < nd.c1) gx[i] += gout[i];
                break;
            }

            case OpKind::Transpose: {
                const Tensor& x = in(nd.inputs, 0);
                auto& gx = g(nd.inputs[0]);
                for (int i = 0; i < x.rows(); ++i)
                    for (int j = 0; j < x.cols(); ++j)
                        gx[static_cast<size_t>(i) * x.cols() + j] +=
                            gout[static_cast<size_t>(j) * x.rows() + i];
                break;
            }

            case OpKind::Reshape: {
                auto& gx = g(nd.inputs[0]);
                for (size_t i = 0; i < gout.size(); ++i) gx[i] += gout[i];
                break;
            }

            case OpKind::GatherRows: {
                const Tensor& x = in(nd.inputs, 0);
                auto& gx = g(nd.inputs[0]);
                const int c = x.cols();
                for (size_t r = 0; r < nd.ints.size(); ++r) {
                    const size_t src = static_cast<size_t>(r) * c;
                    const size_t dst = static_cast<size_t>(nd.ints[r]) * c;
                    for (int j = 0; j < c; ++j) gx[dst + j] += gout[src + j];
                }
                break;
            }
        }
    }

    GradMap out;
    for (const auto& name : params.names()) {
        const Tensor& p = params.at(name);
        auto it = param_ids_.find(name);
        if (it != param_ids_.end() && !grads[static_cast<size_t>(it->second)].empty()) {
            out.add(name, Tensor::from(p.shape, grads[static_cast<size_t>(it->second)]));
        } else {
            out.add(name, Tensor::zeros(p.shape));
        }
    }
    return out;
}

}  // namespace tmoe
