#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "paramset.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace tmoe {

using TensorId = int32_t;

enum class OpKind : uint8_t {
    Leaf,
    MatMul,
    Add,
    Sub,
    Mul,
    Tanh,
    Sigmoid,
    Relu,
    SoftmaxRows,
    ConcatLastDim,
    SumRows,
    SumAll,
    Scale,
    MaskedFill,
    Dropout,
    Log,
    Clamp,
    Transpose,
    Reshape,
    GatherRows,
};

const char* op_kind_name(OpKind kind);

// Extra arguments for the kinds that need them; unused fields are ignored.
struct OpArgs {
    double scale = 1.0;               // Scale
    double lo = 0.0, hi = 0.0;        // Clamp
    double fill = -1e9;               // MaskedFill
    std::vector<uint8_t> keep;        // MaskedFill: 1 = keep, 0 = masked (per column)
    std::vector<int> ints;            // GatherRows row ids / Reshape target shape
    double rate = 0.0;                // Dropout
    Rng* rng = nullptr;               // Dropout
    bool training = false;            // Dropout
};

// Reverse-mode tape. One forward graph per tape; backward may run once and
// consumes it. Single-threaded; concurrent instances need separate tapes.
class Tape {
public:
    // Leaves. Constants carry requires_grad = false; parameter leaves are
    // memoized by name so repeated lookups share one node.
    TensorId leaf(Tensor t);
    TensorId constant(Tensor t);
    TensorId param(ParamSet& params, const std::string& name);

    // Generic primitive entry point; unknown kinds and shape mismatches throw.
    TensorId apply(OpKind kind, const std::vector<TensorId>& inputs, const OpArgs& args = {});

    TensorId matmul(TensorId a, TensorId b);
    TensorId add(TensorId a, TensorId b);
    TensorId sub(TensorId a, TensorId b);
    TensorId mul(TensorId a, TensorId b);
    TensorId tanh(TensorId x);
    TensorId sigmoid(TensorId x);
    TensorId relu(TensorId x);
    TensorId softmax_rows(TensorId x);
    TensorId concat_last(const std::vector<TensorId>& xs);
    TensorId sum_rows(TensorId x);
    TensorId sum_all(TensorId x);
    TensorId scale(TensorId x, double c);
    TensorId masked_fill(TensorId x, std::vector<uint8_t> keep, double fill = -1e9);
    TensorId dropout(TensorId x, double rate, Rng& rng, bool training);
    TensorId log(TensorId x);
    TensorId clamp(TensorId x, double lo, double hi);
    TensorId transpose(TensorId x);
    TensorId reshape(TensorId x, std::vector<int> shape);
    TensorId gather_rows(TensorId table, std::vector<int> ids);

    const Tensor& value(TensorId id) const;
    size_t size() const { return nodes_.size(); }
    bool consumed() const { return consumed_; }

    // d(loss)/d(p) for every parameter in `params`; parameters that do not
    // reach the loss map to zero tensors. loss must have shape [1].
    GradMap backward(TensorId loss, const ParamSet& params);

private:
    struct Node {
        OpKind kind = OpKind::Leaf;
        std::vector<TensorId> inputs;
        Tensor value;
        bool requires_grad = false;
        std::string param_name;     // nonempty for parameter leaves
        std::vector<double> aux;    // saved intermediates for backward
        std::vector<uint8_t> keep;  // MaskedFill keep flags
        std::vector<int> ints;      // GatherRows ids / Reshape source shape
        double c0 = 0.0, c1 = 0.0;  // Scale factor / Clamp bounds
    };

    Node& node(TensorId id) { return nodes_[static_cast<size_t>(id)]; }
    const Node& node(TensorId id) const { return nodes_[static_cast<size_t>(id)]; }
    TensorId push(Node n);
    const Tensor& in(const std::vector<TensorId>& inputs, size_t i) const;
    bool any_requires(const std::vector<TensorId>& inputs) const;

    // Deque keeps node references stable while new nodes are appended.
    std::deque<Node> nodes_;
    std::unordered_map<std::string, TensorId> param_ids_;
    bool consumed_ = false;
};

}  // namespace tmoe
