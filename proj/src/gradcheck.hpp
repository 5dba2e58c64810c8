#pragma once

#include <functional>
#include <map>
#include <string>

#include "tape.hpp"

namespace tmoe {

// Builds the loss for one deterministic forward pass. Called many times on
// fresh tapes, so it must not keep state between calls (dropout off, rng
// either unused or reseeded inside).
using ForwardFn = std::function<TensorId(Tape&, ParamSet&)>;

struct GradCheckReport {
    std::map<std::string, double> per_param;  // worst relative error by name
    double max_rel = 0.0;
    std::string worst_param;
};

// Central finite differences against the tape gradient for every scalar
// parameter component. Relative error is |a-b| / max(1, |a|, |b|).
// Throws CheckError if two baseline evaluations of forward_fn disagree.
GradCheckReport grad_check(const ForwardFn& forward_fn, ParamSet& params, double step = 1e-5);

}  // namespace tmoe
