#include "gradcheck.hpp"

#include <cmath>

#include "error.hpp"

namespace tmoe {

namespace {

double eval_loss(const ForwardFn& fn, ParamSet& params) {
    Tape tape;
    TensorId loss = fn(tape, params);
    const Tensor& v = tape.value(loss);
    if (v.shape != std::vector<int>{1})
        throw ShapeError("grad_check: forward_fn must produce shape [1], got " +
                         shape_str(v.shape));
    return v.values[0];
}

}  // namespace

GradCheckReport grad_check(const ForwardFn& forward_fn, ParamSet& params, double step) {
    const double base1 = eval_loss(forward_fn, params);
    const double base2 = eval_loss(forward_fn, params);
    if (base1 != base2)
        throw CheckError("grad_check: forward_fn is not deterministic (" +
                         std::to_string(base1) + " vs " + std::to_string(base2) + ")");

    Tape tape;
    TensorId loss = forward_fn(tape, params);
    GradMap grads = tape.backward(loss, params);

    GradCheckReport report;
    for (const auto& name : params.names()) {
        Tensor& p = params.at(name);
        const Tensor& analytic = grads.at(name);
        double worst = 0.0;
        for (size_t i = 0; i < p.numel(); ++i) {
            const double saved = p.values[i];
            p.values[i] = saved + step;
            const double up = eval_loss(forward_fn, params);
            p.values[i] = saved - step;
            const double down = eval_loss(forward_fn, params);
            p.values[i] = saved;
            const double fd = (up - down) / (2.0 * step);
            const double a = analytic.values[i];
            const double rel =
                std::fabs(a - fd) / std::max({1.0, std::fabs(a), std::fabs(fd)});
            worst = std::max(worst, rel);
        }
        report.per_param[name] = worst;
        if (worst >= report.max_rel) {
            report.max_rel = worst;
            report.worst_param = name;
        }
    }
    return report;
}

}  // namespace tmoe
