#include "optim.hpp"

#include <cmath>

#include "error.hpp"

namespace tmoe {

Adam::Adam(const ParamSet& params, AdamConfig config) : config_(config) {
    for (const auto& name : params.names()) {
        m_.add(name, Tensor::zeros(params.at(name).shape));
        v_.add(name, Tensor::zeros(params.at(name).shape));
    }
}

double global_grad_norm(const GradMap& grads) {
    double sq = 0.0;
    for (const auto& name : grads.names())
        for (double g : grads.at(name).values) sq += g * g;
    return std::sqrt(sq);
}

void Adam::step(ParamSet& params, const GradMap& grads) {
    ++t_;
    double scale = 1.0;
    if (config_.clip_norm > 0.0) {
        const double norm = global_grad_norm(grads);
        if (norm > config_.clip_norm) scale = config_.clip_norm / norm;
    }
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));

    for (const auto& name : params.names()) {
        Tensor& p = params.at(name);
        const Tensor& g = grads.at(name);
        if (g.shape != p.shape)
            throw ShapeError("adam_step: gradient shape " + shape_str(g.shape) +
                             " does not match parameter '" + name + "' " + shape_str(p.shape));
        Tensor& m = m_.at(name);
        Tensor& v = v_.at(name);
        for (size_t i = 0; i < p.numel(); ++i) {
            const double gi = g.values[i] * scale;
            m.values[i] = config_.beta1 * m.values[i] + (1.0 - config_.beta1) * gi;
            v.values[i] = config_.beta2 * v.values[i] + (1.0 - config_.beta2) * gi * gi;
            const double mhat = m.values[i] / bc1;
            const double vhat = v.values[i] / bc2;
            p.values[i] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
        }
    }
}

}  // namespace tmoe
