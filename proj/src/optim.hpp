#pragma once

#include "paramset.hpp"

namespace tmoe {

struct AdamConfig {
    double lr = 2e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double clip_norm = 10.0;  // global gradient norm; <= 0 disables clipping
};

// Bias-corrected Adam with global-norm gradient clipping applied before the
// update. Moment buffers follow the parameter set handed to the constructor.
class Adam {
public:
    Adam(const ParamSet& params, AdamConfig config);

    void step(ParamSet& params, const GradMap& grads);
    long t() const { return t_; }
    const Tensor& moment1(const std::string& name) const { return m_.at(name); }
    const Tensor& moment2(const std::string& name) const { return v_.at(name); }

private:
    AdamConfig config_;
    ParamSet m_, v_;
    long t_ = 0;
};

double global_grad_norm(const GradMap& grads);

}  // namespace tmoe
