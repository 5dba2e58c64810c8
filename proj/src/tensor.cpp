#include "tensor.hpp"

#include <cmath>

#include "error.hpp"

namespace tmoe {

size_t shape_numel(const std::vector<int>& shape) {
    size_t n = 1;
    for (int d : shape) n *= static_cast<size_t>(d);
    return n;
}

std::string shape_str(const std::vector<int>& shape) {
    std::string s = "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

void validate_shape(const std::vector<int>& shape, const char* what) {
    if (shape.empty() || shape.size() > 3)
        throw ShapeError(std::string(what) + ": rank must be 1..3, got " + shape_str(shape));
    for (int d : shape)
        if (d <= 0)
            throw ShapeError(std::string(what) + ": nonpositive extent in " + shape_str(shape));
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
    validate_shape(shape, "Tensor::zeros");
    Tensor t;
    t.values.assign(shape_numel(shape), 0.0);
    t.shape = std::move(shape);
    t.requires_grad = requires_grad;
    return t;
}

Tensor Tensor::scalar(double v, bool requires_grad) {
    Tensor t;
    t.shape = {1};
    t.values = {v};
    t.requires_grad = requires_grad;
    return t;
}

Tensor Tensor::from(std::vector<int> shape, std::vector<double> values, bool requires_grad) {
    validate_shape(shape, "Tensor::from");
    if (shape_numel(shape) != values.size())
        throw ShapeError("Tensor::from: " + shape_str(shape) + " does not hold " +
                         std::to_string(values.size()) + " values");
    Tensor t;
    t.shape = std::move(shape);
    t.values = std::move(values);
    t.requires_grad = requires_grad;
    return t;
}

void Tensor::ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
}

void Tensor::zero_grad() {
    grad.assign(values.size(), 0.0);
}

bool Tensor::all_finite() const {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace tmoe
