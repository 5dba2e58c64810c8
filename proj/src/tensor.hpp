#pragma once

#include <string>
#include <vector>

namespace tmoe {

// Dense row-major tensor of rank 1..3, 64-bit values throughout.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> values;
    bool requires_grad = false;
    std::vector<double> grad;  // allocated lazily, same extent as values

    Tensor() = default;

    static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
    static Tensor scalar(double v, bool requires_grad = false);
    static Tensor from(std::vector<int> shape, std::vector<double> values,
                       bool requires_grad = false);

    int rank() const { return static_cast<int>(shape.size()); }
    int dim(int i) const { return shape[static_cast<size_t>(i)]; }
    size_t numel() const { return values.size(); }

    int rows() const { return shape[0]; }
    int cols() const { return shape[1]; }

    double& at(int i) { return values[static_cast<size_t>(i)]; }
    double at(int i) const { return values[static_cast<size_t>(i)]; }
    double& at(int i, int j) { return values[static_cast<size_t>(i) * cols() + j]; }
    double at(int i, int j) const { return values[static_cast<size_t>(i) * cols() + j]; }

    void ensure_grad();
    void zero_grad();
    bool all_finite() const;
};

size_t shape_numel(const std::vector<int>& shape);
std::string shape_str(const std::vector<int>& shape);

// Throws ShapeError unless rank is 1..3 and all extents are positive.
void validate_shape(const std::vector<int>& shape, const char* what);

}  // namespace tmoe
