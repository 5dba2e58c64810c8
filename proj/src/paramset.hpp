#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "tensor.hpp"

namespace tmoe {

// Ordered map from dot-separated parameter path to tensor. Iteration order is
// insertion order, which fixes checkpoint layout and update order.
class ParamSet {
public:
    Tensor& add(const std::string& name, Tensor t);
    bool contains(const std::string& name) const { return by_name_.count(name) > 0; }
    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;
    const std::vector<std::string>& names() const { return order_; }
    size_t size() const { return order_.size(); }
    size_t total_scalars() const;

private:
    std::vector<std::string> order_;
    std::unordered_map<std::string, Tensor> by_name_;
};

// Gradients keyed the same way parameters are.
using GradMap = ParamSet;

}  // namespace tmoe
