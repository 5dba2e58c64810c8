#include "paramset.hpp"

#include "error.hpp"

namespace tmoe {

Tensor& ParamSet::add(const std::string& name, Tensor t) {
    if (by_name_.count(name))
        throw DataError("ParamSet: duplicate parameter name '" + name + "'");
    order_.push_back(name);
    return by_name_.emplace(name, std::move(t)).first->second;
}

Tensor& ParamSet::at(const std::string& name) {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw DataError("ParamSet: unknown parameter '" + name + "'");
    return it->second;
}

const Tensor& ParamSet::at(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw DataError("ParamSet: unknown parameter '" + name + "'");
    return it->second;
}

size_t ParamSet::total_scalars() const {
    size_t n = 0;
    for (const auto& name : order_) n += at(name).numel();
    return n;
}

}  // namespace tmoe
