#include "aglsec/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace aglsec {

Tensor::Tensor(std::vector<std::size_t> dims, double fill) : shape(std::move(dims)) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    data.assign(n, fill);
}

Tensor Tensor::zeros(const std::vector<std::size_t>& dims) { return Tensor(dims, 0.0); }

Tensor Tensor::matrix(std::size_t r, std::size_t c, double fill) {
    return Tensor({r, c}, fill);
}

Tensor Tensor::vector(std::vector<double> values) {
    Tensor t;
    t.shape = {values.size()};
    t.data = std::move(values);
    return t;
}

std::size_t Tensor::size() const {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

bool Tensor::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void ParameterStore::add(const std::string& name, Tensor value) {
    if (params_.count(name)) {
        throw std::invalid_argument("ParameterStore: duplicate parameter '" + name + "'");
    }
    grads_.emplace(name, Tensor::zeros(value.shape));
    params_.emplace(name, std::move(value));
    order_.push_back(name);
}

Tensor& ParameterStore::param(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::invalid_argument("ParameterStore: no parameter '" + name + "'");
    return it->second;
}

const Tensor& ParameterStore::param(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::invalid_argument("ParameterStore: no parameter '" + name + "'");
    return it->second;
}

Tensor& ParameterStore::grad(const std::string& name) {
    auto it = grads_.find(name);
    if (it == grads_.end()) throw std::invalid_argument("ParameterStore: no gradient '" + name + "'");
    return it->second;
}

const Tensor& ParameterStore::grad(const std::string& name) const {
    auto it = grads_.find(name);
    if (it == grads_.end()) throw std::invalid_argument("ParameterStore: no gradient '" + name + "'");
    return it->second;
}

std::size_t ParameterStore::total_entries() const {
    std::size_t n = 0;
    for (const auto& name : order_) n += params_.at(name).size();
    return n;
}

void ParameterStore::zero_grads() {
    for (auto& [name, g] : grads_) {
        std::fill(g.data.begin(), g.data.end(), 0.0);
    }
}

bool ParameterStore::congruent_with(const ParameterStore& other) const {
    if (order_ != other.order_) return false;
    for (const auto& name : order_) {
        if (params_.at(name).shape != other.params_.at(name).shape) return false;
    }
    return true;
}

} // namespace aglsec
