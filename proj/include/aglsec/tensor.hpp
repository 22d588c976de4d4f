#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

namespace aglsec {

// Dense row-major tensor of doubles.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<std::size_t> dims, double fill);

    static Tensor zeros(const std::vector<std::size_t>& dims);
    static Tensor matrix(std::size_t r, std::size_t c, double fill = 0.0);
    static Tensor vector(std::vector<double> values);

    std::size_t size() const;
    std::size_t rank() const { return shape.size(); }

    // 2-d accessors
    std::size_t rows() const { return shape.at(0); }
    std::size_t cols() const { return shape.at(1); }
    double& at(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    bool all_finite() const;
};

// Named parameters with matching gradient slots. Iteration follows insertion
// order so optimizer sweeps and serialization are deterministic.
class ParameterStore {
  public:
    // Adds a parameter with a zeroed gradient. Duplicate names are an error.
    void add(const std::string& name, Tensor value);

    bool has(const std::string& name) const { return params_.count(name) != 0; }
    Tensor& param(const std::string& name);
    const Tensor& param(const std::string& name) const;
    Tensor& grad(const std::string& name);
    const Tensor& grad(const std::string& name) const;

    const std::vector<std::string>& names() const { return order_; }
    std::size_t count() const { return order_.size(); }
    std::size_t total_entries() const;

    void zero_grads();

    // Same names, same order, same shapes.
    bool congruent_with(const ParameterStore& other) const;

  private:
    std::vector<std::string> order_;
    std::unordered_map<std::string, Tensor> params_;
    std::unordered_map<std::string, Tensor> grads_;
};

} // namespace aglsec
