/**
 * @file param_store.hpp
 * @brief Named parameters with paired gradient and optimizer moment buffers.
 *
 * Layers refer to parameters by index, so a copy of a store (a target
 * network) runs through exactly the same layer objects.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edgeoff/nn/tensor.hpp"

namespace edgeoff::nn {

struct Parameter {
    std::string name;
    Tensor2 value;
    Tensor2 grad;
    Tensor2 moment1;
    Tensor2 moment2;
};

class ParamStore {
public:
    /// Registers a zero-initialized parameter. Throws ParameterError on a duplicate name.
    std::size_t add(const std::string& name, std::size_t rows, std::size_t cols);

    std::size_t size() const noexcept { return params_.size(); }
    Parameter& operator[](std::size_t idx) { return params_[idx]; }
    const Parameter& operator[](std::size_t idx) const { return params_[idx]; }
    std::optional<std::size_t> find(const std::string& name) const;
    /// Throws ParameterError if absent.
    std::size_t index_of(const std::string& name) const;

    std::vector<Parameter>& params() noexcept { return params_; }
    const std::vector<Parameter>& params() const noexcept { return params_; }

    void zero_grad();
    /// Total number of scalar weights.
    std::size_t scalar_count() const;

    std::uint64_t step() const noexcept { return step_; }
    void set_step(std::uint64_t s) noexcept { step_ = s; }

    /// Values equal, name by name (grads and moments ignored).
    bool same_values(const ParamStore& other) const;
    bool same_layout(const ParamStore& other) const;

private:
    std::vector<Parameter> params_;
    std::uint64_t step_ = 0;
};

/// Weights ("*.w") uniform in +-sqrt(6 / (fan_in + fan_out)); everything else zero.
/// Each parameter draws from its own stream keyed by (seed, name).
void init_glorot(ParamStore& store, std::uint64_t seed);

/// target <- tau * online + (1 - tau) * target, parameter by parameter.
void soft_update(ParamStore& target, const ParamStore& online, double tau);

}  // namespace edgeoff::nn
