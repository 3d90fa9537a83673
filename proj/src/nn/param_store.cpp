#include "edgeoff/nn/param_store.hpp"

#include <cmath>

#include "edgeoff/common/error.hpp"
#include "edgeoff/common/rng.hpp"

namespace edgeoff::nn {

std::size_t ParamStore::add(const std::string& name, std::size_t rows, std::size_t cols) {
    if (find(name)) throw ParameterError("duplicate parameter '" + name + "'");
    Parameter p;
    p.name = name;
    p.value = Tensor2(rows, cols);
    p.grad = Tensor2(rows, cols);
    p.moment1 = Tensor2(rows, cols);
    p.moment2 = Tensor2(rows, cols);
    params_.push_back(std::move(p));
    return params_.size() - 1;
}

std::optional<std::size_t> ParamStore::find(const std::string& name) const {
    for (std::size_t k = 0; k < params_.size(); ++k) {
        if (params_[k].name == name) return k;
    }
    return std::nullopt;
}

std::size_t ParamStore::index_of(const std::string& name) const {
    const auto idx = find(name);
    if (!idx) throw ParameterError("unknown parameter '" + name + "'");
    return *idx;
}

void ParamStore::zero_grad() {
    for (auto& p : params_) p.grad.fill(0.0);
}

std::size_t ParamStore::scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
}

bool ParamStore::same_layout(const ParamStore& other) const {
    if (params_.size() != other.params_.size()) return false;
    for (std::size_t k = 0; k < params_.size(); ++k) {
        if (params_[k].name != other.params_[k].name) return false;
        if (!params_[k].value.same_shape(other.params_[k].value)) return false;
    }
    return true;
}

bool ParamStore::same_values(const ParamStore& other) const {
    if (!same_layout(other)) return false;
    for (std::size_t k = 0; k < params_.size(); ++k) {
        if (params_[k].value != other.params_[k].value) return false;
    }
    return true;
}

void init_glorot(ParamStore& store, std::uint64_t seed) {
    for (auto& p : store.params()) {
        const bool weight = p.name.size() >= 2 && p.name.compare(p.name.size() - 2, 2, ".w") == 0;
        if (!weight) {
            p.value.fill(0.0);
            continue;
        }
        Rng rng(derive_seed(seed, streams::kInit, hash_name(p.name)));
        const double bound = std::sqrt(6.0 / static_cast<double>(p.value.rows() + p.value.cols()));
        for (auto& v : p.value.values()) v = rng.uniform(-bound, bound);
    }
}

void soft_update(ParamStore& target, const ParamStore& online, double tau) {
    if (!target.same_layout(online)) throw ShapeError("soft_update: target and online layouts differ");
    for (std::size_t k = 0; k < target.size(); ++k) {
        auto& t = target[k].value.values();
        const auto& o = online[k].value.values();
        for (std::size_t j = 0; j < t.size(); ++j) t[j] = tau * o[j] + (1.0 - tau) * t[j];
    }
}

}  // namespace edgeoff::nn
