#include "edgeoff/nn/optim.hpp"

#include <cmath>

namespace edgeoff::nn {

void adam_step(ParamStore& store, const AdamConfig& config) {
    const std::uint64_t step = store.step() + 1;
    store.set_step(step);
    const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
    for (auto& p : store.params()) {
        double* w = p.value.data();
        double* g = p.grad.data();
        double* m = p.moment1.data();
        double* v = p.moment2.data();
        for (std::size_t k = 0; k < p.value.size(); ++k) {
            m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g[k];
            v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g[k] * g[k];
            const double mhat = m[k] / c1;
            const double vhat = v[k] / c2;
            w[k] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
            g[k] = 0.0;
        }
    }
}

double grad_norm(const ParamStore& store) {
    double total = 0.0;
    for (const auto& p : store.params()) {
        for (double g : p.grad.values()) total += g * g;
    }
    return std::sqrt(total);
}

double clip_grad_norm(ParamStore& store, double max_norm) {
    const double norm = grad_norm(store);
    if (norm > max_norm && norm > 0.0) {
        const double s = max_norm / norm;
        for (auto& p : store.params()) scale_inplace(p.grad, s);
    }
    return norm;
}

}  // namespace edgeoff::nn
