/**
 * @file optim.hpp
 * @brief Bias-corrected adaptive-moment optimizer and gradient clipping.
 */
#pragma once

#include "edgeoff/nn/param_store.hpp"

namespace edgeoff::nn {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// One update of every parameter in `store`, then clears the gradients.
void adam_step(ParamStore& store, const AdamConfig& config);

/// Global L2 norm of all gradients.
double grad_norm(const ParamStore& store);

/// Rescales gradients so their global norm is at most `max_norm`; returns the pre-clip norm.
double clip_grad_norm(ParamStore& store, double max_norm);

}  // namespace edgeoff::nn
