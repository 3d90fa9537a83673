/**
 * @file gradcheck.hpp
 * @brief Central finite-difference verification of analytic gradients.
 */
#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "edgeoff/nn/param_store.hpp"

namespace edgeoff::nn {

struct GradcheckResult {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    std::size_t coordinates = 0;
};

/// |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor = 1e-6);

/// `loss` evaluates the scalar objective from the current values. `backward`
/// fills the store gradients for the same objective (they are zeroed first).
/// Every coordinate is perturbed by +-eps. Throws NumericalError naming the
/// parameter if the objective is non-finite.
GradcheckResult gradcheck(ParamStore& store, const std::function<double()>& loss,
                          const std::function<void()>& backward, double eps = 1e-5);

}  // namespace edgeoff::nn
