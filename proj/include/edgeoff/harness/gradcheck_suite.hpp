/**
 * @file gradcheck_suite.hpp
 * @brief Finite-difference checks of every layer and both training losses.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "edgeoff/nn/layers.hpp"

namespace edgeoff::harness {

struct GradcheckEntry {
    std::string name;
    std::size_t seeds = 0;
    double worst_error = 0.0;
    std::string worst_param;
    std::uint64_t worst_seed = 0;
    bool passed = false;
};

struct GradcheckReport {
    double tolerance = 1e-4;
    std::vector<GradcheckEntry> entries;
    bool passed() const;
};

/// Each check runs over `seeds` random instances (seeds 1..n).
GradcheckReport run_gradcheck_suite(std::size_t seeds = 20, double tolerance = 1e-4);

/// Dense layer backward; the default is Dense::backward. Replaceable to test the checker itself.
using DenseBackward =
    std::function<nn::Tensor2(const nn::Dense&, nn::ParamStore&, const nn::Tensor2& x, const nn::Tensor2& dy)>;

GradcheckEntry check_dense(std::size_t seeds, double tolerance, const DenseBackward& backward = {});

void print_report(std::ostream& out, const GradcheckReport& report);

}  // namespace edgeoff::harness
