#include "edgeoff/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "edgeoff/common/error.hpp"

namespace edgeoff::nn {

double relative_error(double analytic, double numeric, double floor) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / denom;
}

GradcheckResult gradcheck(ParamStore& store, const std::function<double()>& loss,
                          const std::function<void()>& backward, double eps) {
    store.zero_grad();
    backward();
    std::vector<Tensor2> analytic;
    analytic.reserve(store.size());
    for (const auto& p : store.params()) analytic.push_back(p.grad);
    store.zero_grad();

    const auto eval = [&](const std::string& name) {
        const double v = loss();
        if (!std::isfinite(v)) throw NumericalError("gradcheck: non-finite objective while perturbing '" + name + "'");
        return v;
    };

    GradcheckResult result;
    for (std::size_t k = 0; k < store.size(); ++k) {
        auto& p = store[k];
        for (std::size_t j = 0; j < p.value.size(); ++j) {
            double& w = p.value.data()[j];
            const double saved = w;
            w = saved + eps;
            const double up = eval(p.name);
            w = saved - eps;
            const double down = eval(p.name);
            w = saved;
            const double numeric = (up - down) / (2.0 * eps);
            const double a = analytic[k].data()[j];
            const double err = relative_error(a, numeric);
            ++result.coordinates;
            if (err > result.max_rel_error || result.worst_param.empty()) {
                result.max_rel_error = err;
                result.worst_param = p.name;
                result.worst_index = j;
                result.analytic = a;
                result.numeric = numeric;
            }
        }
    }
    return result;
}

}  // namespace edgeoff::nn
