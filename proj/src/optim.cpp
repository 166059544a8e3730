#include "optim.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>

namespace mmdmix {

void rmsprop_update(ParameterStore& store, double lr, double decay, double eps) {
    for (const auto& [name, e] : store)
        for (double g : e.grad)
            if (!std::isfinite(g))
                throw ContractViolation("rmsprop_update: non-finite gradient in '" + name + "'");
    for (auto& [name, e] : store) {
        for (std::size_t i = 0; i < e.grad.size(); ++i) {
            const double g = e.grad[i];
            e.accum[i] = decay * e.accum[i] + (1.0 - decay) * g * g;
            e.value.data[i] -= lr * g / std::sqrt(e.accum[i] + eps);
        }
        std::fill(e.grad.begin(), e.grad.end(), 0.0);
    }
}

double finite_diff_check(const std::function<double()>& fn, ParameterStore& store,
                         double h, double floor) {
    double worst = 0.0;
    for (auto& [name, e] : store) {
        for (std::size_t i = 0; i < e.value.size(); ++i) {
            const double saved = e.value.data[i];
            e.value.data[i] = saved + h;
            const double fp = fn();
            e.value.data[i] = saved - h;
            const double fm = fn();
            e.value.data[i] = saved;
            const double numeric = (fp - fm) / (2.0 * h);
            const double analytic = e.grad[i];
            const double diff = std::abs(numeric - analytic);
            if (diff <= floor) continue;
            const double rel = diff / std::max(std::abs(numeric), std::abs(analytic));
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

} // namespace mmdmix
