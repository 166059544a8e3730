#pragma once

#include "tensor.hpp"

#include <functional>

namespace mmdmix {

/// One RMSProp step over every parameter with a populated gradient:
///   accum = decay * accum + (1 - decay) * g^2
///   theta -= lr * g / sqrt(accum + eps)
/// Gradients are zeroed afterward. A non-finite gradient aborts the whole
/// update (no parameter is touched) and names the offending entry.
void rmsprop_update(ParameterStore& store, double lr, double decay, double eps);

/// Compares the gradients currently held in `store` against central finite
/// differences of `fn` (which must be a deterministic, gradient-free forward
/// evaluation). Returns the worst relative error; differences at or below
/// the absolute floor count as exact agreement (default 1e-12; callers
/// probing losses of magnitude O(1) should raise it toward the central
/// difference's own resolution, eps * |f| / h).
double finite_diff_check(const std::function<double()>& fn, ParameterStore& store,
                         double h, double floor = 1e-12);

} // namespace mmdmix
