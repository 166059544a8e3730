#pragma once

#include "rng.hpp"
#include "tape.hpp"

#include <span>
#include <vector>

namespace mmdmix {

/// K categorical distributions over N support points: every row is
/// nonnegative and sums to 1.
struct SimplexWeights {
    std::uint32_t rows = 0; // K
    std::uint32_t cols = 0; // N
    std::vector<double> w;  // row-major

    std::span<const double> row(std::uint32_t k) const {
        return {w.data() + static_cast<std::size_t>(k) * cols, cols};
    }
};

/// Each row: N i.i.d. Uniform(0,1) draws normalized by their sum.
SimplexWeights sample_simplex(std::uint32_t n, std::uint32_t k, Rng& rng);

/// Convex re-combination: out_k = dot(alpha_k, particles).
std::vector<double> rem_combine(std::span<const double> particles,
                                const SimplexWeights& alpha);

/// Differentiable variant; the fixed alpha acts as a constant linear map.
Var rem_combine(Tape& tape, Var particles, const SimplexWeights& alpha);

} // namespace mmdmix
