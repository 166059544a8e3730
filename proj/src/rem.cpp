#include "rem.hpp"

#include "errors.hpp"

namespace mmdmix {

SimplexWeights sample_simplex(std::uint32_t n, std::uint32_t k, Rng& rng) {
    if (n < 1 || k < 1)
        throw ContractViolation("sample_simplex: N and K must be >= 1");
    SimplexWeights out;
    out.rows = k;
    out.cols = n;
    out.w.resize(static_cast<std::size_t>(k) * n);
    for (std::uint32_t r = 0; r < k; ++r) {
        double* row = out.w.data() + static_cast<std::size_t>(r) * n;
        double total = 0.0;
        do {
            total = 0.0;
            for (std::uint32_t i = 0; i < n; ++i) {
                row[i] = rng.uniform01();
                total += row[i];
            }
        } while (total == 0.0); // unreachable for continuous draws; guard anyway
        for (std::uint32_t i = 0; i < n; ++i) row[i] /= total;
    }
    return out;
}

std::vector<double> rem_combine(std::span<const double> particles,
                                const SimplexWeights& alpha) {
    if (particles.size() != alpha.cols)
        throw ContractViolation("rem_combine: particle count does not match weight columns");
    std::vector<double> out(alpha.rows, 0.0);
    for (std::uint32_t k = 0; k < alpha.rows; ++k) {
        const auto row = alpha.row(k);
        double acc = 0.0;
        for (std::uint32_t i = 0; i < alpha.cols; ++i) acc += row[i] * particles[i];
        out[k] = acc;
    }
    return out;
}

Var rem_combine(Tape& tape, Var particles, const SimplexWeights& alpha) {
    if (particles.len != alpha.cols)
        throw ContractViolation("rem_combine: particle count does not match weight columns");
    Var w = tape.constant(alpha.w);
    return tape.linear(w, particles, alpha.rows, alpha.cols, "rem.alpha");
}

} // namespace mmdmix
