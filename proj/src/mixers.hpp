#pragma once

#include "rng.hpp"
#include "tape.hpp"

#include <span>

namespace mmdmix {

// NegAbs exists solely so the selftest can verify that the monotonicity
// probe actually catches a sign fault in the weight transform; it flips the
// final mixing layer only (flipping both layers would cancel).
enum class WeightTransform { Abs, NegAbs };

struct MixerDims {
    std::uint32_t n_agents = 0;
    std::uint32_t state_size = 0;
    std::uint32_t embed = 32;
    std::uint32_t n_particles = 8; // N; 1 recovers the scalar monotonic mixer
};

/// Monotonic mixing network with hypernetwork-generated weights. The first
/// mixing layer (state-conditioned |W1|, b1, ELU) is shared; the final layer
/// is replicated per particle, each with its own weight and bias
/// hypernetworks, so the head emits N joint-value particles. Absolute-value
/// weight transforms keep every particle nondecreasing in every agent value.
class MixingNetwork {
public:
    MixingNetwork(Tape& tape, const MixerDims& dims,
                  WeightTransform wt = WeightTransform::Abs);

    /// agent_values: one scalar Var per agent (chosen-action utilities).
    /// Returns the N-particle Var.
    Var mix(std::span<const Var> agent_values, Var state) const;

    static void init_params(ParameterStore& store, const MixerDims& dims, Rng& rng);

private:
    Var transform(Var w) const;

    Tape* tape_;
    MixerDims dims_;
    WeightTransform wt_;
    Var hw1_l1w_, hw1_l1b_, hw1_l2w_, hw1_l2b_; // state -> |W1| (embed x n)
    Var hb1_w_, hb1_b_;                         // state -> b1 (linear)
    struct ParticleHead {
        Var w_l1w, w_l1b, w_l2w, w_l2b; // state -> |w2_i| (embed)
        Var b_l1w, b_l1b, b_l2w, b_l2b; // state -> b2_i (scalar)
    };
    std::vector<ParticleHead> heads_;
};

/// Additive baseline: exact sum of the per-agent values (scalar Var).
Var vdn_mix(Tape& tape, std::span<const Var> agent_values);

} // namespace mmdmix
