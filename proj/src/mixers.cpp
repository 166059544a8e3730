#include "mixers.hpp"

#include "errors.hpp"
#include "nn.hpp"

#include <string>

namespace mmdmix {

namespace {
constexpr std::uint32_t kWeightHyperHidden = 64;
constexpr std::uint32_t kBiasHyperHidden = 32;

std::string head_prefix(std::uint32_t i, const char* which) {
    return "mixer." + std::string(which) + "." + std::to_string(i);
}
} // namespace

MixingNetwork::MixingNetwork(Tape& tape, const MixerDims& dims, WeightTransform wt)
    : tape_(&tape), dims_(dims), wt_(wt) {
    hw1_l1w_ = tape.param("mixer.hyper_w1.l1.w");
    hw1_l1b_ = tape.param("mixer.hyper_w1.l1.b");
    hw1_l2w_ = tape.param("mixer.hyper_w1.l2.w");
    hw1_l2b_ = tape.param("mixer.hyper_w1.l2.b");
    hb1_w_ = tape.param("mixer.hyper_b1.w");
    hb1_b_ = tape.param("mixer.hyper_b1.b");
    heads_.resize(dims.n_particles);
    for (std::uint32_t i = 0; i < dims.n_particles; ++i) {
        ParticleHead& h = heads_[i];
        const std::string w = head_prefix(i, "hyper_w2");
        const std::string b = head_prefix(i, "hyper_b2");
        h.w_l1w = tape.param(w + ".l1.w");
        h.w_l1b = tape.param(w + ".l1.b");
        h.w_l2w = tape.param(w + ".l2.w");
        h.w_l2b = tape.param(w + ".l2.b");
        h.b_l1w = tape.param(b + ".l1.w");
        h.b_l1b = tape.param(b + ".l1.b");
        h.b_l2w = tape.param(b + ".l2.w");
        h.b_l2b = tape.param(b + ".l2.b");
    }
}

Var MixingNetwork::transform(Var w) const {
    return wt_ == WeightTransform::Abs ? tape_->abs(w) : tape_->neg_abs(w);
}

Var MixingNetwork::mix(std::span<const Var> agent_values, Var state) const {
    Tape& t = *tape_;
    if (agent_values.size() != dims_.n_agents)
        throw ConfigError("mixer: expected " + std::to_string(dims_.n_agents) +
                          " agent values, got " + std::to_string(agent_values.size()));
    if (state.len != dims_.state_size)
        throw ConfigError("mixer: state length " + std::to_string(state.len) +
                          " does not match configured " + std::to_string(dims_.state_size));
    const std::uint32_t n = dims_.n_agents, e = dims_.embed, s = dims_.state_size;

    Var q = t.concat(agent_values);
    if (q.len != n)
        throw ConfigError("mixer: agent values must be scalars");

    // shared first layer, weights generated from the global state
    Var hw1_h = t.relu(t.dense(state, hw1_l1w_, hw1_l1b_, kWeightHyperHidden, s,
                               "mixer.hyper_w1.l1"));
    Var w1 = t.abs(t.dense(hw1_h, hw1_l2w_, hw1_l2b_, e * n, kWeightHyperHidden,
                           "mixer.hyper_w1.l2"));
    Var b1 = t.dense(state, hb1_w_, hb1_b_, e, s, "mixer.hyper_b1");
    Var hidden = t.elu(t.add(t.linear(w1, q, e, n, "mixer.w1"), b1));

    std::vector<Var> particles;
    particles.reserve(dims_.n_particles);
    for (const ParticleHead& h : heads_) {
        Var wh = t.relu(t.dense(state, h.w_l1w, h.w_l1b, kWeightHyperHidden, s,
                                "mixer.hyper_w2.l1"));
        Var w2 = transform(t.dense(wh, h.w_l2w, h.w_l2b, e, kWeightHyperHidden,
                                   "mixer.hyper_w2.l2"));
        Var bh = t.relu(t.dense(state, h.b_l1w, h.b_l1b, kBiasHyperHidden, s,
                                "mixer.hyper_b2.l1"));
        Var b2 = t.dense(bh, h.b_l2w, h.b_l2b, 1, kBiasHyperHidden, "mixer.hyper_b2.l2");
        particles.push_back(t.add(t.dot(w2, hidden), b2));
    }
    return t.concat(particles);
}

void MixingNetwork::init_params(ParameterStore& store, const MixerDims& dims, Rng& rng) {
    const std::uint32_t n = dims.n_agents, e = dims.embed, s = dims.state_size;
    init_linear_params(store, "mixer.hyper_w1.l1", kWeightHyperHidden, s, rng);
    init_linear_params(store, "mixer.hyper_w1.l2", e * n, kWeightHyperHidden, rng);
    init_linear_params(store, "mixer.hyper_b1", e, s, rng);
    for (std::uint32_t i = 0; i < dims.n_particles; ++i) {
        const std::string w = head_prefix(i, "hyper_w2");
        const std::string b = head_prefix(i, "hyper_b2");
        init_linear_params(store, w + ".l1", kWeightHyperHidden, s, rng);
        init_linear_params(store, w + ".l2", e, kWeightHyperHidden, rng);
        init_linear_params(store, b + ".l1", kBiasHyperHidden, s, rng);
        init_linear_params(store, b + ".l2", 1, kBiasHyperHidden, rng);
    }
}

Var vdn_mix(Tape& tape, std::span<const Var> agent_values) {
    if (agent_values.empty())
        throw ContractViolation("vdn_mix: needs at least one agent value");
    return tape.sum(tape.concat(agent_values));
}

} // namespace mmdmix
