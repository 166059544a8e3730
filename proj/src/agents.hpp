#pragma once

#include "nn.hpp"
#include "rng.hpp"
#include "tape.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace mmdmix {

struct AgentNetDims {
    std::uint32_t obs_size = 0;
    std::uint32_t n_actions = 0;
    std::uint32_t n_agents = 0;
    std::uint32_t hidden = 64;
    std::uint32_t input_size() const { return obs_size + n_actions + n_agents; }
};

/// Shared recurrent utility network Q_a(tau_a, .): dense + ReLU in, one GRU
/// cell, dense head to per-action values. All agents evaluate the same
/// parameters; behavior differs only through the observation, the previous
/// action and the one-hot agent id carried in the input.
class AgentNet {
public:
    AgentNet(Tape& tape, const AgentNetDims& dims);

    struct StepOut {
        Var q;       // one value per action
        Var hidden;  // next hidden state
    };
    StepOut step(Var input, Var hidden) const;

    static void init_params(ParameterStore& store, const AgentNetDims& dims, Rng& rng);

    // Concatenates observation | one-hot last action (-1 = none) | one-hot id.
    static std::vector<double> make_input(std::span<const double> obs, int last_action,
                                          int agent_id, const AgentNetDims& dims);

private:
    Tape* tape_;
    AgentNetDims dims_;
    Var fc1_w_, fc1_b_, head_w_, head_b_;
    GruVars gru_;
};

/// All-zero hidden states, one per agent; call at every episode boundary.
std::vector<Var> init_hidden(Tape& tape, std::uint32_t n_agents, std::uint32_t hidden_dim);

/// Epsilon-greedy over the available actions: with probability epsilon a
/// uniform available action, otherwise the masked argmax with ties broken
/// by the lowest action id. Consumes only this agent's values.
int select_action(std::span<const double> q, std::span<const std::uint8_t> avail,
                  double epsilon, Rng& rng);

} // namespace mmdmix
