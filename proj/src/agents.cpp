#include "agents.hpp"

#include "errors.hpp"

#include <sstream>

namespace mmdmix {

AgentNet::AgentNet(Tape& tape, const AgentNetDims& dims) : tape_(&tape), dims_(dims) {
    fc1_w_ = tape.param("agent.fc1.w");
    fc1_b_ = tape.param("agent.fc1.b");
    gru_ = gru_vars(tape, "agent.gru", dims.hidden, dims.hidden);
    head_w_ = tape.param("agent.head.w");
    head_b_ = tape.param("agent.head.b");
}

AgentNet::StepOut AgentNet::step(Var input, Var hidden) const {
    Tape& t = *tape_;
    if (input.len != dims_.input_size()) {
        std::ostringstream os;
        os << "agent input length " << input.len << " does not match configured "
           << dims_.input_size() << " (obs " << dims_.obs_size << " + actions "
           << dims_.n_actions << " + agents " << dims_.n_agents << ")";
        throw ConfigError(os.str());
    }
    Var x = t.relu(t.dense(input, fc1_w_, fc1_b_, dims_.hidden, dims_.input_size(),
                           "agent.fc1"));
    Var h = gru_step(t, x, hidden, gru_);
    Var q = t.dense(h, head_w_, head_b_, dims_.n_actions, dims_.hidden, "agent.head");
    return {q, h};
}

void AgentNet::init_params(ParameterStore& store, const AgentNetDims& dims, Rng& rng) {
    init_linear_params(store, "agent.fc1", dims.hidden, dims.input_size(), rng);
    init_gru_params(store, "agent.gru", dims.hidden, dims.hidden, rng);
    init_linear_params(store, "agent.head", dims.n_actions, dims.hidden, rng);
}

std::vector<double> AgentNet::make_input(std::span<const double> obs, int last_action,
                                         int agent_id, const AgentNetDims& dims) {
    if (obs.size() != dims.obs_size) {
        std::ostringstream os;
        os << "agent observation length " << obs.size() << " does not match configured "
           << dims.obs_size;
        throw ConfigError(os.str());
    }
    std::vector<double> in;
    in.reserve(dims.input_size());
    in.assign(obs.begin(), obs.end());
    in.resize(dims.input_size(), 0.0);
    if (last_action >= 0) in[dims.obs_size + static_cast<std::uint32_t>(last_action)] = 1.0;
    in[dims.obs_size + dims.n_actions + static_cast<std::uint32_t>(agent_id)] = 1.0;
    return in;
}

std::vector<Var> init_hidden(Tape& tape, std::uint32_t n_agents, std::uint32_t hidden_dim) {
    std::vector<Var> h;
    h.reserve(n_agents);
    for (std::uint32_t a = 0; a < n_agents; ++a) h.push_back(tape.zeros(hidden_dim));
    return h;
}

int select_action(std::span<const double> q, std::span<const std::uint8_t> avail,
                  double epsilon, Rng& rng) {
    if (q.size() != avail.size())
        throw ContractViolation("select_action: q/mask size mismatch");
    int n_avail = 0;
    for (auto a : avail) n_avail += a ? 1 : 0;
    if (n_avail == 0)
        throw ContractViolation("select_action: no available action");

    if (rng.uniform01() < epsilon) {
        int pick = rng.uniform_int(n_avail);
        for (std::size_t u = 0; u < avail.size(); ++u) {
            if (!avail[u]) continue;
            if (pick == 0) return static_cast<int>(u);
            --pick;
        }
    }
    int best = -1;
    for (std::size_t u = 0; u < avail.size(); ++u) {
        if (!avail[u]) continue;
        if (best < 0 || q[u] > q[static_cast<std::size_t>(best)]) best = static_cast<int>(u);
    }
    return best;
}

} // namespace mmdmix
