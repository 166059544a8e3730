#include <doctest.h>

#include "agents.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "optim.hpp"

#include <cmath>

using namespace mmdmix;

namespace {
const AgentNetDims kDims{3, 4, 2, 8}; // obs 3, actions 4, agents 2, hidden 8
}

TEST_CASE("init_hidden: zero vectors, one per agent") {
    Tape t;
    const auto h = init_hidden(t, 2, 64);
    REQUIRE(h.size() == 2);
    for (const Var& v : h) {
        CHECK(v.len == 64);
        for (double x : t.values(v)) CHECK(x == 0.0);
    }
}

TEST_CASE("agent input assembly: obs | one-hot last action | one-hot id") {
    const std::vector<double> obs = {0.5, -0.5, 1.0};
    const auto in = AgentNet::make_input(obs, 2, 1, kDims);
    REQUIRE(in.size() == kDims.input_size());
    CHECK(in[0] == 0.5);
    CHECK(in[3 + 2] == 1.0); // last action 2
    CHECK(in[3 + 4 + 1] == 1.0); // agent id 1
    const auto first = AgentNet::make_input(obs, -1, 0, kDims);
    for (int u = 0; u < 4; ++u) CHECK(first[3 + u] == 0.0);
    const std::vector<double> short_obs = {0.1};
    CHECK_THROWS_AS(AgentNet::make_input(short_obs, -1, 0, kDims), ConfigError);
}

TEST_CASE("agent_forward: zero parameters give zero action values") {
    ParameterStore store;
    store.add("agent.fc1.w", {8, 9});
    store.add("agent.fc1.b", {8});
    store.add("agent.gru.w_ih", {24, 8});
    store.add("agent.gru.b_ih", {24});
    store.add("agent.gru.w_hh", {24, 8});
    store.add("agent.gru.b_hh", {24});
    store.add("agent.head.w", {4, 8});
    store.add("agent.head.b", {4});
    Tape t(store);
    AgentNet net(t, kDims);
    const std::vector<double> obs = {0.7, 0.1, -0.4};
    const auto in = AgentNet::make_input(obs, 1, 0, kDims);
    const auto out = net.step(t.constant(in), t.zeros(8));
    for (double q : t.values(out.q)) CHECK(q == 0.0);
}

TEST_CASE("agent_forward is deterministic for fixed inputs") {
    ParameterStore store;
    Rng rng(77);
    AgentNet::init_params(store, kDims, rng);
    auto run = [&] {
        Tape t(static_cast<const ParameterStore&>(store));
        AgentNet net(t, kDims);
        const std::vector<double> obs = {0.7, 0.1, -0.4};
        const auto in = AgentNet::make_input(obs, 3, 1, kDims);
        const auto out = net.step(t.constant(in), t.zeros(8));
        return std::vector<double>(t.values(out.q).begin(), t.values(out.q).end());
    };
    CHECK(run() == run());
}

TEST_CASE("agent network gradient over an unrolled episode matches finite differences") {
    ParameterStore store;
    Rng rng(78);
    AgentNet::init_params(store, kDims, rng);
    std::vector<std::vector<double>> inputs;
    Rng xr(79);
    for (int t = 0; t < 3; ++t) {
        std::vector<double> in(kDims.input_size());
        for (double& v : in) v = xr.uniform(-1.0, 1.0);
        inputs.push_back(in);
    }
    auto loss = [&](Tape& t) {
        AgentNet net(t, kDims);
        Var h = t.zeros(kDims.hidden);
        Var acc = t.zeros(1);
        for (const auto& in : inputs) {
            const auto out = net.step(t.constant(in), h);
            h = out.hidden;
            acc = t.add(acc, t.sum(out.q));
        }
        return acc;
    };
    auto fn = [&] {
        Tape t(static_cast<const ParameterStore&>(store));
        return t.scalar(loss(t));
    };
    store.zero_grads();
    {
        Tape t(store);
        t.backward(loss(t));
    }
    CHECK(finite_diff_check(fn, store, 1e-6, 1e-8) <= 1e-4);
}

TEST_CASE("select_action: greedy argmax with masking and lowest-id ties") {
    Rng rng(1);
    const std::vector<double> q = {1.0, 5.0, 3.0};
    const std::vector<std::uint8_t> all = {1, 1, 1};
    CHECK(select_action(q, all, 0.0, rng) == 1);
    const std::vector<std::uint8_t> masked = {1, 0, 1};
    CHECK(select_action(q, masked, 0.0, rng) == 2);
    const std::vector<double> tied = {2.0, 7.0, 7.0};
    CHECK(select_action(tied, all, 0.0, rng) == 1);
    const std::vector<std::uint8_t> none = {0, 0, 0};
    CHECK_THROWS_AS(select_action(q, none, 0.0, rng), ContractViolation);
}

TEST_CASE("select_action: epsilon=1 is uniform over the available actions") {
    Rng rng(20250810);
    const std::vector<double> q = {9.0, 1.0, 4.0, 2.0};
    const std::vector<std::uint8_t> avail = {1, 1, 0, 1};
    int counts[4] = {0, 0, 0, 0};
    const int n = 30000;
    for (int i = 0; i < n; ++i) ++counts[select_action(q, avail, 1.0, rng)];
    CHECK(counts[2] == 0);
    for (int u : {0, 1, 3}) {
        const double freq = static_cast<double>(counts[u]) / n;
        CHECK(std::abs(freq - 1.0 / 3.0) < 0.01);
    }
}

TEST_CASE("greedy consistency: chosen action attains the masked maximum") {
    Rng rng(2);
    for (int it = 0; it < 200; ++it) {
        std::vector<double> q(5);
        for (double& v : q) v = rng.uniform(-2.0, 2.0);
        std::vector<std::uint8_t> avail(5);
        int n_avail = 0;
        for (auto& a : avail) n_avail += (a = rng.uniform_int(2) ? 1 : 0);
        if (n_avail == 0) avail[0] = 1;
        const int u = select_action(q, avail, 0.0, rng);
        CHECK(avail[u] == 1);
        for (int v = 0; v < 5; ++v)
            if (avail[v]) CHECK(q[u] >= q[v]);
    }
}

TEST_CASE("epsilon schedule anneals linearly then stays flat") {
    ExperimentConfig cfg;
    cfg.epsilon_start = 1.0;
    cfg.epsilon_finish = 0.05;
    cfg.epsilon_anneal_steps = 50000;
    CHECK(cfg.epsilon_at(0) == 1.0);
    CHECK(cfg.epsilon_at(25000) == doctest::Approx(0.525));
    CHECK(cfg.epsilon_at(50000) == doctest::Approx(0.05));
    CHECK(cfg.epsilon_at(500000) == doctest::Approx(0.05));
}
