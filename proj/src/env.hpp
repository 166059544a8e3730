#pragma once

#include <cstdint>
#include <memory>
#include <vector>

namespace mmdmix {

struct EnvStep {
    double reward = 0.0;
    bool terminated = false;
    std::vector<double> state;
    std::vector<std::vector<double>> obs;            // one vector per agent
    std::vector<std::vector<std::uint8_t>> avail;    // per agent, per action
};

struct EnvInfo {
    int n_agents = 0;
    int n_actions = 0;
    int obs_size = 0;
    int state_size = 0;
    int episode_limit = 0;
};

/// Cooperative environment: all agents receive the identical scalar reward.
/// reset() must produce an episode that is fully reproducible from
/// (seed, action sequence). Environments never signal truncation; the
/// collector cuts episodes at info().episode_limit and flags them truncated.
class Env {
public:
    virtual ~Env() = default;
    virtual EnvInfo info() const = 0;
    virtual EnvStep reset(std::uint64_t seed) = 0;
    virtual EnvStep step(const std::vector<int>& joint_action) = 0;
    /// Env-defined success predicate for the episode so far (optimal cell
    /// chosen / prey captured); used for the success-rate metric.
    virtual bool success() const = 0;
};

struct ExperimentConfig;
std::unique_ptr<Env> make_env(const ExperimentConfig& cfg);

} // namespace mmdmix
