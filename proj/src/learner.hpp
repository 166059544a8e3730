#pragma once

#include "agents.hpp"
#include "config.hpp"
#include "env.hpp"
#include "mixers.hpp"
#include "rem.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mmdmix {

/// One whole episode, stored with fixed-capacity slots (episode_limit) and a
/// filled-prefix counter so recurrent training can replay full histories.
/// Index `filled` of state/obs/avail holds the post-final snapshot used for
/// bootstrapping.
struct EpisodeRecord {
    int capacity = 0;
    int filled = 0;
    bool terminated = false;
    bool truncated = false;
    std::vector<std::vector<double>> state;                    // capacity + 1
    std::vector<std::vector<std::vector<double>>> obs;         // capacity + 1, per agent
    std::vector<std::vector<std::vector<std::uint8_t>>> avail; // capacity + 1, per agent
    std::vector<std::vector<int>> action;                      // capacity, per agent
    std::vector<double> reward;                                // capacity

    static EpisodeRecord empty(const EnvInfo& info);
};

/// FIFO ring of whole episodes; eviction is strictly oldest-first.
class ReplayBuffer {
public:
    explicit ReplayBuffer(int capacity);
    void insert(EpisodeRecord ep);
    int size() const;
    long long inserted() const { return count_; }
    const EpisodeRecord& at(int i) const;
    /// Uniform sample without replacement; requires batch <= size().
    std::vector<int> sample_indices(int batch, Rng& rng) const;

private:
    std::vector<EpisodeRecord> slots_;
    int capacity_ = 0;
    long long count_ = 0;
};

enum class MixerKind { Vdn, Qmix, MmdMix };

struct NetDims {
    AgentNetDims agent;
    MixerDims mixer;
    MixerKind kind = MixerKind::MmdMix;
    int k_combined = 8; // K
    EnvInfo env;
};

NetDims make_dims(const ExperimentConfig& cfg, const EnvInfo& info);
void init_all_params(ParameterStore& store, const NetDims& dims, Rng& rng);

int masked_argmax(std::span<const double> q, std::span<const std::uint8_t> avail);

EpisodeRecord collect_episode(Env& env, std::uint64_t env_seed,
                              const ParameterStore& store, const NetDims& dims,
                              double epsilon, Rng& explore_rng);

/// Bellman target particles per filled step: r for terminal steps, otherwise
/// r + gamma * Z'_k at the next step, everything evaluated with the target
/// parameters and the shared alpha (raw particles when alpha is null).
/// Nothing here records gradients.
std::vector<std::vector<double>> compute_targets(const EpisodeRecord& ep,
                                                 const ParameterStore& target_store,
                                                 const NetDims& dims,
                                                 const SimplexWeights* alpha,
                                                 double gamma);

/// Scalar TD targets for the VDN / QMIX baselines (next action: per-agent
/// argmax of the target agent networks).
std::vector<double> compute_scalar_targets(const EpisodeRecord& ep,
                                           const ParameterStore& target_store,
                                           const NetDims& dims, double gamma);

/// One gradient update over the batch. MMD-MIX: mean over filled steps of
/// squared MMD between the (combined) online particles and the target
/// particles. Baselines: mean squared TD error of the scalar mixer output.
/// Applies one RMSProp step and returns the loss.
double train_step(std::span<const EpisodeRecord* const> batch, ParameterStore& online,
                  const ParameterStore& target, const ExperimentConfig& cfg,
                  const NetDims& dims, const SimplexWeights* alpha);

/// Copies online values into the target store when counter is a positive
/// multiple of period; returns whether a sync happened.
bool maybe_sync_target(const ParameterStore& online, ParameterStore& target,
                       long long counter, int period);

struct EvalSummary {
    double return_mean = 0.0;
    double return_median = 0.0;
    double success_rate = 0.0;
    int episodes = 0;
};

/// Greedy evaluation episodes (no exploration), online parameters.
EvalSummary evaluate(Env& env, const ParameterStore& store, const NetDims& dims,
                     int episodes, std::uint64_t seed_base);

/// Greedy joint action at the initial step plus the mixer particles for it
/// (or for a forced joint action). VDN reports the scalar sum as a single
/// particle.
struct InitialProbe {
    std::vector<int> greedy_actions;
    std::vector<double> particles;
};
InitialProbe probe_initial(Env& env, std::uint64_t env_seed, const ParameterStore& store,
                           const NetDims& dims, const std::vector<int>* forced = nullptr);

/// Algorithm: collect one episode per iteration, train once the buffer holds
/// a batch, sync the target periodically, evaluate on a fixed env-step grid.
/// Writes manifest.json, metrics.csv and checkpoints under out_dir; bitwise
/// deterministic given (config, seed).
void run_training(const ExperimentConfig& cfg, const std::string& out_dir);

} // namespace mmdmix
