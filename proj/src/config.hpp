#pragma once

#include "kernels.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mmdmix {

/// Every knob of a training run. Defaults mirror the standard recurrent
/// value-decomposition setup: N = K = 8 particles, gamma 0.99, RMSProp with
/// lr 5e-4, 64-unit recurrent agents, 32-unit mixing embedding.
struct ExperimentConfig {
    // env.*
    std::string env_name = "matrix_det";   // matrix_det | matrix_stoch | matrix_file | grid
    std::string payoff_file;               // required for matrix_file
    int grid_size = 4;
    int episode_limit = 30;                // grid only; matrix games always run 1 step

    // mixer.*
    std::string mixer_kind = "mmdmix";     // vdn | qmix | mmdmix
    int embed_dim = 32;
    int n_particles = 8;                   // N
    int n_combined = 8;                    // K

    // rem.*
    bool rem_enabled = true;

    // kernel.*
    std::string kernel_kind = "triangle";  // triangle | gaussian
    double kernel_p = 2.0;
    std::vector<double> kernel_bandwidths = {1, 2, 4, 8, 16};

    // agent.* / epsilon.*
    int hidden_dim = 64;
    double epsilon_start = 1.0;
    double epsilon_finish = 0.05;
    long long epsilon_anneal_steps = 50000;

    // train.* / eval.*
    double gamma = 0.99;
    double lr = 0.0005;
    double rmsprop_decay = 0.99;
    double rmsprop_eps = 1e-5;
    int buffer_capacity = 5000;
    int batch_size = 32;
    int target_period = 200;
    long long total_steps = 20000;
    long long eval_interval = 1000;
    int eval_episodes = 32;

    // set by the caller, not a config-file key
    std::uint64_t seed = 0;

    Kernel kernel() const;
    double epsilon_at(long long env_steps) const;

    /// Applies one dotted-key assignment with per-key validation.
    void set(const std::string& key, const std::string& value);
    /// Cross-field invariants (batch <= capacity, payoff file presence, ...).
    void validate() const;

    std::map<std::string, std::string> to_kv() const;
    /// Sorted "key = value" lines; embedded in manifests and checkpoints.
    std::string canonical_text() const;

    static ExperimentConfig from_kv(const std::map<std::string, std::string>& kv);
    static ExperimentConfig from_text(const std::string& text);
};

/// Loads a config file of "key = value" lines ('#' comments allowed), then
/// applies overrides in order; validates everything.
ExperimentConfig parse_config(const std::string& path,
                              const std::vector<std::string>& overrides);

/// Splits "key=value"; throws ConfigError when '=' is missing.
std::pair<std::string, std::string> split_override(const std::string& text);

std::string format_double(double v); // shortest round-trip representation

} // namespace mmdmix
