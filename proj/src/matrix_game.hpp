#pragma once

#include "env.hpp"
#include "rng.hpp"

#include <string>

namespace mmdmix {

struct Outcome {
    double probability = 0.0;
    double reward = 0.0;
};

/// One-shot n-agent matrix game. Every joint-action cell holds a list of
/// (probability, reward) outcomes summing to 1. Observations and the global
/// state are the constant [1]; the episode terminates after exactly one step.
class MatrixGame : public Env {
public:
    MatrixGame(std::vector<int> action_counts,
               std::vector<std::vector<Outcome>> payoff);

    // 2 x 3x3 coordination game: unique optimum 8 at (0,0), -12 on (0,1) and
    // (1,0), a tempting safe corner 6 at (2,2).
    static MatrixGame deterministic_default();

    // Same shape with two equal-mean optimal cells of different spread:
    // (0,0) pays {0, 16} and (1,1) pays {6, 10}, both with mean 8.
    static MatrixGame stochastic_default();

    // Text format: optional '#' comments, one "actions n1 n2 ..." header,
    // then one line per cell: action ids followed by (probability, reward)
    // pairs. Every cell must appear exactly once.
    static MatrixGame from_payoff_file(const std::string& path);

    EnvInfo info() const override;
    EnvStep reset(std::uint64_t seed) override;
    EnvStep step(const std::vector<int>& joint_action) override;
    bool success() const override;

    double expected_payoff(const std::vector<int>& joint_action) const;
    const std::vector<int>& action_counts() const { return action_counts_; }
    std::size_t cell_index(const std::vector<int>& joint_action) const;

private:
    EnvStep make_initial() const;

    std::vector<int> action_counts_;
    std::vector<std::vector<Outcome>> payoff_; // row-major over joint actions
    double best_expected_ = 0.0;
    Rng rng_{0};
    bool awaiting_action_ = false;
    bool last_success_ = false;
};

} // namespace mmdmix
