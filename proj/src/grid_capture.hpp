#pragma once

#include "env.hpp"
#include "rng.hpp"

namespace mmdmix {

/// Toroidal grid pursuit: two hunters chase one randomly moving prey.
/// Actions: stay, up, down, left, right, capture. A step in which both
/// hunters are within Manhattan distance 1 of the prey and both choose
/// capture ends the episode with +10; every other step costs -0.1 and the
/// prey then moves uniformly at random. Observations are the relative
/// offsets of prey and partner when within the view radius (Chebyshev).
class GridCapture : public Env {
public:
    struct Params {
        int grid_size = 4;
        int episode_limit = 30;
        int view_radius = 2;
    };

    enum Action { kStay = 0, kUp, kDown, kLeft, kRight, kCapture, kActionCount };

    explicit GridCapture(Params p);

    EnvInfo info() const override;
    EnvStep reset(std::uint64_t seed) override;
    EnvStep step(const std::vector<int>& joint_action) override;
    bool success() const override;

    struct Cell {
        int x = 0, y = 0;
    };
    // Exposed so planners/tests can reason about the layout.
    Cell hunter(int i) const { return hunters_[i]; }
    Cell prey() const { return prey_; }
    int wrap(int v) const;
    int torus_delta(int from, int to) const; // minimal signed displacement
    int manhattan(Cell a, Cell b) const;

private:
    EnvStep snapshot(double reward, bool terminated) const;
    std::vector<double> observe(int agent) const;

    Params params_;
    Cell hunters_[2];
    Cell prey_;
    Rng rng_{0};
    bool captured_ = false;
    bool in_episode_ = false;
};

} // namespace mmdmix
