#include "grid_capture.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace mmdmix {

GridCapture::GridCapture(Params p) : params_(p) {
    if (p.grid_size < 2) throw ConfigError("grid capture: grid_size must be >= 2");
    if (p.episode_limit < 1) throw ConfigError("grid capture: episode_limit must be >= 1");
    if (p.view_radius < 0) throw ConfigError("grid capture: view_radius must be >= 0");
}

int GridCapture::wrap(int v) const {
    const int g = params_.grid_size;
    return ((v % g) + g) % g;
}

int GridCapture::torus_delta(int from, int to) const {
    const int g = params_.grid_size;
    int d = wrap(to - from);
    if (d > g / 2) d -= g;
    return d;
}

int GridCapture::manhattan(Cell a, Cell b) const {
    return std::abs(torus_delta(a.x, b.x)) + std::abs(torus_delta(a.y, b.y));
}

EnvInfo GridCapture::info() const {
    EnvInfo in;
    in.n_agents = 2;
    in.n_actions = kActionCount;
    in.obs_size = 6; // [prey visible, prey dx, prey dy, partner visible, dx, dy]
    in.state_size = 6;
    in.episode_limit = params_.episode_limit;
    return in;
}

EnvStep GridCapture::reset(std::uint64_t seed) {
    rng_ = Rng(seed);
    captured_ = false;
    in_episode_ = true;
    const int g = params_.grid_size;
    auto draw = [&] { return Cell{rng_.uniform_int(g), rng_.uniform_int(g)}; };
    hunters_[0] = draw();
    do hunters_[1] = draw();
    while (hunters_[1].x == hunters_[0].x && hunters_[1].y == hunters_[0].y);
    do prey_ = draw();
    while ((prey_.x == hunters_[0].x && prey_.y == hunters_[0].y) ||
           (prey_.x == hunters_[1].x && prey_.y == hunters_[1].y));
    return snapshot(0.0, false);
}

std::vector<double> GridCapture::observe(int agent) const {
    const double g = static_cast<double>(params_.grid_size);
    std::vector<double> obs(6, 0.0);
    const Cell self = hunters_[agent];
    const Cell other = hunters_[1 - agent];
    auto write = [&](int slot, Cell target) {
        const int dx = torus_delta(self.x, target.x);
        const int dy = torus_delta(self.y, target.y);
        if (std::max(std::abs(dx), std::abs(dy)) <= params_.view_radius) {
            obs[slot] = 1.0;
            obs[slot + 1] = dx / g;
            obs[slot + 2] = dy / g;
        }
    };
    write(0, prey_);
    write(3, other);
    return obs;
}

EnvStep GridCapture::snapshot(double reward, bool terminated) const {
    const double g = static_cast<double>(params_.grid_size);
    EnvStep s;
    s.reward = reward;
    s.terminated = terminated;
    s.state = {hunters_[0].x / g, hunters_[0].y / g, hunters_[1].x / g,
               hunters_[1].y / g, prey_.x / g, prey_.y / g};
    s.obs = {observe(0), observe(1)};
    s.avail.assign(2, std::vector<std::uint8_t>(kActionCount, 1));
    return s;
}

EnvStep GridCapture::step(const std::vector<int>& joint) {
    if (!in_episode_)
        throw ContractViolation("grid capture: step() on a finished episode");
    if (joint.size() != 2)
        throw ContractViolation("grid capture: joint action arity mismatch");
    for (std::size_t a = 0; a < joint.size(); ++a)
        if (joint[a] < 0 || joint[a] >= kActionCount) {
            std::ostringstream os;
            os << "grid capture: agent " << a << " chose unavailable action " << joint[a];
            throw ContractViolation(os.str());
        }

    auto move = [&](Cell c, int action) {
        switch (action) {
        case kUp: c.y = wrap(c.y - 1); break;
        case kDown: c.y = wrap(c.y + 1); break;
        case kLeft: c.x = wrap(c.x - 1); break;
        case kRight: c.x = wrap(c.x + 1); break;
        default: break; // stay / capture
        }
        return c;
    };
    hunters_[0] = move(hunters_[0], joint[0]);
    hunters_[1] = move(hunters_[1], joint[1]);

    const bool both_capture = joint[0] == kCapture && joint[1] == kCapture;
    const bool both_close =
        manhattan(hunters_[0], prey_) <= 1 && manhattan(hunters_[1], prey_) <= 1;
    if (both_capture && both_close) {
        captured_ = true;
        in_episode_ = false;
        return snapshot(10.0, true);
    }

    // prey drifts uniformly at random (stay or one of four moves)
    const int dir = rng_.uniform_int(5);
    prey_ = move(prey_, dir); // kStay..kRight are 0..4
    return snapshot(-0.1, false);
}

bool GridCapture::success() const { return captured_; }

} // namespace mmdmix
