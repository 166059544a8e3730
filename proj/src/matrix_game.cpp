#include "matrix_game.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace mmdmix {

MatrixGame::MatrixGame(std::vector<int> action_counts,
                       std::vector<std::vector<Outcome>> payoff)
    : action_counts_(std::move(action_counts)), payoff_(std::move(payoff)) {
    if (action_counts_.empty())
        throw ConfigError("matrix game: needs at least one agent");
    std::size_t cells = 1;
    for (int c : action_counts_) {
        if (c < 1) throw ConfigError("matrix game: action counts must be >= 1");
        cells *= static_cast<std::size_t>(c);
    }
    if (payoff_.size() != cells) {
        std::ostringstream os;
        os << "matrix game: payoff table has " << payoff_.size() << " cells, expected "
           << cells;
        throw ConfigError(os.str());
    }
    for (std::size_t i = 0; i < payoff_.size(); ++i) {
        double total = 0.0;
        if (payoff_[i].empty())
            throw ConfigError("matrix game: empty outcome list in payoff cell");
        for (const Outcome& o : payoff_[i]) {
            if (o.probability < 0.0)
                throw ConfigError("matrix game: negative outcome probability");
            total += o.probability;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            std::ostringstream os;
            os << "matrix game: outcome probabilities in cell " << i << " sum to " << total;
            throw ConfigError(os.str());
        }
    }
    best_expected_ = -std::numeric_limits<double>::infinity();
    for (const auto& cell : payoff_) {
        double e = 0.0;
        for (const Outcome& o : cell) e += o.probability * o.reward;
        best_expected_ = std::max(best_expected_, e);
    }
}

MatrixGame MatrixGame::deterministic_default() {
    auto det = [](double r) { return std::vector<Outcome>{{1.0, r}}; };
    std::vector<std::vector<Outcome>> payoff = {
        det(8),   det(-12), det(5),
        det(-12), det(0),   det(3),
        det(5),   det(3),   det(6),
    };
    return MatrixGame({3, 3}, std::move(payoff));
}

MatrixGame MatrixGame::stochastic_default() {
    auto det = [](double r) { return std::vector<Outcome>{{1.0, r}}; };
    std::vector<std::vector<Outcome>> payoff = {
        {{0.5, 0.0}, {0.5, 16.0}}, det(-12), det(5),
        det(-12), {{0.5, 6.0}, {0.5, 10.0}}, det(3),
        det(5),   det(3),   det(6),
    };
    return MatrixGame({3, 3}, std::move(payoff));
}

MatrixGame MatrixGame::from_payoff_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open payoff file: " + path);
    std::vector<int> counts;
    std::vector<std::vector<Outcome>> payoff;
    std::vector<bool> seen;
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& what) {
        std::ostringstream os;
        os << path << ":" << lineno << ": " << what;
        throw ConfigError(os.str());
    };
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "actions") {
            if (!counts.empty()) fail("duplicate 'actions' header");
            int c;
            while (ls >> c) counts.push_back(c);
            if (counts.empty()) fail("'actions' header lists no counts");
            std::size_t cells = 1;
            for (int k : counts) {
                if (k < 1) fail("action counts must be >= 1");
                cells *= static_cast<std::size_t>(k);
            }
            payoff.assign(cells, {});
            seen.assign(cells, false);
            continue;
        }
        if (counts.empty()) fail("cell line before 'actions' header");
        std::vector<int> ids(counts.size());
        std::istringstream cs(line);
        for (std::size_t a = 0; a < counts.size(); ++a) {
            if (!(cs >> ids[a])) fail("too few action ids on cell line");
            if (ids[a] < 0 || ids[a] >= counts[a]) fail("action id out of range");
        }
        std::vector<Outcome> outs;
        double p, r;
        while (cs >> p) {
            if (!(cs >> r)) fail("dangling probability without reward");
            outs.push_back({p, r});
        }
        if (outs.empty()) fail("cell line lists no (probability, reward) pairs");
        std::size_t idx = 0;
        for (std::size_t a = 0; a < counts.size(); ++a)
            idx = idx * static_cast<std::size_t>(counts[a]) + static_cast<std::size_t>(ids[a]);
        if (seen[idx]) fail("duplicate cell");
        seen[idx] = true;
        payoff[idx] = std::move(outs);
    }
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (!seen[i]) {
            std::ostringstream os;
            os << path << ": missing payoff cell " << i;
            throw ConfigError(os.str());
        }
    if (counts.empty()) throw ConfigError(path + ": no 'actions' header found");
    return MatrixGame(std::move(counts), std::move(payoff));
}

EnvInfo MatrixGame::info() const {
    EnvInfo in;
    in.n_agents = static_cast<int>(action_counts_.size());
    in.n_actions = *std::max_element(action_counts_.begin(), action_counts_.end());
    in.obs_size = 1;
    in.state_size = 1;
    in.episode_limit = 1;
    return in;
}

EnvStep MatrixGame::make_initial() const {
    EnvStep s;
    s.state = {1.0};
    s.obs.assign(action_counts_.size(), {1.0});
    s.avail.resize(action_counts_.size());
    const int width = info().n_actions;
    for (std::size_t a = 0; a < action_counts_.size(); ++a) {
        s.avail[a].assign(width, 0);
        for (int u = 0; u < action_counts_[a]; ++u) s.avail[a][u] = 1;
    }
    return s;
}

EnvStep MatrixGame::reset(std::uint64_t seed) {
    rng_ = Rng(seed);
    awaiting_action_ = true;
    last_success_ = false;
    return make_initial();
}

std::size_t MatrixGame::cell_index(const std::vector<int>& joint) const {
    if (joint.size() != action_counts_.size())
        throw ContractViolation("matrix game: joint action arity mismatch");
    std::size_t idx = 0;
    for (std::size_t a = 0; a < joint.size(); ++a) {
        if (joint[a] < 0 || joint[a] >= action_counts_[a]) {
            std::ostringstream os;
            os << "matrix game: agent " << a << " chose unavailable action " << joint[a];
            throw ContractViolation(os.str());
        }
        idx = idx * static_cast<std::size_t>(action_counts_[a]) +
              static_cast<std::size_t>(joint[a]);
    }
    return idx;
}

double MatrixGame::expected_payoff(const std::vector<int>& joint) const {
    double e = 0.0;
    for (const Outcome& o : payoff_[cell_index(joint)]) e += o.probability * o.reward;
    return e;
}

EnvStep MatrixGame::step(const std::vector<int>& joint) {
    if (!awaiting_action_)
        throw ContractViolation("matrix game: step() on a finished episode");
    const std::size_t idx = cell_index(joint);
    awaiting_action_ = false;
    last_success_ = std::abs(expected_payoff(joint) - best_expected_) <= 1e-9;

    const double u = rng_.uniform01();
    double acc = 0.0;
    double reward = payoff_[idx].back().reward;
    for (const Outcome& o : payoff_[idx]) {
        acc += o.probability;
        if (u < acc) {
            reward = o.reward;
            break;
        }
    }

    EnvStep s = make_initial();
    s.reward = reward;
    s.terminated = true;
    return s;
}

bool MatrixGame::success() const { return last_success_; }

} // namespace mmdmix
