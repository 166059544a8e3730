#include "learner.hpp"

#include "errors.hpp"
#include "metrics.hpp"
#include "optim.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

namespace mmdmix {

EpisodeRecord EpisodeRecord::empty(const EnvInfo& info) {
    EpisodeRecord ep;
    ep.capacity = info.episode_limit;
    const std::size_t slots = static_cast<std::size_t>(info.episode_limit) + 1;
    ep.state.assign(slots, {});
    ep.obs.assign(slots, std::vector<std::vector<double>>(info.n_agents));
    ep.avail.assign(slots, std::vector<std::vector<std::uint8_t>>(info.n_agents));
    ep.action.assign(slots - 1, std::vector<int>(info.n_agents, 0));
    ep.reward.assign(slots - 1, 0.0);
    return ep;
}

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
    if (capacity < 1) throw ConfigError("replay buffer capacity must be >= 1");
    slots_.reserve(static_cast<std::size_t>(capacity));
}

void ReplayBuffer::insert(EpisodeRecord ep) {
    if (size() < capacity_)
        slots_.push_back(std::move(ep));
    else
        slots_[static_cast<std::size_t>(count_ % capacity_)] = std::move(ep);
    ++count_;
}

int ReplayBuffer::size() const { return static_cast<int>(slots_.size()); }

const EpisodeRecord& ReplayBuffer::at(int i) const {
    if (i < 0 || i >= size()) throw ContractViolation("replay buffer index out of range");
    return slots_[static_cast<std::size_t>(i)];
}

std::vector<int> ReplayBuffer::sample_indices(int batch, Rng& rng) const {
    if (batch > size())
        throw ContractViolation("replay buffer: batch larger than current size");
    std::vector<int> idx(static_cast<std::size_t>(size()));
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < batch; ++i) {
        const int j = i + rng.uniform_int(size() - i);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(batch));
    return idx;
}

NetDims make_dims(const ExperimentConfig& cfg, const EnvInfo& info) {
    NetDims d;
    d.env = info;
    d.agent.obs_size = static_cast<std::uint32_t>(info.obs_size);
    d.agent.n_actions = static_cast<std::uint32_t>(info.n_actions);
    d.agent.n_agents = static_cast<std::uint32_t>(info.n_agents);
    d.agent.hidden = static_cast<std::uint32_t>(cfg.hidden_dim);
    d.kind = cfg.mixer_kind == "vdn"    ? MixerKind::Vdn
             : cfg.mixer_kind == "qmix" ? MixerKind::Qmix
                                        : MixerKind::MmdMix;
    d.mixer.n_agents = static_cast<std::uint32_t>(info.n_agents);
    d.mixer.state_size = static_cast<std::uint32_t>(info.state_size);
    d.mixer.embed = static_cast<std::uint32_t>(cfg.embed_dim);
    d.mixer.n_particles =
        d.kind == MixerKind::Qmix ? 1u : static_cast<std::uint32_t>(cfg.n_particles);
    d.k_combined = cfg.n_combined;
    return d;
}

void init_all_params(ParameterStore& store, const NetDims& dims, Rng& rng) {
    AgentNet::init_params(store, dims.agent, rng);
    if (dims.kind != MixerKind::Vdn) MixingNetwork::init_params(store, dims.mixer, rng);
}

int masked_argmax(std::span<const double> q, std::span<const std::uint8_t> avail) {
    int best = -1;
    for (std::size_t u = 0; u < q.size(); ++u) {
        if (!avail[u]) continue;
        if (best < 0 || q[u] > q[static_cast<std::size_t>(best)]) best = static_cast<int>(u);
    }
    if (best < 0) throw ContractViolation("masked_argmax: no available action");
    return best;
}

EpisodeRecord collect_episode(Env& env, std::uint64_t env_seed,
                              const ParameterStore& store, const NetDims& dims,
                              double epsilon, Rng& explore_rng) {
    const EnvInfo info = env.info();
    EpisodeRecord ep = EpisodeRecord::empty(info);
    EnvStep s = env.reset(env_seed);
    ep.state[0] = s.state;
    ep.obs[0] = s.obs;
    ep.avail[0] = s.avail;

    Tape tape(store);
    AgentNet net(tape, dims.agent);
    std::vector<Var> hidden = init_hidden(tape, dims.agent.n_agents, dims.agent.hidden);
    std::vector<int> last(static_cast<std::size_t>(info.n_agents), -1);

    for (int t = 0; t < info.episode_limit; ++t) {
        std::vector<int> actions(static_cast<std::size_t>(info.n_agents));
        for (int a = 0; a < info.n_agents; ++a) {
            const auto in = AgentNet::make_input(ep.obs[t][a], last[a], a, dims.agent);
            const auto out = net.step(tape.constant(in), hidden[a]);
            hidden[a] = out.hidden;
            actions[static_cast<std::size_t>(a)] =
                select_action(tape.values(out.q), ep.avail[t][a], epsilon, explore_rng);
        }
        const EnvStep r = env.step(actions);
        ep.action[t] = actions;
        ep.reward[t] = r.reward;
        ep.state[t + 1] = r.state;
        ep.obs[t + 1] = r.obs;
        ep.avail[t + 1] = r.avail;
        ep.filled = t + 1;
        last = actions;
        if (r.terminated) {
            ep.terminated = true;
            break;
        }
    }
    if (!ep.terminated && ep.filled == info.episode_limit) ep.truncated = true;
    return ep;
}

namespace {

// Per-agent action values for t = 0..ep.filled inclusive, hidden states
// threaded through the whole prefix.
std::vector<std::vector<std::vector<double>>> unroll_q_values(
    Tape& tape, const EpisodeRecord& ep, const NetDims& dims) {
    AgentNet net(tape, dims.agent);
    std::vector<Var> hidden = init_hidden(tape, dims.agent.n_agents, dims.agent.hidden);
    std::vector<std::vector<std::vector<double>>> qs(static_cast<std::size_t>(ep.filled) + 1);
    for (int t = 0; t <= ep.filled; ++t) {
        qs[t].resize(dims.agent.n_agents);
        for (std::uint32_t a = 0; a < dims.agent.n_agents; ++a) {
            const int last = t > 0 ? ep.action[t - 1][a] : -1;
            const auto in = AgentNet::make_input(ep.obs[t][a], last, static_cast<int>(a),
                                                 dims.agent);
            const auto out = net.step(tape.constant(in), hidden[a]);
            hidden[a] = out.hidden;
            const auto v = tape.values(out.q);
            qs[t][a].assign(v.begin(), v.end());
        }
    }
    return qs;
}

} // namespace

std::vector<std::vector<double>> compute_targets(const EpisodeRecord& ep,
                                                 const ParameterStore& target_store,
                                                 const NetDims& dims,
                                                 const SimplexWeights* alpha,
                                                 double gamma) {
    const std::uint32_t k_eff = alpha ? alpha->rows : dims.mixer.n_particles;
    Tape tape(target_store);
    const auto qs = unroll_q_values(tape, ep, dims);
    MixingNetwork mixer(tape, dims.mixer);

    std::vector<std::vector<double>> targets(static_cast<std::size_t>(ep.filled));
    for (int t = 0; t < ep.filled; ++t) {
        const bool terminal_here = ep.terminated && t == ep.filled - 1;
        if (terminal_here) {
            targets[t].assign(k_eff, ep.reward[t]);
            continue;
        }
        const int nt = t + 1;
        std::vector<Var> chosen;
        chosen.reserve(dims.agent.n_agents);
        for (std::uint32_t a = 0; a < dims.agent.n_agents; ++a) {
            const int u = masked_argmax(qs[nt][a], ep.avail[nt][a]);
            chosen.push_back(tape.constant({qs[nt][a][static_cast<std::size_t>(u)]}));
        }
        const Var particles = mixer.mix(chosen, tape.constant(ep.state[nt]));
        std::vector<double> comb;
        if (alpha) {
            comb = rem_combine(tape.values(particles), *alpha);
        } else {
            const auto v = tape.values(particles);
            comb.assign(v.begin(), v.end());
        }
        targets[t].resize(k_eff);
        for (std::uint32_t k = 0; k < k_eff; ++k)
            targets[t][k] = ep.reward[t] + gamma * comb[k];
    }
    return targets;
}

std::vector<double> compute_scalar_targets(const EpisodeRecord& ep,
                                           const ParameterStore& target_store,
                                           const NetDims& dims, double gamma) {
    Tape tape(target_store);
    const auto qs = unroll_q_values(tape, ep, dims);
    std::optional<MixingNetwork> mixer;
    if (dims.kind == MixerKind::Qmix) mixer.emplace(tape, dims.mixer);

    std::vector<double> targets(static_cast<std::size_t>(ep.filled));
    for (int t = 0; t < ep.filled; ++t) {
        const bool terminal_here = ep.terminated && t == ep.filled - 1;
        if (terminal_here) {
            targets[t] = ep.reward[t];
            continue;
        }
        const int nt = t + 1;
        double next_value = 0.0;
        if (dims.kind == MixerKind::Vdn) {
            for (std::uint32_t a = 0; a < dims.agent.n_agents; ++a) {
                const int u = masked_argmax(qs[nt][a], ep.avail[nt][a]);
                next_value += qs[nt][a][static_cast<std::size_t>(u)];
            }
        } else {
            std::vector<Var> chosen;
            for (std::uint32_t a = 0; a < dims.agent.n_agents; ++a) {
                const int u = masked_argmax(qs[nt][a], ep.avail[nt][a]);
                chosen.push_back(tape.constant({qs[nt][a][static_cast<std::size_t>(u)]}));
            }
            next_value = tape.scalar(mixer->mix(chosen, tape.constant(ep.state[nt])));
        }
        targets[t] = ep.reward[t] + gamma * next_value;
    }
    return targets;
}

double train_step(std::span<const EpisodeRecord* const> batch, ParameterStore& online,
                  const ParameterStore& target, const ExperimentConfig& cfg,
                  const NetDims& dims, const SimplexWeights* alpha) {
    if (batch.empty()) throw ContractViolation("train_step: empty batch");
    const Kernel kern = cfg.kernel();

    std::vector<std::vector<std::vector<double>>> particle_targets;
    std::vector<std::vector<double>> scalar_targets;
    if (dims.kind == MixerKind::MmdMix) {
        particle_targets.reserve(batch.size());
        for (const EpisodeRecord* ep : batch)
            particle_targets.push_back(compute_targets(*ep, target, dims, alpha, cfg.gamma));
    } else {
        scalar_targets.reserve(batch.size());
        for (const EpisodeRecord* ep : batch)
            scalar_targets.push_back(compute_scalar_targets(*ep, target, dims, cfg.gamma));
    }

    online.zero_grads();
    Tape tape(online);
    AgentNet net(tape, dims.agent);
    std::optional<MixingNetwork> mixer;
    if (dims.kind != MixerKind::Vdn) mixer.emplace(tape, dims.mixer);

    std::vector<Var> terms;
    long long total_filled = 0;
    double reward_lo = 0.0, reward_hi = 0.0;
    for (std::size_t e = 0; e < batch.size(); ++e) {
        const EpisodeRecord& ep = *batch[e];
        std::vector<Var> hidden = init_hidden(tape, dims.agent.n_agents, dims.agent.hidden);
        for (int t = 0; t < ep.filled; ++t) {
            std::vector<Var> chosen;
            chosen.reserve(dims.agent.n_agents);
            for (std::uint32_t a = 0; a < dims.agent.n_agents; ++a) {
                const int last = t > 0 ? ep.action[t - 1][a] : -1;
                const auto in = AgentNet::make_input(ep.obs[t][a], last,
                                                     static_cast<int>(a), dims.agent);
                const auto out = net.step(tape.constant(in), hidden[a]);
                hidden[a] = out.hidden;
                chosen.push_back(
                    tape.slice(out.q, static_cast<std::uint32_t>(ep.action[t][a]), 1));
            }
            if (dims.kind == MixerKind::MmdMix) {
                Var particles = mixer->mix(chosen, tape.constant(ep.state[t]));
                Var combined = alpha ? rem_combine(tape, particles, *alpha) : particles;
                terms.push_back(tape.squared_mmd_to(combined, particle_targets[e][t], kern));
            } else {
                Var qjt = dims.kind == MixerKind::Vdn
                              ? vdn_mix(tape, chosen)
                              : mixer->mix(chosen, tape.constant(ep.state[t]));
                Var d = tape.sub(qjt, tape.scalar_const(scalar_targets[e][t]));
                terms.push_back(tape.mul(d, d));
            }
            reward_lo = std::min(reward_lo, ep.reward[t]);
            reward_hi = std::max(reward_hi, ep.reward[t]);
        }
        total_filled += ep.filled;
    }
    if (total_filled == 0) throw ContractViolation("train_step: batch has no filled steps");

    const Var total =
        tape.scale(tape.sum(tape.concat(terms)), 1.0 / static_cast<double>(total_filled));
    const double loss = tape.scalar(total);
    if (!std::isfinite(loss)) {
        std::ostringstream os;
        os << "train_step: non-finite loss (entries=" << batch.size()
           << ", filled_steps=" << total_filled << ", reward_range=[" << reward_lo << ", "
           << reward_hi << "])";
        throw ContractViolation(os.str());
    }
    tape.backward(total);
    rmsprop_update(online, cfg.lr, cfg.rmsprop_decay, cfg.rmsprop_eps);
    return loss;
}

bool maybe_sync_target(const ParameterStore& online, ParameterStore& target,
                       long long counter, int period) {
    if (period < 1) throw ConfigError("target period must be >= 1");
    if (counter <= 0 || counter % period != 0) return false;
    target.copy_values_from(online);
    return true;
}

EvalSummary evaluate(Env& env, const ParameterStore& store, const NetDims& dims,
                     int episodes, std::uint64_t seed_base) {
    if (episodes < 1) throw ContractViolation("evaluate: episodes must be >= 1");
    std::vector<double> returns;
    returns.reserve(static_cast<std::size_t>(episodes));
    int successes = 0;
    Rng greedy_rng(derive_seed(seed_base, 6));
    for (int i = 0; i < episodes; ++i) {
        const EpisodeRecord ep = collect_episode(env, derive_seed(seed_base, 7, i), store,
                                                 dims, 0.0, greedy_rng);
        double ret = 0.0;
        for (int t = 0; t < ep.filled; ++t) ret += ep.reward[t];
        returns.push_back(ret);
        if (env.success()) ++successes;
    }
    std::sort(returns.begin(), returns.end());
    EvalSummary es;
    es.episodes = episodes;
    es.return_mean =
        std::accumulate(returns.begin(), returns.end(), 0.0) / returns.size();
    const std::size_t n = returns.size();
    es.return_median =
        n % 2 ? returns[n / 2] : 0.5 * (returns[n / 2 - 1] + returns[n / 2]);
    es.success_rate = static_cast<double>(successes) / static_cast<double>(episodes);
    return es;
}

InitialProbe probe_initial(Env& env, std::uint64_t env_seed, const ParameterStore& store,
                           const NetDims& dims, const std::vector<int>* forced) {
    const EnvStep s = env.reset(env_seed);
    Tape tape(store);
    AgentNet net(tape, dims.agent);
    std::vector<Var> hidden = init_hidden(tape, dims.agent.n_agents, dims.agent.hidden);
    InitialProbe probe;
    probe.greedy_actions.resize(dims.agent.n_agents);
    std::vector<Var> chosen;
    for (std::uint32_t a = 0; a < dims.agent.n_agents; ++a) {
        const auto in = AgentNet::make_input(s.obs[a], -1, static_cast<int>(a), dims.agent);
        const auto out = net.step(tape.constant(in), hidden[a]);
        probe.greedy_actions[a] = masked_argmax(tape.values(out.q), s.avail[a]);
        const int u = forced ? (*forced)[a] : probe.greedy_actions[a];
        chosen.push_back(tape.slice(out.q, static_cast<std::uint32_t>(u), 1));
    }
    if (dims.kind == MixerKind::Vdn) {
        probe.particles = {tape.scalar(vdn_mix(tape, chosen))};
    } else {
        MixingNetwork mixer(tape, dims.mixer);
        const auto v = tape.values(mixer.mix(chosen, tape.constant(s.state)));
        probe.particles.assign(v.begin(), v.end());
    }
    return probe;
}

void run_training(const ExperimentConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    std::filesystem::create_directories(out_dir);
    auto env = make_env(cfg);
    const EnvInfo info = env->info();
    const NetDims dims = make_dims(cfg, info);

    Rng init_rng(derive_seed(cfg.seed, 0));
    ParameterStore online;
    init_all_params(online, dims, init_rng);
    ParameterStore target = online;

    const std::string started = utc_timestamp_now();
    write_manifest(out_dir, cfg, started, "");
    MetricsWriter csv(out_dir + "/metrics.csv");

    Rng explore_rng(derive_seed(cfg.seed, 2));
    Rng alpha_rng(derive_seed(cfg.seed, 3));
    Rng sample_rng(derive_seed(cfg.seed, 4));
    ReplayBuffer buffer(cfg.buffer_capacity);

    long long env_steps = 0, episodes = 0, next_eval = cfg.eval_interval;
    long long eval_idx = 0, loss_n = 0;
    double loss_sum = 0.0;

    const auto eval_row = [&](long long checkpoint_steps) {
        const EvalSummary es = evaluate(*env, online, dims, cfg.eval_episodes,
                                        derive_seed(cfg.seed, 5, eval_idx));
        ++eval_idx;
        MetricsRow row;
        row.env_steps = checkpoint_steps;
        row.episodes = episodes;
        row.train_loss = loss_n ? loss_sum / static_cast<double>(loss_n) : 0.0;
        row.eval_return_mean = es.return_mean;
        row.eval_return_median = es.return_median;
        row.eval_success_rate = es.success_rate;
        row.epsilon = cfg.epsilon_at(env_steps);
        csv.append(row);
        loss_sum = 0.0;
        loss_n = 0;
        save_checkpoint(online, out_dir + "/checkpoint_latest.bin", cfg.canonical_text());
    };

    if (cfg.total_steps > 0) eval_row(0);
    while (env_steps < cfg.total_steps) {
        const double eps = cfg.epsilon_at(env_steps);
        EpisodeRecord ep = collect_episode(*env, derive_seed(cfg.seed, 1, episodes), online,
                                           dims, eps, explore_rng);
        env_steps += ep.filled;
        ++episodes;
        buffer.insert(std::move(ep));

        if (buffer.size() >= cfg.batch_size) {
            SimplexWeights alpha;
            const SimplexWeights* ap = nullptr;
            if (dims.kind == MixerKind::MmdMix && cfg.rem_enabled) {
                alpha = sample_simplex(dims.mixer.n_particles,
                                       static_cast<std::uint32_t>(cfg.n_combined), alpha_rng);
                ap = &alpha;
            }
            const auto idx = buffer.sample_indices(cfg.batch_size, sample_rng);
            std::vector<const EpisodeRecord*> batch;
            batch.reserve(idx.size());
            for (int i : idx) batch.push_back(&buffer.at(i));
            loss_sum += train_step(batch, online, target, cfg, dims, ap);
            ++loss_n;
        }
        maybe_sync_target(online, target, episodes, cfg.target_period);

        while (next_eval <= env_steps && next_eval <= cfg.total_steps) {
            eval_row(next_eval);
            next_eval += cfg.eval_interval;
        }
    }
    save_checkpoint(online, out_dir + "/checkpoint_final.bin", cfg.canonical_text());
    write_manifest(out_dir, cfg, started, utc_timestamp_now());
}

} // namespace mmdmix
