// Acceptance suite: ten criteria, each a doctest case (filterable as c01..c10)
// that prints one PASS/FAIL line. Learning criteria train real runs into
// acceptance_runs/ under the working directory.

#include <doctest.h>

#include "agents.hpp"
#include "config.hpp"
#include "kernels.hpp"
#include "learner.hpp"
#include "matrix_game.hpp"
#include "metrics.hpp"
#include "mixers.hpp"
#include "optim.hpp"
#include "rem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

using namespace mmdmix;
namespace fs = std::filesystem;

namespace {

void verdict(const char* crit, bool ok, const std::string& detail) {
    std::printf("ACCEPTANCE %s: %s (%s)\n", crit, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
}

std::vector<double> random_set(Rng& rng, int max_len, double lo = -3.0, double hi = 3.0) {
    std::vector<double> v(static_cast<std::size_t>(1 + rng.uniform_int(max_len)));
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sd_of(std::span<const double> v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is);
    return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

// ---- shared helpers for the learning criteria -----------------------------

ExperimentConfig matrix_learning_config() {
    ExperimentConfig cfg; // defaults: N = K = 8, gamma 0.99, lr 5e-4, hidden 64
    cfg.env_name = "matrix_det";
    cfg.mixer_kind = "mmdmix";
    cfg.rem_enabled = true;
    cfg.kernel_kind = "triangle";
    cfg.kernel_p = 2.0;
    cfg.total_steps = 20000;
    cfg.eval_interval = 2000;
    cfg.eval_episodes = 4;
    return cfg;
}

struct TrainedRun {
    fs::path dir;
    ParameterStore store;
    ExperimentConfig cfg;
};

TrainedRun train_into(const ExperimentConfig& cfg, const std::string& name,
                      std::uint64_t seed) {
    TrainedRun run;
    run.cfg = cfg;
    run.cfg.seed = seed;
    run.dir = fs::path("acceptance_runs") / name;
    fs::remove_all(run.dir);
    run_training(run.cfg, run.dir.string());
    load_checkpoint(run.store, (run.dir / "checkpoint_final.bin").string());
    return run;
}

std::vector<int> enumerate_matrix_optimum(const MatrixGame& game) {
    std::vector<int> best;
    double best_value = -1e300;
    for (int u1 = 0; u1 < 3; ++u1)
        for (int u2 = 0; u2 < 3; ++u2) {
            const double e = game.expected_payoff({u1, u2});
            if (e > best_value) {
                best_value = e;
                best = {u1, u2};
            }
        }
    return best;
}

// Mean / sd of REM-combined particle sets, averaged over resampled weights.
struct CombinedStats {
    double mean = 0.0;
    double sd = 0.0;
};

CombinedStats combined_stats(const std::vector<double>& particles, int k, int draws,
                             std::uint64_t seed) {
    Rng rng(seed);
    CombinedStats st;
    for (int d = 0; d < draws; ++d) {
        const auto alpha =
            sample_simplex(static_cast<std::uint32_t>(particles.size()),
                           static_cast<std::uint32_t>(k), rng);
        const auto comb = rem_combine(particles, alpha);
        st.mean += mean_of(comb);
        st.sd += sd_of(comb);
    }
    st.mean /= draws;
    st.sd /= draws;
    return st;
}

} // namespace

TEST_CASE("c01 mmd mean-matching identity") {
    Rng rng(101);
    const Kernel tri = Kernel::triangle(2.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto x = random_set(rng, 16);
        const auto y = random_set(rng, 16);
        const double lhs = squared_mmd(x, y, tri);
        const double rhs = 2.0 * std::pow(mean_of(x) - mean_of(y), 2.0);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    const bool ok = worst <= 1e-9;
    verdict("c01 mmd-mean-matching-identity", ok,
            "1000 pairs, worst |mmd - 2*dmean^2| = " + format_double(worst));
    REQUIRE(ok);
}

TEST_CASE("c02 mmd basics: self-distance, symmetry, nonnegativity, scale law") {
    Rng rng(102);
    const Kernel tri = Kernel::triangle(2.0);
    const Kernel g = Kernel::gaussian({1, 2, 4, 8, 16});
    double worst_self = 0.0, worst_gauss = 0.0, worst_scale = 0.0;
    bool symmetric = true;
    for (int i = 0; i < 1000; ++i) {
        const auto x = random_set(rng, 12);
        const auto y = random_set(rng, 12);
        worst_self = std::max({worst_self, std::abs(squared_mmd(x, x, tri)),
                               std::abs(squared_mmd(x, x, g))});
        symmetric = symmetric && squared_mmd(x, y, tri) == squared_mmd(y, x, tri) &&
                    squared_mmd(x, y, g) == squared_mmd(y, x, g);
        worst_gauss = std::min(worst_gauss, squared_mmd(x, y, g));
        const double c = rng.uniform(0.25, 2.0);
        auto cx = x, cy = y;
        for (double& v : cx) v *= c;
        for (double& v : cy) v *= c;
        worst_scale = std::max(worst_scale, std::abs(squared_mmd(cx, cy, tri) -
                                                     c * c * squared_mmd(x, y, tri)));
    }
    const bool ok =
        worst_self <= 1e-12 && symmetric && worst_gauss >= -1e-12 && worst_scale <= 1e-9;
    verdict("c02 mmd-basics", ok,
            "self<=" + format_double(worst_self) + ", symmetric=" +
                (symmetric ? "exact" : "VIOLATED") + ", gaussian_min=" +
                format_double(worst_gauss) + ", scale_err=" + format_double(worst_scale));
    REQUIRE(ok);
}

TEST_CASE("c03 gradient correctness against central finite differences") {
    double worst_kernel = 0.0;
    { // kernels: analytic gradient vs h = 1e-6 central differences
        Rng rng(103);
        const Kernel tri = Kernel::triangle(2.0);
        const Kernel g = Kernel::gaussian({1, 2, 4, 8, 16});
        const double h = 1e-6;
        for (int it = 0; it < 60; ++it) {
            auto x = random_set(rng, 8);
            const auto y = random_set(rng, 8);
            for (const Kernel& k : {tri, g}) {
                std::vector<double> grad(x.size());
                squared_mmd_grad(x, y, k, grad);
                for (std::size_t i = 0; i < x.size(); ++i) {
                    const double saved = x[i];
                    x[i] = saved + h;
                    const double fp = squared_mmd(x, y, k);
                    x[i] = saved - h;
                    const double fm = squared_mmd(x, y, k);
                    x[i] = saved;
                    const double numeric = (fp - fm) / (2.0 * h);
                    const double diff = std::abs(numeric - grad[i]);
                    if (diff <= 1e-10) continue;
                    worst_kernel = std::max(
                        worst_kernel, diff / std::max(std::abs(numeric), std::abs(grad[i])));
                }
            }
        }
    }

    double worst_agent = 0.0;
    { // recurrent agent network over a 3-step unroll
        const AgentNetDims dims{5, 4, 2, 24};
        ParameterStore store;
        Rng rng(104);
        AgentNet::init_params(store, dims, rng);
        std::vector<std::vector<double>> inputs;
        Rng xr(105);
        for (int t = 0; t < 3; ++t) {
            std::vector<double> in(dims.input_size());
            for (double& v : in) v = xr.uniform(-1.0, 1.0);
            inputs.push_back(in);
        }
        auto loss = [&](Tape& t) {
            AgentNet net(t, dims);
            Var h = t.zeros(dims.hidden);
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
        worst_agent = finite_diff_check(fn, store, 1e-6, 1e-8);
    }

    double worst_full = 0.0;
    { // full loss: 2 agents, 2 steps, batch 2, REM enabled, every parameter
        NetDims dims;
        dims.agent = AgentNetDims{3, 3, 2, 24};
        dims.mixer = MixerDims{2, 4, 8, 4};
        dims.kind = MixerKind::MmdMix;
        dims.k_combined = 4;
        dims.env = EnvInfo{2, 3, 3, 4, 2};
        ParameterStore online, target;
        {
            Rng rng(106);
            init_all_params(online, dims, rng);
            Rng trng(107);
            init_all_params(target, dims, trng);
        }
        Rng drng(108);
        std::vector<EpisodeRecord> eps;
        for (int e = 0; e < 2; ++e) {
            EpisodeRecord ep = EpisodeRecord::empty(dims.env);
            for (int t = 0; t <= 2; ++t) {
                ep.state[t].resize(4);
                for (double& v : ep.state[t]) v = drng.uniform(-1.0, 1.0);
                for (int a = 0; a < 2; ++a) {
                    ep.obs[t][a].resize(3);
                    for (double& v : ep.obs[t][a]) v = drng.uniform(-1.0, 1.0);
                    ep.avail[t][a].assign(3, 1);
                }
            }
            for (int t = 0; t < 2; ++t) {
                for (int a = 0; a < 2; ++a) ep.action[t][a] = drng.uniform_int(3);
                ep.reward[t] = drng.uniform(-1.0, 1.0);
            }
            ep.filled = 2;
            ep.terminated = e == 0;
            ep.truncated = e != 0;
            eps.push_back(std::move(ep));
        }
        Rng arng(109);
        const SimplexWeights alpha = sample_simplex(4, 4, arng);
        const Kernel kern = Kernel::triangle(2.0);
        const double gamma = 0.99;
        std::vector<std::vector<std::vector<double>>> targets;
        for (const auto& ep : eps)
            targets.push_back(compute_targets(ep, target, dims, &alpha, gamma));

        const auto build = [&](Tape& t) {
            AgentNet net(t, dims.agent);
            MixingNetwork mixer(t, dims.mixer);
            std::vector<Var> terms;
            for (std::size_t e = 0; e < eps.size(); ++e) {
                const auto& ep = eps[e];
                std::vector<Var> hidden = init_hidden(t, 2, dims.agent.hidden);
                for (int st = 0; st < ep.filled; ++st) {
                    std::vector<Var> chosen;
                    for (int a = 0; a < 2; ++a) {
                        const int last = st > 0 ? ep.action[st - 1][a] : -1;
                        const auto in =
                            AgentNet::make_input(ep.obs[st][a], last, a, dims.agent);
                        const auto out = net.step(t.constant(in), hidden[a]);
                        hidden[a] = out.hidden;
                        chosen.push_back(
                            t.slice(out.q, static_cast<std::uint32_t>(ep.action[st][a]), 1));
                    }
                    Var particles = mixer.mix(chosen, t.constant(ep.state[st]));
                    Var combined = rem_combine(t, particles, alpha);
                    terms.push_back(t.squared_mmd_to(combined, targets[e][st], kern));
                }
            }
            return t.scale(t.sum(t.concat(terms)), 0.25);
        };
        auto fn = [&] {
            Tape t(static_cast<const ParameterStore&>(online));
            return t.scalar(build(t));
        };
        online.zero_grads();
        {
            Tape t(online);
            t.backward(build(t));
        }
        worst_full = finite_diff_check(fn, online, 1e-6, 1e-8);
    }

    const bool ok = worst_kernel <= 1e-6 && worst_agent <= 1e-4 && worst_full <= 1e-4;
    verdict("c03 gradient-correctness", ok,
            "kernels=" + format_double(worst_kernel) + ", agent=" +
                format_double(worst_agent) + ", full_loss=" + format_double(worst_full));
    REQUIRE(ok);
}

TEST_CASE("c04 monotonicity of raw and combined particles") {
    Rng rng(110);
    double worst = 0.0;
    for (int it = 0; it < 100; ++it) {
        const MixerDims dims{2, 4, 32, 8};
        ParameterStore store;
        Rng prng(5000 + static_cast<std::uint64_t>(it));
        MixingNetwork::init_params(store, dims, prng);
        std::vector<double> state(4), q(2);
        for (double& v : state) v = rng.uniform(-1.0, 1.0);
        for (double& v : q) v = rng.uniform(-1.0, 1.0);
        Rng arng(6000 + static_cast<std::uint64_t>(it));
        const SimplexWeights alpha = sample_simplex(8, 8, arng);

        auto eval = [&](const std::vector<double>& qv) {
            Tape t(static_cast<const ParameterStore&>(store));
            MixingNetwork mixer(t, dims);
            std::vector<Var> qs;
            for (double v : qv) qs.push_back(t.constant({v}));
            const auto p = t.values(mixer.mix(qs, t.constant(state)));
            return std::vector<double>(p.begin(), p.end());
        };
        const auto base = eval(q);
        const auto base_comb = rem_combine(base, alpha);
        for (std::size_t a = 0; a < q.size(); ++a) {
            auto bumped = q;
            bumped[a] += 0.1;
            const auto up = eval(bumped);
            const auto up_comb = rem_combine(up, alpha);
            for (std::size_t i = 0; i < up.size(); ++i)
                worst = std::min(worst, up[i] - base[i]);
            for (std::size_t k = 0; k < up_comb.size(); ++k)
                worst = std::min(worst, up_comb[k] - base_comb[k]);
        }
    }
    const bool ok = worst >= -1e-9;
    verdict("c04 monotonicity", ok,
            "100 draws, worst particle delta under +0.1 = " + format_double(worst));
    REQUIRE(ok);
}

TEST_CASE("c05 igm argmax consistency by exhaustive enumeration") {
    Rng rng(111);
    int agree = 0;
    const int trials = 100;
    for (int it = 0; it < trials; ++it) {
        const MixerDims dims{2, 4, 32, 8};
        ParameterStore store;
        Rng prng(7000 + static_cast<std::uint64_t>(it));
        MixingNetwork::init_params(store, dims, prng);
        std::vector<double> state(4);
        for (double& v : state) v = rng.uniform(-1.0, 1.0);
        double qtab[2][3];
        for (auto& row : qtab)
            for (double& v : row) v = rng.uniform(-1.0, 1.0);

        int bu1 = -1, bu2 = -1;
        double best = -1e300;
        for (int u1 = 0; u1 < 3; ++u1)
            for (int u2 = 0; u2 < 3; ++u2) {
                Tape t(static_cast<const ParameterStore&>(store));
                MixingNetwork mixer(t, dims);
                std::vector<Var> qs = {t.constant({qtab[0][u1]}),
                                       t.constant({qtab[1][u2]})};
                const auto p = t.values(mixer.mix(qs, t.constant(state)));
                const double m = mean_of(p);
                if (m > best) {
                    best = m;
                    bu1 = u1;
                    bu2 = u2;
                }
            }
        auto amax = [&](int a) {
            return static_cast<int>(std::max_element(qtab[a], qtab[a] + 3) - qtab[a]);
        };
        if (bu1 == amax(0) && bu2 == amax(1)) ++agree;
    }
    const bool ok = agree == trials;
    verdict("c05 igm-argmax-consistency", ok,
            std::to_string(agree) + "/" + std::to_string(trials) + " agreements");
    REQUIRE(ok);
}

TEST_CASE("c06 rem properties: convexity, selection, uniform mean, simplex rows") {
    bool convex = true, onehot_ok = true, uniform_ok = true, rows_ok = true;
    { // simplex rows over 1e4 draws
        Rng rng(112);
        for (int it = 0; it < 10000 && rows_ok; ++it) {
            const auto s = sample_simplex(8, 1, rng);
            double total = 0.0;
            for (double w : s.row(0)) {
                rows_ok = rows_ok && w >= 0.0;
                total += w;
            }
            rows_ok = rows_ok && std::abs(total - 1.0) <= 1e-12;
        }
    }
    { // convexity bounds on random draws
        Rng rng(113);
        for (int it = 0; it < 5000 && convex; ++it) {
            std::vector<double> particles(8);
            for (double& p : particles) p = rng.uniform(-5.0, 5.0);
            const auto alpha = sample_simplex(8, 8, rng);
            const auto out = rem_combine(particles, alpha);
            const double lo = *std::min_element(particles.begin(), particles.end());
            const double hi = *std::max_element(particles.begin(), particles.end());
            for (double v : out) convex = convex && v >= lo && v <= hi;
        }
    }
    { // one-hot selection is exact
        SimplexWeights onehot{3, 4, {0, 0, 1, 0, 1, 0, 0, 0, 0, 0, 0, 1}};
        const std::vector<double> particles = {2.5, -1.0, 7.0, 0.25};
        onehot_ok = rem_combine(particles, onehot) == std::vector<double>{7.0, 2.5, 0.25};
    }
    { // uniform weights give the arithmetic mean
        SimplexWeights uniform{1, 4, {0.25, 0.25, 0.25, 0.25}};
        const std::vector<double> particles = {1.0, 2.0, 3.0, 4.0};
        uniform_ok = std::abs(rem_combine(particles, uniform)[0] - 2.5) <= 1e-12;
    }
    const bool ok = convex && onehot_ok && uniform_ok && rows_ok;
    verdict("c06 rem-properties", ok,
            std::string("convexity=") + (convex ? "ok" : "FAIL") + ", onehot=" +
                (onehot_ok ? "exact" : "FAIL") + ", uniform=" +
                (uniform_ok ? "ok" : "FAIL") + ", rows=" + (rows_ok ? "ok" : "FAIL"));
    REQUIRE(ok);
}

TEST_CASE("c07 learning the deterministic coordination game") {
    const MatrixGame game = MatrixGame::deterministic_default();
    const std::vector<int> optimum = enumerate_matrix_optimum(game);

    int mmd_hits = 0, vdn_hits = 0;
    std::string per_seed;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ExperimentConfig cfg = matrix_learning_config();
        const TrainedRun run =
            train_into(cfg, "c07_mmd_seed" + std::to_string(seed), seed);
        auto env = make_env(run.cfg);
        const NetDims dims = make_dims(run.cfg, env->info());
        const InitialProbe probe = probe_initial(*env, 1, run.store, dims);
        const bool hit = probe.greedy_actions == optimum;
        mmd_hits += hit ? 1 : 0;
        per_seed += (hit ? "+" : "-");
    }
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ExperimentConfig cfg = matrix_learning_config();
        cfg.mixer_kind = "vdn";
        const TrainedRun run =
            train_into(cfg, "c07_vdn_seed" + std::to_string(seed), seed);
        auto env = make_env(run.cfg);
        const NetDims dims = make_dims(run.cfg, env->info());
        const InitialProbe probe = probe_initial(*env, 1, run.store, dims);
        vdn_hits += probe.greedy_actions == optimum ? 1 : 0;
    }

    const bool ok = mmd_hits >= 4;
    verdict("c07 learning-deterministic-game", ok,
            "mmdmix+rem " + std::to_string(mmd_hits) + "/5 seeds [" + per_seed +
                "] reached the enumerated optimum within 20000 env steps; vdn baseline " +
                std::to_string(vdn_hits) + "/5 under the identical harness");
    REQUIRE(ok);
}

TEST_CASE("c08 distributional fit on the stochastic game") {
    const MatrixGame game = MatrixGame::stochastic_default();
    const double expected = 8.0; // both optimal cells
    const std::vector<int> high_var_cell = {0, 0}; // outcomes {0, 16}, sd 8
    const std::vector<int> low_var_cell = {1, 1};  // outcomes {6, 10}, sd 2

    int good_seeds = 0;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ExperimentConfig cfg = matrix_learning_config();
        cfg.env_name = "matrix_stoch";
        cfg.kernel_kind = "gaussian";
        cfg.kernel_bandwidths = {1, 2, 4, 8, 16, 32, 64, 128, 256, 512};
        const TrainedRun run =
            train_into(cfg, "c08_seed" + std::to_string(seed), seed);
        auto env = make_env(run.cfg);
        const NetDims dims = make_dims(run.cfg, env->info());

        const InitialProbe greedy = probe_initial(*env, 1, run.store, dims);
        const bool greedy_optimal =
            greedy.greedy_actions == high_var_cell || greedy.greedy_actions == low_var_cell;

        const CombinedStats gstats = combined_stats(greedy.particles, 8, 200, 700 + seed);
        const bool mean_ok = std::abs(gstats.mean - expected) <= 0.05 * expected;

        const InitialProbe hi =
            probe_initial(*env, 1, run.store, dims, &high_var_cell);
        const InitialProbe lo = probe_initial(*env, 1, run.store, dims, &low_var_cell);
        const CombinedStats hi_stats = combined_stats(hi.particles, 8, 200, 800 + seed);
        const CombinedStats lo_stats = combined_stats(lo.particles, 8, 200, 900 + seed);
        const bool rank_ok = hi_stats.sd > lo_stats.sd;

        const bool good = greedy_optimal && mean_ok && rank_ok;
        good_seeds += good ? 1 : 0;
        detail += "[seed " + std::to_string(seed) + ": greedy=" +
                  (greedy_optimal ? "opt" : "SUBOPT") + " mean=" +
                  format_double(gstats.mean) + " sd(0,0)=" + format_double(hi_stats.sd) +
                  " sd(1,1)=" + format_double(lo_stats.sd) + "]";
    }
    const bool ok = good_seeds >= 4;
    verdict("c08 distributional-fit-stochastic-game", ok,
            std::to_string(good_seeds) + "/5 seeds " + detail);
    REQUIRE(ok);
}

TEST_CASE("c09 training-loop mechanics") {
    bool sync_ok = true, leak_ok = true, mask_ok = true, csv_ok = true;

    { // target sync bitwise + isolation
        ExperimentConfig cfg = matrix_learning_config();
        auto env = make_env(cfg);
        const NetDims dims = make_dims(cfg, env->info());
        ParameterStore online, target;
        Rng a(1), b(2);
        init_all_params(online, dims, a);
        init_all_params(target, dims, b);
        maybe_sync_target(online, target, 200, 200);
        for (const auto& [name, e] : online)
            sync_ok = sync_ok && target.entry(name).value.data == e.value.data;
        online.grad("agent.fc1.w")[0] = 1.0;
        rmsprop_update(online, 0.01, 0.99, 1e-5);
        sync_ok = sync_ok && target.entry("agent.fc1.w").value.data[0] !=
                                 online.entry("agent.fc1.w").value.data[0];
    }

    { // no gradients through targets
        ExperimentConfig cfg = matrix_learning_config();
        auto env = make_env(cfg);
        const NetDims dims = make_dims(cfg, env->info());
        ParameterStore store;
        Rng rng(3);
        init_all_params(store, dims, rng);
        Rng explore(4);
        const EpisodeRecord ep = collect_episode(*env, 5, store, dims, 0.5, explore);
        store.zero_grads();
        Rng arng(6);
        const SimplexWeights alpha = sample_simplex(8, 8, arng);
        (void)compute_targets(ep, store, dims, &alpha, 0.99);
        for (const auto& [name, e] : store)
            for (double g : e.grad) leak_ok = leak_ok && g == 0.0;
    }

    { // unfilled-step bitwise neutrality
        ExperimentConfig cfg = matrix_learning_config();
        cfg.env_name = "grid";
        cfg.episode_limit = 6;
        auto env = make_env(cfg);
        const NetDims dims = make_dims(cfg, env->info());
        ParameterStore base, target;
        Rng a(7), b(8);
        init_all_params(base, dims, a);
        init_all_params(target, dims, b);
        Rng explore(9);
        EpisodeRecord shorty = collect_episode(*env, 10, base, dims, 1.0, explore);
        if (shorty.filled > 2) {
            shorty.filled = 2;
            shorty.terminated = true;
            shorty.truncated = false;
        }
        EpisodeRecord full = collect_episode(*env, 11, base, dims, 1.0, explore);
        auto run_once = [&](const EpisodeRecord& first) {
            ParameterStore online = base;
            Rng arng(12);
            const SimplexWeights alpha = sample_simplex(8, 8, arng);
            const std::vector<const EpisodeRecord*> batch = {&first, &full};
            const double loss = train_step(batch, online, target, cfg, dims, &alpha);
            return std::make_pair(loss, std::move(online));
        };
        const auto [l1, s1] = run_once(shorty);
        EpisodeRecord mutated = shorty;
        for (std::size_t t = static_cast<std::size_t>(mutated.filled);
             t < mutated.reward.size(); ++t) {
            mutated.reward[t] = -4444.0;
            mutated.action[t] = {5, 5};
        }
        for (std::size_t t = static_cast<std::size_t>(mutated.filled) + 1;
             t < mutated.state.size(); ++t)
            std::fill(mutated.state[t].begin(), mutated.state[t].end(), 123.0);
        const auto [l2, s2] = run_once(mutated);
        mask_ok = l1 == l2;
        for (const auto& [name, e] : s1)
            mask_ok = mask_ok && e.value.data == s2.entry(name).value.data;
    }

    { // same seed, bitwise-identical CSV across two full runs
        ExperimentConfig cfg = matrix_learning_config();
        cfg.total_steps = 2000;
        cfg.eval_interval = 500;
        cfg.seed = 77;
        const fs::path d1 = fs::path("acceptance_runs") / "c09_rerun_a";
        const fs::path d2 = fs::path("acceptance_runs") / "c09_rerun_b";
        fs::remove_all(d1);
        fs::remove_all(d2);
        run_training(cfg, d1.string());
        run_training(cfg, d2.string());
        csv_ok = slurp((d1 / "metrics.csv").string()) == slurp((d2 / "metrics.csv").string());
    }

    const bool ok = sync_ok && leak_ok && mask_ok && csv_ok;
    verdict("c09 algorithm-mechanics", ok,
            std::string("target_sync=") + (sync_ok ? "bitwise" : "FAIL") +
                ", target_leakage=" + (leak_ok ? "none" : "FAIL") + ", masking=" +
                (mask_ok ? "bitwise-neutral" : "FAIL") + ", rerun_csv=" +
                (csv_ok ? "identical" : "FAIL"));
    REQUIRE(ok);
}

TEST_CASE("c10 ablation harness: percentile curves for four algorithms") {
    struct Alg {
        const char* name;
        const char* mixer;
        bool rem;
    };
    const std::vector<Alg> algs = {{"mmdmix_rem", "mmdmix", true},
                                   {"mmdmix", "mmdmix", false},
                                   {"qmix", "qmix", false},
                                   {"vdn", "vdn", false}};
    bool ok = true;
    std::string detail;
    for (const Alg& alg : algs) {
        std::vector<std::string> dirs;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            ExperimentConfig cfg;
            cfg.env_name = "grid";
            cfg.grid_size = 4;
            cfg.episode_limit = 30;
            cfg.mixer_kind = alg.mixer;
            cfg.rem_enabled = alg.rem;
            cfg.total_steps = 2500;
            cfg.eval_interval = 500;
            cfg.eval_episodes = 32;
            cfg.epsilon_anneal_steps = 2000;
            const TrainedRun run = train_into(
                cfg, std::string("c10_") + alg.name + "_seed" + std::to_string(seed),
                seed);
            dirs.push_back(run.dir.string());
        }
        const SummaryTable table = summarize_runs(dirs);
        const fs::path out = fs::path("acceptance_runs") / (std::string("c10_summary_") +
                                                            alg.name + ".csv");
        std::ofstream os(out);
        os << summary_csv(table);
        ok = ok && table.n_runs == 5 && table.env_steps.size() == 6 &&
             table.env_steps.front() == 0 && table.env_steps.back() == 2500;
        for (std::size_t i = 0; i < table.env_steps.size(); ++i) {
            ok = ok && table.success_p25[i] <= table.success_median[i] + 1e-12;
            ok = ok && table.success_median[i] <= table.success_p75[i] + 1e-12;
        }
        detail += std::string(alg.name) + " final success median=" +
                  format_double(table.success_median.back()) + " iqr=[" +
                  format_double(table.success_p25.back()) + "," +
                  format_double(table.success_p75.back()) + "]; ";
    }
    verdict("c10 ablation-harness", ok, detail + "curves in acceptance_runs/c10_summary_*.csv");
    REQUIRE(ok);
}
