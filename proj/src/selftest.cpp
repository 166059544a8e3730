#include "selftest.hpp"

#include "agents.hpp"
#include "kernels.hpp"
#include "learner.hpp"
#include "mixers.hpp"
#include "optim.hpp"
#include "rem.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <span>
#include <sstream>

namespace mmdmix {

namespace {

std::vector<double> random_set(Rng& rng, int max_len, double lo = -3.0, double hi = 3.0) {
    std::vector<double> v(static_cast<std::size_t>(1 + rng.uniform_int(max_len)));
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

double mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

bool kernel_identities(std::string& why) {
    Rng rng(0x5eed001);
    const Kernel tri = Kernel::triangle(2.0);
    const Kernel gauss = Kernel::gaussian({1, 2, 4, 8, 16});
    for (int it = 0; it < 300; ++it) {
        const auto x = random_set(rng, 12);
        const auto y = random_set(rng, 12);
        const double m_tri = squared_mmd(x, y, tri);
        // mean-matching identity for the p=2 triangle kernel
        const double ident = 2.0 * std::pow(mean(x) - mean(y), 2.0);
        if (std::abs(m_tri - ident) > 1e-9) {
            why = "triangle p=2 mean-matching identity";
            return false;
        }
        if (m_tri != squared_mmd(y, x, tri) ||
            squared_mmd(x, y, gauss) != squared_mmd(y, x, gauss)) {
            why = "symmetry";
            return false;
        }
        if (squared_mmd(x, x, gauss) > 1e-12 || squared_mmd(x, x, tri) > 1e-12) {
            why = "zero self-distance";
            return false;
        }
        if (squared_mmd(x, y, gauss) < -1e-12) {
            why = "gaussian nonnegativity";
            return false;
        }
        const double c = rng.uniform(0.25, 2.0);
        auto cx = x, cy = y;
        for (double& v : cx) v *= c;
        for (double& v : cy) v *= c;
        if (std::abs(squared_mmd(cx, cy, tri) - c * c * m_tri) > 1e-9) {
            why = "triangle p=2 scale law";
            return false;
        }
    }
    return true;
}

bool rem_properties(std::string& why) {
    Rng rng(0x5eed002);
    for (int it = 0; it < 2000; ++it) {
        const auto alpha = sample_simplex(8, 8, rng);
        for (std::uint32_t k = 0; k < alpha.rows; ++k) {
            double s = 0.0;
            for (double w : alpha.row(k)) {
                if (w < 0.0) {
                    why = "simplex nonnegativity";
                    return false;
                }
                s += w;
            }
            if (std::abs(s - 1.0) > 1e-12) {
                why = "simplex row normalization";
                return false;
            }
        }
        std::vector<double> particles(8);
        for (double& p : particles) p = rng.uniform(-5.0, 5.0);
        const auto out = rem_combine(particles, alpha);
        const double lo = *std::min_element(particles.begin(), particles.end());
        const double hi = *std::max_element(particles.begin(), particles.end());
        for (double v : out)
            if (v < lo || v > hi) {
                why = "convexity bounds";
                return false;
            }
    }
    return true;
}

// Small randomly initialized setup shared by the gradient / monotonicity /
// IGM suites.
struct Setup {
    NetDims dims;
    ParameterStore store;
};

Setup make_setup(std::uint64_t seed, std::uint32_t n_particles, std::uint32_t hidden = 16,
                 std::uint32_t embed = 8) {
    Setup s;
    s.dims.agent = AgentNetDims{3, 3, 2, hidden};
    s.dims.mixer = MixerDims{2, 4, embed, n_particles};
    s.dims.kind = MixerKind::MmdMix;
    s.dims.k_combined = static_cast<int>(n_particles);
    s.dims.env = EnvInfo{2, 3, 3, 4, 2};
    Rng rng(seed);
    init_all_params(s.store, s.dims, rng);
    return s;
}

bool gradient_checks(std::string& why, double& worst) {
    worst = 0.0;

    { // dense layer
        ParameterStore store;
        Rng rng(0x5eed010);
        init_linear_params(store, "lin", 3, 4, rng);
        const std::vector<double> x = {0.3, -1.2, 0.7, 0.05};
        auto fn = [&] {
            Tape t(static_cast<const ParameterStore&>(store));
            Var y = t.dense(t.constant(x), t.param("lin.w"), t.param("lin.b"), 3, 4);
            return t.scalar(t.dot(y, y));
        };
        store.zero_grads();
        Tape t(store);
        Var y = t.dense(t.constant(x), t.param("lin.w"), t.param("lin.b"), 3, 4);
        t.backward(t.dot(y, y));
        const double err = finite_diff_check(fn, store, 1e-6, 1e-8);
        worst = std::max(worst, err);
        if (err > 1e-6) {
            why = "dense layer gradient";
            return false;
        }
    }

    { // 3-step recurrent unroll
        Setup s = make_setup(0x5eed011, 4);
        std::vector<std::vector<double>> inputs;
        Rng rng(0x5eed012);
        for (int t = 0; t < 3; ++t) {
            std::vector<double> in(s.dims.agent.input_size());
            for (double& v : in) v = rng.uniform(-1.0, 1.0);
            inputs.push_back(in);
        }
        auto forward = [&](const ParameterStore& ps) {
            Tape t(ps);
            AgentNet net(t, s.dims.agent);
            Var h = t.zeros(s.dims.agent.hidden);
            Var acc = t.zeros(1);
            for (const auto& in : inputs) {
                const auto out = net.step(t.constant(in), h);
                h = out.hidden;
                acc = t.add(acc, t.sum(out.q));
            }
            return t.scalar(acc);
        };
        auto fn = [&] { return forward(s.store); };
        s.store.zero_grads();
        {
            Tape t(s.store);
            AgentNet net(t, s.dims.agent);
            Var h = t.zeros(s.dims.agent.hidden);
            Var acc = t.zeros(1);
            for (const auto& in : inputs) {
                const auto out = net.step(t.constant(in), h);
                h = out.hidden;
                acc = t.add(acc, t.sum(out.q));
            }
            t.backward(acc);
        }
        const double err = finite_diff_check(fn, s.store, 1e-6, 1e-8);
        worst = std::max(worst, err);
        if (err > 1e-4) {
            why = "agent network gradient (3-step unroll)";
            return false;
        }
    }

    { // full loss on a 2-agent, 2-step, batch-2 instance
        Setup s = make_setup(0x5eed013, 4);
        Rng rng(0x5eed014);
        ParameterStore target_store;
        {
            Rng trng(0x5eed015);
            init_all_params(target_store, s.dims, trng);
        }
        std::vector<EpisodeRecord> eps;
        for (int e = 0; e < 2; ++e) {
            EpisodeRecord ep = EpisodeRecord::empty(s.dims.env);
            for (int t = 0; t <= 2; ++t) {
                ep.state[t].resize(4);
                for (double& v : ep.state[t]) v = rng.uniform(-1.0, 1.0);
                for (int a = 0; a < 2; ++a) {
                    ep.obs[t][a].resize(3);
                    for (double& v : ep.obs[t][a]) v = rng.uniform(-1.0, 1.0);
                    ep.avail[t][a].assign(3, 1);
                }
            }
            for (int t = 0; t < 2; ++t) {
                for (int a = 0; a < 2; ++a) ep.action[t][a] = rng.uniform_int(3);
                ep.reward[t] = rng.uniform(-1.0, 1.0);
            }
            ep.filled = 2;
            ep.terminated = e == 0;
            ep.truncated = e != 0;
            eps.push_back(std::move(ep));
        }
        Rng arng(0x5eed016);
        const SimplexWeights alpha = sample_simplex(4, 4, arng);
        ExperimentConfig cfg;
        cfg.mixer_kind = "mmdmix";
        cfg.n_particles = 4;
        cfg.n_combined = 4;
        const Kernel kern = cfg.kernel();

        std::vector<std::vector<std::vector<double>>> targets;
        for (const auto& ep : eps)
            targets.push_back(compute_targets(ep, target_store, s.dims, &alpha, cfg.gamma));

        const auto build_loss = [&](Tape& t) {
            AgentNet net(t, s.dims.agent);
            MixingNetwork mixer(t, s.dims.mixer);
            std::vector<Var> terms;
            for (std::size_t e = 0; e < eps.size(); ++e) {
                const auto& ep = eps[e];
                std::vector<Var> hidden = init_hidden(t, 2, s.dims.agent.hidden);
                for (int st = 0; st < ep.filled; ++st) {
                    std::vector<Var> chosen;
                    for (int a = 0; a < 2; ++a) {
                        const int last = st > 0 ? ep.action[st - 1][a] : -1;
                        const auto in =
                            AgentNet::make_input(ep.obs[st][a], last, a, s.dims.agent);
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
        auto value_fn = [&] {
            Tape t(static_cast<const ParameterStore&>(s.store));
            return t.scalar(build_loss(t));
        };
        s.store.zero_grads();
        {
            Tape t(s.store);
            t.backward(build_loss(t));
        }
        const double err = finite_diff_check(value_fn, s.store, 1e-6, 1e-8);
        worst = std::max(worst, err);
        if (err > 1e-4) {
            why = "full mixing loss gradient";
            return false;
        }
    }
    return true;
}

bool monotonicity(std::string& why, const SelftestOptions& opts) {
    const WeightTransform wt =
        opts.fault_flip_abs ? WeightTransform::NegAbs : WeightTransform::Abs;
    Rng rng(0x5eed020);
    for (int it = 0; it < 100; ++it) {
        Setup s = make_setup(0x9000 + static_cast<std::uint64_t>(it), 8);
        std::vector<double> state(4), q(2);
        for (double& v : state) v = rng.uniform(-1.0, 1.0);
        for (double& v : q) v = rng.uniform(-1.0, 1.0);
        Rng arng(0xa000 + static_cast<std::uint64_t>(it));
        const SimplexWeights alpha = sample_simplex(8, 8, arng);

        auto eval_particles = [&](const std::vector<double>& qv) {
            Tape t(static_cast<const ParameterStore&>(s.store));
            MixingNetwork mixer(t, s.dims.mixer, wt);
            std::vector<Var> qs;
            for (double v : qv) qs.push_back(t.constant({v}));
            const auto p = t.values(mixer.mix(qs, t.constant(state)));
            return std::vector<double>(p.begin(), p.end());
        };
        const auto base = eval_particles(q);
        const auto base_comb = rem_combine(base, alpha);
        for (std::size_t a = 0; a < q.size(); ++a) {
            auto bumped = q;
            bumped[a] += 0.1;
            const auto up = eval_particles(bumped);
            for (std::size_t i = 0; i < up.size(); ++i)
                if (up[i] - base[i] < -1e-9) {
                    why = "per-particle monotonicity";
                    return false;
                }
            const auto up_comb = rem_combine(up, alpha);
            for (std::size_t k = 0; k < up_comb.size(); ++k)
                if (up_comb[k] - base_comb[k] < -1e-9) {
                    why = "combined-particle monotonicity";
                    return false;
                }
        }
    }
    return true;
}

bool igm_consistency(std::string& why) {
    Rng rng(0x5eed030);
    for (int it = 0; it < 100; ++it) {
        Setup s = make_setup(0xb000 + static_cast<std::uint64_t>(it), 8);
        std::vector<double> state(4);
        for (double& v : state) v = rng.uniform(-1.0, 1.0);
        double qtab[2][3];
        for (auto& row : qtab)
            for (double& v : row) v = rng.uniform(-1.0, 1.0);
        int best_joint[2] = {-1, -1};
        double best_mean = -1e300;
        for (int u1 = 0; u1 < 3; ++u1)
            for (int u2 = 0; u2 < 3; ++u2) {
                Tape t(static_cast<const ParameterStore&>(s.store));
                MixingNetwork mixer(t, s.dims.mixer);
                std::vector<Var> qs = {t.constant({qtab[0][u1]}), t.constant({qtab[1][u2]})};
                const auto p = t.values(mixer.mix(qs, t.constant(state)));
                double m = 0.0;
                for (double v : p) m += v;
                m /= static_cast<double>(p.size());
                if (m > best_mean) {
                    best_mean = m;
                    best_joint[0] = u1;
                    best_joint[1] = u2;
                }
            }
        const auto agent_best = [&](int a) {
            int best = 0;
            for (int u = 1; u < 3; ++u)
                if (qtab[a][u] > qtab[a][best]) best = u;
            return best;
        };
        if (best_joint[0] != agent_best(0) || best_joint[1] != agent_best(1)) {
            why = "IGM argmax consistency";
            return false;
        }
    }
    return true;
}

} // namespace

SelftestReport run_selftest(std::ostream& out, const SelftestOptions& opts) {
    SelftestReport report;
    std::string why;

    const auto run = [&](const char* name, bool ok) {
        out << "selftest " << name << ": " << (ok ? "ok" : ("FAILED (" + why + ")"))
            << "\n";
        if (!ok && report.ok) {
            report.ok = false;
            report.failed_property = why;
        }
    };

    run("kernel-identities", kernel_identities(why));
    run("rem-properties", rem_properties(why));
    run("gradient-checks", gradient_checks(why, report.worst_grad_rel_err));
    run("monotonicity", monotonicity(why, opts));
    run("igm-consistency", igm_consistency(why));
    out << "worst gradient-check relative error: " << report.worst_grad_rel_err << "\n";
    return report;
}

} // namespace mmdmix
