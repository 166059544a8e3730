#include <doctest.h>

#include "errors.hpp"
#include "nn.hpp"
#include "optim.hpp"
#include "rng.hpp"
#include "tape.hpp"
#include "tensor.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>

using namespace mmdmix;

namespace {

// Independent central-difference oracle over every scalar of `store`, using
// only the forward function; never touches the tape's gradient path.
double numeric_vs_analytic(const std::function<double()>& fn, ParameterStore& store,
                           double h) {
    double worst = 0.0;
    for (auto& [name, e] : store) {
        for (std::size_t i = 0; i < e.value.size(); ++i) {
            const double saved = e.value.data[i];
            e.value.data[i] = saved + h;
            const double fp = fn();
            e.value.data[i] = saved - h;
            const double fm = fn();
            e.value.data[i] = saved;
            const double numeric = (fp - fm) / (2.0 * h);
            const double analytic = e.grad[i];
            const double diff = std::abs(numeric - analytic);
            if (diff <= 1e-8) continue; // central-difference noise at h=1e-6
            worst = std::max(worst, diff / std::max(std::abs(numeric), std::abs(analytic)));
        }
    }
    return worst;
}

} // namespace

TEST_CASE("dense identity and zero-weight cases") {
    ParameterStore store;
    auto& w = store.add("w", {2, 2});
    auto& b = store.add("b", {2});
    w.data = {1, 0, 0, 1};
    b.data = {0, 0};
    {
        Tape t(store);
        Var y = t.dense(t.constant({1.0, 2.0}), t.param("w"), t.param("b"), 2, 2);
        CHECK(t.values(y)[0] == 1.0);
        CHECK(t.values(y)[1] == 2.0);
    }
    w.data = {0, 0, 0, 0};
    b.data = {3, 4};
    {
        Tape t(store);
        Var y = t.dense(t.constant({1.0, 2.0}), t.param("w"), t.param("b"), 2, 2);
        CHECK(t.values(y)[0] == 3.0);
        CHECK(t.values(y)[1] == 4.0);
    }
}

TEST_CASE("dense shape mismatch raises a configuration error naming shapes") {
    ParameterStore store;
    store.add("w", {3, 4});
    store.add("b", {3});
    Tape t(store);
    CHECK_THROWS_AS(t.dense(t.constant({1.0, 2.0}), t.param("w"), t.param("b"), 3, 4),
                    ConfigError);
    try {
        t.dense(t.constant({1.0, 2.0}), t.param("w"), t.param("b"), 3, 4);
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("3x4") != std::string::npos);
        CHECK(msg.find("2") != std::string::npos);
    }
}

TEST_CASE("random dense layer gradient matches central differences") {
    ParameterStore store;
    Rng rng(42);
    init_linear_params(store, "lin", 3, 4, rng);
    const std::vector<double> x = {0.4, -1.1, 0.9, 0.2};

    auto fn = [&] {
        Tape t(static_cast<const ParameterStore&>(store));
        Var y = t.dense(t.constant(x), t.param("lin.w"), t.param("lin.b"), 3, 4);
        return t.scalar(t.dot(y, y));
    };
    store.zero_grads();
    {
        Tape t(store);
        Var y = t.dense(t.constant(x), t.param("lin.w"), t.param("lin.b"), 3, 4);
        t.backward(t.dot(y, y));
    }
    CHECK(numeric_vs_analytic(fn, store, 1e-6) <= 1e-6);
}

TEST_CASE("elementwise nonlinearities match their closed forms") {
    Tape t;
    Var x = t.constant({-1.0, 2.0, 0.0, -3.0});
    const auto r = t.values(t.relu(x));
    CHECK(r[0] == 0.0);
    CHECK(r[1] == 2.0);
    const auto a = t.values(t.abs(x));
    CHECK(a[3] == 3.0);
    const auto e = t.values(t.elu(x));
    CHECK(e[2] == 0.0); // continuity at the origin
    CHECK(e[0] == doctest::Approx(std::exp(-1.0) - 1.0));
    CHECK(e[1] == 2.0);
}

TEST_CASE("gru: zero input, zero hidden, zero parameters give zero output") {
    ParameterStore store;
    store.add("g.w_ih", {12, 3});
    store.add("g.b_ih", {12});
    store.add("g.w_hh", {12, 4});
    store.add("g.b_hh", {12});
    Tape t(store);
    GruVars g = gru_vars(t, "g", 3, 4);
    Var h2 = gru_step(t, t.zeros(3), t.zeros(4), g);
    for (double v : t.values(h2)) CHECK(v == 0.0);
}

TEST_CASE("gru single-step gradient matches central differences") {
    ParameterStore store;
    Rng rng(7);
    init_gru_params(store, "g", 3, 4, rng);
    const std::vector<double> x = {0.5, -0.3, 1.2};
    const std::vector<double> h0 = {0.1, -0.2, 0.3, 0.05};

    auto fn = [&] {
        Tape t(static_cast<const ParameterStore&>(store));
        GruVars g = gru_vars(t, "g", 3, 4);
        return t.scalar(t.sum(gru_step(t, t.constant(x), t.constant(h0), g)));
    };
    store.zero_grads();
    {
        Tape t(store);
        GruVars g = gru_vars(t, "g", 3, 4);
        t.backward(t.sum(gru_step(t, t.constant(x), t.constant(h0), g)));
    }
    CHECK(numeric_vs_analytic(fn, store, 1e-6) <= 1e-5);
}

TEST_CASE("gru 3-step unrolled gradient matches central differences") {
    ParameterStore store;
    Rng rng(11);
    init_gru_params(store, "g", 3, 4, rng);
    std::vector<std::vector<double>> xs;
    Rng xrng(12);
    for (int i = 0; i < 3; ++i) {
        std::vector<double> x(3);
        for (double& v : x) v = xrng.uniform(-1.0, 1.0);
        xs.push_back(x);
    }
    auto loss = [&](Tape& t) {
        GruVars g = gru_vars(t, "g", 3, 4);
        Var h = t.zeros(4);
        for (const auto& x : xs) h = gru_step(t, t.constant(x), h, g);
        return t.dot(h, h);
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
    CHECK(numeric_vs_analytic(fn, store, 1e-6) <= 1e-4);
}

TEST_CASE("rmsprop: zero gradient leaves parameters unchanged") {
    ParameterStore store;
    auto& p = store.add("p", {3});
    p.data = {1.0, 2.0, 3.0};
    rmsprop_update(store, 0.0005, 0.99, 1e-5);
    CHECK(p.data == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("rmsprop: constant gradient drives step magnitude toward lr") {
    ParameterStore store;
    store.add("p", {1}).data = {0.0};
    const double lr = 0.0005;
    double prev = 0.0;
    double step = 0.0;
    for (int i = 0; i < 3000; ++i) {
        store.grad("p")[0] = 2.0; // accumulator fixed point is g^2
        rmsprop_update(store, lr, 0.99, 1e-5);
        step = prev - store.entry("p").value.data[0];
        prev = store.entry("p").value.data[0];
    }
    CHECK(std::abs(step - lr) <= 0.02 * lr);
}

TEST_CASE("rmsprop: one step from a fresh accumulator, hand-evaluated") {
    ParameterStore store;
    store.add("p", {1}).data = {0.5};
    store.grad("p")[0] = 1.0;
    rmsprop_update(store, 0.0005, 0.99, 1e-5);
    // accum = 0.01 * 1; step = lr / sqrt(0.01 + 1e-5)
    const double expected = 0.5 - 0.0005 / std::sqrt(0.01 + 1e-5);
    CHECK(store.entry("p").value.data[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(store.grad("p")[0] == 0.0); // gradients zeroed afterward
}

TEST_CASE("rmsprop: non-finite gradient aborts and names the parameter") {
    ParameterStore store;
    store.add("good", {1}).data = {1.0};
    store.add("weird.name", {2}).data = {1.0, 2.0};
    store.grad("good")[0] = 0.5;
    store.grad("weird.name")[1] = std::nan("");
    const std::vector<double> before = store.entry("good").value.data;
    CHECK_THROWS_WITH_AS(rmsprop_update(store, 0.1, 0.99, 1e-5),
                         doctest::Contains("weird.name"), ContractViolation);
    CHECK(store.entry("good").value.data == before); // nothing applied
}

TEST_CASE("finite_diff_check on simple closed forms") {
    ParameterStore store;
    store.add("theta", {1}).data = {3.0};
    // fn = theta^2, analytic gradient 6
    auto fn = [&] {
        const double th = store.entry("theta").value.data[0];
        return th * th;
    };
    store.grad("theta")[0] = 6.0;
    CHECK(finite_diff_check(fn, store, 1e-6) <= 1e-8);

    // constant function: both sides zero
    store.grad("theta")[0] = 0.0;
    auto cfn = [&] { return 5.0; };
    CHECK(finite_diff_check(cfn, store, 1e-6) == 0.0);
}

TEST_CASE("target synchronization is bitwise and isolated from later steps") {
    ParameterStore a;
    Rng rng(99);
    init_linear_params(a, "lin", 4, 5, rng);
    ParameterStore b = a;
    for (const auto& [name, e] : a) {
        const auto& eb = b.entry(name);
        CHECK(std::memcmp(e.value.data.data(), eb.value.data.data(),
                          e.value.size() * sizeof(double)) == 0);
    }
    // one optimizer step on a must leave b untouched
    a.grad("lin.w")[0] = 1.0;
    rmsprop_update(a, 0.1, 0.99, 1e-5);
    CHECK(a.entry("lin.w").value.data[0] != b.entry("lin.w").value.data[0]);
    // re-sync restores bitwise equality
    b.copy_values_from(a);
    CHECK(a.entry("lin.w").value.data[0] == b.entry("lin.w").value.data[0]);
}

TEST_CASE("forward and backward are deterministic bit for bit") {
    ParameterStore store;
    Rng rng(5);
    init_gru_params(store, "g", 3, 4, rng);
    const std::vector<double> x = {0.3, 0.1, -0.7};
    auto run = [&] {
        store.zero_grads();
        Tape t(store);
        GruVars g = gru_vars(t, "g", 3, 4);
        Var h = gru_step(t, t.constant(x), t.zeros(4), g);
        t.backward(t.dot(h, h));
        std::vector<double> out(t.values(h).begin(), t.values(h).end());
        for (const auto& [name, e] : store)
            out.insert(out.end(), e.grad.begin(), e.grad.end());
        return out;
    };
    const auto r1 = run();
    const auto r2 = run();
    CHECK(r1 == r2);
}

TEST_CASE("tape accumulates gradients only for parameters it touched") {
    ParameterStore store;
    Rng rng(13);
    init_linear_params(store, "used", 2, 2, rng);
    init_linear_params(store, "unused", 2, 2, rng);
    store.zero_grads();
    Tape t(store);
    Var y = t.dense(t.constant({1.0, -1.0}), t.param("used.w"), t.param("used.b"), 2, 2);
    t.backward(t.sum(y));
    bool used_has_grad = false;
    for (double g : store.grad("used.w")) used_has_grad |= g != 0.0;
    CHECK(used_has_grad);
    for (double g : store.grad("unused.w")) CHECK(g == 0.0);
    for (double g : store.grad("unused.b")) CHECK(g == 0.0);
}

TEST_CASE("checkpoint round-trips bitwise and is byte-stable") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "mmdmix_ckpt_test";
    fs::create_directories(dir);
    ParameterStore store;
    Rng rng(21);
    init_gru_params(store, "g", 3, 4, rng);
    store.entry("g.w_ih").accum.assign(store.entry("g.w_ih").value.size(), 0.25);

    const std::string p1 = (dir / "a.bin").string();
    const std::string p2 = (dir / "b.bin").string();
    save_checkpoint(store, p1, "env.name = matrix_det\n");

    ParameterStore loaded;
    const std::string cfg = load_checkpoint(loaded, p1);
    CHECK(cfg == "env.name = matrix_det\n");
    for (const auto& [name, e] : store) {
        CHECK(loaded.entry(name).value.shape == e.value.shape);
        CHECK(loaded.entry(name).value.data == e.value.data);
        CHECK(loaded.entry(name).accum == e.accum);
    }
    save_checkpoint(loaded, p2, cfg);

    auto slurp = [](const std::string& p) {
        std::ifstream is(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(is),
                           std::istreambuf_iterator<char>());
    };
    CHECK(slurp(p1) == slurp(p2));
    fs::remove_all(dir);
}
