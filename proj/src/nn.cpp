#include "nn.hpp"

#include <cmath>

namespace mmdmix {

GruVars gru_vars(Tape& tape, const std::string& prefix, std::uint32_t input,
                 std::uint32_t hidden) {
    GruVars g;
    g.w_ih = tape.param(prefix + ".w_ih");
    g.b_ih = tape.param(prefix + ".b_ih");
    g.w_hh = tape.param(prefix + ".w_hh");
    g.b_hh = tape.param(prefix + ".b_hh");
    g.input = input;
    g.hidden = hidden;
    return g;
}

Var gru_step(Tape& tape, Var x, Var h, const GruVars& g) {
    const std::uint32_t H = g.hidden;
    Var gx = tape.dense(x, g.w_ih, g.b_ih, 3 * H, g.input, "gru.w_ih");
    Var gh = tape.dense(h, g.w_hh, g.b_hh, 3 * H, g.hidden, "gru.w_hh");
    Var r = tape.sigmoid(tape.add(tape.slice(gx, 0, H), tape.slice(gh, 0, H)));
    Var z = tape.sigmoid(tape.add(tape.slice(gx, H, H), tape.slice(gh, H, H)));
    Var n = tape.tanh(tape.add(tape.slice(gx, 2 * H, H),
                               tape.mul(r, tape.slice(gh, 2 * H, H))));
    return tape.add(n, tape.mul(z, tape.sub(h, n)));
}

namespace {
void fill_uniform(Tensor& t, double bound, Rng& rng) {
    for (double& v : t.data) v = rng.uniform(-bound, bound);
}
} // namespace

void init_linear_params(ParameterStore& store, const std::string& prefix,
                        std::uint32_t rows, std::uint32_t cols, Rng& rng,
                        bool with_bias) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
    fill_uniform(store.add(prefix + ".w", {rows, cols}), bound, rng);
    if (with_bias) fill_uniform(store.add(prefix + ".b", {rows}), bound, rng);
}

void init_gru_params(ParameterStore& store, const std::string& prefix,
                     std::uint32_t input, std::uint32_t hidden, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    fill_uniform(store.add(prefix + ".w_ih", {3 * hidden, input}), bound, rng);
    fill_uniform(store.add(prefix + ".b_ih", {3 * hidden}), bound, rng);
    fill_uniform(store.add(prefix + ".w_hh", {3 * hidden, hidden}), bound, rng);
    fill_uniform(store.add(prefix + ".b_hh", {3 * hidden}), bound, rng);
}

} // namespace mmdmix
