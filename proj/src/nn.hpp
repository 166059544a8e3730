#pragma once

#include "rng.hpp"
#include "tape.hpp"

#include <string>

namespace mmdmix {

// Parameter handles for one gated recurrent cell instance on a tape.
struct GruVars {
    Var w_ih, b_ih, w_hh, b_hh;
    std::uint32_t input = 0, hidden = 0;
};

GruVars gru_vars(Tape& tape, const std::string& prefix, std::uint32_t input,
                 std::uint32_t hidden);

// Standard GRU update:
//   r = sigmoid(Wr x + Ur h + br)        z = sigmoid(Wz x + Uz h + bz)
//   n = tanh(Wn x + bn + r * (Un h + cn))
//   h' = n + z * (h - n)
// Gate blocks are stacked r|z|n in w_ih/w_hh.
Var gru_step(Tape& tape, Var x, Var h, const GruVars& g);

// U(-1/sqrt(fan_in), 1/sqrt(fan_in)) init for a (rows x cols) weight and,
// optionally, its bias — the convention recurrent Q-network stacks inherit.
void init_linear_params(ParameterStore& store, const std::string& prefix,
                        std::uint32_t rows, std::uint32_t cols, Rng& rng,
                        bool with_bias = true);

void init_gru_params(ParameterStore& store, const std::string& prefix,
                     std::uint32_t input, std::uint32_t hidden, Rng& rng);

} // namespace mmdmix
