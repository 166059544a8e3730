#pragma once

#include <cstdint>
#include <random>

namespace mmdmix {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Derives an independent stream seed from (master, stream, index). Every rng
// in a run is seeded through this, which keeps runs bitwise-reproducible and
// lets evaluation streams stay decoupled from training streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index = 0) {
    std::uint64_t s = master;
    std::uint64_t h = splitmix64(s);
    s ^= (stream + 0x9e37ull) * 0xd1342543de82ef95ull;
    h ^= splitmix64(s);
    s ^= (index + 0x7f4aull) * 0x2545f4914f6cdd1dull;
    h ^= splitmix64(s);
    return h;
}

// mt19937_64 with explicit bit-level draws so that results do not depend on
// libstdc++'s distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // [0, 1)
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // uniform over {0, ..., n-1}, n > 0
    int uniform_int(int n) {
        return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
    }

private:
    std::mt19937_64 eng_;
};

} // namespace mmdmix
