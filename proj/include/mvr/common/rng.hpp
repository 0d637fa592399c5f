#pragma once

#include <cstdint>
#include <random>

namespace mvr {

/// Seeded random stream with platform-independent output.
///
/// Only the raw mt19937_64 sequence is taken from the standard library; the
/// uniform and Gaussian transforms are fixed here because the standard
/// distributions are implementation-defined and would break bit-exact replay
/// across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Independent stream for a (seed, stream id) pair.
    static Rng derive(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform();

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller, spare value cached.
    double normal();

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t index(std::uint64_t n);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// splitmix64 finalizer, used to decorrelate derived seeds.
std::uint64_t mix_seed(std::uint64_t x);

}  // namespace mvr
