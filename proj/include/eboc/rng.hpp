// Seeded random streams with portable samplers.
//
// Every stochastic routine in the library takes an explicit Rng; there is no
// global generator. Samplers are implemented here rather than through
// std::*_distribution because the standard leaves those algorithms
// implementation-defined and we need byte-identical output across toolchains.
#pragma once

#include <cstdint>
#include <vector>

namespace eboc {

class Rng {
public:
    explicit Rng(std::uint64_t seed);

    // Independent stream derived from (seed, index); used to give each
    // replication or worker its own generator regardless of scheduling.
    Rng substream(std::uint64_t index) const;

    std::uint64_t next_u64();

    // Uniform on the open interval (0,1); never returns 0 or 1.
    double uniform();
    double uniform(double lo, double hi);
    // Uniform index in {0, ..., n-1}.
    std::size_t uniform_index(std::size_t n);

    double normal();
    double exponential(double mean);
    // Gamma(shape, rate) via Marsaglia-Tsang, with the boost U^{1/shape}
    // trick for shape < 1.
    double gamma(double shape, double rate);
    long long poisson(double mean);

private:
    Rng() = default;

    // xoshiro256++ state
    std::uint64_t s_[4];
    std::uint64_t seed_;
};

} // namespace eboc
