#include "eboc/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace eboc {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
}

Rng Rng::substream(std::uint64_t index) const {
    // Hash (seed, index) down to a fresh seed. splitmix64 over the combined
    // words keeps distinct (seed, index) pairs on distinct streams.
    std::uint64_t sm = seed_ ^ 0x6a09e667f3bcc909ULL;
    std::uint64_t a = splitmix64(sm);
    sm ^= index + 0x9e3779b97f4a7c15ULL;
    std::uint64_t b = splitmix64(sm);
    return Rng(a ^ rotl(b, 17));
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() {
    // 53-bit mantissa, shifted to the open interval.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

std::size_t Rng::uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    // Rejection to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return static_cast<std::size_t>(v % n);
}

double Rng::normal() {
    // Polar Box-Muller without caching: one accepted pair yields one draw, so
    // stream position depends only on the accept/reject path, not on caller
    // interleaving.
    for (;;) {
        const double u = 2.0 * uniform() - 1.0;
        const double v = 2.0 * uniform() - 1.0;
        const double r2 = u * u + v * v;
        if (r2 > 0.0 && r2 < 1.0) {
            return u * std::sqrt(-2.0 * std::log(r2) / r2);
        }
    }
}

double Rng::exponential(double mean) {
    if (mean <= 0.0) throw std::invalid_argument("exponential: mean must be positive");
    return -mean * std::log(uniform());
}

double Rng::gamma(double shape, double rate) {
    if (shape <= 0.0 || rate <= 0.0) {
        throw std::invalid_argument("gamma: shape and rate must be positive");
    }
    if (shape < 1.0) {
        // Gamma(a) = Gamma(a+1) * U^{1/a}
        const double boost = std::pow(uniform(), 1.0 / shape);
        return gamma(shape + 1.0, rate) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
}

long long Rng::poisson(double mean) {
    if (mean < 0.0) throw std::invalid_argument("poisson: mean must be nonnegative");
    // Knuth's product-of-uniforms search, chunked so exp(-chunk) stays far
    // from underflow; Poisson(a+b) = Poisson(a) + Poisson(b) makes the split
    // exact.
    long long total = 0;
    double remaining = mean;
    while (remaining > 25.0) {
        total += poisson(25.0);
        remaining -= 25.0;
    }
    const double limit = std::exp(-remaining);
    double prod = uniform();
    long long k = 0;
    while (prod > limit) {
        ++k;
        prod *= uniform();
    }
    return total + k;
}

} // namespace eboc
