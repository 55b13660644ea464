#include <mpqkd/rng.hpp>

#include <cmath>

namespace mpqkd {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t purpose, std::uint64_t block) {
    std::uint64_t x = seed;
    (void)splitmix64(x);
    x ^= 0xa076bc9d65cca3e1ULL * purpose;
    (void)splitmix64(x);
    x ^= 0xd1342543de82ef95ULL * block;
    for (auto& w : s_) w = splitmix64(x);
    // xoshiro must not start from the all-zero state
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t StreamRng::next_u64() {
    // xoshiro256++
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

double StreamRng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t StreamRng::uniform_index(std::uint64_t n) {
    // Rejection-free multiply-shift; bias is below 2^-64 * n, irrelevant here.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

bool StreamRng::bernoulli(double p) {
    return uniform() < p;
}

double StreamRng::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    cached_normal_ = v * m;
    has_cached_normal_ = true;
    return u * m;
}

std::uint64_t StreamRng::poisson(double lambda) {
    std::uint64_t total = 0;
    while (lambda > 60.0) {
        double chunk = lambda * 0.5;
        if (chunk > 60.0) chunk = 60.0;
        total += poisson(chunk);
        lambda -= chunk;
    }
    if (lambda <= 0.0) return total;
    const double threshold = std::exp(-lambda);
    double prod = uniform();
    std::uint64_t k = 0;
    while (prod > threshold) {
        ++k;
        prod *= uniform();
    }
    return total + k;
}

}  // namespace mpqkd
