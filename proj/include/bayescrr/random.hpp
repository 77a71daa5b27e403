#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace bayescrr {

/// SplitMix64 finalizer; used to derive independent seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t combine_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
    return mix64(seed ^ mix64(salt + 0x632be59bd9b4e019ULL));
}

/// Single-owner random stream. Never shared between tasks; parallel work
/// derives one child per task index so results do not depend on scheduling.
class RandomStream {
public:
    using engine_type = std::mt19937_64;

    explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

    std::uint64_t seed() const noexcept { return seed_; }

    RandomStream child(std::uint64_t index) const { return RandomStream(combine_seed(seed_, index)); }

    /// Uniform on the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() { return boost::random::normal_distribution<double>(0.0, 1.0)(engine_); }

    double exponential(double rate = 1.0) { return -std::log(uniform()) / rate; }

    /// Uniform index in [0, n).
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(boost::random::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_));
    }

    engine_type& engine() noexcept { return engine_; }

private:
    std::uint64_t seed_;
    engine_type engine_;
};

}  // namespace bayescrr
