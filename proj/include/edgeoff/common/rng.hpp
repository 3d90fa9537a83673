/**
 * @file rng.hpp
 * @brief Explicitly seeded random streams.
 *
 * There is no global generator anywhere in the project. Every consumer owns an
 * `Rng` derived from (seed, stream, index) so two runs with the same seed
 * consume identical bit sequences regardless of call interleaving elsewhere.
 * The variate transforms are written out here instead of using the
 * `<random>` distributions, whose output is implementation-defined.
 */
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace edgeoff {

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Mixes a base seed with a stream tag and an index into an independent seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) noexcept;

/// FNV-1a; used to turn parameter names into stable stream tags.
std::uint64_t hash_name(std::string_view name) noexcept;

namespace streams {
inline constexpr std::uint64_t kPlacement = 0x01;
inline constexpr std::uint64_t kHardware = 0x02;
inline constexpr std::uint64_t kTasks = 0x03;
inline constexpr std::uint64_t kFading = 0x04;
inline constexpr std::uint64_t kPolicy = 0x05;
inline constexpr std::uint64_t kReplay = 0x06;
inline constexpr std::uint64_t kNoise = 0x07;
inline constexpr std::uint64_t kDropout = 0x08;
inline constexpr std::uint64_t kInit = 0x09;
}  // namespace streams

class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on the open interval (0, 1).
    double uniform();
    double uniform(double low, double high);
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);
    bool bernoulli(double p);
    /// Unit-mean exponential variate.
    double exponential();
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }
    /// Standard Gumbel variate, -log(-log U).
    double gumbel();

private:
    std::mt19937_64 engine_;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

}  // namespace edgeoff
