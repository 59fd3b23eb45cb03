#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

#include "dspd/errors.hpp"

namespace dspd {

namespace detail {

// splitmix64; used only to derive well-separated seeds for substreams.
inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

/// Purpose tags for RNG substreams. Streams keyed by (purpose, iteration,
/// batch) are independent of scheduling order, so batch loops can be
/// reordered or parallelized without changing results.
enum class StreamPurpose : std::uint64_t {
    init = 1,
    mu_batch = 2,
    theta_batch = 3,
    eval = 4,
    test = 5,
};

/// A self-contained random stream. All sampling helpers route through
/// uniform01() so draws are identical across platforms.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : eng_(seed) {}

    /// Uniform in [0,1) with 53 random bits.
    double uniform01() {
        const std::uint64_t r = eng_() >> 11;
        return static_cast<double>(r) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Inverse-CDF draw from a finite distribution (need not be
    /// normalized). Deterministic, unlike std::discrete_distribution.
    int categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform01() * total;
        for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
            u -= weights[k];
            if (u < 0.0) return static_cast<int>(k);
        }
        return static_cast<int>(weights.size()) - 1;
    }

    /// Geometric draw counting failures before the first success:
    /// P(T = t) = (1-p)^t p, support {0,1,2,...}.
    long geometric(double success_prob) {
        if (!(success_prob > 0.0) || success_prob > 1.0)
            throw ConfigError("geometric: success probability must be in (0,1]");
        if (success_prob == 1.0) return 0;
        const double u = 1.0 - uniform01(); // in (0,1]
        return static_cast<long>(std::floor(std::log(u) / std::log1p(-success_prob)));
    }

    double gaussian() {
        // Box-Muller; consumes two uniforms per call, no cached spare.
        const double u1 = 1.0 - uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    std::uint64_t raw() { return eng_(); }

  private:
    std::mt19937_64 eng_;
};

/// Spawns independent substreams from one root seed. Keyed streams are
/// reproducible regardless of the order in which they are requested.
class RngRoot {
  public:
    explicit RngRoot(std::uint64_t root_seed) : root_(root_seed) {}

    RngStream stream(StreamPurpose purpose, std::uint64_t iteration = 0,
                     std::uint64_t batch = 0) const {
        std::uint64_t x = root_ ^ 0x6a09e667f3bcc908ULL;
        detail::splitmix64(x);
        x ^= static_cast<std::uint64_t>(purpose) * 0x9e3779b97f4a7c15ULL;
        detail::splitmix64(x);
        x ^= iteration * 0xc2b2ae3d27d4eb4fULL;
        detail::splitmix64(x);
        x ^= batch * 0x165667b19e3779f9ULL;
        const std::uint64_t seed = detail::splitmix64(x);
        return RngStream(seed);
    }

    std::uint64_t root_seed() const { return root_; }

  private:
    std::uint64_t root_;
};

} // namespace dspd
