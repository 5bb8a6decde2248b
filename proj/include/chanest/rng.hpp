#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "chanest/types.hpp"

namespace chanest {

// Seedable generator with explicit, platform-independent conversions so that
// every experiment is bit-reproducible given (seed, config). Child streams
// are derived with splitmix64 so all methods in a scenario can share data
// without coupling their draw order.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), state_(splitmix(seed ^ 0x9e3779b97f4a7c15ull)) {
        if (state_ == 0) state_ = 0x1ull;
    }

    std::uint64_t next_u64() {
        // xorshift64* on a splitmix-initialized state
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 0x2545f4914f6cdd1dull;
    }

    // uniform in [0, 1) with 53-bit resolution
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // Box-Muller; u clamped away from 0
        double u = uniform01();
        if (u < 1e-300) u = 1e-300;
        const double r = std::sqrt(-2.0 * std::log(u));
        const double phi = 2.0 * std::numbers::pi * uniform01();
        spare_ = r * std::sin(phi);
        have_spare_ = true;
        return r * std::cos(phi);
    }

    // circularly symmetric complex gaussian, E|z|^2 = var
    cplx complex_gaussian(double var) {
        const double s = std::sqrt(var / 2.0);
        const double re = gaussian();
        const double im = gaussian();
        return {s * re, s * im};
    }

    // independent child stream; does not disturb this stream's state
    Rng derive(std::uint64_t stream_id) const { return Rng(splitmix(seed_ + 0x9e3779b97f4a7c15ull * (stream_id + 1))); }

    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

  private:
    std::uint64_t seed_;
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace chanest
