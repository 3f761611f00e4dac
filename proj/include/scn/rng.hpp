/*
 * Copyright 2026 the scn authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SCN_RNG_HPP
#define SCN_RNG_HPP

#include <cmath>
#include <cstdint>
#include <vector>

namespace scn {

// Deterministic generator with an explicitly pinned algorithm (xoshiro256++
// seeded via splitmix64) so that identical seeds give identical streams on
// every platform and build. Standard-library distributions are avoided on
// purpose: their output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {
        std::uint64_t x = seed;
        for (auto& s : state_) s = splitmix64(x);
    }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; the spare deviate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double two_pi_u2 = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(two_pi_u2);
        has_spare_ = true;
        return r * std::cos(two_pi_u2);
    }

    // Unit-variance Laplace via inverse CDF (scale b = 1/sqrt(2)).
    double laplace_unit() {
        const double u = uniform01() - 0.5;
        const double b = 0.70710678118654752440;
        const double t = 1.0 - 2.0 * std::abs(u);
        return -b * sign(u) * std::log(t > 0.0 ? t : 0x1.0p-53);
    }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % n;
    }

    // Fisher-Yates permutation of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = i;
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(p[i - 1], p[j]);
        }
        return p;
    }

    // Independent stream derived from this generator's seed and an index;
    // used for reproducible per-task randomness under parallel execution.
    Rng child(std::uint64_t index) const {
        std::uint64_t x = seed_ + 0x9E3779B97F4A7C15ull * (index + 1);
        return Rng(splitmix64(x));
    }

private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    static double sign(double v) { return v < 0.0 ? -1.0 : 1.0; }

    std::uint64_t seed_;
    std::uint64_t state_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace scn

#endif
