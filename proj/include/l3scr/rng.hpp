// SPDX-License-Identifier: Apache-2.0
//
// l3scr: sparse channel reconstruction for fluid antenna mmWave uplinks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef L3SCR_RNG_H
#define L3SCR_RNG_H

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <utility>

namespace l3scr {

using cxd = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

// splitmix64 finalizer, used to derive independent stream seeds
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(a) ^ b);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_seed(mix_seed(a, b), c);
}

// Deterministic random source. mt19937_64 has a standard-specified bit
// stream; the uniform and normal transforms are done by hand so that output
// never depends on the library's unspecified distribution algorithms.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // uniform on the open interval (0, 1)
    double uniform() {
        return (double(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    // standard normal, Box-Muller, one spare cached
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        auto [a, b] = gaussian_pair();
        spare_ = b;
        has_spare_ = true;
        return a;
    }

    // circularly symmetric complex normal with total variance var
    cxd cgaussian(double var) {
        auto [a, b] = gaussian_pair();
        const double s = std::sqrt(0.5 * var);
        return {s * a, s * b};
    }

  private:
    std::pair<double, double> gaussian_pair() {
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return {r * std::cos(2.0 * pi * u2), r * std::sin(2.0 * pi * u2)};
    }

    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace l3scr

#endif
