/*
   Copyright 2026 The nlvr Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cstdint>
#include <random>

namespace nlvr {

/// SplitMix64 mixing step. Used to derive independent per-task seeds from a
/// base seed; the full 64-bit avalanche makes nearby inputs uncorrelated.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Seed for the idx-th task of a seeded run. Two rounds of SplitMix64 keep
/// streams disjoint even when base seeds themselves are small integers.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t idx) {
    return splitmix64(splitmix64(base) + idx);
}

/// Uniform double in [0,1) with 53 random bits, independent of any
/// library distribution implementation.
template <class Rng>
double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Unbiased uniform integer in [0, bound) by rejection.
template <class Rng>
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t v = rng();
    while (v >= limit) v = rng();
    return v % bound;
}

}  // namespace nlvr
