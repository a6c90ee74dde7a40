// Copyright 2026 The cvqkd-rates Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>

namespace cvqkd {

/// Philox-4x32-10 counter-based random block function (Salmon et al.,
/// "Parallel Random Numbers: As Easy as 1, 2, 3", SC'11). Counter-based
/// generation gives bitwise-reproducible streams across platforms and lets
/// callers address disjoint sub-streams directly: every (key, counter) pair
/// maps to an independent 128-bit block with no sequential state.
std::array<std::uint32_t, 4> philox4x32_block(std::uint64_t key, std::uint64_t counter_hi,
                                              std::uint64_t counter_lo);

/// Uniform double in [0, 1) from 64 random bits (top 53 bits of hi:lo).
double uniform_from_bits(std::uint32_t hi, std::uint32_t lo);

/// Two independent standard normal deviates via the Box-Muller transform of
/// one Philox block. The log argument is 1 - u in (0, 1], so the transform
/// never sees zero.
struct NormalPair {
    double first;
    double second;
};
NormalPair normal_pair(std::uint64_t key, std::uint64_t counter_hi, std::uint64_t counter_lo);

}  // namespace cvqkd
