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

#include "cvqkd/philox.hpp"

#include <cmath>
#include <numbers>

namespace cvqkd {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(std::array<std::uint32_t, 4>& ctr, std::array<std::uint32_t, 2>& key) {
    const std::uint64_t p0 = std::uint64_t(kMul0) * ctr[0];
    const std::uint64_t p1 = std::uint64_t(kMul1) * ctr[2];
    ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1),
           std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], std::uint32_t(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_block(std::uint64_t key, std::uint64_t counter_hi,
                                              std::uint64_t counter_lo) {
    std::array<std::uint32_t, 4> ctr = {std::uint32_t(counter_lo), std::uint32_t(counter_lo >> 32),
                                        std::uint32_t(counter_hi), std::uint32_t(counter_hi >> 32)};
    std::array<std::uint32_t, 2> k = {std::uint32_t(key), std::uint32_t(key >> 32)};
    for (int r = 0; r < 10; ++r) round_once(ctr, k);
    return ctr;
}

double uniform_from_bits(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (std::uint64_t(hi) << 32) | lo;
    return double(bits >> 11) * 0x1.0p-53;
}

NormalPair normal_pair(std::uint64_t key, std::uint64_t counter_hi, std::uint64_t counter_lo) {
    const auto block = philox4x32_block(key, counter_hi, counter_lo);
    const double u0 = uniform_from_bits(block[0], block[1]);
    const double u1 = uniform_from_bits(block[2], block[3]);
    const double radius = std::sqrt(-2.0 * std::log(1.0 - u0));
    const double angle = 2.0 * std::numbers::pi * u1;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace cvqkd
