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

#include <optional>
#include <string_view>

#include "cvqkd/gaussian.hpp"

namespace cvqkd {

enum class Measurement { collective, heterodyne, homodyne };
enum class Direction { direct, reverse, unconditional };

const char* to_string(Measurement m);
const char* to_string(Direction d);
std::optional<Measurement> measurement_from_string(std::string_view name);
std::optional<Direction> direction_from_string(std::string_view name);

/// One of the nine protocol variants: Bob's measurement x reconciliation
/// direction. "unconditional" is the direction-independent lower bound
/// I_XY - H(E).
struct ProtocolSpec {
    Measurement measurement = Measurement::collective;
    Direction direction = Direction::direct;
};

/// Signed decomposition of a secret-key rate. rate = bob_info - eve_info
/// holds exactly in the stored unit; negative rates are preserved, they tell
/// which side dominates.
struct RateBreakdown {
    double bob_info;
    double eve_info;
    double rate;
    InfoUnit unit;
};

/// Information on Bob's side about Alice's modulation:
///   collective  I_XB = g(V_B)         (Holevo, optimal joint measurement)
///   heterodyne  I_XY = log((V_B+1)/2) (one added unit of vacuum noise)
///   homodyne    I_XY = (1/2) log V_B  (noiseless single-quadrature readout)
double mutual_info_bob(Measurement m, const ChannelPoint& p, InfoUnit unit);

/// Eve's information about Alice's modulation (direct reconciliation):
/// g(V_E) for collective/heterodyne (Eve holds pure conditional states);
/// g(V_E) - g(sqrt(V_E)) for homodyne, where the unmeasured-quadrature
/// modulation leaves Eve mixed conditional states of symmetrized variance
/// sqrt(V_E).
double eve_info_direct(Measurement m, const ChannelPoint& p, InfoUnit unit);

/// Eve's information about Bob's data (reverse reconciliation):
///   collective  I_BE = g(V_B) + g(V_E) - g(V_A)  using H(BE) = H(A)
///   heterodyne  I_YE = g(V_E) - g(V_c)
///   homodyne    I_YE = g(V_E) - g(V_c)
/// with the conditional variances V_c of eve_conditional_variances. Requires
/// T > 0; the conditional variances degenerate at T = 0.
double eve_info_reverse(Measurement m, const ChannelPoint& p, InfoUnit unit);

/// Eve's per-quadrature conditional variances given Bob's measurement
/// outcome, and their symmetrized value fed to g. Defined for heterodyne
///   V(Q_E|Y) = V(P_E|Y) = (2 - T + T/V_A) / (T + (2 - T)/V_A)
/// and homodyne (Bob measures Q)
///   V(Q_E|Y) = 1 / (T + (1 - T)/V_A),  V(P_E|Y) = V_E.
/// Throws for collective (no classical outcome) and for T = 0.
struct EveConditionalVariances {
    double q;
    double p;
    double symmetrized;
};
EveConditionalVariances eve_conditional_variances(Measurement m, const ChannelPoint& p);

/// Variance of Bob's recorded outcome around Alice's modulation, per measured
/// quadrature: 2 for heterodyne (shot noise + detection unit), 1 for
/// homodyne. Throws for collective.
double bob_conditional_variance(Measurement m);

/// Signed secret-key rate for one protocol variant at one channel point.
/// direct: mutual_info_bob - eve_info_direct; reverse: mutual_info_bob -
/// eve_info_reverse; unconditional: mutual_info_bob - H(E) with H(E) = g(V_E)
/// for collective/heterodyne and g(sqrt(V_E)) for homodyne (the revealed
/// P-modulation case).
RateBreakdown key_rate(const ProtocolSpec& spec, const ChannelPoint& p, InfoUnit unit);

/// Infinite-modulation (V_A -> inf) limit of the key rate:
///   direct   coll log(T/(1-T)),  het log(T/(1-T)) - log e,
///            hom (1/2) log(T/(1-T))
///   reverse  coll log(1/(1-T)),  het (1/T) log(1/(1-T)) - log e,
///            hom (1/2) log(1/(1-T))
///   uncond   coll/het as direct,  hom (1/2) log((T/(1-T)) 4/e^2)
/// Throws std::domain_error for T outside (0, 1).
double key_rate_asymptotic(const ProtocolSpec& spec, double transmission, InfoUnit unit);

/// Strong-loss (1/V_A << T << 1) limit of the reverse rates: T log e for
/// collective, (T/2) log e for heterodyne and homodyne. within_regime is
/// false for T >= 0.1, where the limit is quoted outside its validity range.
/// Throws std::invalid_argument for direct/unconditional specs.
struct StrongLossRate {
    double rate;
    bool within_regime;
};
StrongLossRate key_rate_strong_loss(const ProtocolSpec& spec, double transmission, InfoUnit unit);

/// Threshold query: alice_variance empty means the infinite-modulation
/// regime, otherwise the finite-V_A root is located by bisection.
struct ThresholdQuery {
    ProtocolSpec spec;
    std::optional<double> alice_variance;
};

/// Smallest transmission above which the key rate is positive.
/// Infinite modulation returns the analytic root (1/2, e/(e+1),
/// e^2/(e^2+4), ... per variant; 0 for reverse protocols, which stay positive
/// for every T > 0). Finite V_A bisects the exact rate on (1e-9, 1 - 1e-9) to
/// an absolute tolerance of 1e-10 and throws std::domain_error when there is
/// no sign change on the bracket.
double threshold_transmission(const ThresholdQuery& q);

}  // namespace cvqkd
