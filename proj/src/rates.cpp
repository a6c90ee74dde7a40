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

#include "cvqkd/rates.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cvqkd {

namespace {

double g_nats(double v) { return entropy_g(v, InfoUnit::nats); }

double bob_info_nats(Measurement m, const ChannelVariances& cv) {
    switch (m) {
        case Measurement::collective:
            return g_nats(cv.bob);  // I_XB = H(B), pure conditional states
        case Measurement::heterodyne:
            return std::log1p(0.5 * (cv.bob - 1.0));  // log((V_B + 1)/2)
        case Measurement::homodyne:
            return 0.5 * std::log(cv.bob);
    }
    throw std::invalid_argument("mutual_info_bob: unknown measurement");
}

double eve_info_direct_nats(Measurement m, const ChannelVariances& cv) {
    if (m == Measurement::homodyne) {
        return g_nats(cv.eve) - g_nats(std::sqrt(cv.eve));
    }
    return g_nats(cv.eve);
}

double eve_info_reverse_nats(Measurement m, const ChannelPoint& p, const ChannelVariances& cv) {
    if (!(p.transmission > 0.0)) {
        throw std::domain_error(
            "eve_info_reverse: conditional variances degenerate at transmission 0");
    }
    if (m == Measurement::collective) {
        // I_BE = H(B) + H(E) - H(BE) with H(BE) = H(A): the joint output is a
        // symplectic image of Alice's state and vacuum.
        return g_nats(cv.bob) + g_nats(cv.eve) - g_nats(p.alice_variance);
    }
    return g_nats(cv.eve) - g_nats(eve_conditional_variances(m, p).symmetrized);
}

double eve_entropy_nats(Measurement m, const ChannelVariances& cv) {
    if (m == Measurement::homodyne) {
        return g_nats(std::sqrt(cv.eve));  // P-modulation revealed
    }
    return g_nats(cv.eve);
}

}  // namespace

const char* to_string(Measurement m) {
    switch (m) {
        case Measurement::collective: return "collective";
        case Measurement::heterodyne: return "heterodyne";
        case Measurement::homodyne: return "homodyne";
    }
    return "?";
}

const char* to_string(Direction d) {
    switch (d) {
        case Direction::direct: return "direct";
        case Direction::reverse: return "reverse";
        case Direction::unconditional: return "unconditional";
    }
    return "?";
}

std::optional<Measurement> measurement_from_string(std::string_view name) {
    if (name == "collective") return Measurement::collective;
    if (name == "heterodyne") return Measurement::heterodyne;
    if (name == "homodyne") return Measurement::homodyne;
    return std::nullopt;
}

std::optional<Direction> direction_from_string(std::string_view name) {
    if (name == "direct") return Direction::direct;
    if (name == "reverse") return Direction::reverse;
    if (name == "unconditional") return Direction::unconditional;
    return std::nullopt;
}

double mutual_info_bob(Measurement m, const ChannelPoint& p, InfoUnit unit) {
    return to_unit(bob_info_nats(m, channel_variances(p)), unit);
}

double eve_info_direct(Measurement m, const ChannelPoint& p, InfoUnit unit) {
    return to_unit(eve_info_direct_nats(m, channel_variances(p)), unit);
}

double eve_info_reverse(Measurement m, const ChannelPoint& p, InfoUnit unit) {
    return to_unit(eve_info_reverse_nats(m, p, channel_variances(p)), unit);
}

EveConditionalVariances eve_conditional_variances(Measurement m, const ChannelPoint& p) {
    p.validate();
    if (m == Measurement::collective) {
        throw std::invalid_argument(
            "eve_conditional_variances: collective measurement has no classical outcome");
    }
    const double t = p.transmission;
    const double va = p.alice_variance;
    if (!(t > 0.0)) {
        throw std::domain_error(
            "eve_conditional_variances: degenerate conditioning at transmission 0");
    }
    if (m == Measurement::heterodyne) {
        const double vc = (2.0 - t + t / va) / (t + (2.0 - t) / va);
        return {vc, vc, vc};
    }
    const double vq = 1.0 / (t + (1.0 - t) / va);
    const double vp = channel_variances(p).eve;
    return {vq, vp, std::sqrt(vq * vp)};
}

double bob_conditional_variance(Measurement m) {
    switch (m) {
        case Measurement::heterodyne: return 2.0;  // V(B|X) = 1 plus one detection unit
        case Measurement::homodyne: return 1.0;
        case Measurement::collective: break;
    }
    throw std::invalid_argument(
        "bob_conditional_variance: collective measurement has no classical outcome");
}

RateBreakdown key_rate(const ProtocolSpec& spec, const ChannelPoint& p, InfoUnit unit) {
    const auto cv = channel_variances(p);
    const double bob = bob_info_nats(spec.measurement, cv);
    double eve = 0.0;
    switch (spec.direction) {
        case Direction::direct:
            eve = eve_info_direct_nats(spec.measurement, cv);
            break;
        case Direction::reverse:
            eve = eve_info_reverse_nats(spec.measurement, p, cv);
            break;
        case Direction::unconditional:
            eve = eve_entropy_nats(spec.measurement, cv);
            break;
    }
    const double bob_u = to_unit(bob, unit);
    const double eve_u = to_unit(eve, unit);
    return {bob_u, eve_u, bob_u - eve_u, unit};
}

double key_rate_asymptotic(const ProtocolSpec& spec, double transmission, InfoUnit unit) {
    if (!(transmission > 0.0 && transmission < 1.0)) {
        throw std::domain_error("key_rate_asymptotic: transmission must lie strictly in (0, 1)");
    }
    const double t = transmission;
    const double log_ratio = std::log(t / (1.0 - t));
    const double log_gain = -std::log1p(-t);  // log(1/(1-T))
    double nats = 0.0;
    switch (spec.direction) {
        case Direction::direct:
            switch (spec.measurement) {
                case Measurement::collective: nats = log_ratio; break;
                case Measurement::heterodyne: nats = log_ratio - 1.0; break;
                case Measurement::homodyne: nats = 0.5 * log_ratio; break;
            }
            break;
        case Direction::reverse:
            switch (spec.measurement) {
                case Measurement::collective: nats = log_gain; break;
                case Measurement::heterodyne: nats = log_gain / t - 1.0; break;
                case Measurement::homodyne: nats = 0.5 * log_gain; break;
            }
            break;
        case Direction::unconditional:
            switch (spec.measurement) {
                case Measurement::collective: nats = log_ratio; break;
                case Measurement::heterodyne: nats = log_ratio - 1.0; break;
                case Measurement::homodyne:
                    nats = 0.5 * log_ratio + std::numbers::ln2 - 1.0;  // (1/2) log((T/(1-T)) 4/e^2)
                    break;
            }
            break;
    }
    return to_unit(nats, unit);
}

StrongLossRate key_rate_strong_loss(const ProtocolSpec& spec, double transmission, InfoUnit unit) {
    if (spec.direction != Direction::reverse) {
        throw std::invalid_argument(
            "key_rate_strong_loss: defined for reverse reconciliation only");
    }
    if (!(transmission > 0.0 && transmission < 1.0)) {
        throw std::domain_error("key_rate_strong_loss: transmission must lie strictly in (0, 1)");
    }
    const double nats =
        spec.measurement == Measurement::collective ? transmission : 0.5 * transmission;
    return {to_unit(nats, unit), transmission < 0.1};
}

double threshold_transmission(const ThresholdQuery& q) {
    const double e = std::numbers::e;
    if (!q.alice_variance) {
        if (q.spec.direction == Direction::reverse) return 0.0;  // positive for every T > 0
        switch (q.spec.measurement) {
            case Measurement::collective: return 0.5;
            case Measurement::heterodyne: return e / (e + 1.0);
            case Measurement::homodyne:
                return q.spec.direction == Direction::unconditional ? e * e / (e * e + 4.0) : 0.5;
        }
        throw std::invalid_argument("threshold_transmission: unknown measurement");
    }

    const double va = *q.alice_variance;
    constexpr double kEdge = 1e-9;
    constexpr double kTol = 1e-10;
    const auto rate_at = [&](double t) {
        return key_rate(q.spec, ChannelPoint{t, va}, InfoUnit::nats).rate;
    };
    double lo = kEdge;
    double hi = 1.0 - kEdge;
    if (rate_at(lo) >= 0.0) {
        throw std::domain_error(
            "threshold_transmission: rate is nonnegative on the whole bracket, no root");
    }
    if (rate_at(hi) <= 0.0) {
        throw std::domain_error(
            "threshold_transmission: rate is negative on the whole bracket, no root");
    }
    while (hi - lo > kTol) {
        const double mid = 0.5 * (lo + hi);
        (rate_at(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace cvqkd
