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

#include "cvqkd/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cvqkd {

namespace {

// Below this excess over the vacuum variance, g is indistinguishable from its
// limit 0 and the (v-1) log(v-1) factor would evaluate 0 * (-inf) at v == 1.
constexpr double kVacuumTol = 1e-12;

double det2(double a, double b, double c, double d) { return a * d - b * c; }

// LU with partial pivoting. Cofactor expansion cancels ~V^3-sized products
// down to a ~V^2 result and the leftover noise is enough to push the smaller
// symplectic eigenvalue off 1 by more than the advertised 1e-9.
double det4(const TwoModeCovariance& s) {
    std::array<std::array<double, 4>, 4> a;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) a[r][c] = s(r, c);
    }
    double det = 1.0;
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (a[pivot][col] == 0.0) return 0.0;
        if (pivot != col) {
            std::swap(a[pivot], a[col]);
            det = -det;
        }
        det *= a[col][col];
        for (int r = col + 1; r < 4; ++r) {
            const double factor = a[r][col] / a[col][col];
            for (int c = col + 1; c < 4; ++c) a[r][c] -= factor * a[col][c];
        }
    }
    return det;
}

}  // namespace

double to_unit(double nats, InfoUnit unit) {
    return unit == InfoUnit::bits ? nats / std::numbers::ln2 : nats;
}

const char* to_string(InfoUnit unit) { return unit == InfoUnit::bits ? "bits" : "nats"; }

ChannelPoint ChannelPoint::from_modulation(double transmission, double modulation_variance) {
    return {transmission, 1.0 + modulation_variance};
}

void ChannelPoint::validate() const {
    if (!(transmission >= 0.0 && transmission <= 1.0)) {
        throw std::domain_error("channel point: transmission must lie in [0, 1]");
    }
    if (!(alice_variance >= 1.0)) {
        throw std::domain_error("channel point: alice variance must be >= 1 shot-noise unit");
    }
}

ChannelVariances channel_variances(const ChannelPoint& p) {
    p.validate();
    const double t = p.transmission;
    const double va = p.alice_variance;
    return {t * va + 1.0 - t, (1.0 - t) * va + t};
}

double entropy_g(double v, InfoUnit unit) {
    if (!(v >= 1.0 - kVacuumTol)) {
        throw std::domain_error("entropy_g: variance below the vacuum bound v >= 1");
    }
    if (v - 1.0 < kVacuumTol) return 0.0;
    const double half_excess = 0.5 * (v - 1.0);
    const double nats =
        std::log1p(half_excess) + half_excess * (std::log1p(1.0 / v) - std::log1p(-1.0 / v));
    return to_unit(nats, unit);
}

double entropy_g_asymptotic(double v, InfoUnit unit) {
    if (!(v > 0.0)) {
        throw std::domain_error("entropy_g_asymptotic: variance must be positive");
    }
    const double nats = std::log(v) + 1.0 - std::numbers::ln2;
    return to_unit(nats, unit);
}

double symmetrized_variance(double v_q, double v_p) {
    if (!(v_q > 0.0 && v_p > 0.0)) {
        throw std::domain_error("symmetrized_variance: quadrature variances must be positive");
    }
    return std::sqrt(v_q * v_p);
}

TwoModeCovariance TwoModeCovariance::identity() {
    TwoModeCovariance s;
    for (int i = 0; i < 4; ++i) s(i, i) = 1.0;
    return s;
}

bool TwoModeCovariance::is_symmetric(double tol) const {
    for (int r = 0; r < 4; ++r) {
        for (int c = r + 1; c < 4; ++c) {
            if (std::abs((*this)(r, c) - (*this)(c, r)) > tol) return false;
        }
    }
    return true;
}

TwoModeCovariance joint_output_covariance(const ChannelPoint& p) {
    const auto [vb, ve] = channel_variances(p);
    const double corr =
        std::sqrt(p.transmission * (1.0 - p.transmission)) * (p.alice_variance - 1.0);
    TwoModeCovariance s;
    s(0, 0) = s(1, 1) = vb;
    s(2, 2) = s(3, 3) = ve;
    s(0, 2) = s(2, 0) = corr;
    s(1, 3) = s(3, 1) = corr;
    return s;
}

SymplecticEigenvalues symplectic_eigenvalues(const TwoModeCovariance& sigma) {
    const double det_a = det2(sigma(0, 0), sigma(0, 1), sigma(1, 0), sigma(1, 1));
    const double det_b = det2(sigma(2, 2), sigma(2, 3), sigma(3, 2), sigma(3, 3));
    const double det_c = det2(sigma(0, 2), sigma(0, 3), sigma(1, 2), sigma(1, 3));
    const double det_sigma = det4(sigma);
    const double delta = det_a + det_b + 2.0 * det_c;
    double disc = delta * delta - 4.0 * det_sigma;
    if (disc < -1e-9) {
        throw std::domain_error("symplectic_eigenvalues: negative discriminant, not a valid "
                                "two-mode covariance matrix");
    }
    disc = std::max(disc, 0.0);
    const double nu_plus_sq = 0.5 * (delta + std::sqrt(disc));
    if (!(nu_plus_sq > 0.0)) {
        throw std::domain_error("symplectic_eigenvalues: nonpositive symplectic invariant");
    }
    // nu_minus via nu+^2 nu-^2 = det(sigma); the direct (delta - sqrt)/2 form
    // cancels to noise when the eigenvalues are far apart.
    const double nu_minus_sq = std::max(det_sigma / nu_plus_sq, 0.0);
    return {std::sqrt(nu_plus_sq), std::sqrt(nu_minus_sq)};
}

}  // namespace cvqkd
