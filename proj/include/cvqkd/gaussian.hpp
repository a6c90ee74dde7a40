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

namespace cvqkd {

/// Logarithm base selector for information quantities. All internal
/// computation is carried out in nats; the conversion to bits happens exactly
/// once, at the output boundary, so repeated base changes cannot accumulate.
enum class InfoUnit { bits, nats };

/// Converts a value in nats to the requested unit (bits = nats / ln 2).
double to_unit(double nats, InfoUnit unit);

const char* to_string(InfoUnit unit);

/// A channel operating point: beamsplitter transmission T in [0, 1] and
/// Alice's total per-quadrature state variance V_A >= 1 in shot-noise units
/// (vacuum variance = 1). The Gaussian modulation variance is V_A - 1.
struct ChannelPoint {
    double transmission = 1.0;
    double alice_variance = 1.0;

    /// Builds a point from the modulation variance V_A - 1 instead of V_A.
    static ChannelPoint from_modulation(double transmission, double modulation_variance);

    /// Throws std::domain_error unless 0 <= T <= 1 and V_A >= 1.
    void validate() const;
};

/// Per-quadrature variances of the two beamsplitter output modes.
struct ChannelVariances {
    double bob;  // V_B = T V_A + 1 - T
    double eve;  // V_E = (1 - T) V_A + T
};

ChannelVariances channel_variances(const ChannelPoint& p);

/// Von Neumann entropy of a single-mode Gaussian state with symmetrized
/// quadrature variance v:
///
///   g(v) = ((v+1)/2) log((v+1)/2) - ((v-1)/2) log((v-1)/2)
///
/// Evaluated as log((v+1)/2) + ((v-1)/2) log((1+1/v)/(1-1/v)) with log1p,
/// which stays accurate for v up to ~1e12 where the two-term product form
/// cancels catastrophically. Continuous at v = 1 with g(1) = 0. Inputs up to
/// 1e-12 below 1 are clamped to 1; anything lower throws std::domain_error.
double entropy_g(double v, InfoUnit unit);

/// Large-v expansion log(v) + log(e/2) of entropy_g. The truncation error is
/// O(1/v). Throws std::domain_error for v <= 0.
double entropy_g_asymptotic(double v, InfoUnit unit);

/// sqrt(v_q * v_p). Throws std::domain_error on nonpositive input.
double symmetrized_variance(double v_q, double v_p);

/// Covariance matrix of a joint Bob/Eve output state over the quadrature
/// ordering (Q_B, P_B, Q_E, P_E), in shot-noise units.
struct TwoModeCovariance {
    std::array<double, 16> m{};  // row-major 4x4

    double operator()(int row, int col) const { return m[row * 4 + col]; }
    double& operator()(int row, int col) { return m[row * 4 + col]; }

    static TwoModeCovariance identity();
    bool is_symmetric(double tol = 1e-9) const;
};

/// Covariance of the joint Bob/Eve state produced by mixing Alice's mode with
/// vacuum on the channel beamsplitter, with the sign convention
/// B = sqrt(T) A + sqrt(1-T) N and E = sqrt(1-T) A - sqrt(T) N. Diagonal
/// blocks are V_B I and V_E I; the off-diagonal block is
/// sqrt(T(1-T)) (V_A - 1) I. The entropy-relevant invariants do not depend on
/// the beamsplitter phase.
TwoModeCovariance joint_output_covariance(const ChannelPoint& p);

struct SymplecticEigenvalues {
    double nu_plus;   // >= nu_minus
    double nu_minus;  // >= 1 - 1e-9 for a physical state
};

/// Symplectic eigenvalues from the invariants Delta = det A + det B + 2 det C
/// and det(sigma) of the block decomposition sigma = [[A, C], [C^T, B]]:
///
///   nu_{+-}^2 = (Delta +- sqrt(Delta^2 - 4 det sigma)) / 2
///
/// nu_minus is recovered as det(sigma) / nu_plus^2 to avoid the cancellation
/// in Delta - sqrt(...). Throws std::domain_error if the discriminant is
/// below -1e-9 (sigma is not a valid covariance matrix).
SymplecticEigenvalues symplectic_eigenvalues(const TwoModeCovariance& sigma);

}  // namespace cvqkd
