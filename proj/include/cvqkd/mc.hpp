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

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cvqkd/rates.hpp"

namespace cvqkd {

/// Configuration of one classical Monte Carlo run: Gaussian modulation of
/// variance V_mod = V_A - 1 per quadrature, beamsplitter of transmission T,
/// and homodyne or heterodyne detection on Bob's mode. Output is a pure
/// function of (config, seed); sub-streams are indexed per pulse, so batches
/// can be partitioned across workers without overlap.
struct SimConfig {
    double transmission = 1.0;
    double modulation_variance = 0.0;
    Measurement measurement = Measurement::heterodyne;  // homodyne or heterodyne
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    std::size_t max_samples = 100'000'000;  // resource cap

    ChannelPoint channel_point() const;
    void validate() const;
};

/// Bob's measured basis for a pulse. Heterodyne reads both quadratures;
/// homodyne reads exactly one, chosen uniformly per pulse.
enum class Basis : std::uint8_t { q, p, both };

const char* to_string(Basis b);

/// Column-wise record of a simulated batch. Homodyne pulses carry exactly one
/// informative Bob outcome; the unmeasured quadrature is stored as NaN.
/// a and b (the mode quadratures before detection) are kept alongside the
/// detected outcomes so that channel bookkeeping can be checked directly.
struct SampleBatch {
    SimConfig config;
    std::vector<double> x_q, x_p;  // Alice's modulation values
    std::vector<double> a_q, a_p;  // Alice's mode: modulation + shot noise
    std::vector<double> b_q, b_p;  // Bob's mode after the beamsplitter
    std::vector<double> y_q, y_p;  // Bob's detected outcomes (NaN if unmeasured)
    std::vector<double> e_q, e_p;  // Eve's reflected mode
    std::vector<Basis> basis;

    std::size_t size() const { return basis.size(); }
};

/// Simulates one batch. Per pulse: x ~ N(0, V_mod) per quadrature,
/// a = x + vacuum, then b = sqrt(T) a + sqrt(1-T) v and
/// e = sqrt(1-T) a - sqrt(T) v with fresh unit vacuum v. Heterodyne adds one
/// unit of detection noise per quadrature; homodyne copies the measured
/// quadrature of b exactly. Throws std::length_error when samples exceeds the
/// configured cap.
SampleBatch simulate_batch(const SimConfig& c);

/// A point estimate with its asymptotic-normal-theory standard error.
struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Unbiased sample variance; SE = s^2 sqrt(2/(n-1)).
Estimate sample_variance(std::span<const double> u);

/// Unbiased sample covariance; SE = sqrt((s_u^2 s_w^2 + c^2)/(n-1)).
Estimate sample_covariance(std::span<const double> u, std::span<const double> w);

/// Conditional variance V(u|w): residual variance of the least-squares
/// regression of u on w, divided by n-2. Throws std::invalid_argument when
/// the regressor variance is zero (degenerate input).
Estimate residual_variance(std::span<const double> u, std::span<const double> w);

/// Per-quadrature conditional statistics. For heterodyne there is one block
/// per quadrature over all pulses; for homodyne one block per sifted subset.
struct ConditionalBlock {
    Basis basis = Basis::both;
    std::size_t n = 0;
    Estimate var_y;
    Estimate var_y_given_x;        // outcome regressed on the matching modulation
    Estimate var_e_same_given_y;   // Eve's matching quadrature regressed on y
    Estimate var_e_other_given_y;  // Eve's orthogonal quadrature regressed on y
    Estimate mutual_info;          // (1/2) log(var_y / var_y_given_x), nats
    bool modulated = true;         // false when V_mod = 0 (regression on x skipped)
};

struct MomentReport {
    std::size_t n = 0;
    Estimate var_x_q, var_x_p;
    Estimate var_a_q, var_a_p;
    Estimate var_b_q, var_b_p;
    Estimate var_e_q, var_e_p;
    Estimate cov_be_q, cov_be_p;
    std::vector<ConditionalBlock> blocks;  // Q first, then P
};

/// Empirical moments of a batch. Requires n >= 2 (and >= 2 pulses per sifted
/// subset for homodyne).
MomentReport estimate_moments(const SampleBatch& batch);

/// Shannon mutual information of a Gaussian channel per quadrature,
/// (1/2) log(v / v_cond). Throws std::domain_error unless v >= v_cond > 0.
double gaussian_mi(double v, double v_cond, InfoUnit unit);

/// One analytic-vs-empirical comparison row. flagged when |z| > 4.
struct ValidationRow {
    std::string quantity;
    double analytic = 0.0;
    double empirical = 0.0;
    double std_error = 0.0;
    double z = 0.0;
    bool flagged = false;
};

struct ValidationReport {
    ChannelPoint point;
    Measurement measurement = Measurement::heterodyne;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::vector<ValidationRow> rows;

    bool any_flagged() const;
    const ValidationRow* find(std::string_view quantity) const;
};

/// Simulates a batch and compares the empirical channel statistics and
/// classical mutual informations against the closed forms: V_B, V_E per
/// quadrature, V(Y|X), V(E|Y) per quadrature, and the measurement's mutual
/// information.
ValidationReport validation_report(const ChannelPoint& p, Measurement m, std::size_t n,
                                   std::uint64_t seed);

/// Batch dump: header index,basis,x_Q,x_P,y_Q,y_P,e_Q,e_P with
/// 17-significant-digit decimals (lossless IEEE double round-trip).
void write_batch_csv(const SampleBatch& batch, std::ostream& out);

}  // namespace cvqkd
