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

#include "cvqkd/mc.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "cvqkd/philox.hpp"

namespace cvqkd {

namespace {

// Per-pulse sub-stream layout: counter_hi selects the variate block,
// counter_lo is the pulse index. Unused blocks are simply never evaluated;
// counter-based streams do not shift.
enum BlockIndex : std::uint64_t {
    kBlockModulation = 0,
    kBlockShotNoise = 1,
    kBlockChannelVacuum = 2,
    kBlockDetection = 3,
    kBlockBasis = 4,
};

double mean_of(std::span<const double> u) {
    double s = 0.0;
    for (double v : u) s += v;
    return s / double(u.size());
}

void require_pairs(std::size_t nu, std::size_t nw, const char* what) {
    if (nu != nw) throw std::invalid_argument(std::string(what) + ": column length mismatch");
}

}  // namespace

ChannelPoint SimConfig::channel_point() const {
    return ChannelPoint::from_modulation(transmission, modulation_variance);
}

void SimConfig::validate() const {
    if (!(transmission >= 0.0 && transmission <= 1.0)) {
        throw std::domain_error("sim config: transmission must lie in [0, 1]");
    }
    if (!(modulation_variance >= 0.0)) {
        throw std::domain_error("sim config: modulation variance must be >= 0");
    }
    if (measurement == Measurement::collective) {
        throw std::invalid_argument(
            "sim config: only homodyne and heterodyne detection can be simulated classically");
    }
    if (samples < 1) {
        throw std::domain_error("sim config: sample count must be >= 1");
    }
    if (samples > max_samples) {
        throw std::length_error("sim config: sample count exceeds the configured cap");
    }
}

const char* to_string(Basis b) {
    switch (b) {
        case Basis::q: return "q";
        case Basis::p: return "p";
        case Basis::both: return "both";
    }
    return "?";
}

SampleBatch simulate_batch(const SimConfig& c) {
    c.validate();
    const std::size_t n = c.samples;
    const double mod_sd = std::sqrt(c.modulation_variance);
    const double root_t = std::sqrt(c.transmission);
    const double root_r = std::sqrt(1.0 - c.transmission);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const bool heterodyne = c.measurement == Measurement::heterodyne;

    SampleBatch batch;
    batch.config = c;
    for (auto* col : {&batch.x_q, &batch.x_p, &batch.a_q, &batch.a_p, &batch.b_q, &batch.b_p,
                      &batch.y_q, &batch.y_p, &batch.e_q, &batch.e_p}) {
        col->resize(n);
    }
    batch.basis.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        const auto mod = normal_pair(c.seed, kBlockModulation, i);
        const auto shot = normal_pair(c.seed, kBlockShotNoise, i);
        const auto vac = normal_pair(c.seed, kBlockChannelVacuum, i);

        const double xq = mod_sd * mod.first;
        const double xp = mod_sd * mod.second;
        const double aq = xq + shot.first;
        const double ap = xp + shot.second;
        const double bq = root_t * aq + root_r * vac.first;
        const double bp = root_t * ap + root_r * vac.second;
        const double eq = root_r * aq - root_t * vac.first;
        const double ep = root_r * ap - root_t * vac.second;

        batch.x_q[i] = xq;
        batch.x_p[i] = xp;
        batch.a_q[i] = aq;
        batch.a_p[i] = ap;
        batch.b_q[i] = bq;
        batch.b_p[i] = bp;
        batch.e_q[i] = eq;
        batch.e_p[i] = ep;

        if (heterodyne) {
            const auto det = normal_pair(c.seed, kBlockDetection, i);
            batch.y_q[i] = bq + det.first;
            batch.y_p[i] = bp + det.second;
            batch.basis[i] = Basis::both;
        } else {
            const auto block = philox4x32_block(c.seed, kBlockBasis, i);
            const bool measure_q = uniform_from_bits(block[0], block[1]) < 0.5;
            batch.basis[i] = measure_q ? Basis::q : Basis::p;
            batch.y_q[i] = measure_q ? bq : nan;
            batch.y_p[i] = measure_q ? nan : bp;
        }
    }
    return batch;
}

Estimate sample_variance(std::span<const double> u) {
    const std::size_t n = u.size();
    if (n < 2) throw std::invalid_argument("sample_variance: need at least two samples");
    const double mean = mean_of(u);
    double ss = 0.0;
    for (double v : u) ss += (v - mean) * (v - mean);
    const double var = ss / double(n - 1);
    return {var, var * std::sqrt(2.0 / double(n - 1))};
}

Estimate sample_covariance(std::span<const double> u, std::span<const double> w) {
    require_pairs(u.size(), w.size(), "sample_covariance");
    const std::size_t n = u.size();
    if (n < 2) throw std::invalid_argument("sample_covariance: need at least two samples");
    const double mu = mean_of(u);
    const double mw = mean_of(w);
    double suw = 0.0, suu = 0.0, sww = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double du = u[i] - mu;
        const double dw = w[i] - mw;
        suw += du * dw;
        suu += du * du;
        sww += dw * dw;
    }
    const double cov = suw / double(n - 1);
    const double var_u = suu / double(n - 1);
    const double var_w = sww / double(n - 1);
    return {cov, std::sqrt((var_u * var_w + cov * cov) / double(n - 1))};
}

Estimate residual_variance(std::span<const double> u, std::span<const double> w) {
    require_pairs(u.size(), w.size(), "residual_variance");
    const std::size_t n = u.size();
    if (n < 3) throw std::invalid_argument("residual_variance: need at least three samples");
    const double mu = mean_of(u);
    const double mw = mean_of(w);
    double suw = 0.0, sww = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        suw += (u[i] - mu) * (w[i] - mw);
        sww += (w[i] - mw) * (w[i] - mw);
    }
    if (sww == 0.0) {
        throw std::invalid_argument("residual_variance: zero-variance regressor");
    }
    const double beta = suw / sww;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = (u[i] - mu) - beta * (w[i] - mw);
        ss += r * r;
    }
    const double var = ss / double(n - 2);
    return {var, var * std::sqrt(2.0 / double(n - 2))};
}

double gaussian_mi(double v, double v_cond, InfoUnit unit) {
    if (!(v_cond > 0.0)) {
        throw std::domain_error("gaussian_mi: conditional variance must be positive");
    }
    if (v < v_cond) {
        throw std::domain_error("gaussian_mi: total variance below conditional variance");
    }
    return to_unit(0.5 * std::log(v / v_cond), unit);
}

namespace {

ConditionalBlock make_block(Basis basis, std::span<const double> y, std::span<const double> x,
                            std::span<const double> e_same, std::span<const double> e_other,
                            bool modulated) {
    ConditionalBlock block;
    block.basis = basis;
    block.n = y.size();
    block.modulated = modulated;
    block.var_y = sample_variance(y);
    block.var_e_same_given_y = residual_variance(e_same, y);
    block.var_e_other_given_y = residual_variance(e_other, y);
    if (!modulated) {
        // Conditioning on a constant: V(Y|X) = V(Y) and the mutual
        // information vanishes identically.
        block.var_y_given_x = block.var_y;
        block.mutual_info = {0.0, 1.0 / double(block.n)};
        return block;
    }
    block.var_y_given_x = residual_variance(y, x);
    const auto corr = sample_covariance(y, x);
    const double rho =
        corr.value / std::sqrt(block.var_y.value * sample_variance(x).value);
    // r^2 < 1/(n-1) makes the sample V(Y) dip below the df-corrected residual
    // variance; the true MI is nonnegative, so truncate instead of failing.
    block.mutual_info.value =
        block.var_y.value >= block.var_y_given_x.value
            ? gaussian_mi(block.var_y.value, block.var_y_given_x.value, InfoUnit::nats)
            : 0.0;
    // Delta method: Var[(1/2) log(V/V|x)] ~= rho^2 / n, floored by the O(1/n)
    // estimator bias at rho = 0.
    block.mutual_info.std_error =
        std::max(std::abs(rho) / std::sqrt(double(block.n)), 1.0 / double(block.n));
    return block;
}

std::vector<double> sift(const SampleBatch& batch, const std::vector<double>& col, Basis want) {
    std::vector<double> out;
    out.reserve(batch.size() / 2 + 1);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (batch.basis[i] == want) out.push_back(col[i]);
    }
    return out;
}

}  // namespace

MomentReport estimate_moments(const SampleBatch& batch) {
    const std::size_t n = batch.size();
    if (n < 2) throw std::invalid_argument("estimate_moments: need at least two pulses");
    const bool modulated = batch.config.modulation_variance > 0.0;

    MomentReport report;
    report.n = n;
    report.var_x_q = modulated ? sample_variance(batch.x_q) : Estimate{0.0, 0.0};
    report.var_x_p = modulated ? sample_variance(batch.x_p) : Estimate{0.0, 0.0};
    report.var_a_q = sample_variance(batch.a_q);
    report.var_a_p = sample_variance(batch.a_p);
    report.var_b_q = sample_variance(batch.b_q);
    report.var_b_p = sample_variance(batch.b_p);
    report.var_e_q = sample_variance(batch.e_q);
    report.var_e_p = sample_variance(batch.e_p);
    report.cov_be_q = sample_covariance(batch.b_q, batch.e_q);
    report.cov_be_p = sample_covariance(batch.b_p, batch.e_p);

    if (batch.config.measurement == Measurement::heterodyne) {
        report.blocks.push_back(
            make_block(Basis::q, batch.y_q, batch.x_q, batch.e_q, batch.e_p, modulated));
        report.blocks.push_back(
            make_block(Basis::p, batch.y_p, batch.x_p, batch.e_p, batch.e_q, modulated));
    } else {
        const auto yq = sift(batch, batch.y_q, Basis::q);
        const auto yp = sift(batch, batch.y_p, Basis::p);
        report.blocks.push_back(make_block(Basis::q, yq, sift(batch, batch.x_q, Basis::q),
                                           sift(batch, batch.e_q, Basis::q),
                                           sift(batch, batch.e_p, Basis::q), modulated));
        report.blocks.push_back(make_block(Basis::p, yp, sift(batch, batch.x_p, Basis::p),
                                           sift(batch, batch.e_p, Basis::p),
                                           sift(batch, batch.e_q, Basis::p), modulated));
    }
    return report;
}

bool ValidationReport::any_flagged() const {
    for (const auto& row : rows) {
        if (row.flagged) return true;
    }
    return false;
}

const ValidationRow* ValidationReport::find(std::string_view quantity) const {
    for (const auto& row : rows) {
        if (row.quantity == quantity) return &row;
    }
    return nullptr;
}

namespace {

ValidationRow make_row(std::string quantity, double analytic, const Estimate& est) {
    ValidationRow row;
    row.quantity = std::move(quantity);
    row.analytic = analytic;
    row.empirical = est.value;
    row.std_error = est.std_error;
    row.z = est.std_error > 0.0 ? (est.value - analytic) / est.std_error
                                : (est.value == analytic ? 0.0
                                                         : std::numeric_limits<double>::infinity());
    row.flagged = !(std::abs(row.z) <= 4.0);
    return row;
}

}  // namespace

ValidationReport validation_report(const ChannelPoint& p, Measurement m, std::size_t n,
                                   std::uint64_t seed) {
    p.validate();
    SimConfig config;
    config.transmission = p.transmission;
    config.modulation_variance = p.alice_variance - 1.0;
    config.measurement = m;
    config.samples = n;
    config.seed = seed;

    const auto batch = simulate_batch(config);
    const auto moments = estimate_moments(batch);
    const auto cv = channel_variances(p);

    ValidationReport report;
    report.point = p;
    report.measurement = m;
    report.n = n;
    report.seed = seed;

    report.rows.push_back(make_row("var_b_q", cv.bob, moments.var_b_q));
    report.rows.push_back(make_row("var_b_p", cv.bob, moments.var_b_p));
    report.rows.push_back(make_row("var_e_q", cv.eve, moments.var_e_q));
    report.rows.push_back(make_row("var_e_p", cv.eve, moments.var_e_p));

    const double v_y_given_x = bob_conditional_variance(m);
    // Eve's conditional variances need T > 0; at T = 0 there is no outcome to
    // condition on and validation_report propagates the domain error.
    const auto eve_cond = eve_conditional_variances(m, p);
    const bool heterodyne = m == Measurement::heterodyne;
    const double mi_analytic =
        heterodyne ? std::log1p(0.5 * (cv.bob - 1.0)) : 0.5 * std::log(cv.bob);

    double mi_total = 0.0;
    double mi_var = 0.0;
    for (const auto& block : moments.blocks) {
        const std::string tag = std::string("_") + to_string(block.basis);
        const double analytic_y =
            heterodyne ? cv.bob + 1.0 : cv.bob;  // detection noise included for heterodyne
        report.rows.push_back(make_row("var_y" + tag, analytic_y, block.var_y));
        report.rows.push_back(make_row("var_y_given_x" + tag, v_y_given_x, block.var_y_given_x));
        // eve_cond labels quadratures in the "Bob measures Q" convention; the
        // q field is the measured-quadrature conditional for either sift.
        report.rows.push_back(make_row("var_e_same_given_y" + tag, eve_cond.q,
                                       block.var_e_same_given_y));
        // The orthogonal quadrature is uncorrelated with the measured
        // outcome, so conditioning leaves its full variance V_E.
        report.rows.push_back(make_row("var_e_other_given_y" + tag, cv.eve,
                                       block.var_e_other_given_y));
        if (heterodyne) {
            mi_total += block.mutual_info.value;
            mi_var += block.mutual_info.std_error * block.mutual_info.std_error;
        } else {
            report.rows.push_back(make_row("mi_xy" + tag, mi_analytic, block.mutual_info));
        }
    }
    if (heterodyne) {
        report.rows.push_back(
            make_row("mi_xy", mi_analytic, Estimate{mi_total, std::sqrt(mi_var)}));
    }
    return report;
}

void write_batch_csv(const SampleBatch& batch, std::ostream& out) {
    out << "index,basis,x_Q,x_P,y_Q,y_P,e_Q,e_P\n";
    char buf[40];
    const auto field = [&](double v) {
        // locale-independent, round-trip exact
        const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
        out << ',';
        out.write(buf, res.ptr - buf);
    };
    for (std::size_t i = 0; i < batch.size(); ++i) {
        out << i << ',' << to_string(batch.basis[i]);
        field(batch.x_q[i]);
        field(batch.x_p[i]);
        field(batch.y_q[i]);
        field(batch.y_p[i]);
        field(batch.e_q[i]);
        field(batch.e_p[i]);
        out << '\n';
    }
}

}  // namespace cvqkd
