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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "cvqkd/mc.hpp"
#include "cvqkd/philox.hpp"

using namespace cvqkd;

namespace {

SimConfig config_for(double t, double va, Measurement m, std::size_t n, std::uint64_t seed) {
    SimConfig c;
    c.transmission = t;
    c.modulation_variance = va - 1.0;
    c.measurement = m;
    c.samples = n;
    c.seed = seed;
    return c;
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Kolmogorov distance of a sample against the standard normal.
double ks_distance(std::vector<double> z) {
    std::sort(z.begin(), z.end());
    const double n = double(z.size());
    double d = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double cdf = standard_normal_cdf(z[i]);
        d = std::max(d, std::abs(cdf - double(i) / n));
        d = std::max(d, std::abs(cdf - double(i + 1) / n));
    }
    return d;
}

}  // namespace

TEST_CASE("philox matches the published known-answer vectors") {
    // 10-round Philox-4x32 reference vectors (counter words c0..c3 pack as
    // lo/hi halves of counter_lo then counter_hi, key words as lo/hi of key)
    const std::array<std::uint32_t, 4> zero = {0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu,
                                               0x9b00dbd8u};
    CHECK(philox4x32_block(0, 0, 0) == zero);

    const std::array<std::uint32_t, 4> ones = {0x408f276du, 0x41c83b0eu, 0xa20bc7c6u,
                                               0x6d5451fdu};
    CHECK(philox4x32_block(0xffffffffffffffffULL, 0xffffffffffffffffULL,
                           0xffffffffffffffffULL) == ones);

    const std::array<std::uint32_t, 4> pi_digits = {0xd16cfe09u, 0x94fdccebu, 0x5001e420u,
                                                    0x24126ea1u};
    CHECK(philox4x32_block(0x299f31d0a4093822ULL, 0x0370734413198a2eULL,
                           0x85a308d3243f6a88ULL) == pi_digits);
}

TEST_CASE("philox blocks are stable and uniform doubles stay in [0, 1)") {
    const auto a = philox4x32_block(0x853c49e6748fea9bULL, 1, 2);
    const auto b = philox4x32_block(0x853c49e6748fea9bULL, 1, 2);
    CHECK(a == b);
    const auto c = philox4x32_block(0x853c49e6748fea9bULL, 1, 3);
    CHECK(a != c);

    for (std::uint64_t i = 0; i < 2000; ++i) {
        const auto block = philox4x32_block(7, 0, i);
        const double u = uniform_from_bits(block[0], block[1]);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }

    // sample moments of the Box-Muller output
    double sum = 0.0, sum2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n / 2; ++i) {
        const auto pair = normal_pair(11, 0, std::uint64_t(i));
        sum += pair.first + pair.second;
        sum2 += pair.first * pair.first + pair.second * pair.second;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sum2 / n - 1.0) < 0.02);
}

TEST_CASE("simulate_batch is deterministic for a fixed seed") {
    const auto c = config_for(0.6, 9.0, Measurement::heterodyne, 4096, 0xBADC0FFEULL);
    const auto first = simulate_batch(c);
    const auto second = simulate_batch(c);
    CHECK(first.y_q == second.y_q);
    CHECK(first.e_p == second.e_p);
    CHECK(first.basis == second.basis);

    auto other = c;
    other.seed += 1;
    const auto third = simulate_batch(other);
    CHECK(first.y_q != third.y_q);
}

TEST_CASE("simulate_batch validates its configuration") {
    auto c = config_for(0.5, 2.0, Measurement::heterodyne, 10, 1);
    c.max_samples = 5;
    CHECK_THROWS_AS(simulate_batch(c), std::length_error);
    CHECK_THROWS_AS(simulate_batch(config_for(1.5, 2.0, Measurement::heterodyne, 10, 1)),
                    std::domain_error);
    CHECK_THROWS_AS(simulate_batch(config_for(0.5, 0.5, Measurement::heterodyne, 10, 1)),
                    std::domain_error);
    CHECK_THROWS_AS(simulate_batch(config_for(0.5, 2.0, Measurement::collective, 10, 1)),
                    std::invalid_argument);
    CHECK_THROWS_AS(simulate_batch(config_for(0.5, 2.0, Measurement::heterodyne, 0, 1)),
                    std::domain_error);
}

TEST_CASE("vacuum through the identity channel") {
    const auto batch = simulate_batch(config_for(1.0, 1.0, Measurement::homodyne, 100000, 21));
    std::vector<double> measured;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (batch.basis[i] == Basis::q) measured.push_back(batch.y_q[i]);
    }
    const auto var = sample_variance(measured);
    CHECK(std::abs(var.value - 1.0) < 5.0 / std::sqrt(double(measured.size())));
}

TEST_CASE("homodyne pulses carry exactly one informative outcome") {
    const auto batch = simulate_batch(config_for(0.7, 5.0, Measurement::homodyne, 2000, 3));
    std::size_t q_count = 0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const bool q_defined = !std::isnan(batch.y_q[i]);
        const bool p_defined = !std::isnan(batch.y_p[i]);
        CHECK(q_defined != p_defined);
        CHECK((batch.basis[i] == Basis::q) == q_defined);
        if (q_defined) {
            CHECK(batch.y_q[i] == batch.b_q[i]);  // noiseless readout
            ++q_count;
        } else {
            CHECK(batch.y_p[i] == batch.b_p[i]);
        }
    }
    // both bases actually occur
    CHECK(q_count > 600);
    CHECK(q_count < 1400);
}

TEST_CASE("channel output variance matches V_B") {
    const auto batch = simulate_batch(config_for(0.5, 11.0, Measurement::heterodyne, 1000000, 5));
    const auto var_b = sample_variance(batch.b_q);
    CHECK(std::abs(var_b.value - 6.0) < 0.06);
}

TEST_CASE("energy bookkeeping and output correlations per quadrature") {
    const double t = 0.3, va = 21.0;
    const auto batch = simulate_batch(config_for(t, va, Measurement::heterodyne, 200000, 17));
    const auto m = estimate_moments(batch);

    // Var(b) + Var(e) = Var(a) + 1, the beamsplitter is orthogonal
    for (const auto& [vb, ve, vaq] :
         {std::tuple{m.var_b_q, m.var_e_q, m.var_a_q}, {m.var_b_p, m.var_e_p, m.var_a_p}}) {
        const double lhs = vb.value + ve.value;
        const double rhs = vaq.value + 1.0;
        const double se = std::sqrt(vb.std_error * vb.std_error + ve.std_error * ve.std_error +
                                    vaq.std_error * vaq.std_error);
        CHECK(std::abs(lhs - rhs) < 4.0 * se);
    }

    const double expected_cov = std::sqrt(t * (1.0 - t)) * (va - 1.0);
    CHECK(std::abs(m.cov_be_q.value - expected_cov) < 4.0 * m.cov_be_q.std_error);
    CHECK(std::abs(m.cov_be_p.value - expected_cov) < 4.0 * m.cov_be_p.std_error);
}

TEST_CASE("moment estimators") {
    SUBCASE("constant regressor is degenerate input") {
        const std::vector<double> u = {1.0, 2.0, 3.0, 4.0};
        const std::vector<double> w = {5.0, 5.0, 5.0, 5.0};
        CHECK_THROWS_AS(residual_variance(u, w), std::invalid_argument);
    }

    SUBCASE("too-short columns are rejected") {
        const std::vector<double> one = {1.0};
        CHECK_THROWS_AS(sample_variance(one), std::invalid_argument);
    }

    SUBCASE("heterodyne conditional variances at a channel point") {
        const double t = 0.5, va = 11.0;
        const auto batch =
            simulate_batch(config_for(t, va, Measurement::heterodyne, 1000000, 29));
        const auto m = estimate_moments(batch);
        CHECK(std::abs(m.blocks[0].var_y_given_x.value - 2.0) < 0.04);
        CHECK(std::abs(m.blocks[1].var_y_given_x.value - 2.0) < 0.04);
        const double expected = (2.0 - t + t / va) / (t + (2.0 - t) / va);
        CHECK(std::abs(m.blocks[0].var_e_same_given_y.value - expected) < 0.02 * expected);
        CHECK(std::abs(m.blocks[1].var_e_same_given_y.value - expected) < 0.02 * expected);
    }
}

TEST_CASE("gaussian_mi") {
    CHECK(gaussian_mi(3.0, 3.0, InfoUnit::nats) == 0.0);
    CHECK_THROWS_AS(gaussian_mi(1.0, 2.0, InfoUnit::nats), std::domain_error);
    CHECK_THROWS_AS(gaussian_mi(1.0, 0.0, InfoUnit::nats), std::domain_error);

    // doubled per-quadrature MI gives the heterodyne total
    const double vb = 29.0;
    CHECK(2.0 * gaussian_mi(vb + 1.0, 2.0, InfoUnit::nats) ==
          doctest::Approx(std::log((vb + 1.0) / 2.0)).epsilon(1e-15));
}

TEST_CASE("empirical heterodyne MI matches the closed form within 2%") {
    const double t = 0.7, va = 41.0;
    const double vb = t * va + 1.0 - t;
    const auto batch = simulate_batch(config_for(t, va, Measurement::heterodyne, 1000000, 33));
    const auto m = estimate_moments(batch);
    const double mi = m.blocks[0].mutual_info.value + m.blocks[1].mutual_info.value;
    const double expected = std::log((vb + 1.0) / 2.0);
    CHECK(std::abs(mi / expected - 1.0) < 0.02);
}

TEST_CASE("MI estimate stays finite and nonnegative at near-zero modulation") {
    // with r^2 ~ 1/n the sample V(Y) can dip below the residual variance;
    // the estimator truncates at zero instead of failing
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto batch =
            simulate_batch(config_for(0.5, 1.0 + 1e-9, Measurement::heterodyne, 16, seed));
        const auto m = estimate_moments(batch);
        for (const auto& block : m.blocks) {
            CHECK(std::isfinite(block.mutual_info.value));
            CHECK(block.mutual_info.value >= 0.0);
        }
    }
}

TEST_CASE("empirical homodyne MI matches (1/2) log V_B within 2%") {
    const auto batch = simulate_batch(config_for(0.5, 11.0, Measurement::homodyne, 1000000, 37));
    const auto m = estimate_moments(batch);
    const double expected = 0.5 * std::log(6.0);
    for (const auto& block : m.blocks) {
        CHECK(std::abs(block.mutual_info.value / expected - 1.0) < 0.02);
    }
}

TEST_CASE("validation_report at the vacuum point is all clear") {
    const auto report = validation_report({1.0, 1.0}, Measurement::heterodyne, 50000, 41);
    CHECK_FALSE(report.any_flagged());
    CHECK(report.find("var_b_q") != nullptr);
    CHECK(report.find("var_b_q")->analytic == 1.0);
    CHECK(report.find("mi_xy")->analytic == 0.0);
    CHECK(report.find("mi_xy")->empirical == 0.0);

    const auto hom = validation_report({1.0, 1.0}, Measurement::homodyne, 50000, 43);
    CHECK_FALSE(hom.any_flagged());
}

TEST_CASE("validation_report heterodyne rows at a lossy point") {
    const double t = 0.5, va = 11.0;
    const auto report = validation_report({t, va}, Measurement::heterodyne, 1000000, 47);
    CHECK_FALSE(report.any_flagged());
    const double expected = (2.0 - t + t / va) / (t + (2.0 - t) / va);
    CHECK(report.find("var_e_same_given_y_q")->analytic == doctest::Approx(expected));
    CHECK(std::abs(report.find("var_e_same_given_y_q")->empirical - expected) <
          0.02 * expected);
    CHECK(std::abs(report.find("var_e_same_given_y_p")->empirical - expected) <
          0.02 * expected);
}

TEST_CASE("validation_report homodyne rows at a lossy point") {
    const double t = 0.3, va = 51.0;
    const auto report = validation_report({t, va}, Measurement::homodyne, 1000000, 53);
    CHECK_FALSE(report.any_flagged());
    const double same = 1.0 / (t + (1.0 - t) / va);
    const double other = (1.0 - t) * va + t;
    for (const char* row : {"var_e_same_given_y_q", "var_e_same_given_y_p"}) {
        CHECK(report.find(row)->analytic == doctest::Approx(same));
        CHECK(std::abs(report.find(row)->empirical - same) < 0.03 * same);
    }
    for (const char* row : {"var_e_other_given_y_q", "var_e_other_given_y_p"}) {
        CHECK(report.find(row)->analytic == doctest::Approx(other));
    }
}

TEST_CASE("z-scores are standard-normal across seeds") {
    // 100 seeds at a moderate batch size; per-row Kolmogorov distance against
    // the standard normal at the 1% level (critical value 1.63/sqrt(m)).
    const double t = 0.5, va = 11.0;
    std::map<std::string, std::vector<double>> z_by_row;
    const int seeds = 100;
    for (int s = 0; s < seeds; ++s) {
        const auto report =
            validation_report({t, va}, Measurement::heterodyne, 20000, 1000 + std::uint64_t(s));
        for (const auto& row : report.rows) z_by_row[row.quantity].push_back(row.z);
    }
    const double critical = 1.63 / std::sqrt(double(seeds));
    for (const auto& [name, zs] : z_by_row) {
        REQUIRE(zs.size() == std::size_t(seeds));
        const double d = ks_distance(zs);
        INFO("row ", name, " KS distance ", d);
        CHECK(d < critical);
    }
}

TEST_CASE("batch CSV dump round-trips doubles exactly") {
    const auto batch = simulate_batch(config_for(0.4, 7.0, Measurement::homodyne, 64, 59));
    std::ostringstream out;
    write_batch_csv(batch, out);
    std::istringstream in(out.str());

    std::string header;
    std::getline(in, header);
    CHECK(header == "index,basis,x_Q,x_P,y_Q,y_P,e_Q,e_P");

    std::string line;
    std::size_t i = 0;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::stringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        REQUIRE(fields.size() == 8);
        CHECK(std::stoul(fields[0]) == i);
        CHECK(fields[1] == to_string(batch.basis[i]));
        const auto parse = [](const std::string& s) { return std::strtod(s.c_str(), nullptr); };
        CHECK(parse(fields[2]) == batch.x_q[i]);
        CHECK(parse(fields[3]) == batch.x_p[i]);
        const bool q_defined = batch.basis[i] == Basis::q;
        CHECK(parse(fields[4 + (q_defined ? 0 : 1)]) ==
              (q_defined ? batch.y_q[i] : batch.y_p[i]));
        CHECK(parse(fields[6]) == batch.e_q[i]);
        CHECK(parse(fields[7]) == batch.e_p[i]);
        ++i;
    }
    CHECK(i == batch.size());

    // byte-identical on a second pass
    std::ostringstream again;
    write_batch_csv(batch, again);
    CHECK(out.str() == again.str());
}
