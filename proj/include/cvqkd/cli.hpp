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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cvqkd/rates.hpp"

namespace cvqkd::cli {

/// A parameter sweep: T grid x V_A list x protocol list, evaluated in that
/// nesting order (T outer, V_A middle, spec inner).
struct SweepSpec {
    std::vector<double> t_values;
    std::vector<double> va_values;
    std::vector<ProtocolSpec> specs;
    InfoUnit unit = InfoUnit::bits;
    bool clamp = false;  // presentation-only max(0, rate)
};

/// Linear T grid [start, stop] with `steps` points (steps == 1 -> {start}).
std::vector<double> linear_t_grid(double start, double stop, std::size_t steps);

/// dB-spaced grid: losses from db_start to db_stop, T = 10^(-L/10).
std::vector<double> db_t_grid(double db_start, double db_stop, std::size_t steps);

/// All nine protocol variants in canonical order (direction outer,
/// measurement inner), or a filtered subset.
std::vector<ProtocolSpec> protocol_grid(const std::vector<Direction>& directions,
                                        const std::vector<Measurement>& measurements);

double losses_db(double transmission);

/// One sweep result. Value fields are empty when the point hit a domain
/// error; the message is kept in `error` and the sweep continues.
struct OutputRow {
    double transmission = 0.0;
    double losses_db = 0.0;
    double va = 0.0;
    ProtocolSpec spec;
    std::optional<double> bob_info;
    std::optional<double> eve_info;
    std::optional<double> rate;
    std::optional<double> asymptotic_rate;
    std::string error;
};

std::vector<OutputRow> run_sweep(const SweepSpec& s);

/// Exact-vs-asymptotic comparison at one grid point, with the predicted error
/// scale (1/(T V_A) + 1/((1-T) V_A) for collective/heterodyne,
/// 1/sqrt(T V_A) + 1/sqrt((1-T) V_A) for homodyne).
struct CompareRow {
    double transmission = 0.0;
    double va = 0.0;
    double exact_rate = 0.0;
    double asymptotic_rate = 0.0;
    double difference = 0.0;
    double predicted_scale = 0.0;
};

/// Per-T fit over the V_A list: c_fitted = max |difference| / predicted_scale
/// and the least-squares slope of log|difference| vs log V_A (NaN when every
/// difference vanishes).
struct CompareFit {
    double transmission = 0.0;
    double c_fitted = 0.0;
    double slope = 0.0;
    std::size_t points = 0;
};

struct CompareResult {
    ProtocolSpec spec;
    InfoUnit unit = InfoUnit::bits;
    std::vector<CompareRow> rows;
    std::vector<CompareFit> fits;
    double overall_c = 0.0;
};

CompareResult run_compare(const ProtocolSpec& spec, const std::vector<double>& t_values,
                          const std::vector<double>& va_values, InfoUnit unit);

/// Entry point behind the `cvqkd` binary. Subcommands: rate, sweep,
/// threshold, compare, validate. Returns 0 on success, 1 on domain errors,
/// 2 on usage errors; diagnostics go to err as single lines.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cvqkd::cli
