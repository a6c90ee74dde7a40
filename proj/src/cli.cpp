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

#include "cvqkd/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"

#include "cvqkd/mc.hpp"

namespace cvqkd::cli {

namespace {

using nlohmann::json;

// 17 significant digits, lossless for IEEE doubles; to_chars keeps the '.'
// separator regardless of the process locale.
std::string fmt17(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

double predicted_error_scale(Measurement m, double t, double va) {
    if (m == Measurement::homodyne) {
        return 1.0 / std::sqrt(t * va) + 1.0 / std::sqrt((1.0 - t) * va);
    }
    return 1.0 / (t * va) + 1.0 / ((1.0 - t) * va);
}

double least_squares_slope(const std::vector<std::pair<double, double>>& xy) {
    if (xy.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : xy) {
        mx += x;
        my += y;
    }
    mx /= double(xy.size());
    my /= double(xy.size());
    double sxy = 0.0, sxx = 0.0;
    for (const auto& [x, y] : xy) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

double losses_db(double transmission) { return -10.0 * std::log10(transmission); }

std::vector<double> linear_t_grid(double start, double stop, std::size_t steps) {
    if (steps < 1) throw std::domain_error("sweep: steps must be >= 1");
    std::vector<double> grid;
    grid.reserve(steps);
    if (steps == 1) {
        grid.push_back(start);
        return grid;
    }
    for (std::size_t i = 0; i + 1 < steps; ++i) {
        grid.push_back(start + (stop - start) * double(i) / double(steps - 1));
    }
    grid.push_back(stop);  // exact endpoint, not start + (stop-start)
    return grid;
}

std::vector<double> db_t_grid(double db_start, double db_stop, std::size_t steps) {
    auto grid = linear_t_grid(db_start, db_stop, steps);
    for (double& v : grid) v = std::pow(10.0, -v / 10.0);
    return grid;
}

std::vector<ProtocolSpec> protocol_grid(const std::vector<Direction>& directions,
                                        const std::vector<Measurement>& measurements) {
    std::vector<ProtocolSpec> specs;
    for (Direction d : {Direction::direct, Direction::reverse, Direction::unconditional}) {
        if (std::find(directions.begin(), directions.end(), d) == directions.end()) continue;
        for (Measurement m :
             {Measurement::collective, Measurement::heterodyne, Measurement::homodyne}) {
            if (std::find(measurements.begin(), measurements.end(), m) == measurements.end()) {
                continue;
            }
            specs.push_back({m, d});
        }
    }
    return specs;
}

std::vector<OutputRow> run_sweep(const SweepSpec& s) {
    std::vector<OutputRow> rows;
    rows.reserve(s.t_values.size() * s.va_values.size() * s.specs.size());
    for (double t : s.t_values) {
        for (double va : s.va_values) {
            for (const ProtocolSpec& spec : s.specs) {
                OutputRow row;
                row.transmission = t;
                row.losses_db = losses_db(t);
                row.va = va;
                row.spec = spec;
                try {
                    const auto b = key_rate(spec, ChannelPoint{t, va}, s.unit);
                    row.bob_info = b.bob_info;
                    row.eve_info = b.eve_info;
                    row.rate = s.clamp ? std::max(0.0, b.rate) : b.rate;
                } catch (const std::exception& e) {
                    row.error = e.what();
                }
                try {
                    const double asym = key_rate_asymptotic(spec, t, s.unit);
                    row.asymptotic_rate = s.clamp ? std::max(0.0, asym) : asym;
                } catch (const std::exception&) {
                    // T at an endpoint: the infinite-modulation limit is undefined
                    // there, the exact-rate fields stand on their own.
                }
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

CompareResult run_compare(const ProtocolSpec& spec, const std::vector<double>& t_values,
                          const std::vector<double>& va_values, InfoUnit unit) {
    CompareResult result;
    result.spec = spec;
    result.unit = unit;
    result.overall_c = 0.0;
    for (double t : t_values) {
        CompareFit fit;
        fit.transmission = t;
        fit.c_fitted = 0.0;
        std::vector<std::pair<double, double>> loglog;
        for (double va : va_values) {
            CompareRow row;
            row.transmission = t;
            row.va = va;
            row.exact_rate = key_rate(spec, ChannelPoint{t, va}, unit).rate;
            row.asymptotic_rate = key_rate_asymptotic(spec, t, unit);
            row.difference = row.exact_rate - row.asymptotic_rate;
            row.predicted_scale = predicted_error_scale(spec.measurement, t, va);
            result.rows.push_back(row);
            fit.c_fitted = std::max(fit.c_fitted, std::abs(row.difference) / row.predicted_scale);
            if (row.difference != 0.0) {
                loglog.emplace_back(std::log(va), std::log(std::abs(row.difference)));
            }
        }
        fit.points = loglog.size();
        fit.slope = least_squares_slope(loglog);
        result.overall_c = std::max(result.overall_c, fit.c_fitted);
        result.fits.push_back(fit);
    }
    return result;
}

namespace {

constexpr const char* kSweepHeader =
    "T,losses_db,va,measurement,direction,bob_info,eve_info,rate,asymptotic_rate";

void write_sweep_csv(const std::vector<OutputRow>& rows, std::ostream& out) {
    out << kSweepHeader << '\n';
    const auto field = [&](const std::optional<double>& v) {
        out << ',';
        if (v) out << fmt17(*v);
    };
    for (const auto& row : rows) {
        out << fmt17(row.transmission) << ',' << fmt17(row.losses_db) << ',' << fmt17(row.va)
            << ',' << to_string(row.spec.measurement) << ',' << to_string(row.spec.direction);
        field(row.bob_info);
        field(row.eve_info);
        field(row.rate);
        field(row.asymptotic_rate);
        out << '\n';
    }
}

json row_to_json(const OutputRow& row) {
    json j;
    j["T"] = row.transmission;
    j["losses_db"] = row.losses_db;
    j["va"] = row.va;
    j["measurement"] = to_string(row.spec.measurement);
    j["direction"] = to_string(row.spec.direction);
    j["bob_info"] = row.bob_info ? json(*row.bob_info) : json(nullptr);
    j["eve_info"] = row.eve_info ? json(*row.eve_info) : json(nullptr);
    j["rate"] = row.rate ? json(*row.rate) : json(nullptr);
    j["asymptotic_rate"] = row.asymptotic_rate ? json(*row.asymptotic_rate) : json(nullptr);
    if (!row.error.empty()) j["error"] = row.error;
    return j;
}

void write_sweep_json(const std::vector<OutputRow>& rows, std::ostream& out) {
    json arr = json::array();
    for (const auto& row : rows) arr.push_back(row_to_json(row));
    out << arr.dump() << '\n';
}

void write_compare_csv(const CompareResult& result, std::ostream& out) {
    out << "T,losses_db,va,measurement,direction,exact_rate,asymptotic_rate,difference,"
           "predicted_scale\n";
    for (const auto& row : result.rows) {
        out << fmt17(row.transmission) << ',' << fmt17(losses_db(row.transmission)) << ','
            << fmt17(row.va) << ',' << to_string(result.spec.measurement) << ','
            << to_string(result.spec.direction) << ',' << fmt17(row.exact_rate) << ','
            << fmt17(row.asymptotic_rate) << ',' << fmt17(row.difference) << ','
            << fmt17(row.predicted_scale) << '\n';
    }
    for (const auto& fit : result.fits) {
        out << "# T=" << fmt17(fit.transmission) << " fitted_C=" << fmt17(fit.c_fitted)
            << " slope=" << fmt17(fit.slope) << " points=" << fit.points << '\n';
    }
    out << "# overall fitted_C=" << fmt17(result.overall_c) << '\n';
}

void write_compare_json(const CompareResult& result, std::ostream& out) {
    json j;
    j["measurement"] = to_string(result.spec.measurement);
    j["direction"] = to_string(result.spec.direction);
    j["unit"] = to_string(result.unit);
    j["rows"] = json::array();
    for (const auto& row : result.rows) {
        json r;
        r["T"] = row.transmission;
        r["losses_db"] = losses_db(row.transmission);
        r["va"] = row.va;
        r["exact_rate"] = row.exact_rate;
        r["asymptotic_rate"] = row.asymptotic_rate;
        r["difference"] = row.difference;
        r["predicted_scale"] = row.predicted_scale;
        j["rows"].push_back(r);
    }
    j["fits"] = json::array();
    for (const auto& fit : result.fits) {
        json f;
        f["T"] = fit.transmission;
        f["fitted_C"] = fit.c_fitted;
        f["slope"] = fit.slope;
        f["points"] = fit.points;
        j["fits"].push_back(f);
    }
    j["overall_fitted_C"] = result.overall_c;
    out << j.dump() << '\n';
}

void write_validation_table(const ValidationReport& report, std::ostream& out) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-24s %14s %14s %12s %9s %s", "quantity", "analytic",
                  "empirical", "std_error", "z", "flag");
    out << line << '\n';
    for (const auto& row : report.rows) {
        std::snprintf(line, sizeof(line), "%-24s %14.8g %14.8g %12.3g %9.3f %s",
                      row.quantity.c_str(), row.analytic, row.empirical, row.std_error, row.z,
                      row.flagged ? "FLAG" : "");
        out << line << '\n';
    }
    std::size_t flagged = 0;
    for (const auto& row : report.rows) flagged += row.flagged ? 1 : 0;
    out << "rows=" << report.rows.size() << " flagged=" << flagged
        << " (|z| > 4) T=" << fmt17(report.point.transmission)
        << " va=" << fmt17(report.point.alice_variance)
        << " measurement=" << to_string(report.measurement) << " n=" << report.n
        << " seed=" << report.seed << '\n';
}

void write_validation_csv(const ValidationReport& report, std::ostream& out) {
    out << "quantity,analytic,empirical,std_error,z,flagged\n";
    for (const auto& row : report.rows) {
        out << row.quantity << ',' << fmt17(row.analytic) << ',' << fmt17(row.empirical) << ','
            << fmt17(row.std_error) << ',' << fmt17(row.z) << ',' << (row.flagged ? 1 : 0)
            << '\n';
    }
}

void write_validation_json(const ValidationReport& report, std::ostream& out) {
    json j;
    j["T"] = report.point.transmission;
    j["va"] = report.point.alice_variance;
    j["measurement"] = to_string(report.measurement);
    j["n"] = report.n;
    j["seed"] = report.seed;
    j["rows"] = json::array();
    for (const auto& row : report.rows) {
        json r;
        r["quantity"] = row.quantity;
        r["analytic"] = row.analytic;
        r["empirical"] = row.empirical;
        r["std_error"] = row.std_error;
        r["z"] = row.z;
        r["flagged"] = row.flagged;
        j["rows"].push_back(r);
    }
    out << j.dump() << '\n';
}

InfoUnit parse_unit(const std::string& name) {
    return name == "nats" ? InfoUnit::nats : InfoUnit::bits;
}

struct VarianceChoice {
    double va = 0.0;
    double vmod = 0.0;
    CLI::Option* va_opt = nullptr;
    CLI::Option* vmod_opt = nullptr;

    void attach(CLI::App* cmd) {
        auto* group = cmd->add_option_group("variance", "Alice's state variance");
        va_opt = group->add_option("--va", va, "Alice's total variance V_A (>= 1)");
        vmod_opt = group->add_option("--vmod", vmod, "modulation variance V_A - 1 (>= 0)");
        group->require_option(1);
    }

    double alice_variance() const { return va_opt->count() ? va : 1.0 + vmod; }
};

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"secret-key rates for coherent-state CV-QKD over a lossy channel"};
    app.name("cvqkd");
    app.require_subcommand(1);

    const std::vector<std::string> all_measurements = {"collective", "heterodyne", "homodyne"};
    const std::vector<std::string> all_directions = {"direct", "reverse", "unconditional"};

    // rate
    auto* rate_cmd = app.add_subcommand("rate", "key rate at a single channel point");
    std::string rate_direction, rate_measurement;
    double rate_t = 0.0;
    std::string rate_unit = "bits";
    bool rate_clamp = false;
    VarianceChoice rate_var;
    rate_cmd->add_option("--direction", rate_direction)
        ->required()
        ->check(CLI::IsMember(all_directions));
    rate_cmd->add_option("--measurement", rate_measurement)
        ->required()
        ->check(CLI::IsMember(all_measurements));
    rate_cmd->add_option("--T", rate_t, "channel transmission")->required();
    rate_var.attach(rate_cmd);
    rate_cmd->add_option("--unit", rate_unit)->check(CLI::IsMember({"bits", "nats"}));
    rate_cmd->add_flag("--clamp", rate_clamp, "report max(0, rate)");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "rate table over a (T, V_A, protocol) grid");
    double sweep_t_start = 0.0, sweep_t_stop = 0.0, sweep_db_start = 0.0, sweep_db_stop = 0.0;
    std::size_t sweep_steps = 1;
    std::vector<double> sweep_vas;
    std::vector<std::string> sweep_directions, sweep_measurements;
    std::string sweep_unit = "bits", sweep_format = "csv";
    bool sweep_clamp = false;
    auto* t_start_opt = sweep_cmd->add_option("--t-start", sweep_t_start);
    auto* t_stop_opt = sweep_cmd->add_option("--t-stop", sweep_t_stop);
    auto* db_start_opt = sweep_cmd->add_option("--db-start", sweep_db_start, "losses in dB");
    auto* db_stop_opt = sweep_cmd->add_option("--db-stop", sweep_db_stop, "losses in dB");
    t_start_opt->excludes(db_start_opt)->excludes(db_stop_opt);
    t_stop_opt->excludes(db_start_opt)->excludes(db_stop_opt);
    sweep_cmd->add_option("--steps", sweep_steps, "grid points (>= 1)");
    sweep_cmd->add_option("--va", sweep_vas, "V_A values")->delimiter(',')->required();
    sweep_cmd->add_option("--direction", sweep_directions)
        ->delimiter(',')
        ->check(CLI::IsMember(all_directions));
    sweep_cmd->add_option("--measurement", sweep_measurements)
        ->delimiter(',')
        ->check(CLI::IsMember(all_measurements));
    sweep_cmd->add_option("--unit", sweep_unit)->check(CLI::IsMember({"bits", "nats"}));
    sweep_cmd->add_option("--format", sweep_format)->check(CLI::IsMember({"csv", "json"}));
    sweep_cmd->add_flag("--clamp", sweep_clamp);

    // threshold
    auto* thr_cmd = app.add_subcommand("threshold", "transmission where the rate turns positive");
    std::string thr_direction, thr_measurement;
    bool thr_infinite = false;
    double thr_va = 0.0;
    thr_cmd->add_option("--direction", thr_direction)
        ->required()
        ->check(CLI::IsMember(all_directions));
    thr_cmd->add_option("--measurement", thr_measurement)
        ->required()
        ->check(CLI::IsMember(all_measurements));
    auto* thr_group = thr_cmd->add_option_group("regime");
    thr_group->add_flag("--infinite-modulation", thr_infinite, "V_A -> infinity limit");
    auto* thr_va_opt = thr_group->add_option("--va", thr_va, "finite V_A (bisection)");
    thr_group->require_option(1);

    // compare
    auto* cmp_cmd = app.add_subcommand("compare", "exact vs asymptotic rate with error-order fit");
    std::string cmp_direction, cmp_measurement;
    std::vector<double> cmp_ts, cmp_vas;
    std::string cmp_unit = "bits", cmp_format = "csv";
    cmp_cmd->add_option("--direction", cmp_direction)
        ->required()
        ->check(CLI::IsMember(all_directions));
    cmp_cmd->add_option("--measurement", cmp_measurement)
        ->required()
        ->check(CLI::IsMember(all_measurements));
    cmp_cmd->add_option("--T", cmp_ts, "transmission values")->delimiter(',')->required();
    cmp_cmd->add_option("--va", cmp_vas, "V_A values")->delimiter(',')->required();
    cmp_cmd->add_option("--unit", cmp_unit)->check(CLI::IsMember({"bits", "nats"}));
    cmp_cmd->add_option("--format", cmp_format)->check(CLI::IsMember({"csv", "json"}));

    // validate
    auto* val_cmd = app.add_subcommand("validate", "Monte Carlo check of the channel statistics");
    double val_t = 0.0;
    std::string val_measurement;
    std::size_t val_n = 1'000'000;
    std::uint64_t val_seed = 0;
    std::string val_format = "table", val_dump;
    VarianceChoice val_var;
    val_cmd->add_option("--T", val_t, "channel transmission")->required();
    val_var.attach(val_cmd);
    val_cmd->add_option("--measurement", val_measurement)
        ->required()
        ->check(CLI::IsMember({"heterodyne", "homodyne"}));
    val_cmd->add_option("--n", val_n, "pulse count");
    val_cmd->add_option("--seed", val_seed, "RNG seed (output is a pure function of it)")
        ->required();
    val_cmd->add_option("--format", val_format)->check(CLI::IsMember({"table", "csv", "json"}));
    val_cmd->add_option("--dump", val_dump, "write the raw batch as CSV to this path");

    try {
        std::vector<const char*> argv;
        argv.reserve(args.size() + 1);
        argv.push_back("cvqkd");
        for (const auto& a : args) argv.push_back(a.c_str());
        app.parse(int(argv.size()), argv.data());

        if (rate_cmd->parsed()) {
            const ProtocolSpec spec{*measurement_from_string(rate_measurement),
                                    *direction_from_string(rate_direction)};
            const InfoUnit unit = parse_unit(rate_unit);
            const ChannelPoint p{rate_t, rate_var.alice_variance()};
            const auto b = key_rate(spec, p, unit);
            json j;
            j["direction"] = to_string(spec.direction);
            j["measurement"] = to_string(spec.measurement);
            j["T"] = p.transmission;
            j["losses_db"] = losses_db(p.transmission);
            j["va"] = p.alice_variance;
            j["unit"] = to_string(unit);
            j["bob_info"] = b.bob_info;
            j["eve_info"] = b.eve_info;
            j["rate"] = rate_clamp ? std::max(0.0, b.rate) : b.rate;
            out << j.dump(2) << '\n';
            return 0;
        }

        if (sweep_cmd->parsed()) {
            SweepSpec s;
            const bool db_mode = db_start_opt->count() || db_stop_opt->count();
            if (db_mode) {
                if (!db_start_opt->count() || !db_stop_opt->count()) {
                    throw CLI::ValidationError("sweep", "--db-start and --db-stop go together");
                }
                s.t_values = db_t_grid(sweep_db_start, sweep_db_stop, sweep_steps);
            } else {
                if (!t_start_opt->count() || !t_stop_opt->count()) {
                    throw CLI::ValidationError(
                        "sweep", "give --t-start/--t-stop or --db-start/--db-stop");
                }
                s.t_values = linear_t_grid(sweep_t_start, sweep_t_stop, sweep_steps);
            }
            s.va_values = sweep_vas;
            std::vector<Direction> directions;
            for (const auto& name : sweep_directions.empty() ? all_directions : sweep_directions) {
                directions.push_back(*direction_from_string(name));
            }
            std::vector<Measurement> measurements;
            for (const auto& name :
                 sweep_measurements.empty() ? all_measurements : sweep_measurements) {
                measurements.push_back(*measurement_from_string(name));
            }
            s.specs = protocol_grid(directions, measurements);
            s.unit = parse_unit(sweep_unit);
            s.clamp = sweep_clamp;
            const auto rows = run_sweep(s);
            for (const auto& row : rows) {
                if (!row.error.empty()) {
                    err << "cvqkd: warning: row T=" << fmt17(row.transmission)
                        << " va=" << fmt17(row.va) << " " << to_string(row.spec.measurement) << "/"
                        << to_string(row.spec.direction) << ": " << row.error << '\n';
                }
            }
            if (sweep_format == "json") {
                write_sweep_json(rows, out);
            } else {
                write_sweep_csv(rows, out);
            }
            return 0;
        }

        if (thr_cmd->parsed()) {
            ThresholdQuery q;
            q.spec = {*measurement_from_string(thr_measurement),
                      *direction_from_string(thr_direction)};
            if (thr_va_opt->count()) q.alice_variance = thr_va;
            const double t = threshold_transmission(q);
            json j;
            j["direction"] = to_string(q.spec.direction);
            j["measurement"] = to_string(q.spec.measurement);
            j["regime"] = q.alice_variance ? "finite" : "infinite_modulation";
            if (q.alice_variance) j["va"] = *q.alice_variance;
            j["threshold_transmission"] = t;
            j["losses_db"] = t > 0.0 ? json(losses_db(t)) : json(nullptr);
            out << j.dump(2) << '\n';
            return 0;
        }

        if (cmp_cmd->parsed()) {
            const ProtocolSpec spec{*measurement_from_string(cmp_measurement),
                                    *direction_from_string(cmp_direction)};
            const auto result = run_compare(spec, cmp_ts, cmp_vas, parse_unit(cmp_unit));
            if (cmp_format == "json") {
                write_compare_json(result, out);
            } else {
                write_compare_csv(result, out);
            }
            return 0;
        }

        if (val_cmd->parsed()) {
            const ChannelPoint p{val_t, val_var.alice_variance()};
            const Measurement m = *measurement_from_string(val_measurement);
            const auto report = validation_report(p, m, val_n, val_seed);
            if (!val_dump.empty()) {
                SimConfig config;
                config.transmission = p.transmission;
                config.modulation_variance = p.alice_variance - 1.0;
                config.measurement = m;
                config.samples = val_n;
                config.seed = val_seed;
                std::ofstream file(val_dump);
                if (!file) {
                    throw std::invalid_argument("validate: cannot open dump file " + val_dump);
                }
                write_batch_csv(simulate_batch(config), file);
            }
            if (val_format == "json") {
                write_validation_json(report, out);
            } else if (val_format == "csv") {
                write_validation_csv(report, out);
            } else {
                write_validation_table(report, out);
            }
            return 0;
        }
        return 0;
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "cvqkd: error: usage: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        err << "cvqkd: error: domain: " << e.what() << '\n';
        return 1;
    } catch (const std::length_error& e) {
        err << "cvqkd: error: domain: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "cvqkd: error: domain: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "cvqkd: error: internal: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace cvqkd::cli
