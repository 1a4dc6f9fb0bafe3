#include "capmsize/cli.hpp"

#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "capmsize/analysis.hpp"
#include "capmsize/config.hpp"
#include "capmsize/errors.hpp"
#include "capmsize/estimate.hpp"
#include "capmsize/panel.hpp"
#include "capmsize/simulate.hpp"
#include "capmsize/textio.hpp"

namespace fs = std::filesystem;

namespace capmsize {

namespace {

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

fs::path make_run_dir(const OutputOptions& options, std::uint64_t seed,
                      const std::string& override_dir) {
    fs::path dir = override_dir.empty()
                       ? fs::path(options.dir) / (utc_timestamp() + "-seed" + std::to_string(seed))
                       : fs::path(override_dir);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw InputError("write to " + path.string() + " failed");
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

Json test_to_json(const TestResult& result) {
    Json j;
    j["statistic"] = result.statistic;
    j["p_value"] = result.p_value;
    return j;
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

Json estimation_report_to_json(const EstimationReport& report) {
    Json j;
    j["benchmark_decile"] = report.benchmark_decile;
    j["size_form"] = report.form == SizeForm::linear ? "linear" : "sqrt_abs";
    j["gamma_estimator"] =
        report.options.gamma_estimator == GammaEstimator::mean_ratio ? "mean" : "ls-origin";
    j["gamma"] = report.noise.gamma;
    j["mu"] = report.noise.mu;
    j["rho"] = report.noise.rho;
    j["windows"] = static_cast<int>(report.benchmark_windowed.size());
    j["deciles"] = report.residual_deciles;
    Json diags = Json::array();
    for (const auto& d : report.diagnostics) {
        Json entry;
        entry["decile"] = d.decile;
        Json lb = Json::array();
        for (const auto& [lags, result] : d.ljung_box) {
            Json one = test_to_json(result);
            one["lags"] = lags;
            lb.push_back(one);
        }
        entry["ljung_box"] = lb;
        entry["jarque_bera"] = test_to_json(d.jarque_bera);
        Json acf_values = Json::array();
        for (Eigen::Index i = 0; i < d.acf.size(); ++i) acf_values.push_back(d.acf[i]);
        entry["acf"] = acf_values;
        diags.push_back(entry);
    }
    j["diagnostics"] = diags;
    j["z_correlation"] = matrix_to_json(report.z_correlation);
    j["warnings"] = report.warnings;
    return j;
}

void write_windows_csv(const EstimationReport& report, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    out << "window,month,decile,beta,alpha,size,window_return\n";
    for (const auto& w : report.windows) {
        out << w.window << "," << w.month << "," << w.decile << "," << format_double(w.beta)
            << "," << format_double(w.alpha) << "," << format_double(w.size) << ","
            << format_double(w.window_return) << "\n";
    }
    if (!out) throw InputError("write to " + path.string() + " failed");
}

void write_standardized_csv(const EstimationReport& report, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    out << "decile";
    for (Eigen::Index w = 0; w < report.noise.standardized_z.cols(); ++w) out << ",w" << w;
    out << "\n";
    for (Eigen::Index i = 0; i < report.noise.standardized_z.rows(); ++i) {
        out << report.residual_deciles[static_cast<std::size_t>(i)];
        for (Eigen::Index w = 0; w < report.noise.standardized_z.cols(); ++w) {
            out << "," << format_double(report.noise.standardized_z(i, w));
        }
        out << "\n";
    }
    if (!out) throw InputError("write to " + path.string() + " failed");
}

ReturnPanel load_panel(const EstimateConfig& config, std::vector<std::string>* warnings) {
    const RawTable price = parse_decile_csv(config.price_file, DecileField::price, warnings);
    const RawTable total = parse_decile_csv(config.total_file, DecileField::total, warnings);
    const RawTable caps = parse_decile_csv(config.caps_file, DecileField::cap, warnings);
    std::vector<RawTable> rate_tables;
    rate_tables.reserve(config.rate_files.size());
    for (const auto& file : config.rate_files) rate_tables.push_back(parse_rate_csv(file));
    const RawTable rates = merge_rate_tables(rate_tables);
    return build_panel(price, total, caps, rates, config.rate_basis, config.range,
                       config.deciles);
}

void cmd_estimate(const Json& root, const fs::path& dir) {
    const EstimateConfig config = estimate_config_from_json(root);
    std::vector<std::string> warnings;
    const ReturnPanel panel = load_panel(config, &warnings);

    Json report;
    report["command"] = "estimate";
    report["range"] = {config.range.first_month, config.range.last_month};
    report["window_months"] = config.options.window_months;
    report["ingest_warnings"] = warnings;

    std::optional<EstimationReport> price_report;
    std::optional<EstimationReport> premium_report;
    if (config.target == EstimateTarget::price || config.target == EstimateTarget::both) {
        EstimationOptions options = config.options;
        options.target = ReturnTarget::price;
        price_report = run_estimation(panel, options);
        report["price"] = estimation_report_to_json(*price_report);
        write_windows_csv(*price_report, dir / "windows_price.csv");
        write_standardized_csv(*price_report, dir / "standardized_price.csv");
    }
    if (config.target == EstimateTarget::premium || config.target == EstimateTarget::both) {
        EstimationOptions options = config.options;
        options.target = ReturnTarget::premium;
        premium_report = run_estimation(panel, options);
        report["premium"] = estimation_report_to_json(*premium_report);
        write_windows_csv(*premium_report, dir / "windows_premium.csv");
        write_standardized_csv(*premium_report, dir / "standardized_premium.csv");
    }
    if (price_report && premium_report) {
        report["cross_correlation"] = noise_cross_correlation(
            price_report->noise.standardized_z, premium_report->noise.standardized_z);
    }
    write_json(dir / "report.json", report);
}

void cmd_simulate(const Json& root, const fs::path& dir, const OutputOptions& output) {
    const SimulationConfig config = simulation_from_json(root);
    const SimulationEnsemble ensemble = simulate(config);
    const std::string echo = root.dump();
    if (output.csv) write_ensemble_csv(ensemble, (dir / "ensemble.csv").string(), echo);
    if (output.binary) write_ensemble_binary(ensemble, (dir / "ensemble.bin").string(), echo);
}

void cmd_curve(const Json& root, const fs::path& dir) {
    const SimulationConfig config = simulation_from_json(root);
    const CurveOptions options = curve_options_from_json(root);
    const SimulationEnsemble ensemble = simulate(config);
    Eigen::Index record = -1;
    for (Eigen::Index r = 0; r < ensemble.times.size(); ++r) {
        if (std::abs(ensemble.times[r] - options.time) <= 1e-9) {
            record = r;
            break;
        }
    }
    if (record < 0) {
        throw DomainError("curve.time " + format_double(options.time) +
                          " is not a recorded simulation time");
    }
    // The snapshot is taken from the first path; runs meant for curves use
    // paths = 1 and vary the seed instead.
    const Eigen::VectorXd state = ensemble.relative_sizes[0].row(record).transpose();
    const CurveSnapshot snap =
        curve_snapshot(state, options.time, options.kind, options.rank_lo, options.rank_hi);
    write_curve_csv(snap, (dir / "curve.csv").string());
    Json fit;
    fit["command"] = "curve";
    fit["seed"] = config.seed;
    fit["time"] = snap.time;
    fit["kind"] = snap.kind == CurveKind::modified ? "modified" : "classical";
    fit["rank_lo"] = snap.fit.rank_lo;
    fit["rank_hi"] = snap.fit.rank_hi;
    fit["slope"] = snap.fit.slope;
    fit["intercept"] = snap.fit.intercept;
    fit["pearson_r"] = snap.fit.pearson_r;
    write_json(dir / "fit.json", fit);
}

void cmd_stability(const Json& root, const fs::path& dir) {
    const MarketModel model = model_from_json(root.at("model"));
    const StabilityOptions options = stability_options_from_json(root);
    const StabilityVerdict verdict = stability_check(model, options.probe_lo, options.probe_hi);

    Json j;
    j["command"] = "stability";
    switch (verdict.verdict) {
        case Stability::stable:
            j["verdict"] = "stable";
            break;
        case Stability::unstable:
            j["verdict"] = "unstable";
            break;
        case Stability::inconclusive:
            j["verdict"] = "inconclusive";
            break;
    }
    j["gamma_cap"] = verdict.gamma_cap;  // NaN serializes as null
    j["liminf_proxy"] = verdict.liminf_proxy;
    j["limsup_proxy"] = verdict.limsup_proxy;
    j["method"] = verdict.method;
    j["detail"] = verdict.detail;

    try {
        const StationaryDensity density =
            stationary_density(model, density_grid_from_json(root));
        Json d;
        d["mean"] = density.mean;
        d["variance"] = density.variance;
        d["normalization_constant"] = density.normalization_constant;
        j["density"] = d;
        std::ofstream out(dir / "density.csv", std::ios::binary);
        if (!out) throw InputError("cannot open density.csv for writing");
        out << "c,density,s_prime\n";
        for (Eigen::Index i = 0; i < density.grid.size(); ++i) {
            out << format_double(density.grid[i]) << "," << format_double(density.density[i])
                << "," << format_double(density.s_prime[i]) << "\n";
        }
        if (!out) throw InputError("write to density.csv failed");
    } catch (const ComputationError& e) {
        j["density_error"] = e.what();
    } catch (const CoverageError& e) {
        j["density_error"] = e.what();
    } catch (const DomainError& e) {
        j["density_error"] = e.what();
    }
    write_json(dir / "stability.json", j);
}

Eigen::VectorXd fund_premiums(const std::string& file, RateBasis value_basis,
                              const RawTable& rates, RateBasis rate_basis,
                              const PanelRange& range) {
    const RawTable series = parse_rate_csv(file);
    const int months = months_between(range.first_month, range.last_month) + 1;
    if (months <= 0) throw DomainError("funds range is empty");
    Eigen::VectorXd out(months);
    for (int i = 0; i < months; ++i) {
        const int month = add_months(range.first_month, i);
        auto find_value = [month](const RawTable& t, const char* what) {
            for (std::size_t r = 0; r < t.months.size(); ++r) {
                if (t.months[r] == month) {
                    const double v = t.values(static_cast<Eigen::Index>(r), 0);
                    if (std::isnan(v)) break;
                    return v;
                }
            }
            throw CoverageError(std::string(what) + ": missing value at " +
                                std::to_string(month));
        };
        double value = find_value(series, file.c_str());
        if (value_basis == RateBasis::percent) value /= 100.0;
        const double rate = find_value(rates, "rate table");
        out[i] = to_geometric(value) - riskfree_geometric(rate, rate_basis);
    }
    return out;
}

void cmd_funds(const Json& root, const fs::path& dir) {
    const FundsConfig config = funds_config_from_json(root);
    std::vector<RawTable> rate_tables;
    rate_tables.reserve(config.rate_files.size());
    for (const auto& file : config.rate_files) rate_tables.push_back(parse_rate_csv(file));
    const RawTable rates = merge_rate_tables(rate_tables);

    const Eigen::VectorXd small =
        fund_premiums(config.small_file, config.value_basis, rates, config.rate_basis,
                      config.range);
    const Eigen::VectorXd mid = fund_premiums(config.mid_file, config.value_basis, rates,
                                              config.rate_basis, config.range);
    const Eigen::VectorXd large = fund_premiums(config.large_file, config.value_basis, rates,
                                                config.rate_basis, config.range);
    const FundsReport report = funds_regression(small, mid, large);

    auto fund_to_json = [](const FundFit& fund) {
        Json j;
        j["alpha"] = fund.fit.intercept;
        j["beta"] = fund.fit.slope;
        j["alpha_stderr"] = fund.fit.stderr_intercept;
        j["beta_stderr"] = fund.fit.stderr_slope;
        j["alpha_ci"] = {fund.alpha_ci[0], fund.alpha_ci[1]};
        j["beta_ci"] = {fund.beta_ci[0], fund.beta_ci[1]};
        j["r_squared"] = fund.fit.r_squared;
        j["residual_sd"] = fund.residual_sd;
        return j;
    };
    Json j;
    j["command"] = "funds";
    j["months"] = static_cast<int>(report.months);
    j["range"] = {config.range.first_month, config.range.last_month};
    j["small"] = fund_to_json(report.small);
    j["mid"] = fund_to_json(report.mid);
    j["residual_correlation"] = report.residual_correlation;
    write_json(dir / "funds.json", j);
}

const std::vector<std::string> kTopLevelKeys = {"seed",    "output",    "model",
                                                "simulate", "curve",    "stability",
                                                "density", "estimate", "funds"};

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"size-dependent market model: estimation, simulation and analysis"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    std::uint64_t seed = 0;
    int paths = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file")->required();
        cmd->add_option("--seed", seed, "override the config seed");
        cmd->add_option("--output-dir", output_dir,
                        "write into this directory instead of a timestamped one");
        cmd->add_option("--paths", paths, "override simulate.paths");
        return cmd;
    };
    CLI::App* estimate_cmd =
        add_common(app.add_subcommand("estimate", "fit the size model to a decile panel"));
    CLI::App* simulate_cmd =
        add_common(app.add_subcommand("simulate", "generate Monte Carlo paths"));
    CLI::App* curve_cmd =
        add_common(app.add_subcommand("curve", "simulate and export a capital distribution curve"));
    CLI::App* stability_cmd = add_common(
        app.add_subcommand("stability", "check drift conditions and the stationary density"));
    CLI::App* funds_cmd =
        add_common(app.add_subcommand("funds", "regress fund premiums on a benchmark fund"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        Json root = load_json_file(config_path);
        require_keys(root, kTopLevelKeys, "config");
        CLI::App* active = estimate_cmd->parsed()    ? estimate_cmd
                           : simulate_cmd->parsed()  ? simulate_cmd
                           : curve_cmd->parsed()     ? curve_cmd
                           : stability_cmd->parsed() ? stability_cmd
                                                     : funds_cmd;
        if (active->count("--seed") > 0) root["seed"] = seed;
        if (active->count("--paths") > 0) {
            if (!root.contains("simulate")) root["simulate"] = Json::object();
            root["simulate"]["paths"] = paths;
        }
        const OutputOptions output = output_options_from_json(root);
        const fs::path dir = make_run_dir(output, seed_from_json(root), output_dir);
        write_json(dir / "resolved_config.json", root);

        if (estimate_cmd->parsed()) {
            cmd_estimate(root, dir);
        } else if (simulate_cmd->parsed()) {
            cmd_simulate(root, dir, output);
        } else if (curve_cmd->parsed()) {
            cmd_curve(root, dir);
        } else if (stability_cmd->parsed()) {
            cmd_stability(root, dir);
        } else {
            cmd_funds(root, dir);
        }
        std::cout << dir.string() << "\n";
        return 0;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ComputationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace capmsize
