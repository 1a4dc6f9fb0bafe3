// End-to-end acceptance checks. Each criterion prints one [PASS]/[FAIL] line
// with the measured values; the exit code is 1 when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <Eigen/Dense>

#include "capmsize/analysis.hpp"
#include "capmsize/config.hpp"
#include "capmsize/estimate.hpp"
#include "capmsize/model.hpp"
#include "capmsize/returns.hpp"
#include "capmsize/simulate.hpp"
#include "capmsize/textio.hpp"
#include "support/synthetic.hpp"

namespace fs = std::filesystem;
using namespace capmsize;

namespace {

std::string g_cli;
fs::path g_scratch;
int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& note) {
    std::printf("[%s] criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                note.empty() ? "" : " -- ", note.c_str());
    if (!pass) ++g_failures;
}

int run_tool(const std::string& args) {
    const std::string cmd =
        g_cli + " " + args + " >> " + (g_scratch / "cli.log").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "<missing:" + path.string() + ">";
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string fmt(double v) { return format_double(v); }

// ---------------------------------------------------------------------------
// 1. Return conversions compose correctly.

void criterion_1() {
    const double g_sum = to_geometric(0.2) + to_geometric(0.3);
    const bool additive = std::abs((0.2 + 0.3) - 0.5) < 1e-12;
    const bool compound = std::abs(to_arithmetic(g_sum) - 0.56) < 1e-12;
    const bool inverse = std::abs(g_sum - to_geometric(0.56)) < 1e-12;
    report(1, "return conversions", additive && compound && inverse,
           "arithmetic 0.2 then 0.3 compounds to " + fmt(to_arithmetic(g_sum)));
}

// ---------------------------------------------------------------------------
// 2. Linear stability margin.

void criterion_2() {
    MarketModel model = make_linear_market(100, 0.0069, 0.0045, 0.1);
    model.benchmark.size_drift = 0.0044;
    model.benchmark.size_vol = 0.0541;
    const StabilityVerdict verdict = stability_check(model);
    const double margin = 0.0069 + 0.0044 * 0.0045;
    const bool pass = verdict.verdict == Stability::stable &&
                      std::abs(verdict.gamma_cap - margin) <= 1e-15 &&
                      verdict.method == "linear";
    report(2, "stability margin", pass,
           "verdict stable, margin " + fmt(verdict.gamma_cap));
}

// ---------------------------------------------------------------------------
// 3. Euler engine matches mean-reverting moments at three horizons.

void criterion_3() {
    const auto started = std::chrono::steady_clock::now();
    const double mu = 0.0069, rho = 0.1;
    SimulationConfig config;
    config.model = make_linear_market(1, mu, 0.0, rho);
    config.model.benchmark.size_drift = 0.0044;
    config.model.benchmark.size_vol = 0.0541;
    config.initial.relative_sizes = Eigen::VectorXd::Zero(1);
    config.horizon = 100.0;
    config.dt = 0.01;
    config.paths = 10000;
    config.record_stride = 1000;  // every 10 time units
    config.seed = 1001;
    const SimulationEnsemble ens = simulate(config);

    bool pass = true;
    double worst_z = 0.0;
    for (double t : {10.0, 50.0, 100.0}) {
        const auto r = static_cast<Eigen::Index>(std::lround(t / 10.0));
        Eigen::VectorXd c(config.paths);
        for (int p = 0; p < config.paths; ++p) c[p] = ens.relative_sizes[p](r, 0);
        const double want_var = rho * rho * (1.0 - std::exp(-2.0 * mu * t)) / (2.0 * mu);
        const double mean = c.mean();
        const double var = (c.array() - mean).square().sum() / (config.paths - 1);
        const double z_mean = mean / std::sqrt(want_var / config.paths);
        const double z_var =
            (var - want_var) / (want_var * std::sqrt(2.0 / (config.paths - 1.0)));
        worst_z = std::max({worst_z, std::abs(z_mean), std::abs(z_var)});
        pass = pass && std::abs(z_mean) < 3.0 && std::abs(z_var) < 3.0;
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    pass = pass && seconds < 60.0;
    report(3, "mean-reverting engine moments", pass,
           "worst |z| " + fmt(worst_z) + " across t in {10,50,100}, " + fmt(seconds) + "s");
}

// ---------------------------------------------------------------------------
// 4. Stationary density against the Gaussian closed form.

double gaussian_sup_error(const StationaryDensity& density) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < density.grid.size(); ++i) {
        const double c = density.grid[i];
        worst = std::max(worst,
                         std::abs(density.density[i] - std::exp(-c * c) / std::sqrt(M_PI)));
    }
    return worst;
}

void criterion_4() {
    MarketModel model = make_linear_market(1, 1.0, 0.0, 1.0);
    const double err_fine = gaussian_sup_error(stationary_density(model, {-6.0, 6.0, 1e-3}));
    // The drift integrand is linear here, so the scale integral is exact at any
    // step and fine grids sit at the rounding floor. The step dependence is only
    // resolvable at coarse steps, where the normalizer carries the error.
    const double err_half = gaussian_sup_error(stationary_density(model, {-6.0, 6.0, 0.5}));
    const double err_coarse = gaussian_sup_error(stationary_density(model, {-6.0, 6.0, 1.0}));
    const bool pass = err_fine < 1e-4 && err_half < err_coarse;
    report(4, "stationary density closed form", pass,
           "sup error " + fmt(err_fine) + " at step 1e-3; halving step 1.0 to 0.5 cuts " +
               fmt(err_coarse) + " to " + fmt(err_half));
}

// ---------------------------------------------------------------------------
// 5. Simulated capital distribution curves are nearly log-linear over the
// middle ranks, run through the CLI across 20 seeds.

void criterion_5() {
    const fs::path dir = g_scratch / "curves";
    fs::create_directories(dir);
    Json config;
    config["model"] = {
        {"stocks", 100},
        {"alpha", {{"kind", "linear"}, {"scale", 0.0069}}},
        {"beta_deviation", {{"kind", "linear"}, {"scale", 0.0045}}},
        {"sigma", {{"kind", "constant"}, {"scale", 0.1}}},
        {"benchmark", {{"size_drift", 0.0044}, {"size_vol", 0.0541}}},
    };
    config["simulate"] = {{"horizon", 100},
                          {"dt", 0.05},
                          {"paths", 1},
                          {"record_stride", 2000},
                          {"initial", {{"relative_sizes", 0.0}}}};
    config["curve"] = {{"time", 100}, {"kind", "modified"}, {"rank_lo", 10}, {"rank_hi", 90}};
    const fs::path config_path = dir / "config.json";
    std::ofstream(config_path) << config.dump(2);

    constexpr double kMinAbsCorrelation = 0.93;
    double worst = 1.0;
    bool pass = true;
    for (int seed = 1; seed <= 20; ++seed) {
        const fs::path out = dir / ("run-" + std::to_string(seed));
        if (run_tool("curve --config " + config_path.string() + " --seed " +
                     std::to_string(seed) + " --output-dir " + out.string()) != 0) {
            pass = false;
            break;
        }
        const Json fit = load_json_file((out / "fit.json").string());
        const double r = std::abs(fit.at("pearson_r").get<double>());
        worst = std::min(worst, r);
        pass = pass && r > kMinAbsCorrelation;
    }
    report(5, "curve log-linearity over middle ranks", pass,
           "min |r| " + fmt(worst) + " over 20 seeds, threshold " + fmt(kMinAbsCorrelation));
}

// ---------------------------------------------------------------------------
// 6. Size-proportional volatility drives weights to the uniform split.

void criterion_6() {
    SimulationConfig config;
    config.model.n = 9;
    config.model.alpha = linear_coefficient(0.0069);
    config.model.alpha_wealth = linear_coefficient(0.0069);
    config.model.beta_deviation = linear_coefficient(0.0045);
    config.model.sigma = linear_coefficient(0.1);  // sigma(c) = 0.1 c
    config.model.benchmark.size_drift = 0.0044;
    config.model.benchmark.size_vol = 0.0;
    config.model.noise_correlation = Eigen::MatrixXd::Identity(9, 9);
    config.initial.relative_sizes = Eigen::VectorXd::LinSpaced(9, 0.5, 2.0);
    config.horizon = 100.0;
    config.dt = 0.01;
    config.paths = 200;
    config.record_stride = 2500;  // records at t = 0, 25, 50, 75, 100
    config.seed = 606;
    const SimulationEnsemble ens = simulate(config);

    std::vector<double> deviation;
    for (Eigen::Index r = 1; r < ens.times.size(); ++r) {
        Eigen::VectorXd mean_weights = Eigen::VectorXd::Zero(10);
        for (int p = 0; p < config.paths; ++p) {
            mean_weights +=
                weights_from_relative_sizes(ens.relative_sizes[p].row(r).transpose());
        }
        mean_weights /= static_cast<double>(config.paths);
        deviation.push_back((mean_weights.array() - 0.1).abs().maxCoeff());
    }
    bool pass = true;
    std::string trail;
    for (std::size_t i = 0; i < deviation.size(); ++i) {
        if (i > 0) {
            pass = pass && deviation[i] < deviation[i - 1];
            trail += " > ";
        }
        trail += fmt(deviation[i]);
    }
    report(6, "weights uniformize under size-proportional noise", pass, trail);
}

// ---------------------------------------------------------------------------
// 7. The estimation pipeline recovers planted panel parameters through the
// CLI, within three Monte Carlo standard errors.

void criterion_7() {
    const fs::path dir = g_scratch / "panel";
    fs::create_directories(dir);
    testsupport::PanelPlant plant;
    const testsupport::PanelData data = testsupport::make_planted_panel(plant);
    const testsupport::PlantErrors se = testsupport::plant_standard_errors(plant, data);
    const testsupport::PanelFiles files = testsupport::write_panel_files(dir, data, plant);

    Json config;
    config["estimate"] = {
        {"files",
         {{"price", files.price.string()},
          {"total", files.total.string()},
          {"caps", files.caps.string()},
          {"rates", {files.rates.string()}}}},
        {"range", {data.range.first_month, data.range.last_month}},
        {"benchmark", "top"},
        {"target", "price"},
    };
    const fs::path config_path = dir / "config.json";
    std::ofstream(config_path) << config.dump(2);
    const fs::path out = dir / "run";
    if (run_tool("estimate --config " + config_path.string() + " --output-dir " +
                 out.string()) != 0) {
        report(7, "pipeline recovers planted panel parameters", false, "estimate command failed");
        return;
    }
    const Json price = load_json_file((out / "report.json").string()).at("price");
    const double gamma = price.at("gamma").get<double>();
    const double mu = price.at("mu").get<double>();
    const double rho = price.at("rho").get<double>();
    bool pass = std::abs(gamma - plant.gamma) < 3.0 * se.gamma &&
                std::abs(mu - plant.mu) < 3.0 * se.mu &&
                std::abs(rho - plant.rho) < 3.0 * se.rho;
    std::string note = "gamma " + fmt(gamma) + " (3se " + fmt(3.0 * se.gamma) + "), mu " +
                       fmt(mu) + " (3se " + fmt(3.0 * se.mu) + "), rho " + fmt(rho) + " (3se " +
                       fmt(3.0 * se.rho) + ")";

    // Optional real-data leg: a directory holding the decile library files as
    // price.csv / total.csv / caps.csv / rates.csv covering 192607..202006.
    // Published reference values are held to a loose 20%, since data
    // revisions move them.
    const char* real_dir = std::getenv("CAPMSIZE_REAL_PANEL");
    if (real_dir == nullptr) {
        note += "; real panel not supplied, synthetic only";
    } else {
        const fs::path rdir = real_dir;
        Json rconfig;
        rconfig["estimate"] = {
            {"files",
             {{"price", (rdir / "price.csv").string()},
              {"total", (rdir / "total.csv").string()},
              {"caps", (rdir / "caps.csv").string()},
              {"rates", {(rdir / "rates.csv").string()}}}},
            {"range", {192607, 202006}},
            {"benchmark", "top"},
            {"target", "price"},
        };
        const fs::path rconfig_path = dir / "real_config.json";
        std::ofstream(rconfig_path) << rconfig.dump(2);
        const fs::path rout = dir / "real_run";
        if (run_tool("estimate --config " + rconfig_path.string() + " --output-dir " +
                     rout.string()) != 0) {
            pass = false;
            note += "; real panel run failed";
        } else {
            const Json rp = load_json_file((rout / "report.json").string()).at("price");
            const double rg = rp.at("gamma").get<double>();
            const double rm = rp.at("mu").get<double>();
            const double rr = rp.at("rho").get<double>();
            const bool real_ok = std::abs(rg - 0.0045) <= 0.2 * 0.0045 &&
                                 std::abs(rm - 0.0069) <= 0.2 * 0.0069 &&
                                 std::abs(rr - 0.052) <= 0.2 * 0.052;
            pass = pass && real_ok;
            note += "; real panel gamma " + fmt(rg) + ", mu " + fmt(rm) + ", rho " + fmt(rr) +
                    " vs 0.0045/0.0069/0.052 at 20%";
        }
    }
    report(7, "pipeline recovers planted panel parameters", pass, note);
}

// ---------------------------------------------------------------------------
// 8. Fund regressions: alpha confidence intervals cover zero and the slope
// estimate is unbiased across replications.

void criterion_8() {
    const int reps = 200;
    testsupport::FundsPlant plant;
    int covered = 0;
    double beta_sum = 0.0;
    double se_sq_sum = 0.0;
    for (int r = 0; r < reps; ++r) {
        plant.seed = 9000 + static_cast<std::uint64_t>(r);
        const testsupport::FundsSeries series = testsupport::draw_funds_series(plant);
        const FundsReport report_r = funds_regression(series.small, series.mid, series.large);
        if (report_r.small.alpha_ci[0] <= 0.0 && 0.0 <= report_r.small.alpha_ci[1]) ++covered;
        beta_sum += report_r.small.fit.slope;
        const double sxx = (series.large.array() - series.large.mean()).square().sum();
        se_sq_sum += plant.sigma_small * plant.sigma_small / sxx;
    }
    const double beta_mean = beta_sum / reps;
    const double se_mean = std::sqrt(se_sq_sum) / reps;
    const bool pass =
        covered >= 180 && std::abs(beta_mean - plant.beta_small) < 3.0 * se_mean;
    report(8, "fund alpha coverage and slope recovery", pass,
           std::to_string(covered) + "/200 alpha intervals cover 0, mean beta " +
               fmt(beta_mean) + " vs 1.27 (3se " + fmt(3.0 * se_mean) + ")");
}

// ---------------------------------------------------------------------------
// 9. Re-running any command reproduces its outputs byte for byte.

void criterion_9() {
    const fs::path dir = g_scratch / "determinism";
    fs::create_directories(dir);

    Json sim;
    sim["seed"] = 7;
    sim["output"] = {{"binary", true}};
    sim["model"] = {
        {"stocks", 5},
        {"alpha", {{"kind", "linear"}, {"scale", 0.0069}}},
        {"beta_deviation", {{"kind", "linear"}, {"scale", 0.0045}}},
        {"sigma", {{"kind", "constant"}, {"scale", 0.1}}},
        {"benchmark", {{"size_drift", 0.0044}, {"size_vol", 0.0541}}},
    };
    sim["simulate"] = {{"horizon", 5},
                       {"dt", 0.01},
                       {"paths", 3},
                       {"initial", {{"relative_sizes", {{"linspace", {0.5, 2.0}}}}}}};
    const fs::path sim_config = dir / "simulate.json";
    std::ofstream(sim_config) << sim.dump(2);

    Json stab;
    stab["model"] = sim["model"];
    const fs::path stab_config = dir / "stability.json";
    std::ofstream(stab_config) << stab.dump(2);

    bool pass = true;
    std::string note;
    auto compare = [&](const std::string& command, const fs::path& config,
                       const std::vector<std::string>& outputs) {
        const fs::path a = dir / (command + "-a");
        const fs::path b = dir / (command + "-b");
        if (run_tool(command + " --config " + config.string() + " --output-dir " + a.string()) !=
                0 ||
            run_tool(command + " --config " + config.string() + " --output-dir " + b.string()) !=
                0) {
            pass = false;
            note += command + " failed; ";
            return;
        }
        for (const auto& name : outputs) {
            if (slurp(a / name) != slurp(b / name)) {
                pass = false;
                note += command + "/" + name + " differs; ";
            }
        }
    };
    compare("simulate", sim_config,
            {"ensemble.csv", "ensemble.bin", "resolved_config.json"});
    compare("stability", stab_config, {"stability.json", "density.csv"});
    compare("estimate", (g_scratch / "panel" / "config.json"),
            {"report.json", "windows_price.csv", "standardized_price.csv"});
    if (pass) note = "simulate, stability and estimate reruns are byte-identical";
    report(9, "deterministic reruns", pass, note);
}

// ---------------------------------------------------------------------------
// 10. The Euler scheme converges to the exact linear solution as the step
// shrinks, with shared Brownian increments.

void criterion_10() {
    auto rms_gap = [](double dt) {
        SimulationConfig config;
        config.model = make_linear_market(10, 0.0069, 0.0045, 0.1);
        config.model.benchmark.size_drift = 0.0044;
        config.model.benchmark.size_vol = 0.0541;
        config.initial.relative_sizes = Eigen::VectorXd::LinSpaced(10, 0.5, 2.0);
        config.horizon = 10.0;
        config.dt = dt;
        config.paths = 200;
        config.seed = 4242;
        config.record_stride = static_cast<int>(std::lround(10.0 / dt));
        config.scheme = Scheme::euler;
        const SimulationEnsemble euler = simulate(config);
        config.scheme = Scheme::exact_linear;
        const SimulationEnsemble exact = simulate(config);
        const Eigen::Index last = euler.times.size() - 1;
        double sq = 0.0;
        for (int p = 0; p < config.paths; ++p) {
            sq += (euler.relative_sizes[p].row(last) - exact.relative_sizes[p].row(last))
                      .squaredNorm();
        }
        return std::sqrt(sq / (config.paths * 10));
    };
    std::vector<double> gaps;
    for (double dt : {0.2, 0.1, 0.05, 0.025}) gaps.push_back(rms_gap(dt));
    bool pass = true;
    std::string trail;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        if (i > 0) {
            pass = pass && gaps[i] < gaps[i - 1];
            trail += " > ";
        }
        trail += fmt(gaps[i]);
    }
    report(10, "euler converges to the exact scheme", pass, trail);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) {
        g_cli = argv[1];
    } else {
        const auto sibling = fs::path(argv[0]).parent_path() / "capmsize";
        if (fs::exists(sibling)) g_cli = sibling.string();
    }
    if (g_cli.empty()) {
        std::fprintf(stderr, "usage: %s <path-to-capmsize>\n", argv[0]);
        return 2;
    }
    g_scratch = fs::temp_directory_path() / "capmsize-acceptance";
    fs::remove_all(g_scratch);
    fs::create_directories(g_scratch);

    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();

    if (g_failures > 0) {
        std::printf("%d of 10 criteria failed\n", g_failures);
        return 1;
    }
    std::printf("all 10 criteria passed\n");
    return 0;
}
