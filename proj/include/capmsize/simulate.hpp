#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "capmsize/model.hpp"
#include "capmsize/rng.hpp"

namespace capmsize {

// Path generation for the full market system: every stock's relative size
// C_k = ln(S_0/S_k) plus its log wealth, driven by a common benchmark and
// correlated idiosyncratic noise.

enum class Scheme { euler, exact_linear };

struct InitialState {
    // Relative sizes C_k(0), one per stock. Log wealths default to zero.
    Eigen::VectorXd relative_sizes;
    Eigen::VectorXd log_wealth;
    double log_benchmark_size = 0.0;
    double log_benchmark_wealth = 0.0;
};

struct SimulationConfig {
    MarketModel model;
    InitialState initial;
    double horizon = 100.0;
    double dt = 0.01;
    int paths = 1;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::euler;
    // Record every record_stride-th step (plus the initial state).
    int record_stride = 1;

    void validate() const;
};

struct SimulationEnsemble {
    // Recorded times, including t = 0.
    Eigen::VectorXd times;
    // Per path: times x n matrices.
    std::vector<Eigen::MatrixXd> relative_sizes;
    std::vector<Eigen::MatrixXd> log_sizes;
    std::vector<Eigen::MatrixXd> log_wealth;
    // times x paths.
    Eigen::MatrixXd log_benchmark_size;
    Eigen::MatrixXd log_benchmark_wealth;
    std::uint64_t seed = 0;
    std::string rng;
    Scheme scheme = Scheme::euler;
    double dt = 0.0;
    int record_stride = 1;
};

// Symmetric square root of a correlation matrix. Slightly negative
// eigenvalues from rounding are floored at zero; anything materially
// negative is rejected.
Eigen::MatrixXd correlation_factor(Eigen::Ref<const Eigen::MatrixXd> correlation);

struct BenchmarkIncrement {
    double d_log_size = 0.0;
    double d_log_wealth = 0.0;
};

// One joint draw of the benchmark log increments over a step of length dt.
BenchmarkIncrement sample_benchmark_increments(const BenchmarkDynamics& benchmark, double dt,
                                               PathRng& rng);

struct PathState {
    Eigen::VectorXd c;
    Eigen::VectorXd log_wealth;
    double log_benchmark_size = 0.0;
    double log_benchmark_wealth = 0.0;
};

// One explicit step: coefficients frozen at the pre-step state, shared
// Brownian increments dw across the size and wealth equations.
void euler_step(const MarketModel& model, PathState& state, double d_log_benchmark_size,
                double d_log_benchmark_wealth, Eigen::Ref<const Eigen::VectorXd> dw, double dt);

SimulationEnsemble simulate(const SimulationConfig& config);

const char* scheme_name(Scheme scheme);
Scheme scheme_from_name(const std::string& name);

// Long CSV: one "# ..." echo line, then path,time,series,value rows.
void write_ensemble_csv(const SimulationEnsemble& ensemble, const std::string& path,
                        const std::string& config_echo);

// Compact binary form; layout documented in docs/data-formats.md.
void write_ensemble_binary(const SimulationEnsemble& ensemble, const std::string& path,
                           const std::string& config_echo);
SimulationEnsemble read_ensemble_binary(const std::string& path, std::string* config_echo = nullptr);

}  // namespace capmsize
