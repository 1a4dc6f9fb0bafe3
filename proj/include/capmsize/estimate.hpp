#pragma once

#include <array>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "capmsize/panel.hpp"

namespace capmsize {

struct OlsFit {
    double intercept = 0.0;
    double slope = 0.0;
    double stderr_intercept = 0.0;
    double stderr_slope = 0.0;
    double r_squared = 0.0;
    Eigen::VectorXd residuals;
    Eigen::Index dof = 0;  // n - 2
};

// Simple regression y = intercept + slope * x by the normal equations.
OlsFit ols(Eigen::Ref<const Eigen::VectorXd> x, Eigen::Ref<const Eigen::VectorXd> y);

// Size normalizer f(C): the top-benchmark pipeline scales by C itself, the
// bottom-benchmark pipeline by sqrt(|C|).
enum class SizeForm { linear, sqrt_abs };
double size_normalizer(SizeForm form, double c);

enum class ReturnTarget { price, premium };

// One (window, decile) regression outcome.
struct WindowEstimate {
    int window = 0;             // 0-based
    int month = 0;              // YYYYMM of the window's first month
    int decile = 0;             // label
    double beta = 0.0;
    double alpha = 0.0;
    double size = 0.0;          // C_k(n) vs the benchmark at window start
    double window_return = 0.0; // windowed sum of the decile's own target returns
};

// Per-window OLS of each non-benchmark decile's monthly target returns on the
// benchmark's; the benchmark itself (beta 1 by construction) is excluded.
std::vector<WindowEstimate> windowed_betas(const ReturnPanel& panel, int window_months,
                                           int benchmark_decile, ReturnTarget target);

// Windowed sums of the benchmark's own target returns, one per window.
Eigen::VectorXd benchmark_window_returns(const ReturnPanel& panel, int window_months,
                                         int benchmark_decile, ReturnTarget target);

enum class GammaEstimator { mean_ratio, ls_origin };

// Slope of the beta trend in size: mean of (beta-1)/f(C), or least squares of
// beta-1 on f(C) through the origin. Cells with |f(C)| <= min_normalizer are
// skipped.
double estimate_gamma(const std::vector<WindowEstimate>& windows, SizeForm form,
                      GammaEstimator estimator = GammaEstimator::mean_ratio,
                      double min_normalizer = 1e-6);

// Residuals eps[k][n] = window_return(k,n) - (1 + gamma*f(C_k(n))) * benchmark(n),
// one row per decile (order of first appearance, reported via decile_order).
Eigen::MatrixXd residual_series(const std::vector<WindowEstimate>& windows, double gamma,
                                Eigen::Ref<const Eigen::VectorXd> benchmark_windowed,
                                SizeForm form, std::vector<int>* decile_order = nullptr);

// The C_k(n) values arranged exactly like residual_series output.
Eigen::MatrixXd window_sizes(const std::vector<WindowEstimate>& windows);

struct NoiseFit {
    double gamma = 0.0;
    double mu = 0.0;
    double rho = 0.0;                // > 0 for a non-degenerate fit
    Eigen::MatrixXd standardized_z;  // decile x window; NaN where excluded
};

// Normalizes residuals by f(C) and fits the Gaussian noise model: mu is the
// sample mean, rho the sample standard deviation (n-1). Near-zero normalizer
// cells are excluded with a warning entry, or rejected when error_on_small.
NoiseFit fit_noise(Eigen::Ref<const Eigen::MatrixXd> eps, Eigen::Ref<const Eigen::MatrixXd> sizes,
                   SizeForm form, double gamma_used, double min_normalizer = 1e-6,
                   bool error_on_small = false, std::vector<std::string>* warnings = nullptr);

struct TestResult {
    double statistic = 0.0;
    double p_value = 0.0;
};

// Autocorrelation function, acf[0] == 1, lags 0..max_lag.
Eigen::VectorXd acf(Eigen::Ref<const Eigen::VectorXd> series, int max_lag);
// Ljung-Box portmanteau test against chi-squared(lags).
TestResult ljung_box(Eigen::Ref<const Eigen::VectorXd> series, int lags);
// Jarque-Bera normality test from sample skewness and kurtosis.
TestResult jarque_bera(Eigen::Ref<const Eigen::VectorXd> series);

// Pearson correlation over all paired finite cells of two standardized-noise
// matrices of the same shape.
double noise_cross_correlation(Eigen::Ref<const Eigen::MatrixXd> z_a,
                               Eigen::Ref<const Eigen::MatrixXd> z_b);

enum class BenchmarkSide { top, bottom };

struct EstimationOptions {
    int window_months = 24;
    BenchmarkSide side = BenchmarkSide::top;  // top: first decile, f(C)=C; bottom: last, sqrt|C|
    ReturnTarget target = ReturnTarget::price;
    GammaEstimator gamma_estimator = GammaEstimator::mean_ratio;
    std::vector<int> ljung_box_lags = {6, 12};
    int acf_lags = 12;
    double min_normalizer = 1e-6;
    bool error_on_small_normalizer = false;
};

struct SeriesDiagnostics {
    int decile = 0;
    std::vector<std::pair<int, TestResult>> ljung_box;  // (lags, result)
    TestResult jarque_bera;
    Eigen::VectorXd acf;
};

struct EstimationReport {
    EstimationOptions options;
    int benchmark_decile = 0;
    SizeForm form = SizeForm::linear;
    std::vector<WindowEstimate> windows;
    Eigen::VectorXd benchmark_windowed;
    std::vector<int> residual_deciles;  // row labels of the matrices below
    NoiseFit noise;
    Eigen::MatrixXd z_correlation;  // decile x decile correlation of standardized rows
    std::vector<SeriesDiagnostics> diagnostics;
    std::vector<std::string> warnings;
};

// The full pipeline: windowed betas, gamma, residuals, noise fit, diagnostics.
EstimationReport run_estimation(const ReturnPanel& panel, const EstimationOptions& options);

struct FundFit {
    OlsFit fit;
    std::array<double, 2> alpha_ci{};  // 95% Student-t, dof = n-2
    std::array<double, 2> beta_ci{};
    double residual_sd = 0.0;
};

struct FundsReport {
    FundFit small;
    FundFit mid;
    double residual_correlation = 0.0;
    Eigen::Index months = 0;
};

// Joint regression of two fund premium series on a benchmark premium series.
FundsReport funds_regression(Eigen::Ref<const Eigen::VectorXd> small_premium,
                             Eigen::Ref<const Eigen::VectorXd> mid_premium,
                             Eigen::Ref<const Eigen::VectorXd> benchmark_premium);

}  // namespace capmsize
