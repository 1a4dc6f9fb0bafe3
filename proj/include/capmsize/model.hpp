#pragma once

#include <Eigen/Dense>

#include "capmsize/coefficients.hpp"

namespace capmsize {

// Parameters of the benchmark's two-dimensional geometric Brownian motion:
// log size ln S_0 and log wealth ln V_0, with correlated driving noise.
struct BenchmarkDynamics {
    double size_drift = 0.0;    // per-month drift of ln S_0
    double wealth_drift = 0.0;  // per-month drift of ln V_0
    double size_vol = 0.0;      // >= 0
    double wealth_vol = 0.0;    // >= 0
    double correlation = 0.0;   // in [-1, 1]
};

// The market: n non-benchmark portfolios whose alpha, wealth-alpha, beta and
// unsystematic volatility depend on the relative size c = ln(S_0/S_k).
// beta is stored as its deviation from 1, so beta(0) = 1 is structural.
struct MarketModel {
    Eigen::Index n = 0;
    CoefficientSpec alpha;
    CoefficientSpec alpha_wealth;
    CoefficientSpec beta_deviation;
    CoefficientSpec sigma;  // evaluated as |value| so the result is a volatility
    BenchmarkDynamics benchmark;
    Eigen::MatrixXd noise_correlation;  // n x n, symmetric, unit diagonal, PSD

    void validate() const;  // throws DomainError
};

// Convenience builder for the all-linear market (alpha = mu*c,
// beta = 1 + gamma*c, sigma = rho) with independent idiosyncratic noise.
MarketModel make_linear_market(Eigen::Index n, double mu, double gamma, double rho,
                               const BenchmarkDynamics& benchmark = {});

struct SizeCoefficients {
    double alpha = 0.0;
    double alpha_wealth = 0.0;
    double beta = 1.0;
    double sigma = 0.0;
};

SizeCoefficients eval_coefficients(const MarketModel& model, double c);

// Drift and squared diffusion of the one-dimensional SDE for c obtained by
// substituting the benchmark dynamics into the size equation:
//   drift(c)        = -alpha(c) + g_S (1 - beta(c))
//   diffusion_sq(c) = sigma_S^2 (1 - beta(c))^2 + sigma(c)^2
double reduced_drift(const MarketModel& model, double c);
double reduced_diffusion_sq(const MarketModel& model, double c);

// Same reduction for the wealth equation:
//   drift = alpha_wealth(c) + g_V beta(c);  diffusion_sq = sigma_V^2 beta(c)^2 + sigma(c)^2
struct WealthDynamics {
    double drift = 0.0;
    double diffusion_sq = 0.0;
};
WealthDynamics wealth_drift_diffusion(const MarketModel& model, double c);

using RelativeSizeVector = Eigen::VectorXd;  // entries C_k = ln(S_0/S_k)

// Bijection between the open weight simplex (n+1 entries, benchmark first)
// and relative-size space. Round trip is the identity to 1e-12.
RelativeSizeVector relative_sizes_from_weights(Eigen::Ref<const Eigen::VectorXd> weights);
Eigen::VectorXd weights_from_relative_sizes(Eigen::Ref<const Eigen::VectorXd> c);

// True when alpha is linear, beta deviation is linear and sigma is constant;
// fills the slopes/level used by the exact solver and the stability shortcut.
bool is_linear_market(const MarketModel& model, double* mu = nullptr, double* gamma = nullptr,
                      double* rho = nullptr);

}  // namespace capmsize
