#include "capmsize/model.hpp"

#include <cmath>
#include <string>

#include "capmsize/errors.hpp"

namespace capmsize {

void MarketModel::validate() const {
    if (n < 1) throw DomainError("market needs at least one non-benchmark portfolio");
    alpha.validate();
    alpha_wealth.validate();
    beta_deviation.validate();
    sigma.validate();
    if (!(benchmark.size_vol >= 0.0) || !(benchmark.wealth_vol >= 0.0)) {
        throw DomainError("benchmark volatilities must be >= 0");
    }
    if (!(std::abs(benchmark.correlation) <= 1.0)) {
        throw DomainError("benchmark correlation must be in [-1, 1]");
    }
    if (!std::isfinite(benchmark.size_drift) || !std::isfinite(benchmark.wealth_drift)) {
        throw DomainError("benchmark drifts must be finite");
    }
    if (noise_correlation.rows() != n || noise_correlation.cols() != n) {
        throw DomainError("noise correlation must be n x n (n=" + std::to_string(n) + ", got " +
                          std::to_string(noise_correlation.rows()) + "x" +
                          std::to_string(noise_correlation.cols()) + ")");
    }
    if (!noise_correlation.allFinite()) throw DomainError("noise correlation has non-finite entries");
    const double asym = (noise_correlation - noise_correlation.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12) throw DomainError("noise correlation is not symmetric");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(noise_correlation(i, i) - 1.0) > 1e-12) {
            throw DomainError("noise correlation diagonal must be 1");
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(noise_correlation,
                                                          Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw DomainError("noise correlation eigenvalue computation failed");
    }
    if (solver.eigenvalues().minCoeff() < -1e-10 * static_cast<double>(n)) {
        throw DomainError("noise correlation is not positive semidefinite");
    }
}

MarketModel make_linear_market(Eigen::Index n, double mu, double gamma, double rho,
                               const BenchmarkDynamics& benchmark) {
    MarketModel model;
    model.n = n;
    model.alpha = linear_coefficient(mu);
    model.alpha_wealth = linear_coefficient(mu);
    model.beta_deviation = linear_coefficient(gamma);
    model.sigma = constant_coefficient(rho);
    model.benchmark = benchmark;
    model.noise_correlation = Eigen::MatrixXd::Identity(n, n);
    return model;
}

SizeCoefficients eval_coefficients(const MarketModel& model, double c) {
    SizeCoefficients out;
    out.alpha = model.alpha(c);
    out.alpha_wealth = model.alpha_wealth(c);
    out.beta = 1.0 + model.beta_deviation(c);
    out.sigma = std::abs(model.sigma(c));
    return out;
}

double reduced_drift(const MarketModel& model, double c) {
    return -model.alpha(c) - model.benchmark.size_drift * model.beta_deviation(c);
}

double reduced_diffusion_sq(const MarketModel& model, double c) {
    const double dev = model.beta_deviation(c);
    const double sig = model.sigma(c);
    const double bench = model.benchmark.size_vol * dev;
    return bench * bench + sig * sig;
}

WealthDynamics wealth_drift_diffusion(const MarketModel& model, double c) {
    const double beta = 1.0 + model.beta_deviation(c);
    const double sig = model.sigma(c);
    WealthDynamics out;
    out.drift = model.alpha_wealth(c) + model.benchmark.wealth_drift * beta;
    out.diffusion_sq = model.benchmark.wealth_vol * model.benchmark.wealth_vol * beta * beta +
                       sig * sig;
    return out;
}

RelativeSizeVector relative_sizes_from_weights(Eigen::Ref<const Eigen::VectorXd> weights) {
    if (weights.size() < 2) throw DomainError("weight vector needs benchmark plus one portfolio");
    if ((weights.array() <= 0.0).any()) throw DomainError("weights must be strictly positive");
    if (std::abs(weights.sum() - 1.0) > 1e-9) {
        throw DomainError("weights must sum to 1 (got " + std::to_string(weights.sum()) + ")");
    }
    const double w0 = weights[0];
    RelativeSizeVector c(weights.size() - 1);
    for (Eigen::Index k = 1; k < weights.size(); ++k) c[k - 1] = std::log(w0 / weights[k]);
    return c;
}

Eigen::VectorXd weights_from_relative_sizes(Eigen::Ref<const Eigen::VectorXd> c) {
    if (c.size() < 1) throw DomainError("relative-size vector is empty");
    if (!c.allFinite()) throw DomainError("relative sizes must be finite");
    // log-sum-exp of {0, -c_1, ..., -c_n} keeps the map stable for large |c|.
    double top = 0.0;
    for (Eigen::Index k = 0; k < c.size(); ++k) top = std::max(top, -c[k]);
    double acc = std::exp(0.0 - top);
    for (Eigen::Index k = 0; k < c.size(); ++k) acc += std::exp(-c[k] - top);
    const double log_total = top + std::log(acc);
    Eigen::VectorXd weights(c.size() + 1);
    weights[0] = std::exp(-log_total);
    for (Eigen::Index k = 0; k < c.size(); ++k) weights[k + 1] = std::exp(-c[k] - log_total);
    return weights;
}

bool is_linear_market(const MarketModel& model, double* mu, double* gamma, double* rho) {
    double m = 0.0;
    double g = 0.0;
    double r = 0.0;
    if (!spec_is_linear(model.alpha, &m)) return false;
    if (!spec_is_linear(model.beta_deviation, &g)) return false;
    if (!spec_is_constant(model.sigma, &r)) return false;
    if (mu != nullptr) *mu = m;
    if (gamma != nullptr) *gamma = g;
    if (rho != nullptr) *rho = std::abs(r);
    return true;
}

}  // namespace capmsize
