#include <doctest.h>

#include <cmath>

#include "capmsize/errors.hpp"
#include "capmsize/model.hpp"
#include "capmsize/rng.hpp"

using namespace capmsize;

namespace {

// Benchmark constants used across the reference examples.
BenchmarkDynamics reference_benchmark() {
    BenchmarkDynamics b;
    b.size_drift = 0.0044;
    b.size_vol = 0.0541;
    return b;
}

}  // namespace

TEST_CASE("linear spec evaluates to the reference coefficients") {
    const MarketModel model = make_linear_market(3, 0.0069, 0.0045, 0.052,
                                                 reference_benchmark());
    const SizeCoefficients at_one = eval_coefficients(model, 1.0);
    CHECK(at_one.alpha == doctest::Approx(0.0069).epsilon(1e-15));
    CHECK(at_one.beta == doctest::Approx(1.0045).epsilon(1e-15));
    CHECK(at_one.sigma == doctest::Approx(0.052).epsilon(1e-15));

    const SizeCoefficients at_zero = eval_coefficients(model, 0.0);
    CHECK(at_zero.alpha == 0.0);
    CHECK(at_zero.beta == 1.0);
}

TEST_CASE("power spec for a bottom benchmark evaluates by hand") {
    MarketModel model;
    model.n = 1;
    model.alpha = power_coefficient(-0.0055, 0.5, 0.0055, 0.5);
    model.alpha_wealth = model.alpha;
    model.beta_deviation = power_coefficient(0.12, 0.5, 0.12, 0.5);
    model.sigma = power_coefficient(0.09, 0.5, 0.09, 0.5);
    model.noise_correlation = Eigen::MatrixXd::Identity(1, 1);
    model.validate();

    const SizeCoefficients coef = eval_coefficients(model, -4.0);
    CHECK(coef.beta == doctest::Approx(1.24).epsilon(1e-15));
    CHECK(coef.alpha == doctest::Approx(-0.011).epsilon(1e-15));
    CHECK(coef.sigma == doctest::Approx(0.18).epsilon(1e-15));

    const SizeCoefficients origin = eval_coefficients(model, 0.0);
    CHECK(origin.alpha == 0.0);
    CHECK(origin.beta == 1.0);
    CHECK(origin.sigma == 0.0);
}

TEST_CASE("reduced drift and squared diffusion match hand arithmetic") {
    const MarketModel model = make_linear_market(2, 0.0069, 0.0045, 0.052,
                                                 reference_benchmark());
    CHECK(reduced_drift(model, 1.0) == doctest::Approx(-0.0069198).epsilon(1e-15));
    CHECK(reduced_drift(model, 0.0) == 0.0);
    // (0.0541 * 0.0045)^2 + 0.052^2
    CHECK(reduced_diffusion_sq(model, 1.0) ==
          doctest::Approx(0.0027040592679024996).epsilon(1e-15));
}

TEST_CASE("identity beta reduces the diffusion to the idiosyncratic term") {
    MarketModel model;
    model.n = 1;
    model.alpha = constant_coefficient(0.0);
    model.alpha_wealth = model.alpha;
    model.beta_deviation = constant_coefficient(0.0);
    model.sigma = constant_coefficient(0.07);
    model.benchmark = reference_benchmark();
    model.noise_correlation = Eigen::MatrixXd::Identity(1, 1);
    for (double c : {-5.0, 0.0, 3.0}) {
        CHECK(reduced_diffusion_sq(model, c) == doctest::Approx(0.0049).epsilon(1e-15));
        CHECK(reduced_drift(model, c) == 0.0);
    }
}

TEST_CASE("linear drift collapses to a single slope") {
    const double mu = 0.0069;
    const double gamma = 0.0045;
    const double g_s = 0.0044;
    BenchmarkDynamics bench;
    bench.size_drift = g_s;
    const MarketModel model = make_linear_market(2, mu, gamma, 0.052, bench);
    for (double c = -30.0; c <= 30.0; c += 1.5) {
        CHECK(reduced_drift(model, c) ==
              doctest::Approx(-(mu + g_s * gamma) * c).epsilon(1e-13));
    }
}

TEST_CASE("wealth drift and diffusion match the premium example") {
    MarketModel model;
    model.n = 1;
    model.alpha = linear_coefficient(0.0069);
    model.alpha_wealth = linear_coefficient(0.0017);
    model.beta_deviation = linear_coefficient(0.0045);
    model.sigma = constant_coefficient(0.052);
    model.benchmark.wealth_drift = 0.005;
    model.benchmark.wealth_vol = 0.06;
    model.noise_correlation = Eigen::MatrixXd::Identity(1, 1);

    const WealthDynamics dyn = wealth_drift_diffusion(model, 2.0);
    CHECK(dyn.drift == doctest::Approx(0.008445).epsilon(1e-15));
    CHECK(dyn.diffusion_sq == doctest::Approx(0.0063690916).epsilon(1e-15));

    // Identity beta case: drift g_V, diffusion sigma_V^2 + sigma^2.
    model.alpha_wealth = constant_coefficient(0.0);
    model.beta_deviation = constant_coefficient(0.0);
    const WealthDynamics flat = wealth_drift_diffusion(model, 7.0);
    CHECK(flat.drift == doctest::Approx(0.005).epsilon(1e-15));
    CHECK(flat.diffusion_sq == doctest::Approx(0.0036 + 0.002704).epsilon(1e-15));
}

TEST_CASE("weight map and its inverse") {
    Eigen::VectorXd weights(3);
    weights << 0.5, 0.25, 0.25;
    const Eigen::VectorXd c = relative_sizes_from_weights(weights);
    CHECK(c.size() == 2);
    CHECK(c[0] == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(c[1] == doctest::Approx(std::log(2.0)).epsilon(1e-15));

    const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(4, 0.25);
    CHECK(relative_sizes_from_weights(uniform).cwiseAbs().maxCoeff() < 1e-15);

    const Eigen::VectorXd back = weights_from_relative_sizes(Eigen::VectorXd::Zero(3));
    for (int i = 0; i < 4; ++i) CHECK(back[i] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("weight map round-trips random points of the simplex") {
    PathRng rng(31, 0);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd raw(6);
        for (int i = 0; i < 6; ++i) raw[i] = 0.01 + rng.uniform01();
        const Eigen::VectorXd weights = raw / raw.sum();
        const Eigen::VectorXd again =
            weights_from_relative_sizes(relative_sizes_from_weights(weights));
        CHECK((again - weights).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(again.sum() == doctest::Approx(1.0).epsilon(1e-13));
    }
    Eigen::VectorXd bad(3);
    bad << 0.5, 0.5, 0.0;
    CHECK_THROWS_AS(relative_sizes_from_weights(bad), DomainError);
}

TEST_CASE("model validation rejects malformed inputs") {
    MarketModel model = make_linear_market(2, 0.0069, 0.0045, 0.052);
    model.validate();

    MarketModel bad_corr = model;
    bad_corr.noise_correlation(0, 1) = 0.3;  // asymmetric
    CHECK_THROWS_AS(bad_corr.validate(), DomainError);

    MarketModel bad_rho = model;
    bad_rho.benchmark.correlation = 1.5;
    CHECK_THROWS_AS(bad_rho.validate(), DomainError);

    MarketModel bad_vol = model;
    bad_vol.benchmark.size_vol = -0.1;
    CHECK_THROWS_AS(bad_vol.validate(), DomainError);

    MarketModel bad_size = model;
    bad_size.noise_correlation = Eigen::MatrixXd::Identity(3, 3);
    CHECK_THROWS_AS(bad_size.validate(), DomainError);
}

TEST_CASE("linear-market detection recovers the parameters") {
    const MarketModel model = make_linear_market(4, 0.0069, 0.0045, -0.052);
    double mu = 0.0;
    double gamma = 0.0;
    double rho = 0.0;
    CHECK(is_linear_market(model, &mu, &gamma, &rho));
    CHECK(mu == 0.0069);
    CHECK(gamma == 0.0045);
    CHECK(rho == 0.052);  // volatility magnitude

    MarketModel power = model;
    power.sigma = power_coefficient(0.1, 0.5, 0.1, 0.5);
    CHECK_FALSE(is_linear_market(power));
}
