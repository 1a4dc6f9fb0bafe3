#include <doctest.h>

#include <limits>

#include "capmsize/coefficients.hpp"
#include "capmsize/errors.hpp"

using namespace capmsize;

TEST_CASE("linear and constant branches evaluate directly") {
    const CoefficientSpec alpha = linear_coefficient(0.0069);
    CHECK(alpha(2.0) == doctest::Approx(0.0138).epsilon(1e-15));
    CHECK(alpha(-3.0) == doctest::Approx(-0.0207).epsilon(1e-15));
    CHECK(alpha(0.0) == 0.0);

    const CoefficientSpec sigma = constant_coefficient(0.052);
    CHECK(sigma(-100.0) == 0.052);
    CHECK(sigma(100.0) == 0.052);
}

TEST_CASE("power branches carry their sign in the scale") {
    // Negative branch -0.0055 sqrt|c|, positive branch 0.0055 sqrt(c).
    const CoefficientSpec spec = power_coefficient(-0.0055, 0.5, 0.0055, 0.5);
    CHECK(spec(-4.0) == doctest::Approx(-0.011).epsilon(1e-15));
    CHECK(spec(4.0) == doctest::Approx(0.011).epsilon(1e-15));
    CHECK(spec(0.0) == 0.0);
}

TEST_CASE("extend policy switches branch at zero") {
    CoefficientSpec spec;
    spec.positive = {CoefficientKind::constant, 2.0, 1.0};
    spec.negative = {CoefficientKind::constant, -5.0, 1.0};
    CHECK(spec(0.0) == 2.0);
    CHECK(spec(-1e-12) == -5.0);
}

TEST_CASE("bridge policy interpolates across the joint region") {
    CoefficientSpec spec;
    spec.positive = {CoefficientKind::linear, 1.0, 1.0};   // c on the right
    spec.negative = {CoefficientKind::constant, -3.0, 1.0};
    spec.joint = JointPolicy::bridge;
    spec.bridge_below = 1.0;
    spec.bridge_above = 1.0;
    // Endpoints: value(-1) = -3, value(1) = 1; interior is the chord.
    CHECK(spec(-1.0) == doctest::Approx(-3.0));
    CHECK(spec(1.0) == doctest::Approx(1.0));
    CHECK(spec(0.0) == doctest::Approx(-1.0));
    CHECK(spec(0.5) == doctest::Approx(0.0));
    // Outside the joint region the branches take over.
    CHECK(spec(2.0) == doctest::Approx(2.0));
    CHECK(spec(-4.0) == doctest::Approx(-3.0));
}

TEST_CASE("validation rejects broken branches") {
    CoefficientSpec bad = linear_coefficient(std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(bad.validate(), DomainError);

    CoefficientSpec negative_exponent = power_coefficient(1.0, -0.5, 1.0, 0.5);
    CHECK_THROWS_AS(negative_exponent.validate(), DomainError);

    CoefficientSpec zero_bridge = linear_coefficient(1.0);
    zero_bridge.joint = JointPolicy::bridge;
    zero_bridge.bridge_above = 0.0;
    CHECK_THROWS_AS(zero_bridge.validate(), DomainError);
}

TEST_CASE("evaluation rejects non-finite arguments") {
    const CoefficientSpec spec = linear_coefficient(1.0);
    CHECK_THROWS_AS(spec(std::numeric_limits<double>::quiet_NaN()), DomainError);
    CHECK_THROWS_AS(spec(std::numeric_limits<double>::infinity()), DomainError);
}

TEST_CASE("shape predicates identify linear and constant specs") {
    double slope = 0.0;
    CHECK(spec_is_linear(linear_coefficient(0.25), &slope));
    CHECK(slope == 0.25);
    CHECK_FALSE(spec_is_linear(constant_coefficient(0.25)));
    CHECK_FALSE(spec_is_linear(power_coefficient(0.25, 1.0, 0.25, 1.0)));

    double value = 0.0;
    CHECK(spec_is_constant(constant_coefficient(0.052), &value));
    CHECK(value == 0.052);
    CHECK_FALSE(spec_is_constant(linear_coefficient(0.052)));
}
