#pragma once

namespace capmsize {

enum class CoefficientKind { linear, power, constant };

// One branch of a size-dependent coefficient. linear evaluates scale*c,
// power evaluates scale*|c|^exponent (sign carried by scale), constant
// evaluates scale regardless of c.
struct CoefficientBranch {
    CoefficientKind kind = CoefficientKind::constant;
    double scale = 0.0;
    double exponent = 1.0;  // read only when kind == power; must be >= 0
};

double eval_branch(const CoefficientBranch& branch, double c);

// extend: branch formulas apply straight through zero (c >= 0 takes the
// positive branch). bridge: linear interpolation between the branch values
// at -bridge_below and bridge_above, keeping the function continuous there.
enum class JointPolicy { extend, bridge };

struct CoefficientSpec {
    CoefficientBranch positive;  // c >= 0
    CoefficientBranch negative;  // c < 0
    JointPolicy joint = JointPolicy::extend;
    double bridge_below = 1.0;  // > 0; bridge region is [-bridge_below, bridge_above]
    double bridge_above = 1.0;  // > 0

    double operator()(double c) const;
    void validate() const;  // throws DomainError
};

CoefficientSpec constant_coefficient(double value);
CoefficientSpec linear_coefficient(double slope);
CoefficientSpec power_coefficient(double scale_negative, double exponent_negative,
                                  double scale_positive, double exponent_positive);

// True when the spec evaluates to slope*c for every c (both branches linear
// with equal slope; the bridge of a line is the line itself).
bool spec_is_linear(const CoefficientSpec& spec, double* slope = nullptr);
bool spec_is_constant(const CoefficientSpec& spec, double* value = nullptr);

}  // namespace capmsize
