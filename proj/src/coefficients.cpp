#include "capmsize/coefficients.hpp"

#include <cmath>
#include <string>

#include "capmsize/errors.hpp"

namespace capmsize {

double eval_branch(const CoefficientBranch& branch, double c) {
    if (!std::isfinite(c)) throw DomainError("coefficient evaluated at non-finite argument");
    switch (branch.kind) {
        case CoefficientKind::linear:
            return branch.scale * c;
        case CoefficientKind::power:
            return branch.scale * std::pow(std::abs(c), branch.exponent);
        case CoefficientKind::constant:
            return branch.scale;
    }
    throw DomainError("unknown coefficient kind");
}

double CoefficientSpec::operator()(double c) const {
    if (!std::isfinite(c)) throw DomainError("coefficient evaluated at non-finite argument");
    if (joint == JointPolicy::extend) {
        return c >= 0.0 ? eval_branch(positive, c) : eval_branch(negative, c);
    }
    if (c >= bridge_above) return eval_branch(positive, c);
    if (c <= -bridge_below) return eval_branch(negative, c);
    const double left = eval_branch(negative, -bridge_below);
    const double right = eval_branch(positive, bridge_above);
    const double w = (c + bridge_below) / (bridge_above + bridge_below);
    return left + w * (right - left);
}

namespace {

void validate_branch(const CoefficientBranch& branch, const char* side) {
    if (!std::isfinite(branch.scale)) {
        throw DomainError(std::string("coefficient branch (") + side + "): scale must be finite");
    }
    if (branch.kind == CoefficientKind::power &&
        (!std::isfinite(branch.exponent) || branch.exponent < 0.0)) {
        throw DomainError(std::string("coefficient branch (") + side +
                          "): power exponent must be finite and >= 0");
    }
}

}  // namespace

void CoefficientSpec::validate() const {
    validate_branch(positive, "positive");
    validate_branch(negative, "negative");
    if (joint == JointPolicy::bridge) {
        if (!(bridge_below > 0.0) || !(bridge_above > 0.0) || !std::isfinite(bridge_below) ||
            !std::isfinite(bridge_above)) {
            throw DomainError("bridge half-widths must be finite and > 0");
        }
    }
}

CoefficientSpec constant_coefficient(double value) {
    CoefficientSpec spec;
    spec.positive = {CoefficientKind::constant, value, 1.0};
    spec.negative = spec.positive;
    return spec;
}

CoefficientSpec linear_coefficient(double slope) {
    CoefficientSpec spec;
    spec.positive = {CoefficientKind::linear, slope, 1.0};
    spec.negative = spec.positive;
    return spec;
}

CoefficientSpec power_coefficient(double scale_negative, double exponent_negative,
                                  double scale_positive, double exponent_positive) {
    CoefficientSpec spec;
    spec.positive = {CoefficientKind::power, scale_positive, exponent_positive};
    spec.negative = {CoefficientKind::power, scale_negative, exponent_negative};
    return spec;
}

bool spec_is_linear(const CoefficientSpec& spec, double* slope) {
    if (spec.positive.kind != CoefficientKind::linear ||
        spec.negative.kind != CoefficientKind::linear) {
        return false;
    }
    if (spec.positive.scale != spec.negative.scale) return false;
    if (slope != nullptr) *slope = spec.positive.scale;
    return true;
}

bool spec_is_constant(const CoefficientSpec& spec, double* value) {
    if (spec.positive.kind != CoefficientKind::constant ||
        spec.negative.kind != CoefficientKind::constant) {
        return false;
    }
    if (spec.positive.scale != spec.negative.scale) return false;
    if (value != nullptr) *value = spec.positive.scale;
    return true;
}

}  // namespace capmsize
