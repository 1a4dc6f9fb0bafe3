#include "capmsize/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "capmsize/errors.hpp"

namespace capmsize {

namespace {

constexpr int kMaxIterations = 500;
constexpr double kEps = 1e-15;
constexpr double kTiny = 1e-300;

// Series expansion of P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < kMaxIterations; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) {
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw ConvergenceError("incomplete gamma series did not converge (a=" + std::to_string(a) +
                           ", x=" + std::to_string(x) + ")");
}

// Lentz continued fraction for Q(a, x), valid for x >= a + 1.
double gamma_q_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIterations; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) {
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw ConvergenceError("incomplete gamma fraction did not converge (a=" + std::to_string(a) +
                           ", x=" + std::to_string(x) + ")");
}

// Lentz continued fraction for the incomplete beta; converges fast for
// x < (a+1)/(a+b+2).
double beta_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double dm = static_cast<double>(m);
        const double m2 = 2.0 * dm;
        double aa = dm * (b - dm) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + dm) * (qab + dm) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) return h;
    }
    throw ConvergenceError("incomplete beta fraction did not converge (a=" + std::to_string(a) +
                           ", b=" + std::to_string(b) + ", x=" + std::to_string(x) + ")");
}

}  // namespace

double mean(Eigen::Ref<const Eigen::VectorXd> x) {
    if (x.size() == 0) throw DomainError("mean of an empty sample");
    return x.mean();
}

double sample_variance(Eigen::Ref<const Eigen::VectorXd> x) {
    if (x.size() < 2) throw DomainError("sample variance needs at least 2 points");
    const double m = x.mean();
    return (x.array() - m).square().sum() / static_cast<double>(x.size() - 1);
}

double sample_std(Eigen::Ref<const Eigen::VectorXd> x) { return std::sqrt(sample_variance(x)); }

double pearson(Eigen::Ref<const Eigen::VectorXd> x, Eigen::Ref<const Eigen::VectorXd> y) {
    if (x.size() != y.size()) throw AlignmentError("correlation inputs differ in length");
    if (x.size() < 2) throw DomainError("correlation needs at least 2 points");
    const Eigen::ArrayXd xc = x.array() - x.mean();
    const Eigen::ArrayXd yc = y.array() - y.mean();
    const double sx = std::sqrt(xc.square().sum());
    const double sy = std::sqrt(yc.square().sum());
    if (sx == 0.0 || sy == 0.0) throw DegenerateError("correlation of a zero-variance sample");
    return (xc * yc).sum() / (sx * sy);
}

double quantile(Eigen::Ref<const Eigen::VectorXd> x, double q) {
    if (x.size() == 0) throw DomainError("quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile level must be in [0, 1]");
    std::vector<double> v(x.data(), x.data() + x.size());
    std::sort(v.begin(), v.end());
    if (v.size() == 1) return v[0];
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= v.size()) return v.back();
    const double w = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - w) + v[lo + 1] * w;
}

double lower_incomplete_gamma_reg(double a, double x) {
    if (!(a > 0.0) || !(x >= 0.0) || !std::isfinite(a) || !std::isfinite(x)) {
        throw DomainError("incomplete gamma requires a > 0 and x >= 0");
    }
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_fraction(a, x);
}

double upper_incomplete_gamma_reg(double a, double x) {
    if (!(a > 0.0) || !(x >= 0.0) || !std::isfinite(a) || !std::isfinite(x)) {
        throw DomainError("incomplete gamma requires a > 0 and x >= 0");
    }
    if (x == 0.0) return 1.0;
    if (x >= a + 1.0) return gamma_q_fraction(a, x);
    return 1.0 - gamma_p_series(a, x);
}

double chi_squared_sf(double x, double dof) {
    if (!(dof > 0.0)) throw DomainError("chi-squared needs dof > 0");
    if (x <= 0.0) return 1.0;
    return upper_incomplete_gamma_reg(dof / 2.0, x / 2.0);
}

double incomplete_beta_reg(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete beta requires a, b > 0");
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete beta requires x in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_fraction(a, b, x) / a;
    return 1.0 - front * beta_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
    if (!(dof > 0.0)) throw DomainError("Student-t needs dof > 0");
    if (!std::isfinite(t)) return t > 0.0 ? 1.0 : 0.0;
    const double x = dof / (dof + t * t);
    const double half_tail = 0.5 * incomplete_beta_reg(dof / 2.0, 0.5, x);
    return t >= 0.0 ? 1.0 - half_tail : half_tail;
}

double student_t_quantile(double p, double dof) {
    if (!(dof > 0.0)) throw DomainError("Student-t needs dof > 0");
    if (!(p > 0.0 && p < 1.0)) throw DomainError("Student-t quantile needs p in (0, 1)");
    if (p == 0.5) return 0.0;
    // Solve by bisection on the upper half and mirror; the CDF is strictly
    // increasing so 200 halvings pin the root to full double precision.
    const double target = p > 0.5 ? p : 1.0 - p;
    double lo = 0.0;
    double hi = 1.0;
    int guard = 0;
    while (student_t_cdf(hi, dof) < target) {
        hi *= 2.0;
        if (++guard > 2000) throw ConvergenceError("Student-t quantile bracket expansion failed");
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (student_t_cdf(mid, dof) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double t = 0.5 * (lo + hi);
    return p > 0.5 ? t : -t;
}

}  // namespace capmsize
