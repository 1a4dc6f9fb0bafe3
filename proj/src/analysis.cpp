#include "capmsize/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "capmsize/errors.hpp"
#include "capmsize/estimate.hpp"
#include "capmsize/stats.hpp"
#include "capmsize/textio.hpp"

namespace capmsize {

Eigen::VectorXd market_weights(Eigen::Ref<const Eigen::VectorXd> caps) {
    if (caps.size() < 1) throw DomainError("market weights need at least one capitalization");
    for (Eigen::Index i = 0; i < caps.size(); ++i) {
        if (!(caps[i] > 0.0) || !std::isfinite(caps[i])) {
            throw DomainError("capitalization " + std::to_string(i) + " is not positive");
        }
    }
    return caps / caps.sum();
}

namespace {

CurveFit fit_curve(const Eigen::VectorXd& log_rank, const Eigen::VectorXd& value, int rank_lo,
                   int rank_hi) {
    const auto n_points = log_rank.size();
    if (rank_lo < 1 || rank_hi > n_points || rank_lo >= rank_hi) {
        throw DomainError("fit range [" + std::to_string(rank_lo) + ", " +
                          std::to_string(rank_hi) + "] is empty or outside 1.." +
                          std::to_string(n_points));
    }
    const Eigen::Index count = rank_hi - rank_lo + 1;
    if (count < 3) throw DomainError("fit range must cover at least 3 ranks");
    const Eigen::VectorXd x = log_rank.segment(rank_lo - 1, count);
    const Eigen::VectorXd y = value.segment(rank_lo - 1, count);
    CurveFit fit;
    fit.rank_lo = rank_lo;
    fit.rank_hi = rank_hi;
    const OlsFit line = ols(x, y);
    fit.slope = line.slope;
    fit.intercept = line.intercept;
    try {
        fit.pearson_r = pearson(x, y);
    } catch (const DegenerateError&) {
        fit.pearson_r = 0.0;  // flat curves carry no linear signal
    }
    return fit;
}

}  // namespace

CurveSnapshot curve_snapshot(Eigen::Ref<const Eigen::VectorXd> relative_sizes, double time,
                             CurveKind kind, int rank_lo, int rank_hi) {
    const auto n = relative_sizes.size();
    if (n < 2) throw DomainError("curve needs at least 2 stocks");
    CurveSnapshot snap;
    snap.time = time;
    snap.kind = kind;
    if (kind == CurveKind::modified) {
        std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            return relative_sizes[a] < relative_sizes[b];
        });
        snap.log_rank.resize(n);
        snap.value.resize(n);
        for (Eigen::Index k = 0; k < n; ++k) {
            snap.log_rank[k] = std::log(static_cast<double>(k + 1));
            snap.value[k] = relative_sizes[order[static_cast<std::size_t>(k)]];
        }
    } else {
        const Eigen::VectorXd weights = weights_from_relative_sizes(relative_sizes);
        std::vector<Eigen::Index> order(static_cast<std::size_t>(weights.size()));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            return weights[a] > weights[b];
        });
        snap.log_rank.resize(weights.size());
        snap.value.resize(weights.size());
        for (Eigen::Index k = 0; k < weights.size(); ++k) {
            snap.log_rank[k] = std::log(static_cast<double>(k + 1));
            snap.value[k] = std::log(weights[order[static_cast<std::size_t>(k)]]);
        }
    }
    snap.fit = fit_curve(snap.log_rank, snap.value, rank_lo, rank_hi);
    return snap;
}

void write_curve_csv(const CurveSnapshot& snapshot, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open " + path + " for writing");
    out << "rank,ln_rank,value\n";
    for (Eigen::Index k = 0; k < snapshot.log_rank.size(); ++k) {
        out << (k + 1) << "," << format_double(snapshot.log_rank[k]) << ","
            << format_double(snapshot.value[k]) << "\n";
    }
    if (!out) throw InputError("write to " + path + " failed");
}

namespace {

double h_of_c(const MarketModel& model, double c) {
    const SizeCoefficients coef = eval_coefficients(model, c);
    return coef.alpha + model.benchmark.size_drift * (coef.beta - 1.0);
}

// Leading power and coefficient of one coefficient branch as |c| grows on the
// given side; `negative_side` evaluates the spec at c < 0.
struct Asymptote {
    double exponent = 0.0;
    double coefficient = 0.0;
};

Asymptote branch_asymptote(const CoefficientBranch& branch, bool negative_side) {
    switch (branch.kind) {
        case CoefficientKind::linear:
            return {1.0, negative_side ? -branch.scale : branch.scale};
        case CoefficientKind::power:
            return {branch.exponent, branch.scale};
        case CoefficientKind::constant:
            return {0.0, branch.scale};
    }
    throw DomainError("unknown coefficient kind");
}

// Combines a + b when both are written as coeff * |c|^exponent. Returns false
// when leading terms cancel exactly, which the caller resolves by probing.
bool combine_asymptotes(const Asymptote& a, const Asymptote& b, Asymptote* out) {
    if (a.coefficient == 0.0) {
        *out = b;
        return true;
    }
    if (b.coefficient == 0.0) {
        *out = a;
        return true;
    }
    if (a.exponent > b.exponent) {
        *out = a;
        return true;
    }
    if (b.exponent > a.exponent) {
        *out = b;
        return true;
    }
    out->exponent = a.exponent;
    out->coefficient = a.coefficient + b.coefficient;
    return out->coefficient != 0.0 || a.exponent == 0.0;
}

std::vector<double> probe_points(double from, double to) {
    // Nine log-spaced magnitudes across the outer decade.
    std::vector<double> out;
    const double sign = from < 0.0 ? -1.0 : 1.0;
    const double lo = std::abs(from) < std::abs(to) ? std::abs(from) : std::abs(to);
    const double hi = std::abs(from) < std::abs(to) ? std::abs(to) : std::abs(from);
    const int count = 9;
    for (int i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / (count - 1);
        out.push_back(sign * lo * std::pow(hi / lo, t));
    }
    return out;
}

void probe_proxies(const MarketModel& model, double probe_lo, double probe_hi, double* liminf,
                   double* limsup, bool* pos_uniform_sign, bool* neg_uniform_sign,
                   bool* pos_positive, bool* neg_negative) {
    const auto upper = probe_points(probe_hi / 10.0, probe_hi);
    const auto lower = probe_points(probe_lo, probe_lo / 10.0);
    *liminf = std::numeric_limits<double>::infinity();
    *limsup = -std::numeric_limits<double>::infinity();
    bool pos_all_pos = true;
    bool pos_all_neg = true;
    for (double c : upper) {
        const double h = h_of_c(model, c);
        *liminf = std::min(*liminf, h);
        pos_all_pos = pos_all_pos && h > 0.0;
        pos_all_neg = pos_all_neg && h < 0.0;
    }
    bool neg_all_pos = true;
    bool neg_all_neg = true;
    for (double c : lower) {
        const double h = h_of_c(model, c);
        *limsup = std::max(*limsup, h);
        neg_all_pos = neg_all_pos && h > 0.0;
        neg_all_neg = neg_all_neg && h < 0.0;
    }
    *pos_uniform_sign = pos_all_pos || pos_all_neg;
    *neg_uniform_sign = neg_all_pos || neg_all_neg;
    *pos_positive = pos_all_pos;
    *neg_negative = neg_all_neg;
}

bool spec_all_linear(const CoefficientSpec& spec) {
    return spec.positive.kind == CoefficientKind::linear &&
           spec.negative.kind == CoefficientKind::linear;
}

}  // namespace

StabilityVerdict probe_stability(const MarketModel& model, double probe_lo, double probe_hi) {
    StabilityVerdict verdict;
    verdict.method = "probe";
    verdict.gamma_cap = std::numeric_limits<double>::quiet_NaN();
    bool pos_uniform = false;
    bool neg_uniform = false;
    bool pos_positive = false;
    bool neg_negative = false;
    probe_proxies(model, probe_lo, probe_hi, &verdict.liminf_proxy, &verdict.limsup_proxy,
                  &pos_uniform, &neg_uniform, &pos_positive, &neg_negative);
    if (!pos_uniform || !neg_uniform) {
        verdict.verdict = Stability::inconclusive;
        verdict.detail = "drift signs are mixed over the outer probe decade";
    } else if (pos_positive && neg_negative) {
        verdict.verdict = Stability::stable;
        verdict.detail = "drift pulls inward uniformly over the outer probe decade";
    } else {
        verdict.verdict = Stability::unstable;
        verdict.detail = "drift has the wrong sign on at least one side";
    }
    return verdict;
}

StabilityVerdict stability_check(const MarketModel& model, double probe_lo, double probe_hi) {
    model.validate();
    if (probe_lo > -50.0 || probe_hi < 50.0) {
        throw DomainError("probe range must span at least [-50, 50]");
    }
    const double g_s = model.benchmark.size_drift;

    if (spec_all_linear(model.alpha) && spec_all_linear(model.beta_deviation)) {
        StabilityVerdict verdict;
        verdict.method = "linear";
        const double cap_pos =
            model.alpha.positive.scale + g_s * model.beta_deviation.positive.scale;
        const double cap_neg =
            model.alpha.negative.scale + g_s * model.beta_deviation.negative.scale;
        verdict.gamma_cap = std::min(cap_pos, cap_neg);
        verdict.verdict = (cap_pos > 0.0 && cap_neg > 0.0) ? Stability::stable
                                                           : Stability::unstable;
        verdict.detail = verdict.verdict == Stability::stable
                             ? "linear drift margin is positive on both sides"
                             : "linear drift margin is not positive";
        bool u0 = false;
        bool u1 = false;
        bool u2 = false;
        bool u3 = false;
        probe_proxies(model, probe_lo, probe_hi, &verdict.liminf_proxy, &verdict.limsup_proxy,
                      &u0, &u1, &u2, &u3);
        return verdict;
    }

    // General route: compare the leading powers of alpha and g_S (beta - 1)
    // on each side. Exact cancellation of the leading terms falls through to
    // the probe scan.
    Asymptote upper;
    Asymptote lower;
    const bool upper_ok = combine_asymptotes(
        branch_asymptote(model.alpha.positive, false),
        {branch_asymptote(model.beta_deviation.positive, false).exponent,
         g_s * branch_asymptote(model.beta_deviation.positive, false).coefficient},
        &upper);
    const bool lower_ok = combine_asymptotes(
        branch_asymptote(model.alpha.negative, true),
        {branch_asymptote(model.beta_deviation.negative, true).exponent,
         g_s * branch_asymptote(model.beta_deviation.negative, true).coefficient},
        &lower);
    if (!upper_ok || !lower_ok) return probe_stability(model, probe_lo, probe_hi);

    StabilityVerdict verdict;
    verdict.method = "asymptotic";
    verdict.gamma_cap = std::numeric_limits<double>::quiet_NaN();
    const bool upper_holds = upper.coefficient > 0.0;
    const bool lower_holds = lower.coefficient < 0.0;
    verdict.verdict = (upper_holds && lower_holds) ? Stability::stable : Stability::unstable;
    if (verdict.verdict == Stability::stable) {
        verdict.detail = "leading drift terms pull inward on both sides";
    } else if (!upper_holds && !lower_holds) {
        verdict.detail = "leading drift terms push outward on both sides";
    } else {
        verdict.detail = !upper_holds ? "leading drift term fails on the large-c side"
                                      : "leading drift term fails on the small-c side";
    }
    bool u0 = false;
    bool u1 = false;
    bool u2 = false;
    bool u3 = false;
    probe_proxies(model, probe_lo, probe_hi, &verdict.liminf_proxy, &verdict.limsup_proxy, &u0,
                  &u1, &u2, &u3);
    return verdict;
}

StationaryDensity stationary_density(const MarketModel& model, const DensityGrid& grid) {
    model.validate();
    if (!(grid.lo < 0.0 && grid.hi > 0.0)) throw DomainError("density grid must straddle 0");
    if (!(grid.step > 0.0)) throw DomainError("density grid step must be positive");
    const double raw = (grid.hi - grid.lo) / grid.step;
    const auto intervals = static_cast<Eigen::Index>(std::llround(raw));
    if (intervals < 2 || std::abs(raw - static_cast<double>(intervals)) > 1e-9 * raw) {
        throw DomainError("grid span must be an integer number of steps");
    }
    const Eigen::Index count = intervals + 1;

    StationaryDensity out;
    out.grid.resize(count);
    Eigen::VectorXd ratio(count);
    Eigen::VectorXd sigma_sq(count);
    constexpr double kDiffusionFloor = 1e-14;
    for (Eigen::Index i = 0; i < count; ++i) {
        const double c = grid.lo + static_cast<double>(i) * grid.step;
        out.grid[i] = c;
        sigma_sq[i] = reduced_diffusion_sq(model, c);
        if (sigma_sq[i] < kDiffusionFloor) {
            throw DegenerateError("diffusion is not bounded away from zero at c = " +
                                  format_double(c) +
                                  "; the stationary density needs sigma(c) >= sigma_* > 0");
        }
        ratio[i] = reduced_drift(model, c) / sigma_sq[i];
    }

    // Cumulative trapezoid of drift/diffusion_sq from the left edge, then
    // shift so the integral is taken from 0 as the scale function requires.
    Eigen::VectorXd cumulative(count);
    cumulative[0] = 0.0;
    for (Eigen::Index i = 1; i < count; ++i) {
        cumulative[i] = cumulative[i - 1] + 0.5 * (ratio[i] + ratio[i - 1]) * grid.step;
    }
    const double offset = -grid.lo / grid.step;
    const auto below = static_cast<Eigen::Index>(std::floor(offset));
    const double frac = offset - static_cast<double>(below);
    const double at_zero =
        below + 1 < count ? (1.0 - frac) * cumulative[below] + frac * cumulative[below + 1]
                          : cumulative[below];

    out.s_prime.resize(count);
    Eigen::VectorXd log_measure(count);
    for (Eigen::Index i = 0; i < count; ++i) {
        const double log_s_prime = -2.0 * (cumulative[i] - at_zero);
        out.s_prime[i] = std::exp(log_s_prime);
        log_measure[i] = -log_s_prime - std::log(sigma_sq[i]);
    }

    const double peak = log_measure.maxCoeff();
    Eigen::VectorXd scaled = (log_measure.array() - peak).exp();
    double integral = scaled.sum() - 0.5 * (scaled[0] + scaled[count - 1]);
    integral *= grid.step;
    out.normalization_constant = std::exp(peak) * integral;
    out.density = scaled / integral;

    const double peak_density = out.density.maxCoeff();
    if (out.density[0] >= 1e-8 * peak_density || out.density[count - 1] >= 1e-8 * peak_density) {
        throw CoverageError("density grid is too narrow: boundary density is not below 1e-8 of "
                            "the peak (widen the grid or check stability)");
    }

    auto trapz = [&](const Eigen::VectorXd& f) {
        return (f.sum() - 0.5 * (f[0] + f[count - 1])) * grid.step;
    };
    out.mean = trapz(out.grid.cwiseProduct(out.density));
    const double second = trapz(out.grid.cwiseProduct(out.grid).cwiseProduct(out.density));
    out.variance = second - out.mean * out.mean;
    return out;
}

namespace {

TailSummary summarize(const std::vector<double>& values) {
    const Eigen::Map<const Eigen::VectorXd> v(values.data(),
                                              static_cast<Eigen::Index>(values.size()));
    TailSummary s;
    s.mean = mean(v);
    s.variance = values.size() > 1 ? sample_variance(v) : 0.0;
    s.q05 = quantile(v, 0.05);
    s.q50 = quantile(v, 0.50);
    s.q95 = quantile(v, 0.95);
    return s;
}

}  // namespace

LongRunStats long_run_weight_stats(const SimulationEnsemble& ensemble, double t_from,
                                   double t_to) {
    if (ensemble.relative_sizes.empty()) throw DomainError("ensemble has no paths");
    const auto n = ensemble.relative_sizes[0].cols();
    const auto n_records = ensemble.times.size();
    std::vector<Eigen::Index> window;
    for (Eigen::Index r = 0; r < n_records; ++r) {
        if (ensemble.times[r] >= t_from && ensemble.times[r] <= t_to) window.push_back(r);
    }
    if (window.size() < 2) {
        throw DomainError("tail window covers fewer than 2 recorded times");
    }

    LongRunStats out;
    out.t_from = t_from;
    out.t_to = std::min(t_to, ensemble.times[n_records - 1]);
    const auto paths = static_cast<Eigen::Index>(ensemble.relative_sizes.size());

    std::vector<std::vector<double>> weight_pool(static_cast<std::size_t>(n + 1));
    std::vector<std::vector<double>> size_pool(static_cast<std::size_t>(n));
    for (Eigen::Index p = 0; p < paths; ++p) {
        const auto& c = ensemble.relative_sizes[static_cast<std::size_t>(p)];
        for (Eigen::Index r : window) {
            const Eigen::VectorXd weights = weights_from_relative_sizes(c.row(r).transpose());
            for (Eigen::Index i = 0; i <= n; ++i) {
                weight_pool[static_cast<std::size_t>(i)].push_back(weights[i]);
            }
            for (Eigen::Index k = 0; k < n; ++k) {
                size_pool[static_cast<std::size_t>(k)].push_back(c(r, k));
            }
        }
    }
    for (const auto& pool : weight_pool) out.weights.push_back(summarize(pool));
    for (const auto& pool : size_pool) out.sizes.push_back(summarize(pool));

    out.sign_changes = Eigen::MatrixXi::Zero(paths, n);
    for (Eigen::Index p = 0; p < paths; ++p) {
        const auto& c = ensemble.relative_sizes[static_cast<std::size_t>(p)];
        for (Eigen::Index k = 0; k < n; ++k) {
            int crossings = 0;
            for (Eigen::Index r = 1; r < n_records; ++r) {
                if (c(r - 1, k) * c(r, k) < 0.0) ++crossings;
            }
            out.sign_changes(p, k) = crossings;
        }
    }
    return out;
}

}  // namespace capmsize
