#include "capmsize/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "capmsize/errors.hpp"
#include "capmsize/stats.hpp"

namespace capmsize {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::MatrixXd target_matrix(const ReturnPanel& panel, ReturnTarget target) {
    if (target == ReturnTarget::price) return panel.price_returns;
    return panel.total_returns.colwise() - panel.riskfree;
}

Eigen::Index decile_column(const ReturnPanel& panel, int decile) {
    for (std::size_t j = 0; j < panel.deciles.size(); ++j) {
        if (panel.deciles[j] == decile) return static_cast<Eigen::Index>(j);
    }
    throw DomainError("decile " + std::to_string(decile) + " is not in the panel");
}

}  // namespace

OlsFit ols(Eigen::Ref<const Eigen::VectorXd> x, Eigen::Ref<const Eigen::VectorXd> y) {
    if (x.size() != y.size()) throw AlignmentError("regression inputs differ in length");
    const auto n = x.size();
    if (n < 3) throw DomainError("regression needs at least 3 points");
    const double x_mean = x.mean();
    const double y_mean = y.mean();
    const Eigen::ArrayXd xc = x.array() - x_mean;
    const Eigen::ArrayXd yc = y.array() - y_mean;
    const double sxx = xc.square().sum();
    if (sxx <= 0.0) throw DegenerateError("regressor is constant; the design is singular");
    const double sxy = (xc * yc).sum();
    const double syy = yc.square().sum();

    OlsFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = y_mean - fit.slope * x_mean;
    fit.residuals = y - (fit.intercept + fit.slope * x.array()).matrix();
    fit.dof = n - 2;
    const double sse = fit.residuals.squaredNorm();
    const double sigma_sq = sse / static_cast<double>(fit.dof);
    fit.stderr_slope = std::sqrt(sigma_sq / sxx);
    fit.stderr_intercept = std::sqrt(sigma_sq * (1.0 / static_cast<double>(n) +
                                                 x_mean * x_mean / sxx));
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 0.0;
    return fit;
}

double size_normalizer(SizeForm form, double c) {
    if (!std::isfinite(c)) throw DomainError("size normalizer at non-finite argument");
    return form == SizeForm::linear ? c : std::sqrt(std::abs(c));
}

std::vector<WindowEstimate> windowed_betas(const ReturnPanel& panel, int window_months,
                                           int benchmark_decile, ReturnTarget target) {
    const auto n_months = static_cast<Eigen::Index>(panel.months.size());
    if (window_months <= 0) throw DomainError("window length must be positive");
    if (n_months == 0 || n_months % window_months != 0) {
        throw DomainError("panel length " + std::to_string(n_months) +
                          " is not a multiple of the window length " +
                          std::to_string(window_months));
    }
    const Eigen::Index bench_col = decile_column(panel, benchmark_decile);
    const Eigen::MatrixXd targets = target_matrix(panel, target);
    const Eigen::Index windows = n_months / window_months;

    std::vector<WindowEstimate> out;
    out.reserve(static_cast<std::size_t>(windows * (targets.cols() - 1)));
    for (Eigen::Index w = 0; w < windows; ++w) {
        const Eigen::Index start = w * window_months;
        const Eigen::VectorXd bench = targets.col(bench_col).segment(start, window_months);
        const double bench_cap = panel.caps(start, bench_col);
        for (Eigen::Index j = 0; j < targets.cols(); ++j) {
            if (j == bench_col) continue;
            const Eigen::VectorXd own = targets.col(j).segment(start, window_months);
            OlsFit fit;
            try {
                fit = ols(bench, own);
            } catch (const DegenerateError&) {
                throw DegenerateError("benchmark returns are constant in window " +
                                      std::to_string(w) + " (decile " +
                                      std::to_string(panel.deciles[static_cast<std::size_t>(j)]) +
                                      ")");
            }
            WindowEstimate est;
            est.window = static_cast<int>(w);
            est.month = panel.months[static_cast<std::size_t>(start)];
            est.decile = panel.deciles[static_cast<std::size_t>(j)];
            est.beta = fit.slope;
            est.alpha = fit.intercept;
            est.size = std::log(bench_cap / panel.caps(start, j));
            est.window_return = own.sum();
            out.push_back(est);
        }
    }
    return out;
}

Eigen::VectorXd benchmark_window_returns(const ReturnPanel& panel, int window_months,
                                         int benchmark_decile, ReturnTarget target) {
    const Eigen::Index bench_col = decile_column(panel, benchmark_decile);
    const Eigen::MatrixXd targets = target_matrix(panel, target);
    return window_aggregate(targets.col(bench_col), window_months, RemainderPolicy::error).sums;
}

double estimate_gamma(const std::vector<WindowEstimate>& windows, SizeForm form,
                      GammaEstimator estimator, double min_normalizer) {
    double ratio_sum = 0.0;
    double fy = 0.0;
    double ff = 0.0;
    std::size_t used = 0;
    for (const auto& est : windows) {
        const double f = size_normalizer(form, est.size);
        if (std::abs(f) <= min_normalizer) continue;
        ratio_sum += (est.beta - 1.0) / f;
        fy += f * (est.beta - 1.0);
        ff += f * f;
        ++used;
    }
    if (used == 0) throw DegenerateError("no window estimates with usable size normalizer");
    if (estimator == GammaEstimator::mean_ratio) return ratio_sum / static_cast<double>(used);
    return fy / ff;
}

namespace {

std::vector<int> appearance_order(const std::vector<WindowEstimate>& windows) {
    std::vector<int> order;
    for (const auto& est : windows) {
        if (std::find(order.begin(), order.end(), est.decile) == order.end()) {
            order.push_back(est.decile);
        }
    }
    return order;
}

Eigen::MatrixXd cell_matrix(const std::vector<WindowEstimate>& windows, Eigen::Index n_windows,
                            const std::vector<int>& deciles, bool sizes) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(deciles.size()),
                                                    n_windows, kNaN);
    for (const auto& est : windows) {
        const auto row = std::distance(deciles.begin(),
                                       std::find(deciles.begin(), deciles.end(), est.decile));
        if (est.window < 0 || est.window >= n_windows) {
            throw AlignmentError("window estimate index " + std::to_string(est.window) +
                                 " outside benchmark window range");
        }
        out(static_cast<Eigen::Index>(row), est.window) = sizes ? est.size : est.window_return;
    }
    return out;
}

}  // namespace

Eigen::MatrixXd residual_series(const std::vector<WindowEstimate>& windows, double gamma,
                                Eigen::Ref<const Eigen::VectorXd> benchmark_windowed,
                                SizeForm form, std::vector<int>* decile_order) {
    if (!std::isfinite(gamma)) throw DomainError("gamma must be finite");
    const auto deciles = appearance_order(windows);
    if (decile_order != nullptr) *decile_order = deciles;
    const Eigen::MatrixXd returns = cell_matrix(windows, benchmark_windowed.size(), deciles, false);
    const Eigen::MatrixXd sizes = cell_matrix(windows, benchmark_windowed.size(), deciles, true);
    Eigen::MatrixXd eps = Eigen::MatrixXd::Constant(returns.rows(), returns.cols(), kNaN);
    for (Eigen::Index i = 0; i < returns.rows(); ++i) {
        for (Eigen::Index j = 0; j < returns.cols(); ++j) {
            if (std::isnan(returns(i, j))) continue;
            const double f = size_normalizer(form, sizes(i, j));
            eps(i, j) = returns(i, j) - (1.0 + gamma * f) * benchmark_windowed[j];
        }
    }
    return eps;
}

Eigen::MatrixXd window_sizes(const std::vector<WindowEstimate>& windows) {
    const auto deciles = appearance_order(windows);
    Eigen::Index n_windows = 0;
    for (const auto& est : windows) n_windows = std::max<Eigen::Index>(n_windows, est.window + 1);
    return cell_matrix(windows, n_windows, deciles, true);
}

NoiseFit fit_noise(Eigen::Ref<const Eigen::MatrixXd> eps, Eigen::Ref<const Eigen::MatrixXd> sizes,
                   SizeForm form, double gamma_used, double min_normalizer, bool error_on_small,
                   std::vector<std::string>* warnings) {
    if (eps.rows() != sizes.rows() || eps.cols() != sizes.cols()) {
        throw AlignmentError("residual and size matrices differ in shape");
    }
    std::vector<double> normalized;
    normalized.reserve(static_cast<std::size_t>(eps.size()));
    Eigen::MatrixXd scaled = Eigen::MatrixXd::Constant(eps.rows(), eps.cols(), kNaN);
    for (Eigen::Index i = 0; i < eps.rows(); ++i) {
        for (Eigen::Index j = 0; j < eps.cols(); ++j) {
            if (std::isnan(eps(i, j))) continue;
            const double f = size_normalizer(form, sizes(i, j));
            if (std::abs(f) <= min_normalizer) {
                if (error_on_small) {
                    throw DomainError("size normalizer below threshold at series " +
                                      std::to_string(i) + ", window " + std::to_string(j));
                }
                if (warnings != nullptr) {
                    warnings->push_back("excluded cell (series " + std::to_string(i) +
                                        ", window " + std::to_string(j) +
                                        "): size normalizer below threshold");
                }
                continue;
            }
            scaled(i, j) = eps(i, j) / f;
            normalized.push_back(scaled(i, j));
        }
    }
    if (normalized.size() < 2) throw DegenerateError("fewer than 2 usable residual cells");
    const Eigen::Map<const Eigen::VectorXd> u(normalized.data(),
                                              static_cast<Eigen::Index>(normalized.size()));
    NoiseFit fit;
    fit.gamma = gamma_used;
    fit.mu = mean(u);
    fit.rho = sample_std(u);
    if (fit.rho == 0.0) throw DegenerateError("normalized residuals have zero variance");
    fit.standardized_z = (scaled.array() - fit.mu) / fit.rho;
    return fit;
}

Eigen::VectorXd acf(Eigen::Ref<const Eigen::VectorXd> series, int max_lag) {
    const auto n = series.size();
    if (max_lag < 1) throw DomainError("acf needs max_lag >= 1");
    if (n <= max_lag) throw DomainError("series length must exceed max_lag");
    const Eigen::ArrayXd centered = series.array() - series.mean();
    const double denom = centered.square().sum();
    if (denom <= 0.0) throw DegenerateError("acf of a constant series");
    Eigen::VectorXd out(max_lag + 1);
    out[0] = 1.0;
    for (int lag = 1; lag <= max_lag; ++lag) {
        out[lag] = (centered.tail(n - lag) * centered.head(n - lag)).sum() / denom;
    }
    return out;
}

TestResult ljung_box(Eigen::Ref<const Eigen::VectorXd> series, int lags) {
    const auto n = series.size();
    if (lags < 1) throw DomainError("Ljung-Box needs lags >= 1");
    if (n <= lags) throw DomainError("series length must exceed the lag count");
    const Eigen::VectorXd correlations = acf(series, lags);
    double q = 0.0;
    for (int lag = 1; lag <= lags; ++lag) {
        q += correlations[lag] * correlations[lag] / static_cast<double>(n - lag);
    }
    q *= static_cast<double>(n) * static_cast<double>(n + 2);
    return {q, chi_squared_sf(q, lags)};
}

TestResult jarque_bera(Eigen::Ref<const Eigen::VectorXd> series) {
    const auto n = series.size();
    if (n < 4) throw DomainError("Jarque-Bera needs at least 4 points");
    const Eigen::ArrayXd centered = series.array() - series.mean();
    const double m2 = centered.square().mean();
    if (m2 <= 0.0) throw DegenerateError("Jarque-Bera of a constant series");
    const double m3 = centered.cube().mean();
    const double m4 = centered.square().square().mean();
    const double skew = m3 / std::pow(m2, 1.5);
    const double kurt = m4 / (m2 * m2);
    const double jb = static_cast<double>(n) *
                      (skew * skew / 6.0 + (kurt - 3.0) * (kurt - 3.0) / 24.0);
    return {jb, chi_squared_sf(jb, 2.0)};
}

double noise_cross_correlation(Eigen::Ref<const Eigen::MatrixXd> z_a,
                               Eigen::Ref<const Eigen::MatrixXd> z_b) {
    if (z_a.rows() != z_b.rows() || z_a.cols() != z_b.cols()) {
        throw AlignmentError("standardized-noise matrices differ in shape");
    }
    std::vector<double> a;
    std::vector<double> b;
    for (Eigen::Index i = 0; i < z_a.rows(); ++i) {
        for (Eigen::Index j = 0; j < z_a.cols(); ++j) {
            if (std::isfinite(z_a(i, j)) && std::isfinite(z_b(i, j))) {
                a.push_back(z_a(i, j));
                b.push_back(z_b(i, j));
            }
        }
    }
    if (a.size() < 2) throw DegenerateError("fewer than 2 paired finite cells");
    return pearson(Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size())),
                   Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())));
}

EstimationReport run_estimation(const ReturnPanel& panel, const EstimationOptions& options) {
    if (panel.deciles.empty()) throw DomainError("panel has no deciles");
    EstimationReport report;
    report.options = options;
    report.benchmark_decile = options.side == BenchmarkSide::top ? panel.deciles.front()
                                                                 : panel.deciles.back();
    report.form = options.side == BenchmarkSide::top ? SizeForm::linear : SizeForm::sqrt_abs;
    report.windows = windowed_betas(panel, options.window_months, report.benchmark_decile,
                                    options.target);
    report.benchmark_windowed = benchmark_window_returns(panel, options.window_months,
                                                         report.benchmark_decile, options.target);
    const double gamma = estimate_gamma(report.windows, report.form, options.gamma_estimator,
                                        options.min_normalizer);
    const Eigen::MatrixXd eps = residual_series(report.windows, gamma, report.benchmark_windowed,
                                                report.form, &report.residual_deciles);
    const Eigen::MatrixXd sizes = cell_matrix(report.windows, report.benchmark_windowed.size(),
                                              report.residual_deciles, true);
    report.noise = fit_noise(eps, sizes, report.form, gamma, options.min_normalizer,
                             options.error_on_small_normalizer, &report.warnings);

    const Eigen::MatrixXd& z = report.noise.standardized_z;
    const auto n_series = z.rows();
    report.z_correlation = Eigen::MatrixXd::Constant(n_series, n_series, kNaN);
    for (Eigen::Index i = 0; i < n_series; ++i) {
        report.z_correlation(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n_series; ++j) {
            std::vector<double> a;
            std::vector<double> b;
            for (Eigen::Index w = 0; w < z.cols(); ++w) {
                if (std::isfinite(z(i, w)) && std::isfinite(z(j, w))) {
                    a.push_back(z(i, w));
                    b.push_back(z(j, w));
                }
            }
            if (a.size() >= 2) {
                try {
                    const auto len = static_cast<Eigen::Index>(a.size());
                    report.z_correlation(i, j) = pearson(
                        Eigen::Map<const Eigen::VectorXd>(a.data(), len),
                        Eigen::Map<const Eigen::VectorXd>(b.data(), len));
                } catch (const DegenerateError&) {
                    // leave NaN
                }
            }
            report.z_correlation(j, i) = report.z_correlation(i, j);
        }
    }

    for (Eigen::Index i = 0; i < n_series; ++i) {
        std::vector<double> kept;
        for (Eigen::Index w = 0; w < z.cols(); ++w) {
            if (std::isfinite(z(i, w))) kept.push_back(z(i, w));
        }
        SeriesDiagnostics diag;
        diag.decile = report.residual_deciles[static_cast<std::size_t>(i)];
        const Eigen::Map<const Eigen::VectorXd> series(kept.data(),
                                                       static_cast<Eigen::Index>(kept.size()));
        const auto len = series.size();
        const int max_lag = std::min<int>(options.acf_lags, static_cast<int>(len) - 1);
        if (max_lag >= 1) {
            diag.acf = acf(series, max_lag);
        } else {
            report.warnings.push_back("decile " + std::to_string(diag.decile) +
                                      ": too few windows for acf");
        }
        for (int lags : options.ljung_box_lags) {
            if (lags >= 1 && len > lags) {
                diag.ljung_box.emplace_back(lags, ljung_box(series, lags));
            } else {
                report.warnings.push_back("decile " + std::to_string(diag.decile) +
                                          ": too few windows for Ljung-Box(" +
                                          std::to_string(lags) + ")");
            }
        }
        if (len >= 4) {
            diag.jarque_bera = jarque_bera(series);
        } else {
            report.warnings.push_back("decile " + std::to_string(diag.decile) +
                                      ": too few windows for Jarque-Bera");
        }
        report.diagnostics.push_back(std::move(diag));
    }
    return report;
}

FundsReport funds_regression(Eigen::Ref<const Eigen::VectorXd> small_premium,
                             Eigen::Ref<const Eigen::VectorXd> mid_premium,
                             Eigen::Ref<const Eigen::VectorXd> benchmark_premium) {
    if (small_premium.size() != benchmark_premium.size() ||
        mid_premium.size() != benchmark_premium.size()) {
        throw AlignmentError("fund series differ in length");
    }
    FundsReport report;
    report.months = benchmark_premium.size();
    auto fill = [&](Eigen::Ref<const Eigen::VectorXd> y) {
        FundFit out;
        out.fit = ols(benchmark_premium, y);
        const double t = student_t_quantile(0.975, static_cast<double>(out.fit.dof));
        out.alpha_ci = {out.fit.intercept - t * out.fit.stderr_intercept,
                        out.fit.intercept + t * out.fit.stderr_intercept};
        out.beta_ci = {out.fit.slope - t * out.fit.stderr_slope,
                       out.fit.slope + t * out.fit.stderr_slope};
        out.residual_sd = std::sqrt(out.fit.residuals.squaredNorm() /
                                    static_cast<double>(out.fit.dof));
        return out;
    };
    report.small = fill(small_premium);
    report.mid = fill(mid_premium);
    try {
        report.residual_correlation = pearson(report.small.fit.residuals,
                                              report.mid.fit.residuals);
    } catch (const DegenerateError&) {
        report.residual_correlation = 0.0;  // exact fits leave no residual variance
    }
    return report;
}

}  // namespace capmsize
