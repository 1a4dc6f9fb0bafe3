#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "capmsize/model.hpp"
#include "capmsize/simulate.hpp"

namespace capmsize {

// Market weights from capitalizations; entries must be positive.
Eigen::VectorXd market_weights(Eigen::Ref<const Eigen::VectorXd> caps);

enum class CurveKind { modified, classical };

struct CurveFit {
    double slope = 0.0;
    double intercept = 0.0;
    double pearson_r = 0.0;
    int rank_lo = 0;
    int rank_hi = 0;
};

// One capital distribution curve. The modified curve plots (ln k, C_(k)) over
// the n stocks with C sorted ascending, so rank 1 is the largest stock. The
// classical curve plots (ln k, ln mu_(k)) over all n+1 portfolios with weights
// sorted descending. Ties keep portfolio order (stable sort).
struct CurveSnapshot {
    double time = 0.0;
    CurveKind kind = CurveKind::modified;
    Eigen::VectorXd log_rank;
    Eigen::VectorXd value;
    CurveFit fit;
};

CurveSnapshot curve_snapshot(Eigen::Ref<const Eigen::VectorXd> relative_sizes, double time,
                             CurveKind kind, int rank_lo, int rank_hi);

// CSV with header rank,ln_rank,value.
void write_curve_csv(const CurveSnapshot& snapshot, const std::string& path);

enum class Stability { stable, unstable, inconclusive };

struct StabilityVerdict {
    Stability verdict = Stability::inconclusive;
    // Gamma = mu + g_S gamma, the linear-case margin; NaN on other routes.
    double gamma_cap = 0.0;
    // Extremes of h(c) = alpha(c) + g_S (beta(c) - 1) over the outer probe
    // decade on each side; reported on every route.
    double liminf_proxy = 0.0;
    double limsup_proxy = 0.0;
    std::string method;  // "linear", "asymptotic" or "probe"
    std::string detail;
};

// Decides whether both drift conditions hold: h(c) eventually positive as
// c -> +inf and eventually negative as c -> -inf. Exact for linear and
// power-law coefficient families; probe-based with an honest `inconclusive`
// when asymptotics cancel.
StabilityVerdict stability_check(const MarketModel& model, double probe_lo = -1000.0,
                                 double probe_hi = 1000.0);

// The probe fallback on its own: sign scan of h over the outer decades.
StabilityVerdict probe_stability(const MarketModel& model, double probe_lo, double probe_hi);

struct DensityGrid {
    double lo = -20.0;
    double hi = 20.0;
    double step = 1e-3;
};

struct StationaryDensity {
    Eigen::VectorXd grid;
    Eigen::VectorXd s_prime;  // scale-function derivative, positive
    Eigen::VectorXd density;  // normalized, trapezoidal integral 1
    double normalization_constant = 0.0;
    double mean = 0.0;
    double variance = 0.0;
};

// Stationary density of the reduced size SDE on a uniform grid:
// s'(c) = exp[-2 int_0^c drift/diffusion_sq], density proportional to
// 1/(s' diffusion_sq). Needs the diffusion bounded away from zero and a grid
// wide enough that the boundary density is negligible.
StationaryDensity stationary_density(const MarketModel& model, const DensityGrid& grid = {});

struct TailSummary {
    double mean = 0.0;
    double variance = 0.0;
    double q05 = 0.0;
    double q50 = 0.0;
    double q95 = 0.0;
};

struct LongRunStats {
    double t_from = 0.0;
    double t_to = 0.0;
    std::vector<TailSummary> weights;  // n+1 entries, benchmark first
    std::vector<TailSummary> sizes;    // n entries of C_k
    // Zero crossings of each C_k over the full recorded path, per path.
    Eigen::MatrixXi sign_changes;
};

// Pools recorded states with t_from <= t <= t_to across all paths.
LongRunStats long_run_weight_stats(const SimulationEnsemble& ensemble, double t_from,
                                   double t_to = std::numeric_limits<double>::infinity());

}  // namespace capmsize
