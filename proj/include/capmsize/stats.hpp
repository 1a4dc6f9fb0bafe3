#pragma once

#include <Eigen/Dense>

namespace capmsize {

// Basic sample statistics. Variances and standard deviations use the n-1
// convention throughout the project.
double mean(Eigen::Ref<const Eigen::VectorXd> x);
double sample_variance(Eigen::Ref<const Eigen::VectorXd> x);
double sample_std(Eigen::Ref<const Eigen::VectorXd> x);

// Pearson correlation; throws DegenerateError when either side has zero
// variance.
double pearson(Eigen::Ref<const Eigen::VectorXd> x, Eigen::Ref<const Eigen::VectorXd> y);

// Linear-interpolation quantile of an unsorted sample, q in [0, 1].
double quantile(Eigen::Ref<const Eigen::VectorXd> x, double q);

// Regularized incomplete gamma P(a, x) and its complement Q(a, x) = 1 - P.
double lower_incomplete_gamma_reg(double a, double x);
double upper_incomplete_gamma_reg(double a, double x);

// Survival function of the chi-squared distribution with dof degrees of
// freedom: P[X > x].
double chi_squared_sf(double x, double dof);

// Regularized incomplete beta I_x(a, b).
double incomplete_beta_reg(double a, double b, double x);

// Student-t distribution function and quantile (dof > 0).
double student_t_cdf(double t, double dof);
double student_t_quantile(double p, double dof);

}  // namespace capmsize
