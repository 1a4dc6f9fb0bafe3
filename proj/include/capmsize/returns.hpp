#pragma once

#include <Eigen/Dense>

namespace capmsize {

// Calendar months are YYYYMM integers throughout; these helpers validate and
// do arithmetic on them.
bool valid_yyyymm(int yyyymm);
int month_ordinal(int yyyymm);             // months since year 0, for arithmetic
int add_months(int yyyymm, int delta);
int months_between(int from, int to);      // to - from in months

enum class ReturnKind { price, total, riskfree, premium };

// Monthly geometric (log) returns. Arithmetic returns are converted at the
// I/O boundary and never stored.
struct ReturnSeries {
    Eigen::VectorXd values;
    int start_month = 0;  // YYYYMM of values[0]
    ReturnKind kind = ReturnKind::price;
};

// G = ln(1 + A) and its inverse. Geometric returns add across periods;
// arithmetic returns compound.
double to_geometric(double arithmetic);
double to_arithmetic(double geometric);

// How an annualized risk-free rate column is quoted: as a fraction (0.012)
// or in percent (1.2). Both convert to the same monthly geometric return.
enum class RateBasis { fraction, percent };
double riskfree_geometric(double annual_rate, RateBasis basis);

// Elementwise total - riskfree; series must share start month and length.
ReturnSeries equity_premium(const ReturnSeries& total, const ReturnSeries& riskfree);

enum class RemainderPolicy { drop, error };

struct WindowedSums {
    Eigen::VectorXd sums;
    int window_length = 0;
    Eigen::Index dropped = 0;  // trailing months not covered by a full window
};

// Non-overlapping window sums; a partial final window is dropped (reported in
// `dropped`) or rejected per policy.
WindowedSums window_aggregate(Eigen::Ref<const Eigen::VectorXd> values, int window_length,
                              RemainderPolicy policy = RemainderPolicy::drop);
WindowedSums window_aggregate(const ReturnSeries& series, int window_length,
                              RemainderPolicy policy = RemainderPolicy::drop);

}  // namespace capmsize
