#include "capmsize/returns.hpp"

#include <cmath>
#include <string>

#include "capmsize/errors.hpp"

namespace capmsize {

bool valid_yyyymm(int yyyymm) {
    const int month = yyyymm % 100;
    const int year = yyyymm / 100;
    return year >= 1 && year <= 9999 && month >= 1 && month <= 12;
}

int month_ordinal(int yyyymm) {
    if (!valid_yyyymm(yyyymm)) {
        throw DomainError("not a YYYYMM month: " + std::to_string(yyyymm));
    }
    return (yyyymm / 100) * 12 + (yyyymm % 100 - 1);
}

int add_months(int yyyymm, int delta) {
    const int ordinal = month_ordinal(yyyymm) + delta;
    if (ordinal < 12) throw DomainError("month arithmetic left the calendar");
    return (ordinal / 12) * 100 + ordinal % 12 + 1;
}

int months_between(int from, int to) { return month_ordinal(to) - month_ordinal(from); }

double to_geometric(double arithmetic) {
    if (!(arithmetic > -1.0)) {
        throw DomainError("arithmetic return must exceed -1 (got " + std::to_string(arithmetic) +
                          ")");
    }
    return std::log1p(arithmetic);
}

double to_arithmetic(double geometric) {
    if (!std::isfinite(geometric)) throw DomainError("geometric return must be finite");
    return std::expm1(geometric);
}

double riskfree_geometric(double annual_rate, RateBasis basis) {
    const double monthly = basis == RateBasis::fraction ? annual_rate / 12.0
                                                        : annual_rate / 1200.0;
    if (!(monthly > -1.0)) {
        throw DomainError("risk-free rate implies a monthly return at or below -100%");
    }
    return std::log1p(monthly);
}

ReturnSeries equity_premium(const ReturnSeries& total, const ReturnSeries& riskfree) {
    if (total.kind != ReturnKind::total || riskfree.kind != ReturnKind::riskfree) {
        throw DomainError("equity premium needs a total-return and a riskfree series");
    }
    if (total.start_month != riskfree.start_month || total.values.size() != riskfree.values.size()) {
        throw AlignmentError("total and riskfree series must share start month and length");
    }
    ReturnSeries premium;
    premium.values = total.values - riskfree.values;
    premium.start_month = total.start_month;
    premium.kind = ReturnKind::premium;
    return premium;
}

WindowedSums window_aggregate(Eigen::Ref<const Eigen::VectorXd> values, int window_length,
                              RemainderPolicy policy) {
    const auto n = values.size();
    if (window_length <= 0 || window_length > n) {
        throw DomainError("window length must be in [1, series length]");
    }
    const Eigen::Index windows = n / window_length;
    const Eigen::Index remainder = n - windows * window_length;
    if (remainder != 0 && policy == RemainderPolicy::error) {
        throw DomainError("series length " + std::to_string(n) + " is not a multiple of " +
                          std::to_string(window_length));
    }
    WindowedSums out;
    out.window_length = window_length;
    out.dropped = remainder;
    out.sums.resize(windows);
    for (Eigen::Index w = 0; w < windows; ++w) {
        out.sums[w] = values.segment(w * window_length, window_length).sum();
    }
    return out;
}

WindowedSums window_aggregate(const ReturnSeries& series, int window_length,
                              RemainderPolicy policy) {
    return window_aggregate(series.values, window_length, policy);
}

}  // namespace capmsize
