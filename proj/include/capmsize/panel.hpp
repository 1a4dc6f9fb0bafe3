#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "capmsize/returns.hpp"

namespace capmsize {

// Which kind of decile table a file holds; return tables are quoted in
// percent and converted to fractions at parse, cap tables are level data
// (millions) taken as-is.
enum class DecileField { price, total, cap };

// Months-by-columns table as parsed from disk; NaN marks a missing cell.
struct RawTable {
    std::vector<int> months;  // YYYYMM
    Eigen::MatrixXd values;
    std::vector<std::string> columns;  // header labels, or d1.. when absent
};

// Reads the monthly block of a decile-library file: optional preamble lines,
// a header row, then rows "YYYYMM, v1, .., vN". Parsing stops at the first
// non-monthly row after the block (such files often append annual tables).
// Sentinels -99.99 and -999 become missing.
RawTable parse_decile_csv(const std::filesystem::path& path, DecileField field,
                          std::vector<std::string>* warnings = nullptr);

// Reads a single-series "date,value" file (dates YYYY-MM-DD, YYYY-MM or
// YYYYMM); empty or "." values become missing.
RawTable parse_rate_csv(const std::filesystem::path& path);

// Concatenates single-column rate tables and sorts by month; a month present
// in two inputs is an alignment error.
RawTable merge_rate_tables(const std::vector<RawTable>& tables);

struct PanelRange {
    int first_month = 0;  // YYYYMM, inclusive
    int last_month = 0;   // YYYYMM, inclusive
};

// Aligned monthly data for the selected deciles over a contiguous range.
struct ReturnPanel {
    std::vector<int> months;
    std::vector<int> deciles;       // 1-based column labels into the source tables
    Eigen::MatrixXd caps;           // month x decile, positive levels
    Eigen::MatrixXd price_returns;  // geometric monthly
    Eigen::MatrixXd total_returns;  // geometric monthly
    Eigen::VectorXd riskfree;       // geometric monthly
};

// Aligns the four tables over the requested range. Any missing cell inside
// the range is a hard error; the reference range is complete.
ReturnPanel build_panel(const RawTable& price, const RawTable& total, const RawTable& caps,
                        const RawTable& rates, RateBasis basis, PanelRange range,
                        const std::vector<int>& deciles = {1, 2, 3, 4, 5, 6, 7, 8});

// Canonical wide-format export (month, caps, price and total returns,
// riskfree); read_panel_csv parses exactly this layout and round-trips the
// panel bit-for-bit.
void write_panel_csv(const ReturnPanel& panel, const std::filesystem::path& path);
ReturnPanel read_panel_csv(const std::filesystem::path& path);

}  // namespace capmsize
