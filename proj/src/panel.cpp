#include "capmsize/panel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "capmsize/errors.hpp"
#include "capmsize/textio.hpp"

namespace capmsize {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CoverageError("cannot open file: " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

bool is_yyyymm_field(const std::string& field, int* month) {
    long value = 0;
    if (!parse_int_strict(field, &value)) return false;
    if (field.size() != 6) return false;
    if (!valid_yyyymm(static_cast<int>(value))) return false;
    *month = static_cast<int>(value);
    return true;
}

bool is_sentinel(double v) { return v == -99.99 || v == -999.0; }

// FRED-style dates: YYYYMM, YYYY-MM or YYYY-MM-DD; the day is ignored.
bool parse_date_field(const std::string& field, int* month) {
    if (is_yyyymm_field(field, month)) return true;
    if (field.size() != 7 && field.size() != 10) return false;
    if (field[4] != '-') return false;
    if (field.size() == 10 && field[7] != '-') return false;
    long year = 0;
    long mon = 0;
    if (!parse_int_strict(field.substr(0, 4), &year)) return false;
    if (!parse_int_strict(field.substr(5, 2), &mon)) return false;
    const int yyyymm = static_cast<int>(year * 100 + mon);
    if (!valid_yyyymm(yyyymm)) return false;
    *month = yyyymm;
    return true;
}

std::string location(const std::filesystem::path& path, std::size_t line_no) {
    return path.filename().string() + ":" + std::to_string(line_no + 1);
}

}  // namespace

RawTable parse_decile_csv(const std::filesystem::path& path, DecileField field,
                          std::vector<std::string>* warnings) {
    const auto lines = read_lines(path);

    // Locate the first monthly data row; everything before it is preamble.
    std::size_t first_row = lines.size();
    std::vector<std::string> first_fields;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto fields = split_csv_line(lines[i]);
        int month = 0;
        if (fields.size() >= 2 && is_yyyymm_field(fields[0], &month)) {
            first_row = i;
            first_fields = fields;
            break;
        }
    }
    if (first_row == lines.size()) {
        throw ParseError(path.filename().string() + ": no monthly data rows");
    }
    const std::size_t n_cols = first_fields.size() - 1;

    RawTable table;
    // Header: the nearest preceding non-empty line whose field count matches
    // the data rows; its trailing labels name the columns.
    for (std::size_t i = first_row; i-- > 0;) {
        const auto fields = split_csv_line(lines[i]);
        if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
        if (fields.size() == n_cols + 1) {
            table.columns.assign(fields.begin() + 1, fields.end());
        }
        break;
    }
    if (table.columns.empty()) {
        for (std::size_t j = 0; j < n_cols; ++j) table.columns.push_back("d" + std::to_string(j + 1));
    }

    // The monthly block runs until the first non-monthly line; such files
    // often continue with annual tables or a second monthly section.
    std::vector<Eigen::VectorXd> rows;
    for (std::size_t i = first_row; i < lines.size(); ++i) {
        const auto fields = split_csv_line(lines[i]);
        int month = 0;
        if (fields.empty() || !is_yyyymm_field(fields[0], &month)) break;
        if (fields.size() != n_cols + 1) {
            throw ParseError(location(path, i) + ": expected " + std::to_string(n_cols + 1) +
                             " fields, got " + std::to_string(fields.size()));
        }
        Eigen::VectorXd row(n_cols);
        for (std::size_t j = 1; j < fields.size(); ++j) {
            double value = 0.0;
            if (!parse_double_strict(fields[j], &value)) {
                throw ParseError(location(path, i) + ": bad numeric field '" + fields[j] + "'");
            }
            if (is_sentinel(value)) {
                row[static_cast<Eigen::Index>(j - 1)] = kNaN;
            } else if (field == DecileField::cap) {
                row[static_cast<Eigen::Index>(j - 1)] = value;
            } else {
                row[static_cast<Eigen::Index>(j - 1)] = value / 100.0;  // percent -> fraction
            }
        }
        table.months.push_back(month);
        rows.push_back(std::move(row));
    }

    table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_cols));
    for (std::size_t i = 0; i < rows.size(); ++i) table.values.row(static_cast<Eigen::Index>(i)) = rows[i];

    if (warnings != nullptr) {
        for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
            if (table.values.col(j).array().isNaN().all()) {
                warnings->push_back(path.filename().string() + ": column '" +
                                    table.columns[static_cast<std::size_t>(j)] +
                                    "' has no usable data");
            }
        }
    }
    return table;
}

RawTable parse_rate_csv(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    RawTable table;
    table.columns = {"rate"};
    std::vector<double> values;
    bool in_data = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
        const auto fields = split_csv_line(lines[i]);
        int month = 0;
        const bool dated = fields.size() == 2 && parse_date_field(fields[0], &month);
        if (!in_data) {
            if (!dated) {
                if (fields.size() == 2) table.columns = {fields[1]};  // header row
                continue;
            }
            in_data = true;
        }
        if (!dated) {
            throw ParseError(location(path, i) + ": expected 'date,value' row");
        }
        double value = 0.0;
        if (fields[1].empty() || fields[1] == ".") {
            value = kNaN;
        } else if (!parse_double_strict(fields[1], &value)) {
            throw ParseError(location(path, i) + ": bad numeric field '" + fields[1] + "'");
        }
        table.months.push_back(month);
        values.push_back(value);
    }
    if (table.months.empty()) {
        throw ParseError(path.filename().string() + ": no data rows");
    }
    table.values.resize(static_cast<Eigen::Index>(values.size()), 1);
    for (std::size_t i = 0; i < values.size(); ++i) table.values(static_cast<Eigen::Index>(i), 0) = values[i];
    return table;
}

RawTable merge_rate_tables(const std::vector<RawTable>& tables) {
    if (tables.empty()) throw DomainError("no rate tables to merge");
    std::vector<std::pair<int, double>> rows;
    for (const auto& t : tables) {
        if (t.values.cols() != 1) throw DomainError("rate tables must have a single column");
        for (std::size_t i = 0; i < t.months.size(); ++i) {
            rows.emplace_back(t.months[i], t.values(static_cast<Eigen::Index>(i), 0));
        }
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].first == rows[i - 1].first) {
            throw AlignmentError("month " + std::to_string(rows[i].first) +
                                 " appears in more than one rate table");
        }
    }
    RawTable merged;
    merged.columns = tables.front().columns;
    merged.values.resize(static_cast<Eigen::Index>(rows.size()), 1);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        merged.months.push_back(rows[i].first);
        merged.values(static_cast<Eigen::Index>(i), 0) = rows[i].second;
    }
    return merged;
}

namespace {

using MonthIndex = std::unordered_map<int, Eigen::Index>;

MonthIndex index_months(const RawTable& table) {
    MonthIndex map;
    for (std::size_t i = 0; i < table.months.size(); ++i) {
        map[table.months[i]] = static_cast<Eigen::Index>(i);
    }
    return map;
}

void require_coverage(const MonthIndex& index, const std::vector<int>& months,
                      const std::string& name) {
    std::vector<int> missing;
    for (int m : months) {
        if (index.find(m) == index.end()) missing.push_back(m);
    }
    if (missing.empty()) return;
    std::ostringstream out;
    out << name << " table: missing months";
    const std::size_t show = std::min<std::size_t>(missing.size(), 8);
    for (std::size_t i = 0; i < show; ++i) out << ' ' << missing[i];
    if (missing.size() > show) out << " (+" << missing.size() - show << " more)";
    throw CoverageError(out.str());
}

double fetch_cell(const RawTable& table, const MonthIndex& index, int month, int decile,
                  const std::string& name) {
    if (decile < 1 || decile > table.values.cols()) {
        throw DomainError(name + " table has " + std::to_string(table.values.cols()) +
                          " columns; decile " + std::to_string(decile) + " requested");
    }
    const double v = table.values(index.at(month), decile - 1);
    if (std::isnan(v)) {
        throw CoverageError(name + " table: missing value at " + std::to_string(month) +
                            " decile " + std::to_string(decile));
    }
    return v;
}

}  // namespace

ReturnPanel build_panel(const RawTable& price, const RawTable& total, const RawTable& caps,
                        const RawTable& rates, RateBasis basis, PanelRange range,
                        const std::vector<int>& deciles) {
    if (!valid_yyyymm(range.first_month) || !valid_yyyymm(range.last_month) ||
        months_between(range.first_month, range.last_month) < 0) {
        throw DomainError("panel range must be valid YYYYMM months with first <= last");
    }
    if (deciles.empty()) throw DomainError("no deciles selected");

    ReturnPanel panel;
    panel.deciles = deciles;
    for (int m = range.first_month;; m = add_months(m, 1)) {
        panel.months.push_back(m);
        if (m == range.last_month) break;
    }
    const auto n_months = static_cast<Eigen::Index>(panel.months.size());
    const auto n_dec = static_cast<Eigen::Index>(deciles.size());

    const auto price_idx = index_months(price);
    const auto total_idx = index_months(total);
    const auto caps_idx = index_months(caps);
    const auto rate_idx = index_months(rates);
    require_coverage(price_idx, panel.months, "price");
    require_coverage(total_idx, panel.months, "total");
    require_coverage(caps_idx, panel.months, "cap");
    require_coverage(rate_idx, panel.months, "rate");

    panel.caps.resize(n_months, n_dec);
    panel.price_returns.resize(n_months, n_dec);
    panel.total_returns.resize(n_months, n_dec);
    panel.riskfree.resize(n_months);

    for (Eigen::Index i = 0; i < n_months; ++i) {
        const int month = panel.months[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < n_dec; ++j) {
            const int decile = deciles[static_cast<std::size_t>(j)];
            const double cap = fetch_cell(caps, caps_idx, month, decile, "cap");
            if (!(cap > 0.0)) {
                throw DomainError("cap table: nonpositive cap at " + std::to_string(month) +
                                  " decile " + std::to_string(decile));
            }
            panel.caps(i, j) = cap;
            const double p = fetch_cell(price, price_idx, month, decile, "price");
            const double t = fetch_cell(total, total_idx, month, decile, "total");
            if (!(p > -1.0) || !(t > -1.0)) {
                throw DomainError("return at or below -100% at " + std::to_string(month) +
                                  " decile " + std::to_string(decile));
            }
            panel.price_returns(i, j) = to_geometric(p);
            panel.total_returns(i, j) = to_geometric(t);
        }
        const double rate = rates.values(rate_idx.at(month), 0);
        if (std::isnan(rate)) {
            throw CoverageError("rate table: missing value at " + std::to_string(month));
        }
        panel.riskfree[i] = riskfree_geometric(rate, basis);
    }
    return panel;
}

void write_panel_csv(const ReturnPanel& panel, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write file: " + path.string());
    out << "month";
    for (int d : panel.deciles) out << ",cap_d" << d;
    for (int d : panel.deciles) out << ",price_d" << d;
    for (int d : panel.deciles) out << ",total_d" << d;
    out << ",riskfree\n";
    const auto n_dec = static_cast<Eigen::Index>(panel.deciles.size());
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(panel.months.size()); ++i) {
        out << panel.months[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < n_dec; ++j) out << ',' << format_double(panel.caps(i, j));
        for (Eigen::Index j = 0; j < n_dec; ++j) out << ',' << format_double(panel.price_returns(i, j));
        for (Eigen::Index j = 0; j < n_dec; ++j) out << ',' << format_double(panel.total_returns(i, j));
        out << ',' << format_double(panel.riskfree[i]) << '\n';
    }
    if (!out) throw InputError("write failed: " + path.string());
}

ReturnPanel read_panel_csv(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw ParseError(path.filename().string() + ": empty file");
    const auto header = split_csv_line(lines[0]);
    if (header.size() < 5 || header[0] != "month" || header.back() != "riskfree" ||
        (header.size() - 2) % 3 != 0) {
        throw ParseError(path.filename().string() + ": not a canonical panel header");
    }
    const std::size_t n_dec = (header.size() - 2) / 3;
    ReturnPanel panel;
    for (std::size_t j = 0; j < n_dec; ++j) {
        const std::string& label = header[1 + j];
        long decile = 0;
        if (label.rfind("cap_d", 0) != 0 || !parse_int_strict(label.substr(5), &decile)) {
            throw ParseError(path.filename().string() + ": bad column '" + label + "'");
        }
        panel.deciles.push_back(static_cast<int>(decile));
    }
    for (std::size_t j = 0; j < n_dec; ++j) {
        const std::string want_price = "price_d" + std::to_string(panel.deciles[j]);
        const std::string want_total = "total_d" + std::to_string(panel.deciles[j]);
        if (header[1 + n_dec + j] != want_price || header[1 + 2 * n_dec + j] != want_total) {
            throw ParseError(path.filename().string() + ": column order is not canonical");
        }
    }

    const auto n_rows = static_cast<Eigen::Index>(lines.size()) - 1;
    std::vector<std::size_t> keep;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].find_first_not_of(" \t") != std::string::npos) keep.push_back(i);
    }
    (void)n_rows;
    const auto rows = static_cast<Eigen::Index>(keep.size());
    panel.caps.resize(rows, static_cast<Eigen::Index>(n_dec));
    panel.price_returns.resize(rows, static_cast<Eigen::Index>(n_dec));
    panel.total_returns.resize(rows, static_cast<Eigen::Index>(n_dec));
    panel.riskfree.resize(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::size_t i = keep[static_cast<std::size_t>(r)];
        const auto fields = split_csv_line(lines[i]);
        if (fields.size() != header.size()) {
            throw ParseError(location(path, i) + ": expected " + std::to_string(header.size()) +
                             " fields, got " + std::to_string(fields.size()));
        }
        int month = 0;
        if (!is_yyyymm_field(fields[0], &month)) {
            throw ParseError(location(path, i) + ": bad month '" + fields[0] + "'");
        }
        panel.months.push_back(month);
        auto cell = [&](std::size_t col) {
            double v = 0.0;
            if (!parse_double_strict(fields[col], &v)) {
                throw ParseError(location(path, i) + ": bad numeric field '" + fields[col] + "'");
            }
            return v;
        };
        for (std::size_t j = 0; j < n_dec; ++j) {
            panel.caps(r, static_cast<Eigen::Index>(j)) = cell(1 + j);
            panel.price_returns(r, static_cast<Eigen::Index>(j)) = cell(1 + n_dec + j);
            panel.total_returns(r, static_cast<Eigen::Index>(j)) = cell(1 + 2 * n_dec + j);
        }
        panel.riskfree[r] = cell(header.size() - 1);
    }
    return panel;
}

}  // namespace capmsize
