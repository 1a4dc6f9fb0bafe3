#include <doctest.h>

#include <cmath>
#include <string>

#include "capmsize/errors.hpp"
#include "capmsize/panel.hpp"
#include "support/tempdir.hpp"

using namespace capmsize;
using testsupport::fresh_dir;
using testsupport::write_file;

namespace {

// Four months, three deciles, in the downloadable library's layout: prose
// preamble, header row, monthly block, then an annual table that must be
// ignored.
const char* kPriceCsv =
    "This file was created by a batch job.\n"
    "Monthly value-weighted returns, in percent.\n"
    "\n"
    ",Lo 10,Dec 2,Hi 10\n"
    "192607,1.50,2.00,3.00\n"
    "192608,-1.00,0.50,0.25\n"
    "192609,0.00,1.00,2.00\n"
    "192610,2.00,-0.50,1.00\n"
    "\n"
    "Annual returns:\n"
    "1926,10.0,12.0,13.0\n";

const char* kCapsCsv =
    ",Lo 10,Dec 2,Hi 10\n"
    "192607,12.5,40.0,900.0\n"
    "192608,12.7,40.5,905.0\n"
    "192609,12.3,41.0,910.0\n"
    "192610,12.8,41.2,915.0\n";

const char* kRatesCsv =
    "DATE,TB3MS\n"
    "1926-07-01,3.30\n"
    "1926-08-01,3.25\n"
    "192609,3.10\n"
    "1926-10,3.00\n";

}  // namespace

TEST_CASE("decile parser reads the monthly block and converts percent") {
    const auto dir = fresh_dir("panel-parse");
    const auto path = write_file(dir, "price.csv", kPriceCsv);
    const RawTable table = parse_decile_csv(path, DecileField::price);
    REQUIRE(table.months.size() == 4);
    CHECK(table.months.front() == 192607);
    CHECK(table.months.back() == 192610);
    REQUIRE(table.columns.size() == 3);
    CHECK(table.columns[0] == "Lo 10");
    CHECK(table.columns[2] == "Hi 10");
    CHECK(table.values(0, 0) == doctest::Approx(0.015).epsilon(1e-15));
    CHECK(table.values(1, 0) == doctest::Approx(-0.01).epsilon(1e-15));
    CHECK(table.values(3, 2) == doctest::Approx(0.01).epsilon(1e-15));
}

TEST_CASE("cap columns stay in levels and sentinels become missing") {
    const auto dir = fresh_dir("panel-caps");
    const auto caps = parse_decile_csv(write_file(dir, "caps.csv", kCapsCsv), DecileField::cap);
    CHECK(caps.values(0, 0) == 12.5);
    CHECK(caps.values(3, 2) == 915.0);

    const auto sentinel_path = write_file(dir, "sent.csv",
                                          ",d1,d2\n"
                                          "200001,-99.99,1.0\n"
                                          "200002,2.0,-999\n");
    const RawTable sent = parse_decile_csv(sentinel_path, DecileField::price);
    CHECK(std::isnan(sent.values(0, 0)));
    CHECK(std::isnan(sent.values(1, 1)));
    CHECK(sent.values(1, 0) == doctest::Approx(0.02));
}

TEST_CASE("decile parser failure modes") {
    const auto dir = fresh_dir("panel-bad");
    CHECK_THROWS_AS(parse_decile_csv(dir / "missing.csv", DecileField::price), CoverageError);
    CHECK_THROWS_AS(
        parse_decile_csv(write_file(dir, "empty.csv", ""), DecileField::price), ParseError);
    CHECK_THROWS_AS(parse_decile_csv(write_file(dir, "short_row.csv",
                                                ",d1,d2\n"
                                                "200001,1.0,2.0\n"
                                                "200002,1.0\n"),
                                     DecileField::price),
                    ParseError);
    CHECK_THROWS_AS(parse_decile_csv(write_file(dir, "bad_num.csv",
                                                ",d1,d2\n"
                                                "200001,1.0,oops\n"),
                                     DecileField::price),
                    ParseError);
}

TEST_CASE("missing header falls back to positional labels") {
    const auto dir = fresh_dir("panel-nohdr");
    const RawTable t = parse_decile_csv(write_file(dir, "nohdr.csv",
                                                   "200001,1.0,2.0,3.0\n"
                                                   "200002,1.5,2.5,3.5\n"),
                                        DecileField::price);
    REQUIRE(t.columns.size() == 3);
    CHECK(t.columns[0] == "d1");
    CHECK(t.columns[2] == "d3");
}

TEST_CASE("rate parser accepts the three date spellings") {
    const auto dir = fresh_dir("panel-rates");
    const RawTable rates = parse_rate_csv(write_file(dir, "rates.csv", kRatesCsv));
    REQUIRE(rates.months.size() == 4);
    CHECK(rates.months[0] == 192607);
    CHECK(rates.months[3] == 192610);
    CHECK(rates.values(0, 0) == 3.30);
    CHECK(rates.values(3, 0) == 3.00);
    REQUIRE(rates.columns.size() == 1);
    CHECK(rates.columns[0] == "TB3MS");

    const RawTable gaps = parse_rate_csv(write_file(dir, "gaps.csv",
                                                    "DATE,VALUE\n"
                                                    "200001,.\n"
                                                    "200002,1.5\n"));
    CHECK(std::isnan(gaps.values(0, 0)));
    CHECK(gaps.values(1, 0) == 1.5);
}

TEST_CASE("merging rate tables rejects overlapping months") {
    const auto dir = fresh_dir("panel-merge");
    const RawTable early = parse_rate_csv(write_file(dir, "early.csv",
                                                     "DATE,A\n"
                                                     "199911,1.0\n"
                                                     "199912,1.1\n"));
    const RawTable late = parse_rate_csv(write_file(dir, "late.csv",
                                                    "DATE,B\n"
                                                    "200001,1.2\n"));
    const RawTable merged = merge_rate_tables({late, early});
    REQUIRE(merged.months.size() == 3);
    CHECK(merged.months[0] == 199911);  // sorted even when supplied out of order
    CHECK(merged.months[2] == 200001);
    CHECK(merged.values(2, 0) == 1.2);

    const RawTable overlap = parse_rate_csv(write_file(dir, "overlap.csv",
                                                       "DATE,C\n"
                                                       "199912,9.0\n"));
    CHECK_THROWS_AS(merge_rate_tables({early, overlap}), AlignmentError);
}

TEST_CASE("panel assembly converts, aligns and validates") {
    const auto dir = fresh_dir("panel-build");
    const RawTable price =
        parse_decile_csv(write_file(dir, "price.csv", kPriceCsv), DecileField::price);
    const RawTable total = parse_decile_csv(write_file(dir, "total.csv", kPriceCsv),
                                            DecileField::total);
    const RawTable caps = parse_decile_csv(write_file(dir, "caps.csv", kCapsCsv),
                                           DecileField::cap);
    const RawTable rates = parse_rate_csv(write_file(dir, "rates.csv", kRatesCsv));

    const ReturnPanel panel = build_panel(price, total, caps, rates, RateBasis::percent,
                                          {192607, 192610}, {1, 2, 3});
    REQUIRE(panel.months.size() == 4);
    CHECK(panel.deciles == std::vector<int>({1, 2, 3}));
    CHECK(panel.price_returns(0, 0) == doctest::Approx(std::log1p(0.015)).epsilon(1e-15));
    CHECK(panel.total_returns(3, 1) == doctest::Approx(std::log1p(-0.005)).epsilon(1e-15));
    CHECK(panel.caps(2, 2) == 910.0);
    CHECK(panel.riskfree[0] == doctest::Approx(std::log1p(3.30 / 1200.0)).epsilon(1e-15));

    // A range the tables do not cover names the missing months.
    CHECK_THROWS_AS(build_panel(price, total, caps, rates, RateBasis::percent,
                                {192607, 192711}, {1, 2, 3}),
                    CoverageError);
    // Single-month range is legal.
    const ReturnPanel one = build_panel(price, total, caps, rates, RateBasis::percent,
                                        {192608, 192608}, {1, 3});
    CHECK(one.months.size() == 1);
    CHECK(one.caps(0, 1) == 905.0);
}

TEST_CASE("panel export round-trips exactly") {
    const auto dir = fresh_dir("panel-roundtrip");
    const RawTable price =
        parse_decile_csv(write_file(dir, "price.csv", kPriceCsv), DecileField::price);
    const RawTable total = parse_decile_csv(write_file(dir, "total.csv", kPriceCsv),
                                            DecileField::total);
    const RawTable caps = parse_decile_csv(write_file(dir, "caps.csv", kCapsCsv),
                                           DecileField::cap);
    const RawTable rates = parse_rate_csv(write_file(dir, "rates.csv", kRatesCsv));
    const ReturnPanel panel = build_panel(price, total, caps, rates, RateBasis::percent,
                                          {192607, 192610}, {1, 2, 3});
    write_panel_csv(panel, dir / "panel.csv");
    const ReturnPanel again = read_panel_csv(dir / "panel.csv");
    CHECK(again.months == panel.months);
    CHECK(again.deciles == panel.deciles);
    CHECK((again.caps - panel.caps).cwiseAbs().maxCoeff() == 0.0);
    CHECK((again.price_returns - panel.price_returns).cwiseAbs().maxCoeff() == 0.0);
    CHECK((again.total_returns - panel.total_returns).cwiseAbs().maxCoeff() == 0.0);
    CHECK((again.riskfree - panel.riskfree).cwiseAbs().maxCoeff() == 0.0);
}
