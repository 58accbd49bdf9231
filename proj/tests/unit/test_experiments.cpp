#include <gtest/gtest.h>

#include <sstream>

#include "xxztorus/experiments.hpp"

using namespace xxz;

namespace {

const ReferenceTable& reference() {
  static const ReferenceTable t = ReferenceTable::load();
  return t;
}

std::vector<std::pair<int, double>> printed_column(double eta, int lo, int hi) {
  std::vector<std::pair<int, double>> rows;
  for (int n = lo; n <= hi; ++n) rows.emplace_back(n, *reference().delta_e(eta, n));
  return rows;
}

std::string drop_first_line(const std::string& s) { return s.substr(s.find('\n') + 1); }

}  // namespace

TEST(Reference, LoadsAllTables) {
  const auto& r = reference();
  EXPECT_EQ(r.roots(1, 7).size(), 7u);
  EXPECT_EQ(r.roots(2, 11).size(), 11u);
  EXPECT_NEAR(r.roots(2, 11)[0].imag(), 5.0953, 1e-12);
  EXPECT_THROW(r.roots(2, 12), std::out_of_range);
  EXPECT_NEAR(*r.delta_e(1.0, 10), 0.0007405552, 1e-15);
  EXPECT_FALSE(r.delta_e(3.0, 10).has_value());
  const auto f = r.fit_parameters("fit_e0_eta2");
  ASSERT_TRUE(f.has_value());
  EXPECT_DOUBLE_EQ(f->second, 1.999);
  EXPECT_THROW(ReferenceTable::load("/nonexistent.csv"), std::runtime_error);
}

TEST(Fit, RecoversSyntheticExponential) {
  std::vector<std::pair<int, double>> rows;
  for (int n = 4; n <= 16; ++n) rows.emplace_back(n, 5.0 * std::exp(-1.3 * n));
  const auto f = fit_exponential(rows);
  EXPECT_NEAR(f.amplitude, 5.0, 1e-10);
  EXPECT_NEAR(f.rate, 1.3, 1e-10);
  EXPECT_EQ(f.n_min, 10);
  EXPECT_EQ(f.n_max, 16);
  EXPECT_EQ(f.points, 7);
  EXPECT_LT(f.rms_log_residual, 1e-12);
  const auto w = fit_exponential(rows, std::make_pair(4, 6));
  EXPECT_EQ(w.points, 3);
  EXPECT_NEAR(w.rate, 1.3, 1e-10);
}

TEST(Fit, Errors) {
  EXPECT_THROW(fit_exponential({{3, 1.0}, {4, 0.5}}), std::invalid_argument);
  EXPECT_THROW(fit_exponential({{3, 1.0}, {4, 0.0}, {5, 0.1}}), std::domain_error);
  EXPECT_THROW(fit_exponential({{3, 1.0}, {4, -1e-3}, {5, 0.1}}), std::domain_error);
  EXPECT_THROW(fit_exponential({{3, 1.0}, {4, 0.5}, {5, 0.1}}, std::make_pair(4, 5)),
               std::invalid_argument);
}

TEST(Fit, PrintedColumnsDecayAtEta) {
  const auto one = fit_exponential(printed_column(1.0, 14, 19), std::make_pair(14, 19));
  EXPECT_NEAR(one.rate, 1.0, 0.02);
  const auto two = fit_exponential(printed_column(2.0, 5, 10), std::make_pair(5, 10));
  EXPECT_NEAR(two.rate, 2.0, 0.15 * 2.0);
}

TEST(Table3, SpotCellsSmallChains) {
  Table3Options o;
  for (const auto& [n, eta] : std::vector<std::pair<int, double>>{{2, 0.5}, {3, 1.0}, {7, 0.5},
                                                                   {10, 1.0}, {11, 1.0}}) {
    const auto row = table3_cell({n, eta}, &reference(), o);
    ASSERT_TRUE(row.error.empty()) << row.error;
    ASSERT_TRUE(row.ref_value.has_value());
    EXPECT_TRUE(row.pass) << "n=" << n << " eta=" << eta << " diff=" << row.abs_diff;
    EXPECT_EQ(row.tolerance, 1e-6);
    if (row.delta_bae) EXPECT_NEAR(*row.delta_bae, row.delta, 1e-8);
  }
  EXPECT_EQ(table3_tolerance(15), 1e-5);
}

TEST(Table3, ReducedGridSummary) {
  Table3Options o;
  o.etas = {1.0, 2.0};
  o.n_min = 2;
  o.n_max = 8;
  const auto t = reproduce_table3(&reference(), o);
  EXPECT_EQ(t.rows.size(), 14u);
  EXPECT_EQ(t.summary.cells_checked, 14);
  EXPECT_EQ(t.summary.cells_passed, 14);
  EXPECT_TRUE(t.summary.errors.empty());
  EXPECT_LE(t.summary.max_abs_diff, 1e-6);
}

TEST(RootTables, BothTablesReproduce) {
  for (int id : {1, 2}) {
    const auto t = reproduce_root_table(id, reference());
    EXPECT_EQ(t.summary.cells_checked, 45);
    EXPECT_EQ(t.summary.cells_passed, 45) << "table " << id << " max diff " << t.summary.max_abs_diff;
    EXPECT_TRUE(t.summary.errors.empty());
  }
  EXPECT_THROW(reproduce_root_table(3, reference()), std::invalid_argument);
}

TEST(Ising, ScanValues) {
  // 50-digit evaluation, tests/oracles/derive_expected.py.
  const auto rows = ising_limit_scan(10, {8.0});
  EXPECT_NEAR(rows[0].ground_discrepancy, -4.5014064822037996e-7, 1e-14);
  EXPECT_NEAR(rows[0].excited_discrepancy, -0.0026841508618575855, 1e-13);
  EXPECT_LE(std::abs(ising_limit_scan(3, {40.0})[0].ground_discrepancy), 1e-10);
  EXPECT_THROW(ising_limit_scan(5, {0.0}), std::invalid_argument);
}

TEST(Ising, DiscrepanciesShrinkBeyondTwo) {
  std::vector<double> etas;
  for (double e = 2.0; e <= 20.0; e += 1.0) etas.push_back(e);
  const auto rows = ising_limit_scan(10, etas);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    // Rounding floor of E / cosh(eta) near -N is about 1e-14.
    EXPECT_LE(std::abs(rows[i].ground_discrepancy), std::abs(rows[i - 1].ground_discrepancy) + 1e-14);
    EXPECT_LE(std::abs(rows[i].excited_discrepancy),
              std::abs(rows[i - 1].excited_discrepancy) + 1e-14);
  }
}

TEST(Gap, SeriesRows) {
  const auto rows = gap_series(1.0, 6, 9);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) {
    ASSERT_TRUE(r.ok) << r.error;
    EXPECT_EQ(r.cluster_size, static_cast<std::size_t>(2 * r.n_sites));
    EXPECT_NEAR(r.gap_ed, r.e1_ed - r.e0_ed, 1e-12);
    EXPECT_LE(std::abs(r.gap_diff()), 0.1);
  }
  const auto r10 = gap_row({10, 1.0});
  // Diagonalization oracle level 20 of the N=10, eta=1 chain.
  EXPECT_NEAR(r10.e1_ed, -10.917325653493476, 1e-9);
  EXPECT_THROW(gap_series(1.0, 1, 4), std::invalid_argument);
}

TEST(Output, SeriesRoundTrip) {
  std::vector<GapRow> rows = gap_series(2.0, 4, 6);
  std::ostringstream os;
  write_gap_csv(os, rows);
  std::istringstream is(os.str());
  const auto series = read_series_csv(is, "gap_diff", 2.0);
  ASSERT_EQ(series.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(series[i].first, rows[i].n_sites);
    EXPECT_NEAR(series[i].second, rows[i].gap_diff(), 1e-12 * (1.0 + std::abs(rows[i].gap_diff())));
  }
  std::istringstream wrong(os.str());
  EXPECT_THROW(read_series_csv(wrong, "missing"), std::invalid_argument);
  std::istringstream other(os.str());
  EXPECT_TRUE(read_series_csv(other, "gap_diff", 1.0).empty());
}

TEST(Output, DeterministicApartFromTimestamp) {
  Table3Options o;
  o.etas = {0.5};
  o.n_min = 2;
  o.n_max = 6;
  std::ostringstream a, b;
  write_table3_csv(a, reproduce_table3(&reference(), o));
  write_table3_csv(b, reproduce_table3(&reference(), o));
  EXPECT_EQ(a.str().rfind("# generated ", 0), 0u);
  EXPECT_EQ(drop_first_line(a.str()), drop_first_line(b.str()));

  std::ostringstream p;
  write_plot_data(p, {{3, std::exp(-2.0)}, {4, 0.0}});
  EXPECT_EQ(p.str(), "n_sites,ln_delta\n3,-2\n");
}
