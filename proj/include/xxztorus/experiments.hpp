#pragma once

// Table reproduction, exponential fits, gap and cluster series, Ising-limit scan.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "xxztorus/bae.hpp"
#include "xxztorus/eigensolver.hpp"
#include "xxztorus/model.hpp"
#include "xxztorus/parallel.hpp"

#ifndef XXZTORUS_DATA_DIR
#define XXZTORUS_DATA_DIR "data"
#endif

namespace xxz {

// ---------------------------------------------------------------------------
// Reference values
// ---------------------------------------------------------------------------

struct ReferenceValue {
  std::string table;  // "1", "2", "3", "fit_e0_eta1", ...
  double eta = 0.0;
  int n_sites = 0;
  std::string cell;   // "u<j>", "delta_e", "amplitude", "rate"
  double re = 0.0;
  double im = 0.0;
  int decimals = 0;
};

class ReferenceTable {
 public:
  static ReferenceTable load(const std::string& path = std::string(XXZTORUS_DATA_DIR) +
                                                       "/reference_values.csv") {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open reference data " + path);
    ReferenceTable t;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::vector<std::string> f;
      std::stringstream ss(line);
      for (std::string item; std::getline(ss, item, ',');) f.push_back(item);
      if (f.size() != 7) throw std::runtime_error("malformed reference row: " + line);
      t.values_.push_back({f[0], std::stod(f[1]), std::stoi(f[2]), f[3], std::stod(f[4]),
                           std::stod(f[5]), std::stoi(f[6])});
    }
    return t;
  }

  const std::vector<ReferenceValue>& values() const { return values_; }

  /// Printed roots u_1..u_N of Table 1 (eta = 0.5) or Table 2 (eta = 1).
  std::vector<cplx> roots(int table_id, int n) const {
    std::vector<cplx> out(static_cast<std::size_t>(n));
    int found = 0;
    for (const auto& v : values_) {
      if (v.table == std::to_string(table_id) && v.n_sites == n && v.cell[0] == 'u') {
        const int j = std::stoi(v.cell.substr(1));
        out[static_cast<std::size_t>(j - 1)] = {v.re, v.im};
        ++found;
      }
    }
    if (found != n) throw std::out_of_range("no printed roots for this table column");
    return out;
  }

  std::optional<double> delta_e(double eta, int n) const {
    for (const auto& v : values_) {
      if (v.table == "3" && v.n_sites == n && v.eta == eta) return v.re;
    }
    return std::nullopt;
  }

  std::optional<std::pair<double, double>> fit_parameters(const std::string& id) const {
    std::optional<double> a, r;
    for (const auto& v : values_) {
      if (v.table != id) continue;
      if (v.cell == "amplitude") a = v.re;
      if (v.cell == "rate") r = v.re;
    }
    if (a && r) return std::make_pair(*a, *r);
    return std::nullopt;
  }

 private:
  std::vector<ReferenceValue> values_;
};

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

inline constexpr double kRootTolerance = 5e-4;

struct RootRow {
  int n_sites = 0;
  double eta = 0.0;
  int index_j = 0;
  cplx computed;
  cplx ref;
  double abs_diff = 0.0;
  bool pass = false;
};

struct ComparisonRow {
  int n_sites = 0;
  double eta = 0.0;
  double e_formula = 0.0;
  double e_numeric = 0.0;
  double delta = 0.0;  // e_formula - e_numeric
  SpectrumMethod method = SpectrumMethod::dense;
  std::optional<double> ref_value;
  double abs_diff = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  // Same quantity from the converged ground roots: -(energy shift from the
  // ideal string), resolvable far below double precision of E itself.
  std::optional<double> delta_bae;
  std::optional<double> e_bae;
  std::string error;
};

struct TableSummary {
  int table = 0;
  int cells_checked = 0;
  int cells_passed = 0;
  double max_abs_diff = 0.0;
  std::vector<std::string> errors;
};

struct RootTable {
  int table = 0;
  std::vector<RootRow> rows;
  std::vector<SolveReport> reports;
  TableSummary summary;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  TableSummary summary;
};

/// Table 1 (eta = 0.5) or Table 2 (eta = 1): ground roots for N = 7..11.
inline RootTable reproduce_root_table(int table_id, const ReferenceTable& ref,
                                      const SolveOptions& opt = {}) {
  if (table_id != 1 && table_id != 2) throw std::invalid_argument("root tables are 1 and 2");
  const double eta = table_id == 1 ? 0.5 : 1.0;
  RootTable out;
  out.table = table_id;
  out.summary.table = table_id;
  for (int n = 7; n <= 11; ++n) {
    const ModelParams p(n, eta);
    SolveReport rep = solve(ground_string_seed(p), opt);
    const auto printed = ref.roots(table_id, n);
    const auto got = rep.root_set.roots();
    if (!rep.converged()) {
      out.summary.errors.push_back("N=" + std::to_string(n) + ": " +
                                   std::string(to_string(rep.status)));
    }
    for (int j = 0; j < n; ++j) {
      RootRow row{n, eta, j + 1, got[static_cast<std::size_t>(j)],
                  printed[static_cast<std::size_t>(j)], 0.0, false};
      row.abs_diff = std::max(std::abs(row.computed.real() - row.ref.real()),
                              std::abs(row.computed.imag() - row.ref.imag()));
      row.pass = rep.converged() && row.abs_diff <= kRootTolerance;
      ++out.summary.cells_checked;
      out.summary.cells_passed += row.pass;
      out.summary.max_abs_diff = std::max(out.summary.max_abs_diff, row.abs_diff);
      out.rows.push_back(row);
    }
    out.reports.push_back(std::move(rep));
  }
  return out;
}

struct Table3Options {
  std::vector<double> etas{0.5, 1.0, 1.5, 2.0};
  int n_min = 2;
  int n_max = 19;
  int dense_max = 12;
  EigenOptions eigen{};
  bool with_bae = true;
  unsigned threads = 0;
};

/// Acceptance tolerance for a Table 3 cell: 1e-6 up to N = 14, 1e-5 beyond.
inline double table3_tolerance(int n) { return n <= 14 ? 1e-6 : 1e-5; }

inline ComparisonRow table3_cell(const ModelParams& p, const ReferenceTable* ref,
                                 const Table3Options& opt) {
  ComparisonRow row;
  row.n_sites = p.n_sites();
  row.eta = p.eta();
  row.e_formula = ground_energy_formula(p);
  row.tolerance = table3_tolerance(p.n_sites());
  if (ref) row.ref_value = ref->delta_e(p.eta(), p.n_sites());
  try {
    const bool dense = p.n_sites() <= opt.dense_max;
    const SpectrumResult s = lowest_eigenvalues(
        p, 1, dense ? OperatorMode::dense : OperatorMode::matrix_free, opt.eigen);
    row.method = s.method;
    row.e_numeric = s.energies.front();
    row.delta = row.e_formula - row.e_numeric;
    if (row.ref_value) {
      row.abs_diff = std::abs(row.delta - *row.ref_value);
      row.pass = row.abs_diff <= row.tolerance;
    }
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  if (opt.with_bae) {
    try {
      const SolveReport rep = solve(ground_string_seed(p));
      if (rep.converged()) {
        row.e_bae = energy_from_roots(rep.root_set).value;
        row.delta_bae = -energy_shift_from_anchors(rep.root_set).real();
      }
    } catch (const std::exception&) {
      // The BAE column is supplementary; an ED value is still reported.
    }
  }
  return row;
}

/// Table 3: Delta E = E0(formula) - E0(exact diagonalization).
inline ComparisonTable reproduce_table3(const ReferenceTable* ref, const Table3Options& opt = {}) {
  std::vector<ModelParams> cells;
  for (double eta : opt.etas) {
    for (int n = opt.n_min; n <= opt.n_max; ++n) cells.emplace_back(n, eta);
  }
  ComparisonTable out;
  out.summary.table = 3;
  out.rows = parallel_map<ComparisonRow>(
      cells.size(), [&](std::size_t i) { return table3_cell(cells[i], ref, opt); },
      opt.threads ? opt.threads : thread_count());
  for (const auto& r : out.rows) {
    if (!r.error.empty()) {
      out.summary.errors.push_back("N=" + std::to_string(r.n_sites) + " eta=" +
                                   std::to_string(r.eta) + ": " + r.error);
    }
    if (!r.ref_value) continue;
    ++out.summary.cells_checked;
    out.summary.cells_passed += r.pass;
    out.summary.max_abs_diff = std::max(out.summary.max_abs_diff, r.abs_diff);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fits
// ---------------------------------------------------------------------------

struct FitResult {
  double amplitude = 0.0;
  double rate = 0.0;
  int n_min = 0;
  int n_max = 0;
  int points = 0;
  double rms_log_residual = 0.0;
};

/// Inclusive window covering the largest-N half of the data (at least 3 points).
inline std::pair<int, int> default_window(std::vector<std::pair<int, double>> rows) {
  if (rows.size() < 3) throw std::invalid_argument("fit needs at least 3 points");
  std::sort(rows.begin(), rows.end());
  const std::size_t take = std::max<std::size_t>(3, (rows.size() + 1) / 2);
  return {rows[rows.size() - take].first, rows.back().first};
}

/// Least squares of ln(dE) against N: dE ~ a exp(-alpha N).
inline FitResult fit_exponential(const std::vector<std::pair<int, double>>& rows,
                                 std::optional<std::pair<int, int>> window = std::nullopt) {
  const auto [lo, hi] = window ? *window : default_window(rows);
  std::vector<double> x, y;
  for (const auto& [n, de] : rows) {
    if (n < lo || n > hi) continue;
    if (!(de > 0.0)) {
      throw std::domain_error("fit_exponential: nonpositive value at N=" + std::to_string(n));
    }
    x.push_back(n);
    y.push_back(std::log(de));
  }
  if (x.size() < 3) throw std::invalid_argument("fit_exponential: window holds fewer than 3 points");
  const double k = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / k, my = sy / k;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  const double icept = my - slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (icept + slope * x[i]);
    ss += e * e;
  }
  return {std::exp(icept), -slope, lo, hi, static_cast<int>(x.size()), std::sqrt(ss / k)};
}

// ---------------------------------------------------------------------------
// Gap, cluster and Ising series
// ---------------------------------------------------------------------------

struct GapRow {
  int n_sites = 0;
  double eta = 0.0;
  double e0_ed = 0.0;
  double e1_ed = 0.0;  // first level above the low cluster
  double gap_ed = 0.0;
  double gap_formula = 0.0;
  double e1_formula = 0.0;
  std::size_t cluster_size = 0;
  double cluster_span = 0.0;
  SpectrumMethod method = SpectrumMethod::dense;
  bool ok = false;
  std::string error;

  double gap_diff() const { return gap_ed - gap_formula; }
  double e1_diff() const { return e1_formula - e1_ed; }  // E1(formula) - E1(ED)
};

struct SeriesOptions {
  int dense_max = 12;
  EigenOptions eigen{};
  unsigned threads = 0;
};

inline GapRow gap_row(const ModelParams& p, const SeriesOptions& opt = {}) {
  GapRow row;
  row.n_sites = p.n_sites();
  row.eta = p.eta();
  row.gap_formula = gap_formula(p);
  row.e1_formula = excited_energy_formula(p);
  try {
    const int k = 2 * p.n_sites() + 2;
    const bool dense = p.n_sites() <= opt.dense_max;
    const SpectrumResult s = lowest_eigenvalues(
        p, k, dense ? OperatorMode::dense : OperatorMode::matrix_free, opt.eigen);
    row.method = s.method;
    const ClusterReport c = low_cluster(s, p);
    row.e0_ed = s.energies[0];
    row.e1_ed = s.energies[c.size];
    row.gap_ed = c.separating_gap;
    row.cluster_size = c.size;
    row.cluster_span = c.span;
    row.ok = true;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

inline std::vector<GapRow> gap_series(double eta, int n_min, int n_max,
                                      const SeriesOptions& opt = {}) {
  if (n_min < 2 || n_max < n_min) throw std::invalid_argument("gap_series: bad N range");
  std::vector<ModelParams> ps;
  for (int n = n_min; n <= n_max; ++n) ps.emplace_back(n, eta);
  return parallel_map<GapRow>(
      ps.size(), [&](std::size_t i) { return gap_row(ps[i], opt); },
      opt.threads ? opt.threads : thread_count());
}

struct IsingRow {
  double eta = 0.0;
  double ground_discrepancy = 0.0;   // E0 / cosh(eta) + N - 2
  double excited_discrepancy = 0.0;  // E1 / cosh(eta) + N - 6
};

inline std::vector<IsingRow> ising_limit_scan(int n_sites, const std::vector<double>& etas) {
  std::vector<IsingRow> out;
  for (double eta : etas) {
    if (!(eta > 0.0)) throw std::invalid_argument("ising_limit_scan: eta values must be > 0");
    const ModelParams p(n_sites, eta);
    const double c = std::cosh(eta);
    out.push_back({eta, ground_energy_formula(p) / c - ising_limit_ground(p),
                   excited_energy_formula(p) / c - ising_limit_excited(p)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

inline std::string timestamp_line() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << "# generated " << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

inline void write_root_table_csv(std::ostream& os, const RootTable& t, bool stamp = true) {
  if (stamp) os << timestamp_line() << '\n';
  os << "n_sites,eta,index_j,re_u,im_u,ref_re,ref_im,abs_diff,tolerance,pass\n";
  os << std::setprecision(12);
  for (const auto& r : t.rows) {
    os << r.n_sites << ',' << r.eta << ',' << r.index_j << ',' << r.computed.real() << ','
       << r.computed.imag() << ',' << r.ref.real() << ',' << r.ref.imag() << ','
       << r.abs_diff << ',' << kRootTolerance << ',' << (r.pass ? 1 : 0) << '\n';
  }
}

inline void write_table3_csv(std::ostream& os, const ComparisonTable& t, bool stamp = true) {
  if (stamp) os << timestamp_line() << '\n';
  os << "n_sites,eta,e_formula,e_numeric,delta,method,ref_value,abs_diff,tolerance,pass,"
        "delta_bae,error\n";
  os << std::setprecision(15);
  for (const auto& r : t.rows) {
    os << r.n_sites << ',' << r.eta << ',' << r.e_formula << ',' << r.e_numeric << ','
       << r.delta << ',' << to_string(r.method) << ',';
    if (r.ref_value) os << *r.ref_value;
    os << ',' << r.abs_diff << ',' << r.tolerance << ',' << (r.pass ? 1 : 0) << ',';
    if (r.delta_bae) os << *r.delta_bae;
    os << ',' << r.error << '\n';
  }
}

inline void write_gap_csv(std::ostream& os, const std::vector<GapRow>& rows) {
  os << "n_sites,eta,e0_ed,e1_ed,gap_ed,gap_formula,gap_diff,e1_formula,e1_diff,"
        "cluster_size,cluster_span,method,ok\n";
  os << std::setprecision(15);
  for (const auto& r : rows) {
    os << r.n_sites << ',' << r.eta << ',' << r.e0_ed << ',' << r.e1_ed << ',' << r.gap_ed << ','
       << r.gap_formula << ',' << r.gap_diff() << ',' << r.e1_formula << ',' << r.e1_diff() << ','
       << r.cluster_size << ',' << r.cluster_span << ',' << to_string(r.method) << ','
       << (r.ok ? 1 : 0) << '\n';
  }
}

inline void write_ising_csv(std::ostream& os, int n_sites, const std::vector<IsingRow>& rows) {
  os << "n_sites,eta,ground_discrepancy,excited_discrepancy\n";
  os << std::setprecision(15);
  for (const auto& r : rows) {
    os << n_sites << ',' << r.eta << ',' << r.ground_discrepancy << ',' << r.excited_discrepancy
       << '\n';
  }
}

/// Plot data: one line per positive point, "n_sites,ln_delta".
inline void write_plot_data(std::ostream& os, const std::vector<std::pair<int, double>>& rows) {
  os << "n_sites,ln_delta\n";
  os << std::setprecision(15);
  for (const auto& [n, v] : rows) {
    if (v > 0.0) os << n << ',' << std::log(v) << '\n';
  }
}

/// Reads (n_sites, column) pairs from a CSV with a header row; lines starting
/// with '#' are skipped. Rows can be restricted to one eta when the file has an
/// eta column.
inline std::vector<std::pair<int, double>> read_series_csv(std::istream& in,
                                                           const std::string& column,
                                                           std::optional<double> eta = {}) {
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) header.push_back(f);
    break;
  }
  auto col = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  };
  const auto cn = col("n_sites");
  const auto cv = col(column);
  const auto ce = col("eta");
  if (!cn || !cv) {
    throw std::invalid_argument("input needs columns n_sites and " + column);
  }
  std::vector<std::pair<int, double>> out;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string item; std::getline(ss, item, ',');) f.push_back(item);
    if (f.size() <= std::max(*cn, *cv) || f[*cv].empty()) continue;
    if (eta && ce && std::abs(std::stod(f[*ce]) - *eta) > 1e-12) continue;
    out.emplace_back(std::stoi(f[*cn]), std::stod(f[*cv]));
  }
  return out;
}

}  // namespace xxz
