// Command-line front end. Exit codes: 0 success, 1 usage or validation error,
// 2 numerical failure (non-convergence or a reference check that did not
// pass), 3 internal error.

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "xxztorus/bae.hpp"
#include "xxztorus/eigensolver.hpp"
#include "xxztorus/experiments.hpp"
#include "xxztorus/integrability.hpp"
#include "xxztorus/io.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kNumerical = 2, kInternal = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Format { csv, json };

Format format_of(const std::string& path) {
  if (path.empty()) return Format::csv;
  const auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".csv") return Format::csv;
  if (ext == ".json") return Format::json;
  throw UsageError("output path must end in .csv or .json: " + path);
}

// Sends CSV or JSON to the path, or CSV to stdout when the path is empty.
void emit(const std::string& path, const std::function<void(std::ostream&)>& csv,
          const std::function<xxz::json()>& js) {
  const Format f = format_of(path);
  std::ofstream file;
  if (!path.empty()) {
    file.open(path);
    if (!file) throw UsageError("cannot open output file " + path);
  }
  std::ostream& os = path.empty() ? std::cout : file;
  if (f == Format::json) {
    os << js().dump(2) << '\n';
  } else {
    csv(os);
  }
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      out.push_back(std::stod(item));
    } catch (...) {
      throw UsageError("not a number in list: " + item);
    }
  }
  if (out.empty()) throw UsageError("empty list");
  return out;
}

constexpr const char* kSeedHelp = "seed for randomized starts (default 20180101)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Twisted ferromagnetic XXZ chain: exact diagonalization, Bethe roots, checks"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every command");

  // ed ----------------------------------------------------------------------
  int ed_n = 0, ed_k = 1;
  double ed_eta = 0.0, ed_tol = 1e-10;
  std::string ed_method = "auto", ed_out;
  std::uint64_t ed_seed = xxz::kDefaultSeed;
  auto* ed = app.add_subcommand("ed", "lowest eigenvalues of the twisted Hamiltonian");
  ed->add_option("--n", ed_n, "number of sites N")->required();
  ed->add_option("--eta", ed_eta, "anisotropy eta > 0")->required();
  ed->add_option("--k", ed_k, "number of lowest eigenvalues")->capture_default_str();
  ed->add_option("--method", ed_method, "dense | iterative | auto (dense for N <= 12)")
      ->check(CLI::IsMember({"auto", "dense", "iterative"}))
      ->capture_default_str();
  ed->add_option("--tol", ed_tol, "relative residual tolerance (iterative)")->capture_default_str();
  ed->add_option("--seed", ed_seed, kSeedHelp);
  ed->add_option("--out", ed_out, "output .csv or .json (default CSV on stdout)");
  ed->footer(
      "CSV columns: n_sites,eta,index,energy,method,tolerance\n"
      "JSON: {params, energies, count, method, tolerance, residuals, cluster?}\n"
      "The low cluster (size, span, separating gap) is reported when k >= 2N+2.");

  // bae ---------------------------------------------------------------------
  int bae_n = 0, bae_max_iter = 200;
  double bae_eta = 0.0, bae_tol = 1e-12;
  std::optional<double> bae_jitter;
  std::string bae_state = "ground", bae_out, bae_report, bae_jac = "analytic";
  std::uint64_t bae_seed = xxz::kDefaultSeed;
  auto* bae = app.add_subcommand("bae", "solve the Bethe equations from a string seed");
  bae->add_option("--n", bae_n, "number of sites N")->required();
  bae->add_option("--eta", bae_eta, "anisotropy eta > 0")->required();
  bae->add_option("--state", bae_state, "ground | ground-alt (odd N) | excited")
      ->check(CLI::IsMember({"ground", "ground-alt", "excited"}))
      ->capture_default_str();
  bae->add_option("--tol", bae_tol, "residual inf-norm tolerance")->capture_default_str();
  bae->add_option("--max-iter", bae_max_iter, "Newton iteration cap")->capture_default_str();
  bae->add_option("--jitter", bae_jitter,
                  "seed perturbation; ground: symmetric random jitter (default 0), "
                  "excited: real split of the colliding pair for even N (default 1e-3)");
  bae->add_option("--jacobian", bae_jac, "analytic | fd")
      ->check(CLI::IsMember({"analytic", "fd"}))
      ->capture_default_str();
  bae->add_option("--seed", bae_seed, kSeedHelp);
  bae->add_option("--out", bae_out, "output .csv (roots) or .json (full report)");
  bae->add_option("--report", bae_report, "additional JSON solve report path");
  bae->footer(
      "CSV columns: n_sites,eta,label,index_j,re_u,im_u,residual_abs,seed_kind\n"
      "JSON: SolveReport {params,label,seed_kind,status,converged,iterations,final_residual,\n"
      "      jacobian_condition_estimate,conjugation_defect,min_root_separation,\n"
      "      roots,config}; status: converged | max-iterations | line-search-failed |\n"
      "      singular-jacobian | pole-proximity | coincident-roots\n"
      "The energy from the roots is printed on stderr.");

  // tables ------------------------------------------------------------------
  int tab_id = 0, tab_n_max = 19;
  std::string tab_out, tab_summary;
  auto* tables = app.add_subcommand("tables", "reproduce the reference tables");
  tables->add_option("--id", tab_id, "1 (eta=0.5 roots), 2 (eta=1 roots), 3 (ground energies)")
      ->required()
      ->check(CLI::Range(1, 3));
  tables->add_option("--n-max", tab_n_max, "largest N for table 3 (2..19)")->capture_default_str();
  tables->add_option("--out", tab_out, "table .csv or .json (default CSV on stdout)");
  tables->add_option("--summary", tab_summary, "summary JSON path (default: stderr)");
  tables->footer(
      "Table 1/2 CSV: n_sites,eta,index_j,re_u,im_u,ref_re,ref_im,abs_diff,tolerance,pass\n"
      "Table 3 CSV: n_sites,eta,e_formula,e_numeric,delta,method,ref_value,abs_diff,\n"
      "             tolerance,pass,delta_bae,error\n"
      "Summary JSON: {table, cells_checked, cells_passed, max_abs_diff, errors}\n"
      "CSV files start with a '# generated <UTC time>' line.");

  // gap ---------------------------------------------------------------------
  double gap_eta = 0.0;
  int gap_nmin = 4, gap_nmax = 12;
  std::string gap_out;
  auto* gap = app.add_subcommand("gap", "finite-size gap from exact diagonalization vs formula");
  gap->add_option("--eta", gap_eta, "anisotropy eta > 0")->required();
  gap->add_option("--n-min", gap_nmin, "smallest N")->capture_default_str();
  gap->add_option("--n-max", gap_nmax, "largest N (<= 18)")->capture_default_str();
  gap->add_option("--out", gap_out, "output .csv or .json");
  gap->footer(
      "CSV columns: n_sites,eta,e0_ed,e1_ed,gap_ed,gap_formula,gap_diff,e1_formula,e1_diff,\n"
      "             cluster_size,cluster_span,method,ok");

  // fit ---------------------------------------------------------------------
  std::string fit_in, fit_col = "delta", fit_out;
  std::optional<int> fit_nmin, fit_nmax;
  std::optional<double> fit_eta;
  auto* fit = app.add_subcommand("fit", "least-squares fit dE ~ a exp(-alpha N)");
  fit->add_option("--input", fit_in, "CSV with an n_sites column")->required();
  fit->add_option("--column", fit_col, "value column")->capture_default_str();
  fit->add_option("--eta", fit_eta, "keep only rows with this eta");
  fit->add_option("--n-min", fit_nmin, "window start (default: largest-N half)");
  fit->add_option("--n-max", fit_nmax, "window end");
  fit->add_option("--out", fit_out, "output .json or .csv (plot data N, ln value)");
  fit->footer("JSON: {amplitude, rate, window, points, rms_log_residual}");

  // verify-integrability ----------------------------------------------------
  int vi_n = 0, vi_trials = 10;
  double vi_eta = 0.0;
  std::uint64_t vi_seed = xxz::kDefaultSeed;
  std::string vi_out;
  auto* vi = app.add_subcommand("verify-integrability",
                                "RTT relation, [t(u),t(v)] = 0 and H from t'(0) t(0)^-1");
  vi->add_option("--n", vi_n, "number of sites N (<= 10)")->required();
  vi->add_option("--eta", vi_eta, "anisotropy eta > 0")->required();
  vi->add_option("--trials", vi_trials, "random spectral pairs")->capture_default_str();
  vi->add_option("--seed", vi_seed, kSeedHelp);
  vi->add_option("--out", vi_out, "output .json (default JSON on stdout) or .csv");
  vi->footer("JSON: [{check, params, residual, tolerance, pass}, ...]");

  // ising -------------------------------------------------------------------
  int is_n = 0;
  std::string is_etas, is_out;
  auto* ising = app.add_subcommand("ising", "closed forms against the Ising limit");
  ising->add_option("--n", is_n, "number of sites N")->required();
  ising->add_option("--eta-list", is_etas, "comma-separated ascending eta values")->required();
  ising->add_option("--out", is_out, "output .csv or .json");
  ising->footer("CSV columns: n_sites,eta,ground_discrepancy,excited_discrepancy");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*ed) {
      if (ed_k < 1) throw UsageError("--k must be >= 1");
      if (!(ed_tol > 0.0)) throw UsageError("--tol must be > 0");
      format_of(ed_out);
      const xxz::ModelParams p(ed_n, ed_eta);
      const bool dense = ed_method == "dense" || (ed_method == "auto" && ed_n <= 12);
      if (dense && ed_n > xxz::kMaxDenseSites) {
        throw UsageError("N=" + std::to_string(ed_n) + " exceeds the dense limit " +
                         std::to_string(xxz::kMaxDenseSites));
      }
      if (!dense && ed_n > xxz::kMaxMatrixFreeSites) {
        throw UsageError("N=" + std::to_string(ed_n) + " exceeds the matrix-free limit " +
                         std::to_string(xxz::kMaxMatrixFreeSites));
      }
      if (static_cast<double>(ed_k) > std::ldexp(1.0, ed_n)) throw UsageError("--k exceeds 2^N");
      xxz::EigenOptions eo;
      eo.tol = ed_tol;
      eo.seed = ed_seed;
      xxz::SpectrumResult s = xxz::lowest_eigenvalues(
          p, ed_k, dense ? xxz::OperatorMode::dense : xxz::OperatorMode::matrix_free, eo);
      std::optional<xxz::ClusterReport> cluster;
      try {
        cluster = xxz::low_cluster(s, p);
      } catch (const std::exception&) {
      }
      s.energies.resize(static_cast<std::size_t>(ed_k));
      if (cluster) {
        std::cerr << "low cluster: size " << cluster->size << ", span " << cluster->span
                  << ", separating gap " << cluster->separating_gap << '\n';
      }
      emit(ed_out, [&](std::ostream& os) { xxz::write_spectrum_csv(os, s); },
           [&] {
             xxz::json j = xxz::to_json(s);
             if (cluster) j["cluster"] = xxz::to_json(*cluster);
             return j;
           });
      return kOk;
    }

    if (*bae) {
      if (!(bae_tol > 0.0)) throw UsageError("--tol must be > 0");
      if (bae_max_iter < 0) throw UsageError("--max-iter must be >= 0");
      format_of(bae_out);
      const xxz::ModelParams p(bae_n, bae_eta);
      std::optional<xxz::BetheRootSet> seed;
      if (bae_state == "ground") {
        seed = xxz::ground_string_seed(p, xxz::StringBranch::boundary, bae_jitter.value_or(0.0), bae_seed);
      } else if (bae_state == "ground-alt") {
        if (bae_n % 2 == 0) throw UsageError("--state ground-alt requires odd --n");
        seed = xxz::ground_string_seed(p, xxz::StringBranch::imaginary_axis,
                                       bae_jitter.value_or(0.0), bae_seed);
      } else {
        if (bae_n < 3) throw UsageError("--state excited requires --n >= 3");
        seed = xxz::excited_string_seed(p, bae_jitter.value_or(1e-3));
      }
      xxz::SolveOptions so;
      so.tol = bae_tol;
      so.max_iter = bae_max_iter;
      so.jacobian = bae_jac == "fd" ? xxz::JacobianMode::finite_difference : xxz::JacobianMode::analytic;
      const xxz::SolveReport rep = xxz::solve(*seed, so);
      std::optional<xxz::EnergyValue> energy;
      if (rep.converged()) energy = xxz::energy_from_roots(rep.root_set);
      std::cerr << "status " << xxz::to_string(rep.status) << ", iterations " << rep.iterations
                << ", residual " << rep.final_residual;
      if (energy) std::cerr << ", energy " << std::setprecision(15) << energy->value;
      std::cerr << '\n';
      auto report_json = [&] {
        xxz::json j = xxz::to_json(rep);
        if (energy) j["energy"] = {{"value", energy->value}, {"imag_leakage", energy->imag_leakage}};
        return j;
      };
      emit(bae_out, [&](std::ostream& os) { xxz::write_roots_csv(os, rep); }, report_json);
      if (!bae_report.empty()) {
        std::ofstream f(bae_report);
        if (!f) throw UsageError("cannot open " + bae_report);
        f << report_json().dump(2) << '\n';
      }
      return rep.converged() ? kOk : kNumerical;
    }

    if (*tables) {
      format_of(tab_out);
      const auto ref = xxz::ReferenceTable::load();
      xxz::TableSummary summary;
      if (tab_id == 3) {
        if (tab_n_max < 2 || tab_n_max > 19) throw UsageError("--n-max must be in 2..19");
        xxz::Table3Options opt;
        opt.n_max = tab_n_max;
        const auto t = xxz::reproduce_table3(&ref, opt);
        summary = t.summary;
        emit(tab_out, [&](std::ostream& os) { xxz::write_table3_csv(os, t); },
             [&] {
               xxz::json rows = xxz::json::array();
               for (const auto& r : t.rows) {
                 rows.push_back({{"n_sites", r.n_sites}, {"eta", r.eta}, {"e_formula", r.e_formula},
                                 {"e_numeric", r.e_numeric}, {"delta", r.delta},
                                 {"method", xxz::to_string(r.method)},
                                 {"ref_value", r.ref_value ? xxz::json(*r.ref_value) : xxz::json()},
                                 {"abs_diff", r.abs_diff}, {"pass", r.pass},
                                 {"delta_bae", r.delta_bae ? xxz::json(*r.delta_bae) : xxz::json()}});
               }
               return xxz::json{{"summary", xxz::to_json(t.summary)}, {"rows", rows}};
             });
      } else {
        const auto t = xxz::reproduce_root_table(tab_id, ref);
        summary = t.summary;
        emit(tab_out, [&](std::ostream& os) { xxz::write_root_table_csv(os, t); },
             [&] {
               xxz::json rows = xxz::json::array();
               for (const auto& r : t.rows) {
                 rows.push_back({{"n_sites", r.n_sites}, {"eta", r.eta}, {"index_j", r.index_j},
                                 {"re_u", r.computed.real()}, {"im_u", r.computed.imag()},
                                 {"ref_re", r.ref.real()}, {"ref_im", r.ref.imag()},
                                 {"abs_diff", r.abs_diff}, {"pass", r.pass}});
               }
               return xxz::json{{"summary", xxz::to_json(t.summary)}, {"rows", rows}};
             });
      }
      const std::string s = xxz::to_json(summary).dump(2);
      if (tab_summary.empty()) {
        std::cerr << s << '\n';
      } else {
        std::ofstream f(tab_summary);
        if (!f) throw UsageError("cannot open " + tab_summary);
        f << s << '\n';
      }
      return summary.cells_passed == summary.cells_checked && summary.errors.empty() ? kOk
                                                                                     : kNumerical;
    }

    if (*gap) {
      if (!(gap_eta > 0.0)) throw UsageError("--eta must be > 0");
      if (gap_nmin < 3 || gap_nmax < gap_nmin || gap_nmax > 18) {
        throw UsageError("need 3 <= --n-min <= --n-max <= 18");
      }
      format_of(gap_out);
      const auto rows = xxz::gap_series(gap_eta, gap_nmin, gap_nmax);
      emit(gap_out, [&](std::ostream& os) { xxz::write_gap_csv(os, rows); },
           [&] {
             xxz::json a = xxz::json::array();
             for (const auto& r : rows) {
               a.push_back({{"n_sites", r.n_sites}, {"eta", r.eta}, {"gap_ed", r.gap_ed},
                            {"gap_formula", r.gap_formula}, {"gap_diff", r.gap_diff()},
                            {"e1_diff", r.e1_diff()}, {"cluster_size", r.cluster_size},
                            {"cluster_span", r.cluster_span}, {"ok", r.ok}});
             }
             return a;
           });
      for (const auto& r : rows) {
        if (!r.ok) return kNumerical;
      }
      return kOk;
    }

    if (*fit) {
      format_of(fit_out);
      std::ifstream in(fit_in);
      if (!in) throw UsageError("cannot open " + fit_in);
      const auto rows = xxz::read_series_csv(in, fit_col, fit_eta);
      std::optional<std::pair<int, int>> window;
      if (fit_nmin || fit_nmax) {
        int lo = fit_nmin.value_or(0), hi = fit_nmax.value_or(1 << 30);
        if (lo > hi) throw UsageError("--n-min exceeds --n-max");
        window = std::make_pair(lo, hi);
      }
      xxz::FitResult f;
      try {
        f = xxz::fit_exponential(rows, window);
      } catch (const std::domain_error& e) {
        throw UsageError(e.what());
      }
      std::cerr << "amplitude " << f.amplitude << ", rate " << f.rate << '\n';
      const std::string path = fit_out.empty() ? "" : fit_out;
      if (path.empty()) {
        std::cout << xxz::to_json(f).dump(2) << '\n';
      } else {
        emit(path, [&](std::ostream& os) { xxz::write_plot_data(os, rows); },
             [&] { return xxz::to_json(f); });
      }
      return kOk;
    }

    if (*vi) {
      if (vi_trials < 1) throw UsageError("--trials must be >= 1");
      if (vi_n > xxz::kMaxMonodromySites) {
        throw UsageError("--n must be <= " + std::to_string(xxz::kMaxMonodromySites));
      }
      format_of(vi_out);
      const xxz::ModelParams p(vi_n, vi_eta);
      const auto recs = xxz::verify_integrability(p, vi_trials, vi_seed);
      auto js = [&] {
        xxz::json a = xxz::json::array();
        for (const auto& r : recs) a.push_back(xxz::to_json(r));
        return a;
      };
      if (vi_out.empty()) {
        std::cout << js().dump(2) << '\n';
      } else {
        emit(vi_out,
             [&](std::ostream& os) {
               os << "check,n_sites,eta,residual,tolerance,pass\n";
               for (const auto& r : recs) {
                 os << r.check << ',' << r.n_sites << ',' << r.eta << ',' << r.residual << ','
                    << r.tolerance << ',' << (r.pass ? 1 : 0) << '\n';
               }
             },
             js);
      }
      for (const auto& r : recs) {
        if (!r.pass) return kNumerical;
      }
      return kOk;
    }

    if (*ising) {
      format_of(is_out);
      const auto etas = parse_list(is_etas);
      for (std::size_t i = 1; i < etas.size(); ++i) {
        if (!(etas[i] > etas[i - 1])) throw UsageError("--eta-list must be ascending");
      }
      const auto rows = xxz::ising_limit_scan(is_n, etas);
      emit(is_out, [&](std::ostream& os) { xxz::write_ising_csv(os, is_n, rows); },
           [&] {
             xxz::json a = xxz::json::array();
             for (const auto& r : rows) {
               a.push_back({{"eta", r.eta},
                            {"ground_discrepancy", r.ground_discrepancy},
                            {"excited_discrepancy", r.excited_discrepancy}});
             }
             return a;
           });
      return kOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const xxz::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}
