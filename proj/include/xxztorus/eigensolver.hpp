#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "xxztorus/hamiltonian.hpp"
#include "xxztorus/model.hpp"

namespace xxz {

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SpectrumMethod { dense, iterative };

inline std::string_view to_string(SpectrumMethod m) {
  return m == SpectrumMethod::dense ? "dense" : "iterative";
}

struct EigenOptions {
  double tol = 1e-10;           // relative to the spectral norm estimate
  int krylov_dim = 0;           // 0: min(dim, 6N + 40), capped at 64 for k = 1
  int block_size = 0;           // 0: 1 for k = 1, else 4
  int max_restarts = 400;
  std::uint64_t seed = kDefaultSeed;
  bool split_parity = true;     // solve the two parity blocks separately
};

struct SpectrumResult {
  ModelParams params;
  std::vector<double> energies;  // ascending
  SpectrumMethod method = SpectrumMethod::dense;
  double tolerance = 0.0;
  std::vector<double> residuals;  // iterative only, same order as energies
  int restarts = 0;
  long matvecs = 0;

  std::size_t count() const noexcept { return energies.size(); }
};

namespace detail {

inline std::vector<double> dense_eigenvalues(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed");
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

struct KrylovOutcome {
  std::vector<double> values;
  std::vector<double> residuals;
  int restarts = 0;
  long matvecs = 0;
};

// Orthonormalizes the columns of w against basis.leftCols(m) and against each
// other (classical Gram-Schmidt, applied twice). Returns the coupling block r
// with w_in = basis * h + w_out * r; h is accumulated into h_out. Columns that
// collapse are replaced by random vectors orthogonal to everything so far.
inline Eigen::MatrixXd orthonormalize_block(const Eigen::MatrixXd& basis, Eigen::Index m,
                                            Eigen::MatrixXd& w, Eigen::MatrixXd& h_out,
                                            double scale, std::mt19937_64& rng) {
  const Eigen::Index b = w.cols();
  h_out = Eigen::MatrixXd::Zero(m, b);
  for (int pass = 0; pass < 2 && m > 0; ++pass) {
    const Eigen::MatrixXd h = basis.leftCols(m).transpose() * w;
    w.noalias() -= basis.leftCols(m) * h;
    h_out += h;
  }
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(b, b);
  std::normal_distribution<double> g(0.0, 1.0);
  for (Eigen::Index c = 0; c < b; ++c) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index p = 0; p < c; ++p) {
        const double d = w.col(p).dot(w.col(c));
        w.col(c) -= d * w.col(p);
        r(p, c) += d;
      }
    }
    double nrm = w.col(c).norm();
    if (nrm > 1e-13 * scale) {
      r(c, c) = nrm;
      w.col(c) /= nrm;
      continue;
    }
    // Rank loss: the dropped component is below the convergence floor.
    for (int attempt = 0; attempt < 5; ++attempt) {
      for (auto& x : w.col(c)) x = g(rng);
      for (int pass = 0; pass < 2; ++pass) {
        if (m > 0) w.col(c) -= basis.leftCols(m) * (basis.leftCols(m).transpose() * w.col(c));
        for (Eigen::Index p = 0; p < c; ++p) w.col(c) -= w.col(p).dot(w.col(c)) * w.col(p);
      }
      nrm = w.col(c).norm();
      if (nrm > 1e-8) break;
    }
    w.col(c) /= nrm;
    r(c, c) = 0.0;
  }
  return r;
}

// Thick-restart block Lanczos with full reorthogonalization (block Krylov-Schur).
inline KrylovOutcome block_krylov_schur(const OperatorHandle& op, int k, int mmax, int b,
                                        double tol, int max_restarts, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(op.dimension());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);

  Eigen::MatrixXd basis(n, mmax + b);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(mmax + b, mmax + b);
  Eigen::MatrixXd w(n, b);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = g(rng);
  Eigen::MatrixXd h;
  const double scale0 = op.norm_bound();
  orthonormalize_block(basis, 0, w, h, 1.0, rng);
  basis.leftCols(b) = w;
  Eigen::Index m = b;

  KrylovOutcome out;
  for (int restart = 0; restart <= max_restarts; ++restart) {
    Eigen::MatrixXd r;
    while (true) {
      for (Eigen::Index c = 0; c < b; ++c) {
        Eigen::VectorXd y = op.apply(Eigen::VectorXd(basis.col(m - b + c)));
        w.col(c) = y;
      }
      out.matvecs += b;
      r = orthonormalize_block(basis, m, w, h, scale0, rng);
      t.block(0, m - b, m, b) = h;
      t.block(m - b, 0, b, m) = h.transpose();
      if (m + b > mmax) break;
      basis.middleCols(m, b) = w;
      t.block(m, m - b, b, b) = r;
      t.block(m - b, m, b, b) = r.transpose();
      m += b;
    }

    const Eigen::MatrixXd tm = 0.5 * (t.topLeftCorner(m, m) + t.topLeftCorner(m, m).transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tm);
    const Eigen::VectorXd& theta = es.eigenvalues();
    const Eigen::MatrixXd& y = es.eigenvectors();
    const double norm_est = std::max({1.0, std::abs(theta[0]), std::abs(theta[m - 1])});
    const Eigen::MatrixXd coupling = r * y.bottomRows(b);  // b x m

    bool done = true;
    out.values.assign(k, 0.0);
    out.residuals.assign(k, 0.0);
    for (int i = 0; i < k; ++i) {
      out.values[i] = theta[i];
      out.residuals[i] = coupling.col(i).norm();
      if (out.residuals[i] > tol * norm_est) done = false;
    }
    out.restarts = restart;
    if (done) return out;

    const Eigen::Index keep =
        std::min<Eigen::Index>(std::max<Eigen::Index>(k + b, mmax / 2), mmax - 2 * b);
    const Eigen::MatrixXd v_new = basis.leftCols(m) * y.leftCols(keep);
    basis.leftCols(keep) = v_new;
    basis.middleCols(keep, b) = w;
    t.setZero();
    for (Eigen::Index i = 0; i < keep; ++i) t(i, i) = theta[i];
    t.block(keep, 0, b, keep) = coupling.leftCols(keep);
    t.block(0, keep, keep, b) = coupling.leftCols(keep).transpose();
    m = keep + b;
  }
  std::ostringstream msg;
  msg << "block Krylov-Schur did not converge after " << max_restarts
      << " restarts; worst residual " << *std::max_element(out.residuals.begin(), out.residuals.end());
  throw ConvergenceError(msg.str());
}

}  // namespace detail

/// The k lowest eigenvalues of op, ascending.
///
/// Dense operators return the full spectrum. Matrix-free operators use block
/// Krylov-Schur on each parity block; blocks of width 4 keep degenerate copies.
inline SpectrumResult lowest_eigenvalues(const OperatorHandle& op, int k,
                                         const EigenOptions& opt = {}) {
  if (k < 1 || static_cast<std::size_t>(k) > op.dimension()) {
    throw std::invalid_argument("lowest_eigenvalues: need 1 <= k <= dimension");
  }
  if (!(opt.tol > 0.0)) throw std::invalid_argument("lowest_eigenvalues: tol must be > 0");
  SpectrumResult res{op.params(), {}, SpectrumMethod::dense, opt.tol, {}, 0, 0};
  const ModelParams& p = op.params();
  const bool split = opt.split_parity && !op.sector();

  if (op.mode() == OperatorMode::dense) {
    if (split) {
      for (Parity s : {Parity::even, Parity::odd}) {
        const auto e = detail::dense_eigenvalues(build_hamiltonian(p, OperatorMode::dense, s).to_dense());
        res.energies.insert(res.energies.end(), e.begin(), e.end());
      }
    } else {
      res.energies = detail::dense_eigenvalues(op.to_dense());
    }
    std::sort(res.energies.begin(), res.energies.end());
    return res;
  }

  res.method = SpectrumMethod::iterative;
  const int b = opt.block_size > 0 ? opt.block_size : (k == 1 ? 1 : 4);
  auto solve_block = [&](const OperatorHandle& block, int kk, std::uint64_t seed) {
    const auto dim = static_cast<long>(block.dimension());
    kk = static_cast<int>(std::min<long>(kk, dim));
    long mmax = opt.krylov_dim > 0 ? opt.krylov_dim : 6L * p.n_sites() + 40;
    if (opt.krylov_dim <= 0 && kk == 1) mmax = std::min<long>(mmax, 64);
    mmax = std::max<long>(mmax, kk + 3L * b);
    mmax = (mmax / b) * b;
    if (dim <= mmax + b) {
      // The Krylov space would cover the whole block.
      auto e = detail::dense_eigenvalues(block.to_dense());
      e.resize(static_cast<std::size_t>(kk));
      return detail::KrylovOutcome{e, std::vector<double>(e.size(), 0.0), 0, 0};
    }
    return detail::block_krylov_schur(block, kk, static_cast<int>(mmax), b, opt.tol,
                                      opt.max_restarts, seed);
  };

  std::vector<std::pair<double, double>> merged;
  auto absorb = [&](const detail::KrylovOutcome& o) {
    for (std::size_t i = 0; i < o.values.size(); ++i) merged.emplace_back(o.values[i], o.residuals[i]);
    res.restarts = std::max(res.restarts, o.restarts);
    res.matvecs += o.matvecs;
  };
  if (split) {
    absorb(solve_block(build_hamiltonian(p, OperatorMode::matrix_free, Parity::even), k, opt.seed));
    absorb(solve_block(build_hamiltonian(p, OperatorMode::matrix_free, Parity::odd), k, opt.seed + 1));
  } else {
    absorb(solve_block(op, k, opt.seed));
  }
  std::sort(merged.begin(), merged.end());
  merged.resize(static_cast<std::size_t>(k));
  for (auto& [e, r] : merged) {
    res.energies.push_back(e);
    res.residuals.push_back(r);
  }
  return res;
}

/// Convenience: builds the operator with the default mode for N (dense up to 12).
inline SpectrumResult lowest_eigenvalues(const ModelParams& p, int k,
                                         std::optional<OperatorMode> mode = std::nullopt,
                                         const EigenOptions& opt = {}) {
  const OperatorMode m =
      mode.value_or(p.n_sites() <= 12 ? OperatorMode::dense : OperatorMode::matrix_free);
  if (m == OperatorMode::dense) {
    // Avoid assembling the full 2^N matrix; the parity blocks are built on demand.
    if (p.n_sites() > kMaxDenseSites) {
      throw std::out_of_range("lowest_eigenvalues: N exceeds the dense limit");
    }
    SpectrumResult res{p, {}, SpectrumMethod::dense, opt.tol, {}, 0, 0};
    for (Parity s : {Parity::even, Parity::odd}) {
      const auto e = detail::dense_eigenvalues(build_hamiltonian(p, OperatorMode::dense, s).to_dense());
      res.energies.insert(res.energies.end(), e.begin(), e.end());
    }
    std::sort(res.energies.begin(), res.energies.end());
    if (k < 1 || static_cast<std::size_t>(k) > res.energies.size()) {
      throw std::invalid_argument("lowest_eigenvalues: need 1 <= k <= dimension");
    }
    return res;
  }
  return lowest_eigenvalues(build_hamiltonian(p, OperatorMode::matrix_free), k, opt);
}

struct ClusterReport {
  std::size_t size = 0;
  double span = 0.0;          // top of cluster minus lowest level
  double separating_gap = 0;  // first level above the cluster minus lowest level
  double threshold = 0.0;     // splitting criterion used
};

/// Splits the low spectrum at the first spacing above 0.5 * gap_formula.
inline ClusterReport low_cluster(const SpectrumResult& spec, const ModelParams& p) {
  const auto need = static_cast<std::size_t>(2 * p.n_sites() + 2);
  if (spec.energies.size() < need) {
    throw std::invalid_argument("low_cluster: need at least 2N+2 eigenvalues, have " +
                                std::to_string(spec.energies.size()));
  }
  const double threshold = 0.5 * gap_formula(p);
  const auto& e = spec.energies;
  for (std::size_t i = 0; i + 1 < e.size(); ++i) {
    if (e[i + 1] - e[i] > threshold) {
      return {i + 1, e[i] - e[0], e[i + 1] - e[0], threshold};
    }
  }
  throw std::runtime_error("low_cluster: no spacing above threshold in the converged window");
}

inline void write_spectrum_csv(std::ostream& os, const SpectrumResult& s) {
  os << "n_sites,eta,index,energy,method,tolerance\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < s.energies.size(); ++i) {
    os << s.params.n_sites() << ',' << s.params.eta() << ',' << i << ',' << s.energies[i]
       << ',' << to_string(s.method) << ',' << s.tolerance << '\n';
  }
}

}  // namespace xxz
