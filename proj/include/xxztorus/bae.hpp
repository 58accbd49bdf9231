#pragma once

// Inhomogeneous Bethe Ansatz equations: residual, damped Newton solver, energy.
//
//   L_j = e^{iu_j}  prod_l sin(u_j - u_l + i eta) / sin(u_j + i eta/2)^N
//   R_j = e^{-iu_j} prod_l sin(u_j - u_l - i eta) / sin(u_j - i eta/2)^N
//   I_j = 2i e^{-N eta/2} sin(u_j - sum_l u_l)
//   r_j = (L_j - R_j - I_j) / S_j,  S_j = max(|L_j|, |R_j|, |I_j|, 1)
//
// Roots are carried as exact anchors plus deviations (see RootAnchor), and all
// differences u_j - u_l are formed anchor-by-anchor so that string neighbours
// keep deviations far below the resolution of |u|.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "xxztorus/log_polar.hpp"
#include "xxztorus/model.hpp"
#include "xxztorus/parallel.hpp"

namespace xxz {

/// Minimum |sin(u_j +- i eta/2)| accepted by residual and energy evaluation.
inline constexpr double kPoleDistance = 1e-12;

class PoleProximityError : public std::domain_error {
 public:
  PoleProximityError(std::size_t root, const std::string& what)
      : std::domain_error(what), root_(root) {}
  std::size_t root() const noexcept { return root_; }

 private:
  std::size_t root_;
};

struct BaeResidual {
  std::vector<cplx> r;
  std::vector<double> scale_factors;      // S_j; may be +inf when log_scale overflows
  std::vector<double> log_scale_factors;  // log S_j >= 0
  double inf_norm = 0.0;
};

struct EnergyValue {
  double value = 0.0;
  double imag_leakage = 0.0;
};

namespace detail {

class BaeSystem {
 public:
  BaeSystem(const ModelParams& p, const std::vector<RootAnchor>& anchors)
      : n_(p.n_sites()), eta_(p.eta()), anchors_(anchors) {
    for (const auto& a : anchors_) {
      center_sum_ += a.center;
      level_sum_ += a.level;
    }
  }

  std::size_t size() const { return anchors_.size(); }

  // u_j - u_l + shift * i eta, formed without cancellation between anchors.
  cplx pair_arg(std::size_t j, std::size_t l, double shift, const std::vector<cplx>& d) const {
    return cplx(anchors_[j].center - anchors_[l].center,
                (anchors_[j].level - anchors_[l].level + shift) * eta_) +
           (d[j] - d[l]);
  }

  // u_j + half * i eta / 2.
  cplx half_shift(std::size_t j, double half, const std::vector<cplx>& d) const {
    return cplx(anchors_[j].center, (anchors_[j].level + 0.5 * half) * eta_) + d[j];
  }

  cplx root(std::size_t j, const std::vector<cplx>& d) const {
    return cplx(anchors_[j].center, anchors_[j].level * eta_) + d[j];
  }

  /// Residual (and optionally the holomorphic Jacobian dr_j/du_k at frozen S_j).
  /// Returns the first root closer than kPoleDistance to a pole, or -1.
  int evaluate(const std::vector<cplx>& d, std::vector<cplx>& r, std::vector<double>& log_scale,
               Eigen::MatrixXcd* jac, const std::vector<double>* frozen_scale = nullptr) const {
    const std::size_t n = size();
    const double nn = static_cast<double>(n_);
    const double pole_log = std::log(kPoleDistance);
    r.assign(n, cplx(0.0, 0.0));
    log_scale.assign(n, 0.0);
    if (jac) jac->setZero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));

    cplx dsum(0.0, 0.0);
    for (const auto& x : d) dsum += x;
    int pole = -1;

    std::vector<LogPolar> fa(n), fb(n), pre(n + 1), suf(n + 1);
    for (std::size_t j = 0; j < n; ++j) {
      const cplx u = root(j, d);
      const cplx za = half_shift(j, 1.0, d);
      const cplx zb = half_shift(j, -1.0, d);
      const LogPolar den_a = log_sin(za);
      const LogPolar den_b = log_sin(zb);
      if ((den_a.log_abs <= pole_log || den_b.log_abs <= pole_log) && pole < 0) {
        pole = static_cast<int>(j);
      }

      LogPolar prod_a = LogPolar::one();
      LogPolar prod_b = LogPolar::one();
      for (std::size_t l = 0; l < n; ++l) {
        fa[l] = log_sin(pair_arg(j, l, 1.0, d));
        fb[l] = log_sin(pair_arg(j, l, -1.0, d));
        prod_a = prod_a * fa[l];
        prod_b = prod_b * fb[l];
      }
      const LogPolar base_l = LogPolar{-u.imag(), u.real()} / pow(den_a, n_);
      const LogPolar base_r = LogPolar{u.imag(), -u.real()} / pow(den_b, n_);
      const LogPolar big_l = base_l * prod_a;
      const LogPolar big_r = base_r * prod_b;

      const cplx w = cplx(anchors_[j].center - center_sum_,
                          (anchors_[j].level - level_sum_) * eta_) +
                     (d[j] - dsum);
      const double pref = detail::kLn2 - nn * eta_ / 2.0;
      const LogPolar sw = log_sin(w);
      const LogPolar big_i{pref + sw.log_abs, std::numbers::pi / 2 + sw.phase};

      double m = 0.0;
      if (frozen_scale) {
        m = (*frozen_scale)[j];
      } else {
        for (double v : {big_l.log_abs, big_r.log_abs, big_i.log_abs}) {
          if (v > m) m = v;
        }
      }
      log_scale[j] = m;
      const cplx ls = big_l.scaled(m);
      const cplx rs = big_r.scaled(m);
      r[j] = ls - rs - big_i.scaled(m);
      if (!jac) continue;

      // Products with one factor removed, via prefix/suffix sums of logs.
      std::vector<LogPolar> excl_a(n), excl_b(n);
      pre[0] = LogPolar::one();
      for (std::size_t l = 0; l < n; ++l) pre[l + 1] = pre[l] * fa[l];
      suf[n] = LogPolar::one();
      for (std::size_t l = n; l-- > 0;) suf[l] = suf[l + 1] * fa[l];
      for (std::size_t k = 0; k < n; ++k) excl_a[k] = pre[k] * suf[k + 1];
      pre[0] = LogPolar::one();
      for (std::size_t l = 0; l < n; ++l) pre[l + 1] = pre[l] * fb[l];
      suf[n] = LogPolar::one();
      for (std::size_t l = n; l-- > 0;) suf[l] = suf[l + 1] * fb[l];
      for (std::size_t k = 0; k < n; ++k) excl_b[k] = pre[k] * suf[k + 1];

      const LogPolar cw = log_cos(w);
      const cplx c_i = LogPolar{pref + cw.log_abs, std::numbers::pi / 2 + cw.phase}.scaled(m);
      const cplx i1(0.0, 1.0);
      cplx diag = ls * (i1 - nn * stable_cot(za)) - rs * (-i1 - nn * stable_cot(zb));
      const auto jj = static_cast<Eigen::Index>(j);
      for (std::size_t k = 0; k < n; ++k) {
        if (k == j) continue;
        const cplx tl = (base_l * excl_a[k] * log_cos(pair_arg(j, k, 1.0, d))).scaled(m);
        const cplx tr = (base_r * excl_b[k] * log_cos(pair_arg(j, k, -1.0, d))).scaled(m);
        diag += tl - tr;
        (*jac)(jj, static_cast<Eigen::Index>(k)) = -tl + tr + c_i;
      }
      (*jac)(jj, jj) = diag;
    }
    return pole;
  }

 private:
  int n_;
  double eta_;
  std::vector<RootAnchor> anchors_;
  double center_sum_ = 0.0;
  double level_sum_ = 0.0;
};

inline double inf_norm(const std::vector<cplx>& r) {
  double m = 0.0;
  for (const auto& x : r) {
    const double a = std::abs(x);
    if (!std::isfinite(a)) return std::numeric_limits<double>::infinity();
    m = std::max(m, a);
  }
  return m;
}

}  // namespace detail

/// Scaled residual of every equation. Throws PoleProximityError when a root
/// sits within kPoleDistance of a zero of sin(u_j +- i eta/2).
inline BaeResidual bae_residual(const BetheRootSet& set) {
  detail::BaeSystem sys(set.params(), set.anchors());
  BaeResidual out;
  const int pole = sys.evaluate(set.deviations(), out.r, out.log_scale_factors, nullptr);
  if (pole >= 0) {
    throw PoleProximityError(static_cast<std::size_t>(pole),
                             "bae_residual: root " + std::to_string(pole) +
                                 " is within the pole distance of sin(u +- i eta/2)");
  }
  for (double ls : out.log_scale_factors) out.scale_factors.push_back(std::exp(ls));
  out.inf_norm = detail::inf_norm(out.r);
  return out;
}

/// Energy E = 2i sinh(eta) sum_j [cot(u_j + i eta/2) - cot(u_j - i eta/2)] - N cosh(eta) - 2 sinh(eta).
inline EnergyValue energy_from_roots(const BetheRootSet& set) {
  const ModelParams& p = set.params();
  const double eta = p.eta();
  const double pole_log = std::log(kPoleDistance);
  cplx sum(0.0, 0.0);
  for (std::size_t j = 0; j < set.size(); ++j) {
    const RootAnchor& a = set.anchors()[j];
    const cplx za = cplx(a.center, (a.level + 0.5) * eta) + set.deviations()[j];
    const cplx zb = cplx(a.center, (a.level - 0.5) * eta) + set.deviations()[j];
    if (log_sin(za).log_abs <= pole_log || log_sin(zb).log_abs <= pole_log) {
      throw PoleProximityError(j, "energy_from_roots: root " + std::to_string(j) +
                                      " is at a pole of cot(u +- i eta/2)");
    }
    sum += stable_cot(za) - stable_cot(zb);
  }
  const cplx e = cplx(0.0, 2.0 * std::sinh(eta)) * sum -
                 static_cast<double>(p.n_sites()) * std::cosh(eta) - 2.0 * std::sinh(eta);
  return {e.real(), std::abs(e.imag())};
}

/// Energy of the set minus the energy of its anchors (zero deviations),
/// accumulated from cot increments so exponentially small shifts survive.
/// For the ideal boundary string the anchor energy equals ground_energy_formula,
/// so ground_energy_formula - E = -shift.real().
inline cplx energy_shift_from_anchors(const BetheRootSet& set) {
  const double eta = set.params().eta();
  cplx sum(0.0, 0.0);
  for (std::size_t j = 0; j < set.size(); ++j) {
    const RootAnchor& a = set.anchors()[j];
    const cplx d = set.deviations()[j];
    sum += cot_increment(cplx(a.center, (a.level + 0.5) * eta), d) -
           cot_increment(cplx(a.center, (a.level - 0.5) * eta), d);
  }
  return cplx(0.0, 2.0 * std::sinh(eta)) * sum;
}

// ---------------------------------------------------------------------------
// Newton solver
// ---------------------------------------------------------------------------

enum class JacobianMode { analytic, finite_difference };

enum class SolveStatus {
  converged,
  max_iterations,
  line_search_failed,
  singular_jacobian,
  pole_proximity,
  coincident_roots  // residual converged but two roots coincide; not an eigenstate
};

inline std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iterations: return "max-iterations";
    case SolveStatus::line_search_failed: return "line-search-failed";
    case SolveStatus::singular_jacobian: return "singular-jacobian";
    case SolveStatus::pole_proximity: return "pole-proximity";
    case SolveStatus::coincident_roots: return "coincident-roots";
  }
  return "unknown";
}

inline std::string_view to_string(JacobianMode m) {
  return m == JacobianMode::analytic ? "analytic" : "finite-difference";
}

struct SolveOptions {
  double tol = 1e-12;
  int max_iter = 200;
  int max_halvings = 30;
  JacobianMode jacobian = JacobianMode::analytic;
  double fd_step = 1e-7;  // relative step, scaled by 1 + |u_k|
  double min_separation = 1e-6;  // smaller pairwise root distances are rejected
};

struct SolveReport {
  SolveStatus status = SolveStatus::max_iterations;
  int iterations = 0;
  double final_residual = std::numeric_limits<double>::infinity();
  BetheRootSet root_set;
  std::vector<double> root_residuals;  // |r_j| in root_set order
  double jacobian_condition_estimate = std::numeric_limits<double>::infinity();
  double conjugation_defect = 0.0;
  double min_root_separation = std::numeric_limits<double>::infinity();
  SolveOptions options;

  bool converged() const noexcept { return status == SolveStatus::converged; }
};

namespace detail {

// Real 2N x 2N Jacobian of (Re r, Im r) with respect to (Re d, Im d).
inline Eigen::MatrixXd realify(const Eigen::MatrixXcd& j) {
  const Eigen::Index n = j.rows();
  Eigen::MatrixXd out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = j.real();
  out.topRightCorner(n, n) = -j.imag();
  out.bottomLeftCorner(n, n) = j.imag();
  out.bottomRightCorner(n, n) = j.real();
  return out;
}

inline Eigen::MatrixXd fd_jacobian(const BaeSystem& sys, const std::vector<cplx>& d,
                                   const std::vector<cplx>& r0,
                                   const std::vector<double>& scale, double step) {
  const std::size_t n = d.size();
  Eigen::MatrixXd out(2 * n, 2 * n);
  std::vector<cplx> r;
  std::vector<double> ls;
  for (std::size_t k = 0; k < 2 * n; ++k) {
    std::vector<cplx> dp = d;
    const std::size_t root = k % n;
    const double h = step * (1.0 + std::abs(sys.root(root, d)));
    dp[root] += k < n ? cplx(h, 0.0) : cplx(0.0, h);
    sys.evaluate(dp, r, ls, nullptr, &scale);
    for (std::size_t j = 0; j < n; ++j) {
      const cplx diff = (r[j] - r0[j]) / h;
      out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = diff.real();
      out(static_cast<Eigen::Index>(j + n), static_cast<Eigen::Index>(k)) = diff.imag();
    }
  }
  return out;
}

// Wraps anchor centers into [-pi/2, pi/2) and orders roots by descending
// imaginary part (ties by real part).
inline BetheRootSet canonicalize(const BetheRootSet& s) {
  std::vector<RootAnchor> a = s.anchors();
  for (auto& x : a) x.center = wrap_real_part(x.center);
  BetheRootSet wrapped(s.params(), s.label(), s.seed_kind(), a, s.deviations());
  std::vector<std::size_t> order(s.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const cplx ux = wrapped.root(x);
    const cplx uy = wrapped.root(y);
    if (ux.imag() != uy.imag()) return ux.imag() > uy.imag();
    return ux.real() < uy.real();
  });
  std::vector<RootAnchor> sa;
  std::vector<cplx> sd;
  for (std::size_t i : order) {
    sa.push_back(a[i]);
    sd.push_back(s.deviations()[i]);
  }
  return {s.params(), s.label(), s.seed_kind(), std::move(sa), std::move(sd)};
}

}  // namespace detail

/// Damped Newton iteration on the 2N real coordinates of the deviations.
///
/// The analytic Jacobian is the default; finite differences are available for
/// cross-checking. Backtracking halves the step until the residual inf-norm
/// decreases (Armijo constant 1e-4).
inline SolveReport solve(const BetheRootSet& seed, const SolveOptions& opt = {}) {
  if (!(opt.tol > 0.0)) throw std::invalid_argument("solve: tol must be > 0");
  if (opt.max_iter < 0) throw std::invalid_argument("solve: max_iter must be >= 0");

  detail::BaeSystem sys(seed.params(), seed.anchors());
  const std::size_t n = seed.size();
  std::vector<cplx> d = seed.deviations();
  std::vector<cplx> r, r_trial;
  std::vector<double> scale, scale_trial;
  Eigen::MatrixXcd jc;

  SolveReport rep{SolveStatus::max_iterations, 0, 0.0, seed, {}, 0.0, 0.0, std::numeric_limits<double>::infinity(), opt};

  int pole = sys.evaluate(d, r, scale, opt.jacobian == JacobianMode::analytic ? &jc : nullptr);
  double phi = detail::inf_norm(r);
  int it = 0;
  for (;; ++it) {
    if (phi <= opt.tol) {
      rep.status = SolveStatus::converged;
      break;
    }
    if (it >= opt.max_iter) {
      rep.status = SolveStatus::max_iterations;
      break;
    }
    Eigen::MatrixXd jr = opt.jacobian == JacobianMode::analytic
                             ? detail::realify(jc)
                             : detail::fd_jacobian(sys, d, r, scale, opt.fd_step);
    Eigen::VectorXd f(2 * n);
    for (std::size_t j = 0; j < n; ++j) {
      f[static_cast<Eigen::Index>(j)] = r[j].real();
      f[static_cast<Eigen::Index>(j + n)] = r[j].imag();
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jr);
    const double rc = lu.rcond();
    rep.jacobian_condition_estimate = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    const Eigen::VectorXd step = lu.solve(-f);
    if (!(rc > 0.0) || !step.allFinite()) {
      rep.status = SolveStatus::singular_jacobian;
      break;
    }

    double t = 1.0;
    bool accepted = false;
    std::vector<cplx> trial(n);
    for (int h = 0; h <= opt.max_halvings; ++h, t *= 0.5) {
      for (std::size_t j = 0; j < n; ++j) {
        trial[j] = d[j] + t * cplx(step[static_cast<Eigen::Index>(j)],
                                   step[static_cast<Eigen::Index>(j + n)]);
      }
      sys.evaluate(trial, r_trial, scale_trial, nullptr);
      const double phi_trial = detail::inf_norm(r_trial);
      if (phi_trial <= (1.0 - 1e-4 * t) * phi) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      rep.status = SolveStatus::line_search_failed;
      break;
    }
    d = trial;
    pole = sys.evaluate(d, r, scale, opt.jacobian == JacobianMode::analytic ? &jc : nullptr);
    phi = detail::inf_norm(r);
  }

  rep.iterations = it;
  rep.final_residual = phi;
  if (rep.status == SolveStatus::converged && pole >= 0) rep.status = SolveStatus::pole_proximity;

  BetheRootSet result = detail::canonicalize(seed.with_deviations(d));
  {
    detail::BaeSystem final_sys(result.params(), result.anchors());
    std::vector<cplx> rr;
    std::vector<double> ls;
    final_sys.evaluate(result.deviations(), rr, ls, nullptr);
    for (const auto& x : rr) rep.root_residuals.push_back(std::abs(x));
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t l = j + 1; l < n; ++l) {
      rep.min_root_separation =
          std::min(rep.min_root_separation, periodic_distance(result.root(j), result.root(l)));
    }
  }
  if (rep.status == SolveStatus::converged && rep.min_root_separation < opt.min_separation) {
    rep.status = SolveStatus::coincident_roots;
  }
  result.set_residual_inf_norm(phi);
  rep.conjugation_defect = conjugation_defect(result);
  rep.root_set = std::move(result);
  return rep;
}

// ---------------------------------------------------------------------------
// Near-degenerate states
// ---------------------------------------------------------------------------

struct MultiStartOptions {
  SolveOptions solve;
  double jitter = 1e-3;
  std::uint64_t seed = kDefaultSeed;
  double dedup_tol = 1e-6;
  double match_tol = 1e-6;
  std::vector<double> cluster;  // exact-diag cluster levels to match against
  unsigned threads = 0;         // 0: thread_count()
};

struct NearDegenerateSolution {
  SolveReport report;
  EnergyValue energy;
  std::optional<std::size_t> cluster_index;  // nearest cluster level
  double cluster_distance = std::numeric_limits<double>::infinity();
  bool in_cluster = false;
};

struct MultiStartResult {
  std::vector<NearDegenerateSolution> solutions;  // distinct converged sets
  int attempted = 0;
  int converged = 0;
  int duplicates = 0;
};

/// True when the root multisets agree root-by-root (modulo pi in the real part).
inline bool same_root_set(const BetheRootSet& a, const BetheRootSet& b, double tol) {
  if (a.size() != b.size()) return false;
  const auto ra = a.roots();
  const auto rb = b.roots();
  std::vector<bool> used(rb.size(), false);
  for (cplx u : ra) {
    bool found = false;
    for (std::size_t k = 0; k < rb.size(); ++k) {
      if (!used[k] && periodic_distance(u, rb[k]) <= tol) {
        used[k] = true;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

/// Seed for start s: an N-string at a real part drawn from the lattice
/// -pi/2 + k pi / (2N), plus conjugation-symmetric jitter.
inline BetheRootSet near_degenerate_seed(const ModelParams& p, int start, double jitter,
                                         std::uint64_t seed) {
  const int n = p.n_sites();
  std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                   static_cast<std::uint32_t>(start)};
  std::mt19937_64 rng(ss);
  std::uniform_int_distribution<int> pick(0, 2 * n - 1);
  int k = pick(rng);
  // Even N: the center 0 combined with half-integer levels puts a root on a pole.
  while (n % 2 == 0 && k == n) k = pick(rng);
  return shifted_string_seed(p, k * kPi / (2.0 * n), jitter, rng());
}

inline MultiStartResult multi_start_near_degenerate(const ModelParams& p, int n_starts,
                                                    const MultiStartOptions& opt = {}) {
  if (n_starts < 0) throw std::invalid_argument("multi_start_near_degenerate: n_starts < 0");
  MultiStartResult out;
  out.attempted = n_starts;
  const unsigned workers = opt.threads ? opt.threads : thread_count();
  auto reports = parallel_map<SolveReport>(
      static_cast<std::size_t>(n_starts),
      [&](std::size_t s) {
        return solve(near_degenerate_seed(p, static_cast<int>(s), opt.jitter, opt.seed), opt.solve);
      },
      workers);

  for (auto& rep : reports) {
    if (!rep.converged()) continue;
    ++out.converged;
    bool dup = false;
    for (const auto& sol : out.solutions) {
      if (same_root_set(sol.report.root_set, rep.root_set, opt.dedup_tol)) {
        dup = true;
        break;
      }
    }
    if (dup) {
      ++out.duplicates;
      continue;
    }
    NearDegenerateSolution sol{rep, energy_from_roots(rep.root_set), std::nullopt,
                               std::numeric_limits<double>::infinity(), false};
    for (std::size_t i = 0; i < opt.cluster.size(); ++i) {
      const double dist = std::abs(sol.energy.value - opt.cluster[i]);
      if (dist < sol.cluster_distance) {
        sol.cluster_distance = dist;
        sol.cluster_index = i;
      }
    }
    sol.in_cluster = sol.cluster_index && sol.cluster_distance <= opt.match_tol;
    out.solutions.push_back(std::move(sol));
  }
  return out;
}

inline void write_roots_csv(std::ostream& os, const SolveReport& rep, bool header = true) {
  const BetheRootSet& s = rep.root_set;
  if (header) os << "n_sites,eta,label,index_j,re_u,im_u,residual_abs,seed_kind\n";
  os << std::setprecision(17);
  for (std::size_t j = 0; j < s.size(); ++j) {
    const cplx u = s.root(j);
    os << s.params().n_sites() << ',' << s.params().eta() << ',' << to_string(s.label()) << ','
       << j + 1 << ',' << u.real() << ',' << u.imag() << ','
       << (j < rep.root_residuals.size() ? rep.root_residuals[j] : 0.0) << ','
       << to_string(s.seed_kind()) << '\n';
  }
}

}  // namespace xxz
