#pragma once

// Model parameters, closed-form energies and string-hypothesis seeds for the
// ferromagnetic spin-1/2 XXZ chain with a sigma^x-twisted boundary.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace xxz {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kHalfPi = std::numbers::pi / 2.0;

/// Default seed for every randomized procedure in the library.
inline constexpr std::uint64_t kDefaultSeed = 20180101;

class ModelParams {
 public:
  ModelParams(int n_sites, double eta) : n_sites_(n_sites), eta_(eta) {
    if (n_sites < 2) {
      throw std::invalid_argument("ModelParams: n_sites must be >= 2, got " +
                                  std::to_string(n_sites));
    }
    if (!std::isfinite(eta) || !(eta > 0.0)) {
      throw std::invalid_argument("ModelParams: eta must be finite and > 0");
    }
  }

  int n_sites() const noexcept { return n_sites_; }
  double eta() const noexcept { return eta_; }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  int n_sites_;
  double eta_;
};

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

/// Energy of the ideal N-string: -N cosh(eta) - 2 sinh(eta) + 4 sinh(eta) tanh(N eta / 2).
inline double ground_energy_formula(const ModelParams& p) {
  const double n = p.n_sites();
  const double eta = p.eta();
  return -n * std::cosh(eta) - 2.0 * std::sinh(eta) +
         4.0 * std::sinh(eta) * std::tanh(n * eta / 2.0);
}

/// Ground energy of the periodic chain, -N cosh(eta).
inline double periodic_ground_energy(const ModelParams& p) {
  return -static_cast<double>(p.n_sites()) * std::cosh(p.eta());
}

/// Finite-N twisted boundary energy, ground_energy_formula - periodic_ground_energy.
inline double twisted_boundary_energy(const ModelParams& p) {
  const double eta = p.eta();
  return -2.0 * std::sinh(eta) +
         4.0 * std::sinh(eta) * std::tanh(p.n_sites() * eta / 2.0);
}

inline double twisted_boundary_energy_limit(double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be > 0");
  return 2.0 * std::sinh(eta);
}

/// Energy of an (N-1)-string plus one real root.
inline double excited_energy_formula(const ModelParams& p) {
  const double n = p.n_sites();
  const double eta = p.eta();
  const double s = std::sinh(eta);
  return -n * std::cosh(eta) - 2.0 * s + 4.0 * s * std::tanh((n - 1.0) * eta / 2.0) +
         4.0 * s * std::tanh(eta / 2.0);
}

inline double gap_formula(const ModelParams& p) {
  const double n = p.n_sites();
  const double eta = p.eta();
  const double s = 4.0 * std::sinh(eta);
  return s * std::tanh(eta / 2.0) + s * std::tanh((n - 1.0) * eta / 2.0) -
         s * std::tanh(n * eta / 2.0);
}

inline double gap_limit(double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be > 0");
  return 4.0 * std::sinh(eta) * std::tanh(eta / 2.0);
}

/// Ising-limit ground energy in units of cosh(eta).
inline double ising_limit_ground(const ModelParams& p) { return -p.n_sites() + 2.0; }

/// Ising-limit lowest excitation in units of cosh(eta).
inline double ising_limit_excited(const ModelParams& p) { return -p.n_sites() + 6.0; }

// ---------------------------------------------------------------------------
// Root periodicity
// ---------------------------------------------------------------------------

/// Real parts within this distance below +pi/2 are reported on the -pi/2 side,
/// so string centers at -pi/2 do not flip with rounding-level deviations.
inline constexpr double kWrapSlack = 1e-9;

/// Maps x into [-pi/2 - kWrapSlack, pi/2 - kWrapSlack) modulo pi.
inline double wrap_real_part(double x) {
  const double lo = kHalfPi + kWrapSlack;
  double r = std::fmod(x + lo, kPi);
  if (r < 0.0) r += kPi;
  r -= lo;
  if (r >= kPi - lo) r -= kPi;
  return r;
}

/// Distance between two roots whose real parts are identified modulo pi.
inline double periodic_distance(cplx a, cplx b) {
  return std::hypot(wrap_real_part(a.real() - b.real()), a.imag() - b.imag());
}

// ---------------------------------------------------------------------------
// Bethe root sets
// ---------------------------------------------------------------------------

enum class StateLabel { ground, ground_alt_string, excited, near_degenerate };

enum class SeedKind {
  boundary_string,
  imaginary_axis_string,
  excited_string,
  shifted_string,
  explicit_roots
};

inline std::string_view to_string(StateLabel s) {
  switch (s) {
    case StateLabel::ground: return "ground";
    case StateLabel::ground_alt_string: return "ground-alt-string";
    case StateLabel::excited: return "excited";
    case StateLabel::near_degenerate: return "near-degenerate";
  }
  return "unknown";
}

inline std::string_view to_string(SeedKind s) {
  switch (s) {
    case SeedKind::boundary_string: return "boundary-string";
    case SeedKind::imaginary_axis_string: return "imaginary-axis-string";
    case SeedKind::excited_string: return "excited-string";
    case SeedKind::shifted_string: return "shifted-string";
    case SeedKind::explicit_roots: return "explicit";
  }
  return "unknown";
}

/// Exact reference position center + i * level * eta of one root.
///
/// Members of a string share the same center bit-for-bit and have levels that
/// differ by exact integers, so differences such as u_j - u_l + i eta between
/// string neighbours vanish identically at the anchor level. Everything that
/// moves during a solve lives in the deviation.
struct RootAnchor {
  double center = 0.0;
  double level = 0.0;
};

class BetheRootSet {
 public:
  BetheRootSet(ModelParams params, StateLabel label, SeedKind seed_kind,
               std::vector<RootAnchor> anchors, std::vector<cplx> deviations)
      : params_(params),
        label_(label),
        seed_kind_(seed_kind),
        anchors_(std::move(anchors)),
        deviations_(std::move(deviations)) {
    const auto n = static_cast<std::size_t>(params_.n_sites());
    if (anchors_.size() != n || deviations_.size() != n) {
      throw std::invalid_argument("BetheRootSet: expected exactly N roots");
    }
  }

  /// A set given by plain root values; no string structure is assumed.
  static BetheRootSet from_roots(ModelParams params, StateLabel label,
                                 std::span<const cplx> roots) {
    std::vector<RootAnchor> anchors;
    std::vector<cplx> devs;
    for (cplx u : roots) {
      anchors.push_back({u.real(), 0.0});
      devs.emplace_back(0.0, u.imag());
    }
    return {params, label, SeedKind::explicit_roots, std::move(anchors), std::move(devs)};
  }

  const ModelParams& params() const noexcept { return params_; }
  StateLabel label() const noexcept { return label_; }
  SeedKind seed_kind() const noexcept { return seed_kind_; }
  std::size_t size() const noexcept { return anchors_.size(); }
  const std::vector<RootAnchor>& anchors() const noexcept { return anchors_; }
  const std::vector<cplx>& deviations() const noexcept { return deviations_; }

  std::optional<double> residual_inf_norm() const noexcept { return residual_; }
  void set_residual_inf_norm(double r) { residual_ = r; }

  /// Anchor position without deviation (real part not wrapped).
  cplx anchor_value(std::size_t j) const {
    return {anchors_[j].center, anchors_[j].level * params_.eta()};
  }

  /// Root j with its real part wrapped by wrap_real_part.
  cplx root(std::size_t j) const {
    const cplx u = anchor_value(j) + deviations_[j];
    return {wrap_real_part(u.real()), u.imag()};
  }

  std::vector<cplx> roots() const {
    std::vector<cplx> out(size());
    for (std::size_t j = 0; j < size(); ++j) out[j] = root(j);
    return out;
  }

  BetheRootSet with_deviations(std::vector<cplx> deviations) const {
    BetheRootSet copy(params_, label_, seed_kind_, anchors_, std::move(deviations));
    return copy;
  }

  BetheRootSet with_label(StateLabel label) const {
    BetheRootSet copy = *this;
    copy.label_ = label;
    return copy;
  }

  /// Complex conjugate of every root.
  BetheRootSet conjugated() const {
    std::vector<RootAnchor> a = anchors_;
    std::vector<cplx> d = deviations_;
    for (auto& x : a) x.level = -x.level;
    for (auto& x : d) x = std::conj(x);
    return {params_, label_, seed_kind_, std::move(a), std::move(d)};
  }

  /// Every root moved by pi along the real axis.
  BetheRootSet shifted_by_pi() const {
    std::vector<RootAnchor> a = anchors_;
    for (auto& x : a) x.center += kPi;
    return {params_, label_, seed_kind_, std::move(a), deviations_};
  }

 private:
  ModelParams params_;
  StateLabel label_;
  SeedKind seed_kind_;
  std::vector<RootAnchor> anchors_;
  std::vector<cplx> deviations_;
  std::optional<double> residual_;
};

/// Largest distance from a conjugated root to its nearest root (periodic in Re).
inline double conjugation_defect(const BetheRootSet& set) {
  const auto roots = set.roots();
  double worst = 0.0;
  for (cplx u : roots) {
    double best = std::numeric_limits<double>::infinity();
    for (cplx v : roots) best = std::min(best, periodic_distance(std::conj(u), v));
    worst = std::max(worst, best);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Seeds
// ---------------------------------------------------------------------------

enum class StringBranch { boundary, imaginary_axis };

namespace detail {

// Adds uniform jitter in [-jitter, jitter] to real and imaginary parts while
// keeping the set closed under conjugation: anchors mirrored in level receive
// conjugate perturbations and self-mirrored ones a real perturbation.
inline void add_symmetric_jitter(const std::vector<RootAnchor>& anchors,
                                 std::vector<cplx>& devs, double jitter,
                                 std::uint64_t rng_seed) {
  if (jitter <= 0.0) return;
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> dist(-jitter, jitter);
  std::vector<bool> done(anchors.size(), false);
  for (std::size_t j = 0; j < anchors.size(); ++j) {
    if (done[j]) continue;
    std::size_t mirror = j;
    for (std::size_t k = 0; k < anchors.size(); ++k) {
      if (k != j && !done[k] && anchors[k].center == anchors[j].center &&
          anchors[k].level == -anchors[j].level && anchors[j].level != 0.0) {
        mirror = k;
        break;
      }
    }
    const double re = dist(rng);
    const double im = dist(rng);
    if (mirror == j) {
      devs[j] += cplx(re, 0.0);
    } else {
      devs[j] += cplx(re, im);
      devs[mirror] += cplx(re, -im);
      done[mirror] = true;
    }
    done[j] = true;
  }
}

inline std::vector<RootAnchor> string_anchors(int n, double center) {
  std::vector<RootAnchor> a(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) {
    a[static_cast<std::size_t>(j - 1)] = {center, (n + 1) / 2.0 - j};
  }
  return a;
}

}  // namespace detail

/// Ideal N-string u_j = c + ((N+1)/2 - j) eta i with c = -pi/2 (boundary) or 0
/// (imaginary axis, odd N only). Optional jitter preserves conjugation symmetry.
inline BetheRootSet ground_string_seed(const ModelParams& p,
                                       StringBranch branch = StringBranch::boundary,
                                       double jitter = 0.0,
                                       std::uint64_t rng_seed = kDefaultSeed) {
  const int n = p.n_sites();
  if (branch == StringBranch::imaginary_axis && n % 2 == 0) {
    throw std::invalid_argument(
        "ground_string_seed: the imaginary-axis string exists only for odd N");
  }
  const double center = branch == StringBranch::boundary ? -kHalfPi : 0.0;
  auto anchors = detail::string_anchors(n, center);
  std::vector<cplx> devs(anchors.size());
  detail::add_symmetric_jitter(anchors, devs, jitter, rng_seed);
  return {p,
          branch == StringBranch::boundary ? StateLabel::ground
                                           : StateLabel::ground_alt_string,
          branch == StringBranch::boundary ? SeedKind::boundary_string
                                           : SeedKind::imaginary_axis_string,
          std::move(anchors), std::move(devs)};
}

/// (N-1)-string u_j = -pi/2 + (N/2 - j + 1) eta i, j = 2..N, plus the real root
/// u_1 = -pi/2. For even N one string member sits on u_1; the pair is split
/// symmetrically along the real axis by +-jitter.
inline BetheRootSet excited_string_seed(const ModelParams& p, double jitter = 1e-3) {
  const int n = p.n_sites();
  if (n < 3) throw std::invalid_argument("excited_string_seed: requires N >= 3");
  std::vector<RootAnchor> anchors(static_cast<std::size_t>(n));
  anchors[0] = {-kHalfPi, 0.0};
  for (int j = 2; j <= n; ++j) {
    anchors[static_cast<std::size_t>(j - 1)] = {-kHalfPi, n / 2.0 - j + 1.0};
  }
  std::vector<cplx> devs(anchors.size());
  if (n % 2 == 0) {
    const auto partner = static_cast<std::size_t>(n / 2);  // j = N/2 + 1
    devs[0] = cplx(jitter, 0.0);
    devs[partner] = cplx(-jitter, 0.0);
  }
  return {p, StateLabel::excited, SeedKind::excited_string, std::move(anchors),
          std::move(devs)};
}

/// N-string whose common real part is moved from -pi/2 by center_offset.
inline BetheRootSet shifted_string_seed(const ModelParams& p, double center_offset,
                                        double jitter = 0.0,
                                        std::uint64_t rng_seed = kDefaultSeed) {
  auto anchors = detail::string_anchors(p.n_sites(), wrap_real_part(-kHalfPi + center_offset));
  std::vector<cplx> devs(anchors.size());
  detail::add_symmetric_jitter(anchors, devs, jitter, rng_seed);
  return {p, StateLabel::near_degenerate, SeedKind::shifted_string, std::move(anchors),
          std::move(devs)};
}

/// Converged root minus ideal string position, after greedy nearest matching.
///
/// Ideal positions are visited in order of descending imaginary part; each
/// takes the nearest unmatched root. When a root's anchor coincides with its
/// ideal position the stored deviation is returned bit-exactly.
inline std::vector<cplx> string_deviations(const BetheRootSet& set) {
  const ModelParams& p = set.params();
  std::vector<RootAnchor> ideal;
  switch (set.label()) {
    case StateLabel::ground:
      ideal = detail::string_anchors(p.n_sites(), -kHalfPi);
      break;
    case StateLabel::ground_alt_string:
      ideal = detail::string_anchors(p.n_sites(), 0.0);
      break;
    case StateLabel::excited: {
      ideal.assign(static_cast<std::size_t>(p.n_sites()), {-kHalfPi, 0.0});
      for (int j = 2; j <= p.n_sites(); ++j) {
        ideal[static_cast<std::size_t>(j - 1)].level = p.n_sites() / 2.0 - j + 1.0;
      }
      break;
    }
    case StateLabel::near_degenerate:
      throw std::invalid_argument(
          "string_deviations: no ideal reference for near-degenerate states");
  }

  std::vector<std::size_t> order(ideal.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ideal[a].level > ideal[b].level;
  });

  const double eta = p.eta();
  auto diff = [&](std::size_t root, std::size_t ref) {
    const RootAnchor& a = set.anchors()[root];
    const RootAnchor& r = ideal[ref];
    return cplx(wrap_real_part(a.center - r.center), (a.level - r.level) * eta) +
           set.deviations()[root];
  };

  std::vector<cplx> out(ideal.size());
  std::vector<bool> used(set.size(), false);
  for (std::size_t ref : order) {
    std::size_t best = set.size();
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < set.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(diff(j, ref));
      if (d < best_dist) {
        best_dist = d;
        best = j;
      }
    }
    used[best] = true;
    out[ref] = diff(best, ref);
  }
  return out;
}

}  // namespace xxz
