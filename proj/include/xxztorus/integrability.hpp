#pragma once

// Six-vertex R-matrix, sigma^x-twisted monodromy and transfer matrices, and
// numerical checks of the RTT relation, commutativity, and the Hamiltonian
// as a logarithmic derivative of the transfer matrix.
//
// Local basis: index 0 = spin down, 1 = spin up (matching bit values in the
// Hamiltonian). Two-site operators use index 2 * first + second.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xxztorus/hamiltonian.hpp"
#include "xxztorus/model.hpp"

namespace xxz {

inline constexpr int kMaxMonodromySites = 10;

struct RMatrix {
  cplx u;
  double eta = 0.0;
  Eigen::Matrix4cd entries;
};

/// R(u) = [[a,0,0,0],[0,b,1,0],[0,1,b,0],[0,0,0,a]], a = sinh(u+eta)/sinh eta,
/// b = sinh u / sinh eta.
inline RMatrix r_matrix(cplx u, double eta) {
  if (!std::isfinite(eta) || std::sinh(eta) == 0.0) {
    throw std::invalid_argument("r_matrix: sinh(eta) must be nonzero");
  }
  const double s = std::sinh(eta);
  const cplx a = std::sinh(u + eta) / s;
  const cplx b = std::sinh(u) / s;
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = a;
  m(3, 3) = a;
  m(1, 1) = b;
  m(2, 2) = b;
  m(1, 2) = 1.0;
  m(2, 1) = 1.0;
  return {u, eta, m};
}

/// Auxiliary 2x2 array of operators on the 2^N quantum space, displayed as
/// [[C, D], [A, B]].
struct MonodromyMatrix {
  cplx u;
  std::vector<cplx> thetas;
  std::array<Eigen::MatrixXcd, 4> blocks;  // row-major over auxiliary indices

  const Eigen::MatrixXcd& at(int a, int b) const { return blocks[static_cast<std::size_t>(2 * a + b)]; }
  Eigen::MatrixXcd& at(int a, int b) { return blocks[static_cast<std::size_t>(2 * a + b)]; }
  const Eigen::MatrixXcd& C() const { return at(0, 0); }
  const Eigen::MatrixXcd& D() const { return at(0, 1); }
  const Eigen::MatrixXcd& A() const { return at(1, 0); }
  const Eigen::MatrixXcd& B() const { return at(1, 1); }
  Eigen::Index dimension() const { return blocks[0].rows(); }
};

/// T(u) = sigma^x_0 R_{0N}(u - theta_N) ... R_{01}(u - theta_1).
inline MonodromyMatrix monodromy(int n_sites, double eta, cplx u, std::vector<cplx> thetas = {}) {
  if (n_sites < 1 || n_sites > kMaxMonodromySites) {
    throw std::out_of_range("monodromy: N must be in [1, " + std::to_string(kMaxMonodromySites) + "]");
  }
  if (thetas.empty()) thetas.assign(static_cast<std::size_t>(n_sites), cplx(0.0, 0.0));
  if (thetas.size() != static_cast<std::size_t>(n_sites)) {
    throw std::invalid_argument("monodromy: need one inhomogeneity per site");
  }
  const Eigen::Index dim = Eigen::Index{1} << n_sites;
  MonodromyMatrix t{u, thetas, {}};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      t.at(a, b) = a == b ? Eigen::MatrixXcd::Identity(dim, dim).eval()
                          : Eigen::MatrixXcd::Zero(dim, dim).eval();
    }
  }
  for (int j = 0; j < n_sites; ++j) {
    const Eigen::Matrix4cd r = r_matrix(u - thetas[static_cast<std::size_t>(j)], eta).entries;
    std::array<Eigen::MatrixXcd, 4> next;
    for (auto& m : next) m = Eigen::MatrixXcd::Zero(dim, dim);
    const Eigen::Index bit = Eigen::Index{1} << j;
    for (int a = 0; a < 2; ++a) {
      for (int c = 0; c < 2; ++c) {
        for (Eigen::Index x = 0; x < dim; ++x) {
          const int s = (x & bit) ? 1 : 0;
          for (int sp = 0; sp < 2; ++sp) {
            const cplx w = r(2 * a + s, 2 * c + sp);
            if (w == cplx(0.0, 0.0)) continue;
            const Eigen::Index xp = sp ? (x | bit) : (x & ~bit);
            for (int b = 0; b < 2; ++b) {
              next[static_cast<std::size_t>(2 * a + b)].row(x) += w * t.at(c, b).row(xp);
            }
          }
        }
      }
    }
    t.blocks = std::move(next);
  }
  std::swap(t.blocks[0], t.blocks[2]);
  std::swap(t.blocks[1], t.blocks[3]);
  return t;
}

inline MonodromyMatrix monodromy(const ModelParams& p, cplx u, std::vector<cplx> thetas = {}) {
  return monodromy(p.n_sites(), p.eta(), u, std::move(thetas));
}

/// Auxiliary trace t(u) = B(u) + C(u).
inline Eigen::MatrixXcd transfer(const MonodromyMatrix& t) { return t.B() + t.C(); }

inline Eigen::MatrixXcd transfer(const ModelParams& p, cplx u, std::vector<cplx> thetas = {}) {
  return transfer(monodromy(p, u, std::move(thetas)));
}

/// max-entry norm of R_{00'}(u-v) T_0(u) T_0'(v) - T_0'(v) T_0(u) R_{00'}(u-v).
inline double rtt_residual(const ModelParams& p, cplx u, cplx v, std::vector<cplx> thetas = {}) {
  const MonodromyMatrix tu = monodromy(p, u, thetas);
  const MonodromyMatrix tv = monodromy(p, v, thetas);
  const Eigen::Matrix4cd r = r_matrix(u - v, p.eta()).entries;
  const Eigen::Index dim = tu.dimension();

  // Products T(u)_{cb} T(v)_{c'b'} and T(v)_{a'c'} T(u)_{ac} for all index pairs.
  std::array<Eigen::MatrixXcd, 16> uv, vu;
  for (int c = 0; c < 2; ++c)
    for (int cp = 0; cp < 2; ++cp)
      for (int b = 0; b < 2; ++b)
        for (int bp = 0; bp < 2; ++bp) {
          const auto idx = static_cast<std::size_t>(8 * c + 4 * cp + 2 * b + bp);
          uv[idx] = tu.at(c, b) * tv.at(cp, bp);
          vu[idx] = tv.at(cp, bp) * tu.at(c, b);
        }

  double worst = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int ap = 0; ap < 2; ++ap)
      for (int b = 0; b < 2; ++b)
        for (int bp = 0; bp < 2; ++bp) {
          Eigen::MatrixXcd lhs = Eigen::MatrixXcd::Zero(dim, dim);
          Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(dim, dim);
          for (int c = 0; c < 2; ++c)
            for (int cp = 0; cp < 2; ++cp) {
              const cplx rl = r(2 * a + ap, 2 * c + cp);
              if (rl != cplx(0.0, 0.0)) {
                lhs += rl * uv[static_cast<std::size_t>(8 * c + 4 * cp + 2 * b + bp)];
              }
              const cplx rr = r(2 * c + cp, 2 * b + bp);
              if (rr != cplx(0.0, 0.0)) {
                rhs += rr * vu[static_cast<std::size_t>(8 * a + 4 * ap + 2 * c + cp)];
              }
            }
          worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
        }
  return worst;
}

/// max-entry norm of [t(u), t(v)].
inline double transfer_commutator(const ModelParams& p, cplx u, cplx v) {
  if (p.n_sites() > kMaxMonodromySites) throw std::out_of_range("transfer_commutator: N too large");
  if (u == v) return 0.0;
  const Eigen::MatrixXcd a = transfer(p, u);
  const Eigen::MatrixXcd b = transfer(p, v);
  return (a * b - b * a).cwiseAbs().maxCoeff();
}

/// -2 sinh(eta) t'(0) t(0)^{-1} + N cosh(eta), with t'(0) by central differences.
inline Eigen::MatrixXcd reconstruct_hamiltonian(const ModelParams& p, double h = 1e-5) {
  if (p.n_sites() > kMaxMonodromySites) {
    throw std::out_of_range("reconstruct_hamiltonian: N too large");
  }
  if (!(h > 0.0)) throw std::invalid_argument("reconstruct_hamiltonian: h must be > 0");
  const Eigen::MatrixXcd t0 = transfer(p, 0.0);
  const Eigen::MatrixXcd dt = (transfer(p, h) - transfer(p, -h)) / (2.0 * h);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(t0);
  if (!(lu.rcond() > 1e-12)) {
    throw std::runtime_error("reconstruct_hamiltonian: t(0) is numerically singular");
  }
  // X = t' t0^{-1}  <=>  t0^T X^T = t'^T
  const Eigen::MatrixXcd x = t0.transpose().partialPivLu().solve(dt.transpose()).transpose();
  const Eigen::Index dim = t0.rows();
  return -2.0 * std::sinh(p.eta()) * x +
         static_cast<double>(p.n_sites()) * std::cosh(p.eta()) *
             Eigen::MatrixXcd::Identity(dim, dim);
}

/// max-entry distance between the reconstructed and the directly built Hamiltonian.
inline double hamiltonian_identity_check(const ModelParams& p, double h = 1e-5) {
  const Eigen::MatrixXcd rec = reconstruct_hamiltonian(p, h);
  const Eigen::MatrixXd direct = build_hamiltonian(p, OperatorMode::dense).to_dense();
  return (rec - direct.cast<cplx>()).cwiseAbs().maxCoeff();
}

/// Uniform point with |Re u|, |Im u| <= 1 at distance >= 1e-2 from the zeros of
/// sinh(u) and sinh(u + eta).
inline cplx sample_spectral_point(std::mt19937_64& rng, double eta, double exclusion = 1e-2) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (;;) {
    const cplx u(d(rng), d(rng));
    bool ok = true;
    for (int k = -1; k <= 1 && ok; ++k) {
      const cplx zero(0.0, k * kPi);
      if (std::abs(u - zero) < exclusion || std::abs(u + eta - zero) < exclusion) ok = false;
    }
    if (ok) return u;
  }
}

/// Pair (u, v) whose difference also avoids the singular points of R(u - v).
inline std::pair<cplx, cplx> sample_spectral_pair(std::mt19937_64& rng, double eta,
                                                  double exclusion = 1e-2) {
  for (;;) {
    const cplx u = sample_spectral_point(rng, eta, exclusion);
    const cplx v = sample_spectral_point(rng, eta, exclusion);
    const cplx w = u - v;
    bool ok = true;
    for (int k = -1; k <= 1 && ok; ++k) {
      const cplx zero(0.0, k * kPi);
      if (std::abs(w - zero) < exclusion || std::abs(w + eta - zero) < exclusion) ok = false;
    }
    if (ok) return {u, v};
  }
}

struct VerificationRecord {
  std::string check;
  int n_sites = 0;
  double eta = 0.0;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// RTT, commutator (trials random pairs each) and Hamiltonian identity checks.
inline std::vector<VerificationRecord> verify_integrability(const ModelParams& p, int trials,
                                                            std::uint64_t seed = kDefaultSeed,
                                                            double tol = 1e-10,
                                                            double identity_tol = 1e-6) {
  std::mt19937_64 rng(seed);
  double rtt = 0.0;
  double comm = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto [u, v] = sample_spectral_pair(rng, p.eta());
    rtt = std::max(rtt, rtt_residual(p, u, v));
    comm = std::max(comm, transfer_commutator(p, u, v));
  }
  const double ident = hamiltonian_identity_check(p);
  const int n = p.n_sites();
  return {
      {"rtt", n, p.eta(), rtt, tol, rtt <= tol},
      {"transfer_commutator", n, p.eta(), comm, tol, comm <= tol},
      {"hamiltonian_identity", n, p.eta(), ident, identity_tol, ident <= identity_tol},
  };
}

}  // namespace xxz
