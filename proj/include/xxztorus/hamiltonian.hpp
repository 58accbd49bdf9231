#pragma once

// Twisted-boundary XXZ Hamiltonian in the sigma^z product basis.
//
// Bit j of a basis index is site j+1, bit = 1 means spin up. Every matrix
// element is real: bulk bonds flip antiparallel neighbours, the twisted bond
// (N, 1) flips parallel ones and carries +cosh(eta) on its zz term.

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xxztorus/model.hpp"
#include "xxztorus/parallel.hpp"

namespace xxz {

enum class OperatorMode { dense, matrix_free };

inline constexpr int kMaxDenseSites = 14;
inline constexpr int kMaxMatrixFreeSites = 26;

/// Parity sector label: popcount of the basis index modulo 2.
enum class Parity { even = 0, odd = 1 };

class OperatorHandle {
 public:
  OperatorHandle(ModelParams params, OperatorMode mode, std::optional<Parity> sector)
      : params_(params), mode_(mode), sector_(sector) {
    const int n = params_.n_sites();
    const int limit = mode == OperatorMode::dense ? kMaxDenseSites : kMaxMatrixFreeSites;
    if (n > limit) {
      throw std::out_of_range(
          std::string("build_hamiltonian: N=") + std::to_string(n) + " exceeds the " +
          (mode == OperatorMode::dense ? "dense" : "matrix-free") + " limit " +
          std::to_string(limit));
    }
    full_dim_ = std::uint64_t{1} << n;
    dim_ = sector_ ? full_dim_ / 2 : full_dim_;
    cosh_eta_ = std::cosh(params_.eta());
    if (mode_ == OperatorMode::dense) dense_ = assemble();
  }

  const ModelParams& params() const noexcept { return params_; }
  OperatorMode mode() const noexcept { return mode_; }
  std::optional<Parity> sector() const noexcept { return sector_; }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(dim_); }

  /// Triangle-inequality bound (2 + cosh eta) N on the spectral norm.
  double norm_bound() const noexcept { return (2.0 + cosh_eta_) * params_.n_sites(); }

  /// Basis state (full-space index) of position i in this operator's space.
  std::uint64_t state_of(std::uint64_t i) const noexcept {
    if (!sector_) return i;
    const auto low = static_cast<std::uint64_t>((std::popcount(i) & 1) ^
                                                static_cast<int>(*sector_));
    return (i << 1) | low;
  }

  std::uint64_t index_of(std::uint64_t s) const noexcept { return sector_ ? s >> 1 : s; }

  void apply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != dim_ || y.size() != dim_) {
      throw std::invalid_argument("OperatorHandle::apply: dimension mismatch");
    }
    if (dense_) {
      Eigen::Map<const Eigen::VectorXd> xm(x.data(), static_cast<Eigen::Index>(dim_));
      Eigen::Map<Eigen::VectorXd> ym(y.data(), static_cast<Eigen::Index>(dim_));
      ym.noalias() = *dense_ * xm;
      return;
    }
    auto rows = [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        double acc = 0.0;
        for_each_element(i, [&](std::uint64_t col, double v) { acc += v * x[col]; });
        y[i] = acc;
      }
    };
    const unsigned workers = dim_ >= (1u << 16) ? thread_count() : 1u;
    parallel_chunks(0, static_cast<std::size_t>(dim_), rows, workers);
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y(x.size());
    apply(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
          std::span<double>(y.data(), static_cast<std::size_t>(y.size())));
    return y;
  }

  /// Dense matrix of this operator; built on demand in matrix-free mode.
  Eigen::MatrixXd to_dense() const {
    if (dense_) return *dense_;
    if (params_.n_sites() > kMaxDenseSites) {
      throw std::out_of_range("to_dense: N exceeds the dense limit");
    }
    return assemble();
  }

  /// Visits the nonzeros (column, value) of row i; the diagonal comes first.
  template <class F>
  void for_each_element(std::uint64_t i, F&& f) const {
    const int n = params_.n_sites();
    const std::uint64_t s = state_of(i);
    const std::uint64_t bulk_mask = (std::uint64_t{1} << (n - 1)) - 1;
    const std::uint64_t diff = (s ^ (s >> 1)) & bulk_mask;
    const int unequal = std::popcount(diff);
    const bool twist_equal = ((s ^ (s >> (n - 1))) & 1u) == 0;
    const double diag = -cosh_eta_ * static_cast<double>((n - 1) - 2 * unequal) +
                        cosh_eta_ * (twist_equal ? 1.0 : -1.0);
    f(i, diag);
    for (int j = 0; j < n - 1; ++j) {
      if ((diff >> j) & 1u) f(index_of(s ^ (std::uint64_t{3} << j)), -2.0);
    }
    if (twist_equal) f(index_of(s ^ (std::uint64_t{1} | (std::uint64_t{1} << (n - 1)))), -2.0);
  }

 private:
  Eigen::MatrixXd assemble() const {
    const auto d = static_cast<Eigen::Index>(dim_);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
    for (std::uint64_t i = 0; i < dim_; ++i) {
      for_each_element(i, [&](std::uint64_t col, double v) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) += v;
      });
    }
    return m;
  }

  ModelParams params_;
  OperatorMode mode_;
  std::optional<Parity> sector_;
  std::uint64_t full_dim_ = 0;
  std::uint64_t dim_ = 0;
  double cosh_eta_ = 1.0;
  std::optional<Eigen::MatrixXd> dense_;
};

/// Hamiltonian on the full space, or on one parity block when sector is given.
inline OperatorHandle build_hamiltonian(const ModelParams& params, OperatorMode mode,
                                        std::optional<Parity> sector = std::nullopt) {
  return OperatorHandle(params, mode, sector);
}

inline Eigen::VectorXd random_unit_vector(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
  for (auto& x : v) x = g(rng);
  v.normalize();
  return v;
}

/// max over random v of ||[H, P] v|| / ||v||, P the product of all sigma^z.
inline double parity_check(const OperatorHandle& op, int trials = 10,
                           std::uint64_t seed = kDefaultSeed) {
  std::mt19937_64 rng(seed);
  const int n = op.params().n_sites();
  auto apply_p = [&](Eigen::VectorXd v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const auto s = op.state_of(static_cast<std::uint64_t>(i));
      if ((n - std::popcount(s)) & 1) v[i] = -v[i];
    }
    return v;
  };
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Eigen::VectorXd v = random_unit_vector(op.dimension(), rng);
    const Eigen::VectorXd hp = op.apply(apply_p(v));
    const Eigen::VectorXd ph = apply_p(op.apply(v));
    worst = std::max(worst, (hp - ph).norm());
  }
  return worst;
}

/// max over random pairs of |<x, A y> - <A x, y>| / (||A||_bound ||x|| ||y||).
inline double symmetry_check(const OperatorHandle& op, int trials = 10,
                             std::uint64_t seed = kDefaultSeed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Eigen::VectorXd x = random_unit_vector(op.dimension(), rng);
    const Eigen::VectorXd y = random_unit_vector(op.dimension(), rng);
    const double lhs = x.dot(op.apply(y));
    const double rhs = op.apply(x).dot(y);
    worst = std::max(worst, std::abs(lhs - rhs) / op.norm_bound());
  }
  return worst;
}

}  // namespace xxz
