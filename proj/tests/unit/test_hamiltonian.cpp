#include <gtest/gtest.h>

#include <random>

#include "xxztorus/eigensolver.hpp"
#include "xxztorus/hamiltonian.hpp"

using namespace xxz;

TEST(Hamiltonian, RangeErrors) {
  EXPECT_THROW(build_hamiltonian({15, 1.0}, OperatorMode::dense), std::out_of_range);
  EXPECT_THROW(build_hamiltonian({27, 1.0}, OperatorMode::matrix_free), std::out_of_range);
  EXPECT_NO_THROW(build_hamiltonian({20, 1.0}, OperatorMode::matrix_free));
}

TEST(Hamiltonian, TwoSitesReduceToSigmaXSigmaX) {
  for (double eta : {0.3, 1.0, 2.5}) {
    const Eigen::MatrixXd h = build_hamiltonian({2, eta}, OperatorMode::dense).to_dense();
    Eigen::Matrix4d expected = Eigen::Matrix4d::Zero();
    // -2 sigma^x sigma^x flips both spins.
    for (int s = 0; s < 4; ++s) expected(s, s ^ 3) = -2.0;
    EXPECT_LT((h - expected).cwiseAbs().maxCoeff(), 1e-15) << "eta=" << eta;
  }
}

TEST(Hamiltonian, DenseIsSymmetric) {
  for (int n : {3, 6, 9}) {
    const Eigen::MatrixXd h = build_hamiltonian({n, 1.3}, OperatorMode::dense).to_dense();
    EXPECT_EQ((h - h.transpose()).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Hamiltonian, SymmetryCheckOnRandomVectors) {
  EXPECT_LE(symmetry_check(build_hamiltonian({10, 1.0}, OperatorMode::matrix_free), 10), 1e-12);
  EXPECT_LE(symmetry_check(build_hamiltonian({8, 0.5}, OperatorMode::dense), 10), 1e-12);
}

TEST(Hamiltonian, DenseMatchesMatrixFree) {
  std::mt19937_64 rng(5);
  for (int n : {2, 5, 8, 12}) {
    const ModelParams p(n, 0.8);
    const auto d = build_hamiltonian(p, OperatorMode::dense);
    const auto m = build_hamiltonian(p, OperatorMode::matrix_free);
    for (int t = 0; t < 20; ++t) {
      const Eigen::VectorXd v = random_unit_vector(d.dimension(), rng);
      const Eigen::VectorXd a = d.apply(v);
      const Eigen::VectorXd b = m.apply(v);
      EXPECT_LE((a - b).norm(), 1e-12 * a.norm()) << "n=" << n;
    }
  }
}

TEST(Hamiltonian, RayleighQuotientBound) {
  std::mt19937_64 rng(9);
  const ModelParams p(10, 1.0);
  const auto h = build_hamiltonian(p, OperatorMode::matrix_free);
  for (int t = 0; t < 10; ++t) {
    const Eigen::VectorXd v = random_unit_vector(h.dimension(), rng);
    EXPECT_LE(std::abs(v.dot(h.apply(v))), (2.0 + std::cosh(1.0)) * 10.0);
  }
}

TEST(Hamiltonian, ParityIsConserved) {
  EXPECT_EQ(parity_check(build_hamiltonian({2, 1.0}, OperatorMode::dense), 10), 0.0);
  EXPECT_LE(parity_check(build_hamiltonian({6, 1.0}, OperatorMode::dense), 10), 1e-12);
  EXPECT_LE(parity_check(build_hamiltonian({12, 2.0}, OperatorMode::matrix_free), 10), 1e-12);
}

TEST(Hamiltonian, ParitySectorsReproduceFullSpectrum) {
  for (int n : {2, 5, 8, 10}) {
    const ModelParams p(n, 1.1);
    auto full = detail::dense_eigenvalues(build_hamiltonian(p, OperatorMode::dense).to_dense());
    std::vector<double> split;
    for (Parity s : {Parity::even, Parity::odd}) {
      const auto e = detail::dense_eigenvalues(build_hamiltonian(p, OperatorMode::dense, s).to_dense());
      split.insert(split.end(), e.begin(), e.end());
    }
    std::sort(split.begin(), split.end());
    ASSERT_EQ(full.size(), split.size());
    for (std::size_t i = 0; i < full.size(); ++i) EXPECT_NEAR(full[i], split[i], 1e-10);
  }
}

TEST(Hamiltonian, SectorIndexingRoundTrip) {
  const auto h = build_hamiltonian({7, 1.0}, OperatorMode::matrix_free, Parity::odd);
  for (std::uint64_t i = 0; i < h.dimension(); ++i) {
    const auto s = h.state_of(i);
    EXPECT_EQ(std::popcount(s) & 1, 1);
    EXPECT_EQ(h.index_of(s), i);
  }
}
