#include <gtest/gtest.h>

#include <random>

#include "xxztorus/eigensolver.hpp"
#include "xxztorus/integrability.hpp"

using namespace xxz;

TEST(RMatrix, PermutationAtZero) {
  for (double eta : {0.5, 1.0, 2.0}) {
    const Eigen::Matrix4cd r = r_matrix(0.0, eta).entries;
    Eigen::Matrix4cd perm = Eigen::Matrix4cd::Zero();
    perm(0, 0) = perm(3, 3) = perm(1, 2) = perm(2, 1) = 1.0;
    EXPECT_LT((r - perm).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(RMatrix, AlignedWeightVanishesAtMinusEta) {
  const auto r = r_matrix(-1.3, 1.3).entries;
  EXPECT_LT(std::abs(r(0, 0)), 1e-15);
  EXPECT_LT(std::abs(r(3, 3)), 1e-15);
}

TEST(RMatrix, EntriesAgainstOracle) {
  // 50-digit evaluation, tests/oracles/derive_expected.py.
  const auto r = r_matrix({0.3, 0.2}, 1.0).entries;
  EXPECT_NEAR(std::abs(r(0, 0) - cplx(1.4163769337419109, 0.33318568200172767)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(r(1, 1) - cplx(0.25395665312131289, 0.17671587144356687)), 0.0, 1e-15);
  EXPECT_EQ(r(1, 2), cplx(1.0, 0.0));
  EXPECT_EQ(r(0, 1), cplx(0.0, 0.0));
}

TEST(RMatrix, RejectsZeroEta) { EXPECT_THROW(r_matrix(0.1, 0.0), std::invalid_argument); }

TEST(Monodromy, SingleSiteIsTwistedRMatrix) {
  const double eta = 0.7;
  const cplx u(0.25, -0.1);
  const auto t = monodromy(1, eta, u);
  const auto r = r_matrix(u, eta).entries;
  // sigma^x on the auxiliary space swaps the rows of R viewed as a 2x2 array of site operators.
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int s = 0; s < 2; ++s)
        for (int sp = 0; sp < 2; ++sp) {
          EXPECT_NEAR(std::abs(t.at(a, b)(s, sp) - r(2 * (1 - a) + s, 2 * b + sp)), 0.0, 1e-15);
        }
}

TEST(Monodromy, SizeLimits) {
  EXPECT_THROW(monodromy(11, 1.0, 0.1), std::out_of_range);
  EXPECT_THROW(monodromy(0, 1.0, 0.1), std::out_of_range);
  EXPECT_THROW(monodromy(3, 1.0, 0.1, {0.0, 0.0}), std::invalid_argument);
  const auto t = monodromy(4, 1.0, 0.1);
  for (const auto& b : t.blocks) EXPECT_EQ(b.rows(), 16);
}

TEST(Monodromy, TransferIsTraceBPlusC) {
  const auto t = monodromy(3, 1.0, {0.2, 0.1});
  EXPECT_EQ((transfer(t) - (t.B() + t.C())).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Rtt, FourSitesSpotPoint) {
  EXPECT_LE(rtt_residual({4, 1.0}, 0.37, -0.2), 1e-10);
}

TEST(Rtt, RandomPointsUpToSixSites) {
  std::mt19937_64 rng(kDefaultSeed);
  for (int n = 2; n <= 6; ++n) {
    for (int t = 0; t < 10; ++t) {
      const auto [u, v] = sample_spectral_pair(rng, 1.0);
      EXPECT_LE(rtt_residual({n, 1.0}, u, v), 1e-10) << "n=" << n;
    }
  }
}

TEST(Rtt, Inhomogeneous) {
  std::vector<cplx> thetas{{0.1, 0.0}, {-0.2, 0.05}, {0.3, -0.1}};
  EXPECT_LE(rtt_residual({3, 0.8}, {0.2, 0.3}, {-0.4, 0.1}, thetas), 1e-10);
}

TEST(Transfer, CommutesAtRandomPoints) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    const auto [u, v] = sample_spectral_pair(rng, 1.0);
    EXPECT_LE(transfer_commutator({6, 1.0}, u, v), 1e-10);
  }
  EXPECT_EQ(transfer_commutator({5, 1.0}, {0.3, 0.1}, {0.3, 0.1}), 0.0);
  EXPECT_LE(transfer_commutator({2, 0.5}, 0.1, 0.7), 1e-12);
}

TEST(HamiltonianIdentity, ReconstructsHamiltonian) {
  EXPECT_LE(hamiltonian_identity_check({2, 1.0}), 1e-6);
  EXPECT_LE(hamiltonian_identity_check({6, 0.5}), 1e-6);

  const Eigen::MatrixXcd h2 = reconstruct_hamiltonian({2, 1.0});
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h2);
  std::vector<double> ev;
  for (int i = 0; i < 4; ++i) ev.push_back(es.eigenvalues()[i].real());
  std::sort(ev.begin(), ev.end());
  const double expected[] = {-2, -2, 2, 2};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(ev[i], expected[i], 1e-6);
}

TEST(HamiltonianIdentity, SecondOrderInStep) {
  const ModelParams p(4, 1.0);
  const double r1 = hamiltonian_identity_check(p, 4e-3);
  const double r2 = hamiltonian_identity_check(p, 2e-3);
  EXPECT_GT(r1 / r2, 3.5);
  EXPECT_LT(r1 / r2, 4.5);
}

TEST(HamiltonianIdentity, SpectrumUpToEightSites) {
  const ModelParams p(8, 1.0);
  const Eigen::MatrixXcd rec = reconstruct_hamiltonian(p);
  const Eigen::MatrixXd herm = (0.5 * (rec + rec.adjoint())).real();
  const auto a = detail::dense_eigenvalues(herm);
  const auto b = lowest_eigenvalues(p, 1).energies;
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-5);
}

TEST(SpectralSampling, RespectsExclusions) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 1000; ++t) {
    const cplx u = sample_spectral_point(rng, 1.0);
    EXPECT_LE(std::abs(u.real()), 1.0);
    EXPECT_LE(std::abs(u.imag()), 1.0);
    EXPECT_GE(std::abs(std::sinh(u)), 0.5e-2);
    EXPECT_GE(std::abs(std::sinh(u + 1.0)), 0.5e-2);
  }
}

TEST(Verification, RecordsPass) {
  const auto recs = verify_integrability({4, 1.0}, 5);
  ASSERT_EQ(recs.size(), 3u);
  for (const auto& r : recs) EXPECT_TRUE(r.pass) << r.check << " " << r.residual;
}
