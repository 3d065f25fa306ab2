#include "fidsus/eigensolver.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "fidsus/hamiltonian.hpp"

using namespace fidsus;

namespace {

SparseOperator diag_operator(const std::vector<double>& d) {
  return SparseOperator::from_rows(d.size(), [&](std::size_t r, auto& row) {
    if (d[r] != 0.0) row.emplace_back(static_cast<std::uint32_t>(r), d[r]);
  });
}

SparseOperator hubbard_at(int L, Boundary b, double u) {
  const FockBasis basis(L, L / 2, L / 2);
  const auto ops = build_hubbard({L, 1.0, u, b, L / 2, L / 2}, basis);
  return hamiltonian_at(ops.h0, ops.hi, u);
}

}  // namespace

TEST(Lanczos, FreeChainGroundEnergy) {
  // Half-filled L = 6 ring at U = 0: filled one-particle levels
  // -2, -1, -1 per spin, so E0 = -8 t.
  const auto h = hubbard_at(6, Boundary::periodic, 0.0);
  const auto g = lanczos_ground(h);
  EXPECT_NEAR(g.e0, -8.0, 1e-9);
  EXPECT_LE(g.residual, 1e-10);
  EXPECT_GT(g.iterations, 0);
}

TEST(Lanczos, MatchesDenseRoute) {
  const auto h = hubbard_at(6, Boundary::periodic, 2.0);
  const auto g = lanczos_ground(h);
  const auto s = dense_spectrum(h);
  EXPECT_NEAR(g.e0, s.evals[0], 1e-10);
  // Same state up to machine noise once both carry the canonical sign.
  double ov = 0.0;
  for (std::size_t i = 0; i < g.psi.size(); ++i) {
    ov += g.psi[i] * s.evecs(static_cast<Eigen::Index>(i), 0);
  }
  EXPECT_NEAR(ov, 1.0, 1e-9);
}

TEST(Lanczos, DeterministicForFixedSeed) {
  const auto h = hubbard_at(6, Boundary::periodic, 1.5);
  LanczosParams p;
  p.seed = 99;
  const auto a = lanczos_ground(h, p);
  const auto b = lanczos_ground(h, p);
  EXPECT_EQ(a.e0, b.e0);
  EXPECT_EQ(a.psi, b.psi);

  p.seed = 100;
  const auto c = lanczos_ground(h, p);
  EXPECT_NEAR(a.e0, c.e0, 1e-9);
  double ov = 0.0;
  for (std::size_t i = 0; i < a.psi.size(); ++i) ov += a.psi[i] * c.psi[i];
  EXPECT_NEAR(ov, 1.0, 1e-8);  // canonical sign makes the match exact, not just |.|
}

TEST(Lanczos, CanonicalSignConvention) {
  const auto h = hubbard_at(6, Boundary::periodic, 1.0);
  const auto g = lanczos_ground(h);
  double peak = 0.0;
  for (double x : g.psi) {
    if (std::abs(x) > std::abs(peak)) peak = x;
  }
  EXPECT_GT(peak, 0.0);

  const auto s = dense_spectrum(h);
  for (int c = 0; c < 5; ++c) {
    double col_peak = 0.0;
    for (std::size_t i = 0; i < s.evals.size(); ++i) {
      const double x = s.evecs(static_cast<Eigen::Index>(i), c);
      if (std::abs(x) > std::abs(col_peak)) col_peak = x;
    }
    EXPECT_GT(col_peak, 0.0);
  }
}

TEST(Lanczos, ExhaustsTinyInvariantSubspace) {
  const auto h = hubbard_at(2, Boundary::open, 4.0);  // dim 4
  LanczosParams p;
  p.max_iter = 50;
  const auto g = lanczos_ground(h, p);
  EXPECT_LE(g.iterations, 4);
  EXPECT_NEAR(g.e0, (4.0 - std::sqrt(32.0)) / 2.0, 1e-12);
}

TEST(Lanczos, ConvergenceErrorCarriesResidual) {
  const auto h = hubbard_at(6, Boundary::periodic, 1.0);
  LanczosParams p;
  p.max_iter = 3;
  p.tol = 1e-13;
  try {
    lanczos_ground(h, p);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.residual, 1e-13);
  }
}

TEST(LowestTwo, ResolvesExactDegeneracy) {
  // Plain Lanczos cannot see the second copy of a degenerate level; the
  // deflated second run must return e1 = e0.
  const auto h = diag_operator({-3.0, -3.0, 1.0, 2.0, 5.0});
  const auto lt = lanczos_lowest_two(h);
  EXPECT_NEAR(lt.ground.e0, -3.0, 1e-12);
  EXPECT_NEAR(lt.e1, -3.0, 1e-9);
  EXPECT_EQ(gap_check(lt.ground.e0, lt.e1, default_gap_tol(lt.ground.e0)),
            Degeneracy::degenerate);
}

TEST(LowestTwo, ResolvesNondegenerateGap) {
  const auto h = hubbard_at(6, Boundary::periodic, 1.0);
  const auto lt = lanczos_lowest_two(h);
  EXPECT_GT(lt.e1 - lt.ground.e0, 0.1);
  EXPECT_EQ(gap_check(lt.ground.e0, lt.e1, default_gap_tol(lt.ground.e0)),
            Degeneracy::nondegenerate);

  const auto s = dense_spectrum(h);
  EXPECT_NEAR(lt.e1, s.evals[1], 1e-7);
}

TEST(LowestTwo, OpenShellRingIsDegenerate) {
  // Half-filled L = 4 ring (periodic): one electron per spin sits in the
  // twofold k = +-pi/2 shell.
  const auto h = hubbard_at(4, Boundary::periodic, 0.0);
  const auto lt = lanczos_lowest_two(h);
  EXPECT_EQ(gap_check(lt.ground.e0, lt.e1, default_gap_tol(lt.ground.e0)),
            Degeneracy::degenerate);
  // The antiperiodic twist closes the shell.
  const auto ht = hubbard_at(4, Boundary::antiperiodic, 0.0);
  const auto ltt = lanczos_lowest_two(ht);
  EXPECT_EQ(gap_check(ltt.ground.e0, ltt.e1, default_gap_tol(ltt.ground.e0)),
            Degeneracy::nondegenerate);
  EXPECT_NEAR(ltt.ground.e0, -4.0 * std::sqrt(2.0), 1e-9);
}

TEST(Dense, RefusesAboveThreshold) {
  const auto h = hubbard_at(4, Boundary::antiperiodic, 1.0);  // dim 36
  EXPECT_THROW(dense_spectrum(h, 35), SizingError);
  EXPECT_NO_THROW(dense_spectrum(h, 36));
}

TEST(Dense, OrthonormalAscending) {
  const auto h = hubbard_at(4, Boundary::antiperiodic, 1.0);
  const auto s = dense_spectrum(h);
  for (std::size_t k = 1; k < s.evals.size(); ++k) EXPECT_LE(s.evals[k - 1], s.evals[k]);
  const Eigen::MatrixXd gram = s.evecs.transpose() * s.evecs;
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(36, 36)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GapCheck, DefaultTolerance) {
  EXPECT_DOUBLE_EQ(default_gap_tol(-0.5), 1e-8);
  EXPECT_DOUBLE_EQ(default_gap_tol(-8.0), 8e-8);
  EXPECT_EQ(gap_check(-1.0, -1.0 + 5e-9, 1e-8), Degeneracy::degenerate);
  EXPECT_EQ(gap_check(-1.0, -1.0 + 5e-8, 1e-8), Degeneracy::nondegenerate);
}
