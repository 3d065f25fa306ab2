#include "fidsus/freefermion.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "fidsus/basis.hpp"
#include "fidsus/fidelity.hpp"
#include "fidsus/hamiltonian.hpp"

using namespace fidsus;

TEST(FreeFermion, Validation) {
  EXPECT_THROW(chi_f_u0(5), ArgumentError);
  EXPECT_THROW(chi_f_u0(7), ArgumentError);
  EXPECT_THROW(chi_f_u0(2), ArgumentError);   // below the supported range
  EXPECT_THROW(chi_f_u0(4), ArgumentError);
  EXPECT_THROW(chi_f_u0(6, 0.0), ArgumentError);
  EXPECT_THROW(chi_f_u0(6, -1.0), ArgumentError);
}

TEST(FreeFermion, FrozenReferenceValues) {
  // Oracle: independent brute-force enumeration of all momentum-conserving
  // double particle-hole quadruples (no per-transfer pair lists).
  EXPECT_NEAR(chi_f_u0(6).chi, 0.020109953703703703, 1e-14);
  EXPECT_NEAR(chi_f_u0(10).chi, 0.037078092700025225, 1e-14);

  EXPECT_EQ(chi_f_u0(6).boundary, Boundary::periodic);
  EXPECT_EQ(chi_f_u0(8).boundary, Boundary::antiperiodic);
  EXPECT_EQ(chi_f_u0(10).boundary, Boundary::periodic);
  EXPECT_EQ(chi_f_u0(12).boundary, Boundary::antiperiodic);
}

TEST(FreeFermion, ScalesLinearlyInInverseT) {
  // eps ~ t implies chi_F ~ 1/t^2 exactly; checks the t plumbing.
  const double base = chi_f_u0(10, 1.0).chi;
  EXPECT_NEAR(chi_f_u0(10, 2.0).chi, base / 4.0, 1e-15);
  EXPECT_NEAR(chi_f_u0(10, 0.5).chi, base * 4.0, 1e-12);
}

TEST(FreeFermion, MatchesInteractingEngineAtU0) {
  // L = 6 periodic half filling, dim 400: dense spectral sum at U = 0.
  {
    const FockBasis basis(6, 3, 3);
    const auto ops = build_hubbard({6, 1.0, 0.0, Boundary::periodic, 3, 3}, basis);
    const auto s = dense_spectrum(ops.h0);
    const double ed = chi_f_spectral(s, ops.hi, 0.0).chi_f;
    const double ph = chi_f_u0(6).chi;
    EXPECT_LE(std::abs(ph - ed) / ed, 1e-10);
  }
  // L = 8 antiperiodic, dim 4900: Krylov route (past the dense threshold).
  {
    const FockBasis basis(8, 4, 4);
    const auto ops = build_hubbard({8, 1.0, 0.0, Boundary::antiperiodic, 4, 4}, basis);
    const auto kr = chi_f_krylov(ops.h0, ops.hi, 0.0, 150);
    const double ph = chi_f_u0(8).chi;
    EXPECT_LE(std::abs(ph - kr.chi_f) / ph, 1e-6);
  }
}

TEST(FreeFermion, DeterministicAcrossCalls) {
  const auto a = chi_f_u0(66);
  const auto b = chi_f_u0(66);
  EXPECT_EQ(a.chi, b.chi);
  EXPECT_EQ(a.chi_per_site, b.chi_per_site);
}

TEST(FreeFermion, ScalingSeriesCauchyPlateau) {
  const std::array<int, 6> ladder{6, 10, 18, 34, 66, 130};
  const auto rows = chi_scaling_series(ladder);
  ASSERT_EQ(rows.size(), ladder.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].L, ladder[i]);
    EXPECT_GT(rows[i].chi, 0.0);
    EXPECT_DOUBLE_EQ(rows[i].chi_per_site, rows[i].chi / ladder[i]);
  }
  // chi/L approaches a plateau: successive differences shrink.
  double prev_step = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double step = std::abs(rows[i].chi_per_site - rows[i - 1].chi_per_site);
    EXPECT_LT(step, prev_step);
    prev_step = step;
  }
  // Small L sits visibly off the plateau.
  EXPECT_GT(std::abs(rows.front().chi_per_site - rows.back().chi_per_site),
            10.0 * std::abs(rows[5].chi_per_site - rows[4].chi_per_site));
}
