#include "fidsus/thermal.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <sstream>
#include <tuple>
#include <vector>

using namespace fidsus;

namespace {

// Brute-force oracle for the 2x2 torus, written against the same bond
// convention (right + down neighbour per site, so the two bonds of a
// width-2 pair are both counted) but sharing no code with the library.
struct MicroState {
  int e;  // E / J
  int m;
};

std::vector<MicroState> two_by_two_states() {
  std::vector<MicroState> out;
  for (int c = 0; c < 16; ++c) {
    const auto s = [&](int x, int y) {
      return ((c >> ((y & 1) * 2 + (x & 1))) & 1) ? 1 : -1;
    };
    int bonds = 0, m = 0;
    for (int y = 0; y < 2; ++y) {
      for (int x = 0; x < 2; ++x) {
        bonds += s(x, y) * s(x + 1, y) + s(x, y) * s(x, y + 1);
        m += s(x, y);
      }
    }
    out.push_back({-bonds, m});
  }
  return out;
}

struct BruteMoments {
  double lnz, mean_e, var_e, mean_m, var_m;
};

BruteMoments brute_moments(double beta, double h) {
  const auto states = two_by_two_states();
  double z = 0.0, se = 0.0, se2 = 0.0, sm = 0.0, sm2 = 0.0;
  for (const auto& st : states) {
    const double w = std::exp(-beta * (st.e - h * st.m));
    z += w;
    se += w * st.e;
    se2 += w * st.e * st.e;
    sm += w * st.m;
    sm2 += w * st.m * st.m;
  }
  BruteMoments b;
  b.lnz = std::log(z);
  b.mean_e = se / z;
  b.var_e = se2 / z - b.mean_e * b.mean_e;
  b.mean_m = sm / z;
  b.var_m = sm2 / z - b.mean_m * b.mean_m;
  return b;
}

}  // namespace

TEST(Enumerate, TwoByTwoJointTable) {
  const auto dos = enumerate_dos(2, 2);
  ASSERT_TRUE(dos.m_resolved);
  ASSERT_EQ(dos.kind, DosKind::exact);

  const std::vector<std::tuple<int, int, std::uint64_t>> want{
      {-8, -4, 1}, {-8, 4, 1}, {0, -2, 4}, {0, 0, 4}, {0, 2, 4}, {8, 0, 2}};
  ASSERT_EQ(dos.bins.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    EXPECT_EQ(dos.bins[i].e, std::get<0>(want[i])) << i;
    EXPECT_EQ(dos.bins[i].m, std::get<1>(want[i])) << i;
    EXPECT_EQ(dos.bins[i].count, std::get<2>(want[i])) << i;
    EXPECT_DOUBLE_EQ(dos.bins[i].ln_w, std::log(static_cast<double>(std::get<2>(want[i]))))
        << i;
  }

  std::uint64_t total = 0;
  for (const auto& b : dos.bins) total += b.count;
  EXPECT_EQ(total, 16u);
}

TEST(Enumerate, MatchesBruteForceThermodynamics) {
  const auto dos = enumerate_dos(2, 2);
  for (double beta : {0.05, 0.3, 1.0}) {
    for (double h : {0.0, 0.3}) {
      const auto want = brute_moments(beta, h);
      EXPECT_NEAR(log_partition_function(dos, beta, h), want.lnz, 1e-13);
      const auto mom = thermal_moments(dos, beta, h);
      EXPECT_NEAR(mom.mean_e, want.mean_e, 1e-12);
      EXPECT_NEAR(mom.var_e, want.var_e, 1e-11);
      EXPECT_NEAR(mom.mean_m, want.mean_m, 1e-12);
      EXPECT_NEAR(mom.var_m, want.var_m, 1e-11);
    }
  }
}

TEST(Enumerate, LatticeValidation) {
  EXPECT_THROW(enumerate_dos(1, 4), ArgumentError);
  EXPECT_THROW(enumerate_dos(4, 1), ArgumentError);
  EXPECT_THROW(enumerate_dos(2, 13), SizingError);
  EXPECT_THROW(enumerate_dos(2, 2, 0.0), ArgumentError);
  EXPECT_THROW(enumerate_dos(2, 2, -1.0), ArgumentError);
}

TEST(Fidelity, ThreeLevelClosedForm) {
  const auto dos = enumerate_dos(2, 2);
  const auto z = [](double b) { return 2.0 * std::exp(8.0 * b) + 12.0 + 2.0 * std::exp(-8.0 * b); };
  for (double beta : {0.2, 0.7}) {
    for (double db : {0.0, 0.05, 0.2}) {
      const double want =
          z(beta) / std::sqrt(z(beta - db / 2) * z(beta + db / 2));
      const double got = thermal_fidelity(dos, beta, db);
      EXPECT_NEAR(got, want, 1e-12);
      EXPECT_LE(got, 1.0);
    }
  }
  EXPECT_DOUBLE_EQ(thermal_fidelity(dos, 0.4, 0.0), 1.0);
  EXPECT_THROW(thermal_fidelity(dos, 0.1, 0.3), ArgumentError);
  EXPECT_THROW(thermal_fidelity(dos, 0.1, -0.1), ArgumentError);
}

TEST(ChiTemperature, FluctuationIdentityAgainstOracle) {
  const auto dos = enumerate_dos(2, 2);
  for (double beta : {0.2, 0.4, 0.8}) {
    const auto want = brute_moments(beta, 0.0);
    // chi_F is exponentially small at beta = 0.8; a 3e-3 interval keeps the
    // ln Z curvature above double rounding noise there.
    const auto chi = chi_f_temperature(dos, beta, 3e-3);
    EXPECT_NEAR(chi.chi_f, want.var_e / 4.0, 1e-11 * want.var_e);
    EXPECT_NEAR(chi.aux, beta * beta * want.var_e, 1e-11 * want.var_e);
    // The ln Z curvature route must land on the same number.
    EXPECT_LT(chi.rel_deviation, 1e-4) << "beta=" << beta;
  }
  // High-temperature limit: Var(E) -> 16 on the 2x2 torus, chi_F -> 4.
  EXPECT_NEAR(chi_f_temperature(dos, 0.01, 1e-3).chi_f, 4.0, 0.05);
  EXPECT_THROW(chi_f_temperature(dos, 0.1, 0.3), ArgumentError);
}

TEST(ChiField, FluctuationIdentityAgainstOracle) {
  const auto dos = enumerate_dos(2, 2);
  for (double beta : {0.3, 0.6}) {
    for (double h : {0.0, 0.1, 0.4}) {
      const auto want = brute_moments(beta, h);
      const auto chi = chi_f_field(dos, beta, h);
      EXPECT_NEAR(chi.chi_f, beta * beta * want.var_m / 4.0, 1e-11) << beta << " " << h;
      EXPECT_NEAR(chi.aux, beta * want.var_m, 1e-11);
      EXPECT_LT(chi.rel_deviation, 1e-6) << "beta=" << beta << " h=" << h;
    }
  }
  // chi = beta Var(M) -> 4 beta as beta -> 0 (Curie law with <M^2> = 4); the
  // leading correction is the bond term ~ 4 beta <M^2>, so sample well below it.
  EXPECT_NEAR(chi_f_field(dos, 1e-3, 0.0, 1e-4).aux / 1e-3, 4.0, 0.05);

  DensityOfStates no_m = dos;
  no_m.m_resolved = false;
  EXPECT_THROW(chi_f_field(no_m, 0.3, 0.0), ArgumentError);
  EXPECT_THROW(log_partition_function(no_m, 0.3, 0.1), ArgumentError);
  EXPECT_NO_THROW(log_partition_function(no_m, 0.3, 0.0));
}

TEST(WangLandau, TwoByTwoConvergesToExactCounts) {
  const auto est = wang_landau(2, 2);
  ASSERT_EQ(est.bins.size(), 3u);
  const std::array<int, 3> level{-8, 0, 8};
  const std::array<double, 3> ln_count{std::log(2.0), std::log(12.0), std::log(2.0)};
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(est.bins[i].e, level[i]);
    EXPECT_NEAR(est.bins[i].ln_w, ln_count[i], 0.02) << "E=" << level[i];
  }
  EXPECT_DOUBLE_EQ(est.bins[0].ln_w, std::log(2.0));  // normalization anchor
}

TEST(WangLandau, FourByFourMatchesEnumeration) {
  const auto exact = enumerate_dos(4, 4);
  // Aggregate the joint table over M.
  std::vector<double> ln_g;
  std::vector<int> level;
  for (const auto& b : exact.bins) {
    if (!level.empty() && level.back() == b.e) {
      ln_g.back() = std::log(std::exp(ln_g.back()) + static_cast<double>(b.count));
    } else {
      level.push_back(b.e);
      ln_g.push_back(std::log(static_cast<double>(b.count)));
    }
  }

  const auto est = wang_landau(4, 4);
  ASSERT_EQ(est.bins.size(), level.size());
  for (std::size_t i = 0; i < level.size(); ++i) {
    ASSERT_EQ(est.bins[i].e, level[i]);
    EXPECT_NEAR(est.bins[i].ln_w, ln_g[i], 0.05) << "E=" << level[i];
  }
}

TEST(WangLandau, DeterministicPerSeed) {
  WangLandauParams p;
  p.seed = 7;
  const auto a = wang_landau(2, 2, 1.0, p);
  const auto b = wang_landau(2, 2, 1.0, p);
  ASSERT_EQ(a.bins.size(), b.bins.size());
  for (std::size_t i = 0; i < a.bins.size(); ++i) {
    EXPECT_EQ(a.bins[i].ln_w, b.bins[i].ln_w);
  }
}

TEST(WangLandau, Validation) {
  EXPECT_THROW(wang_landau(3, 4), ArgumentError);
  EXPECT_THROW(wang_landau(4, 3), ArgumentError);
  WangLandauParams bad;
  bad.flatness = 1.5;
  EXPECT_THROW(wang_landau(2, 2, 1.0, bad), ArgumentError);
  bad = {};
  bad.ln_f_final = 2.0;  // above ln_f_init
  EXPECT_THROW(wang_landau(2, 2, 1.0, bad), ArgumentError);

  // A 4x4 walk cannot touch all fifteen levels within one sweep.
  WangLandauParams capped;
  capped.coverage_cap_sweeps = 1;
  try {
    wang_landau(4, 4, 1.0, capped);
    FAIL() << "expected CoverageError";
  } catch (const CoverageError& e) {
    EXPECT_FALSE(e.missing_bins.empty());
  }
}

TEST(DosIo, RoundTripIsByteIdentical) {
  const auto dos = enumerate_dos(2, 3);
  std::ostringstream first;
  save_dos(dos, first);

  std::istringstream in(first.str());
  const auto back = load_dos(in);
  EXPECT_EQ(back.lx, dos.lx);
  EXPECT_EQ(back.ly, dos.ly);
  EXPECT_EQ(back.kind, dos.kind);
  EXPECT_EQ(back.m_resolved, dos.m_resolved);
  ASSERT_EQ(back.bins.size(), dos.bins.size());
  for (std::size_t i = 0; i < dos.bins.size(); ++i) {
    EXPECT_EQ(back.bins[i].e, dos.bins[i].e);
    EXPECT_EQ(back.bins[i].m, dos.bins[i].m);
    EXPECT_EQ(back.bins[i].ln_w, dos.bins[i].ln_w);
    EXPECT_EQ(back.bins[i].count, dos.bins[i].count);
  }

  std::ostringstream second;
  save_dos(back, second);
  EXPECT_EQ(first.str(), second.str());
}

TEST(DosIo, RejectsMalformedInput) {
  std::istringstream empty("");
  EXPECT_THROW(load_dos(empty), IoError);
  std::istringstream wrong("# other format v2\n");
  EXPECT_THROW(load_dos(wrong), IoError);
  std::istringstream headers_only(
      "# fidsus-dos v1\n# lattice 2 2 1\n# kind exact\n# m_resolved 1\n");
  EXPECT_THROW(load_dos(headers_only), IoError);
  std::istringstream bad_kind(
      "# fidsus-dos v1\n# lattice 2 2 1\n# kind guess\n# m_resolved 1\n-8 4 0\n");
  EXPECT_THROW(load_dos(bad_kind), IoError);
  std::istringstream bad_bin(
      "# fidsus-dos v1\n# lattice 2 2 1\n# kind exact\n# m_resolved 1\n-8 x 0\n");
  EXPECT_THROW(load_dos(bad_bin), IoError);
}
