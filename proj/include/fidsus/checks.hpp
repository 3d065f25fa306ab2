#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "fidsus/basis.hpp"
#include "fidsus/common.hpp"
#include "fidsus/eigensolver.hpp"
#include "fidsus/fidelity.hpp"
#include "fidsus/freefermion.hpp"
#include "fidsus/hamiltonian.hpp"
#include "fidsus/thermal.hpp"

namespace fidsus {

struct CheckResult {
  std::string name;
  double deviation = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct ValidateOptions {
  // Self-test hook: flips the sign of one route's chi_F inside the four-route
  // agreement block, which must turn exactly that named check red.
  bool inject_fault = false;
};

namespace detail {

inline double rel_spread(std::span<const double> xs) {
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  return (*hi - *lo) / std::max(std::abs(*hi), std::abs(*lo));
}

inline CheckResult checked(std::string name, double deviation, double tolerance) {
  CheckResult c;
  c.name = std::move(name);
  c.deviation = deviation;
  c.tolerance = tolerance;
  c.passed = deviation <= tolerance;
  return c;
}

}  // namespace detail

// Cross-route and oracle invariants, cheap enough to run on every checkout.
// Each result reports the measured deviation against its pinned tolerance.
inline std::vector<CheckResult> run_validation(const ValidateOptions& opts = {}) {
  std::vector<CheckResult> out;

  {  // Two-site chain against the closed form 4 t^2 / (U^2 + 16 t^2)^2.
    const FockBasis basis(2, 1, 1);
    const auto ops = build_hubbard({2, 1.0, 0.0, boundary_rule(2), 1, 1}, basis);
    const double u = 1.0;
    const double exact = 4.0 / std::pow(u * u + 16.0, 2);
    const auto s = dense_spectrum(hamiltonian_at(ops.h0, ops.hi, u));
    const double worst = std::max(
        {std::abs(chi_f_finite_difference(ops.h0, ops.hi, u, 0.01).chi_f - exact),
         std::abs(chi_f_spectral(s, ops.hi, u).chi_f - exact),
         std::abs(chi_f_dynamic(s, ops.hi, 0.0, u).chi_f - exact),
         std::abs(chi_f_krylov(ops.h0, ops.hi, u).chi_f - exact)});
    out.push_back(detail::checked("two_site_closed_form", worst / exact, 1e-6));
  }

  {  // All four routes on L = 4 antiperiodic half filling at U = 2.
    const FockBasis basis(4, 2, 2);
    const auto ops = build_hubbard({4, 1.0, 0.0, Boundary::antiperiodic, 2, 2}, basis);
    const double u = 2.0;
    const auto s = dense_spectrum(hamiltonian_at(ops.h0, ops.hi, u));
    LanczosParams tight;
    tight.tol = 1e-11;
    std::vector<double> chis{
        chi_f_finite_difference(ops.h0, ops.hi, u, 4e-3, tight).chi_f,
        chi_f_spectral(s, ops.hi, u).chi_f,
        chi_f_dynamic(s, ops.hi, 0.0, u).chi_f,
        chi_f_krylov(ops.h0, ops.hi, u).chi_f,
    };
    if (opts.inject_fault) chis[1] = -chis[1];
    out.push_back(
        detail::checked("four_route_agreement_L4", detail::rel_spread(chis), 1e-5));

    const double sp = chis[1], dy = chis[2];
    out.push_back(detail::checked("dynamic_w0_equals_spectral",
                                  std::abs(dy - sp) / std::abs(sp), 1e-14));

    const auto kr = chi_f_krylov(ops.h0, ops.hi, u);
    out.push_back(detail::checked("krylov_exhausted_error_estimate",
                                  std::abs(kr.error_estimate), 1e-300));
  }

  {  // Interaction diagonal: trace(HI)/dim = n_up n_dn / L.
    const FockBasis basis(6, 3, 3);
    const auto ops = build_hubbard({6, 1.0, 0.0, Boundary::periodic, 3, 3}, basis);
    long long trace = 0;
    for (const auto d : ops.hi) trace += d;
    const double got = static_cast<double>(trace) / static_cast<double>(basis.dim());
    out.push_back(detail::checked("hi_trace_identity", std::abs(got - 3.0 * 3.0 / 6.0), 1e-15));

    const auto g = lanczos_ground(ops.h0);
    out.push_back(detail::checked("free_chain_ground_energy", std::abs(g.e0 + 8.0), 1e-9));

    const auto s = dense_spectrum(ops.h0);
    const double ed = chi_f_spectral(s, ops.hi, 0.0).chi_f;
    const double ph = chi_f_u0(6).chi;
    out.push_back(
        detail::checked("freefermion_vs_ed_L6", std::abs(ph - ed) / ed, 1e-10));
  }

  {  // Connected correlator at tau = 0 reproduces the coupling variance.
    const FockBasis basis(4, 2, 2);
    const auto ops = build_hubbard({4, 1.0, 0.0, Boundary::antiperiodic, 2, 2}, basis);
    const auto h = hamiltonian_at(ops.h0, ops.hi, 1.5);
    const auto g = lanczos_ground(h);
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < g.psi.size(); ++i) {
      const double p = g.psi[i] * g.psi[i];
      m1 += p * ops.hi[i];
      m2 += p * ops.hi[i] * ops.hi[i];
    }
    const double got = connected_correlator(g.psi, g.e0, h, ops.hi, 0.0);
    out.push_back(detail::checked("correlator_tau0_variance",
                                  std::abs(got - (m2 - m1 * m1)), 1e-10));
  }

  {  // Fluctuation identities on the 4x4 torus (exact enumeration).
    const auto dos = enumerate_dos(4, 4);
    out.push_back(detail::checked("thermal_beta_identity_4x4",
                                  chi_f_temperature(dos, 0.4).rel_deviation, 1e-4));
    out.push_back(detail::checked("thermal_field_identity_4x4",
                                  chi_f_field(dos, 0.3, 0.1).rel_deviation, 1e-5));
  }

  {  // Wang-Landau against exact counts on the 2x2 torus.
    const auto est = wang_landau(2, 2);
    const double want[3] = {std::log(2.0), std::log(12.0), std::log(2.0)};
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
      worst = std::max(worst, std::abs(est.bins[static_cast<std::size_t>(i)].ln_w - want[i]));
    }
    out.push_back(detail::checked("wang_landau_2x2_ln_g", worst, 0.02));
  }

  {  // Density-of-states file round trip must be byte-identical.
    const auto dos = enumerate_dos(2, 3);
    std::ostringstream first;
    save_dos(dos, first);
    std::istringstream in(first.str());
    std::ostringstream second;
    save_dos(load_dos(in), second);
    out.push_back(detail::checked("dos_io_roundtrip",
                                  first.str() == second.str() ? 0.0 : 1.0, 0.5));
  }

  return out;
}

inline bool all_passed(std::span<const CheckResult> checks) {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.passed; });
}

// One line per check: name,deviation,tolerance,status.
inline void write_report(std::span<const CheckResult> checks, std::ostream& os) {
  os << "check,deviation,tolerance,status\n";
  char buf[64];
  for (const CheckResult& c : checks) {
    std::snprintf(buf, sizeof buf, "%.3g,%.3g", c.deviation, c.tolerance);
    os << c.name << ',' << buf << ',' << (c.passed ? "PASS" : "FAIL") << '\n';
  }
}

}  // namespace fidsus
