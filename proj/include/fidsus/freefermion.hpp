#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "fidsus/common.hpp"
#include "fidsus/hamiltonian.hpp"

namespace fidsus {

struct U0Result {
  int L = 0;
  Boundary boundary = Boundary::periodic;
  double chi = 0.0;
  double chi_per_site = 0.0;
};

// Fidelity susceptibility of the half-filled chain at the free point U = 0,
// summed in closed form over momentum-conserving double particle-hole
// excitations:
//   chi_F = (1/L^2) sum_{q != 0} sum_{k, k'} 1 / (eps_{k+q} - eps_k
//                                              + eps_{k'-q} - eps_{k'})^2,
// k running over occupied/empty pairs for the up species and k' for down.
// The boundary follows the L mod 4 rule so the Fermi sea is a closed shell
// and every denominator is bounded below by twice the single-particle gap.
//
// Cost is O(L^3) with O(L) memory; sums are taken in a fixed order (q outer,
// ascending pair lists inner) with compensated accumulation.
inline U0Result chi_f_u0(int L, double t = 1.0) {
  if (L < 6 || L % 2 != 0) throw ArgumentError("chi_f_u0: L must be even and >= 6");
  if (t <= 0.0) throw ArgumentError("chi_f_u0: t must be positive");
  const Boundary boundary = boundary_rule(L);
  const double offset = (boundary == Boundary::antiperiodic) ? 0.5 : 0.0;

  std::vector<double> eps(static_cast<std::size_t>(L));
  for (int m = 0; m < L; ++m) {
    eps[static_cast<std::size_t>(m)] =
        -2.0 * t * std::cos(2.0 * std::numbers::pi * (m + offset) / L);
  }

  // Occupy the L/2 lowest levels (ties broken by index; the closed shell
  // guarantees a real gap at the Fermi level).
  std::vector<int> order(static_cast<std::size_t>(L));
  for (int m = 0; m < L; ++m) order[static_cast<std::size_t>(m)] = m;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return eps[static_cast<std::size_t>(a)] < eps[static_cast<std::size_t>(b)]; });
  std::vector<char> occ(static_cast<std::size_t>(L), 0);
  for (int i = 0; i < L / 2; ++i) occ[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;
  const double fermi_gap = eps[static_cast<std::size_t>(order[static_cast<std::size_t>(L / 2)])] -
                           eps[static_cast<std::size_t>(order[static_cast<std::size_t>(L / 2 - 1)])];
  if (fermi_gap <= 1e-9 * t) {
    throw ArgumentError("chi_f_u0: open shell at the Fermi level");
  }

  KahanSum total;
  std::vector<double> ph_up, ph_dn;
  ph_up.reserve(static_cast<std::size_t>(L));
  ph_dn.reserve(static_cast<std::size_t>(L));
  for (int dq = 1; dq < L; ++dq) {
    ph_up.clear();
    ph_dn.clear();
    for (int m = 0; m < L; ++m) {
      const int up_to = (m + dq) % L;
      if (occ[static_cast<std::size_t>(m)] && !occ[static_cast<std::size_t>(up_to)]) {
        ph_up.push_back(eps[static_cast<std::size_t>(up_to)] - eps[static_cast<std::size_t>(m)]);
      }
      const int dn_to = (m - dq + L) % L;
      if (occ[static_cast<std::size_t>(m)] && !occ[static_cast<std::size_t>(dn_to)]) {
        ph_dn.push_back(eps[static_cast<std::size_t>(dn_to)] - eps[static_cast<std::size_t>(m)]);
      }
    }
    KahanSum per_q;
    for (const double eu : ph_up) {
      for (const double ed : ph_dn) {
        const double de = eu + ed;
        // Closed shell puts every excitation at least one Fermi gap up, per
        // species; anything below that means the occupation set is broken.
        if (de < 2.0 * fermi_gap * (1.0 - 1e-12)) {
          throw BreakdownError("chi_f_u0: denominator below the two-particle gap");
        }
        per_q.add(1.0 / (de * de));
      }
    }
    total.add(per_q.value());
  }

  U0Result r;
  r.L = L;
  r.boundary = boundary;
  r.chi = total.value() / (static_cast<double>(L) * static_cast<double>(L));
  r.chi_per_site = r.chi / L;
  return r;
}

inline std::vector<U0Result> chi_scaling_series(std::span<const int> ladder,
                                                double t = 1.0) {
  std::vector<U0Result> rows;
  rows.reserve(ladder.size());
  for (int L : ladder) rows.push_back(chi_f_u0(L, t));
  return rows;
}

}  // namespace fidsus
