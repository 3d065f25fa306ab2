#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fidsus/common.hpp"
#include "fidsus/eigensolver.hpp"
#include "fidsus/hamiltonian.hpp"

namespace fidsus {

enum class Route { finite_difference, spectral, dynamic_w0, krylov_integral };

inline const char* to_string(Route r) {
  switch (r) {
    case Route::finite_difference: return "finite_difference";
    case Route::spectral: return "spectral";
    case Route::dynamic_w0: return "dynamic_w0";
    case Route::krylov_integral: return "krylov_integral";
  }
  return "?";
}

struct SusceptibilityResult {
  double lambda = 0.0;
  double chi_f = 0.0;
  Route route = Route::spectral;
  double delta = 0.0;      // finite-difference interval
  double omega = 0.0;      // dynamic-form frequency
  int krylov_m = 0;        // Krylov depth actually used
  double fidelity = std::numeric_limits<double>::quiet_NaN();
  double error_estimate = 0.0;
};

// |<a|b>| for unit vectors. Clamped to [0, 1]; rounding can push the raw
// inner product a few ulp above one when the states coincide.
inline double overlap_fidelity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("overlap_fidelity: dimension mismatch");
  const double na = norm(a), nb = norm(b);
  if (std::abs(na - 1.0) > 1e-8 || std::abs(nb - 1.0) > 1e-8) {
    throw ArgumentError("overlap_fidelity: states must be normalized");
  }
  return std::min(std::abs(dot(a, b)), 1.0);
}

namespace detail {

inline std::vector<double> apply_diag(const std::vector<std::int32_t>& d,
                                      std::span<const double> x) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = d[i] * x[i];
  return y;
}

inline void require_gap(double e0, double e1, const std::string& where) {
  const double gt = default_gap_tol(e0);
  if (gap_check(e0, e1, gt) == Degeneracy::degenerate) {
    throw DegeneracyError(where + ": ground state is degenerate (gap " +
                              std::to_string(e1 - e0) + ")",
                          e1 - e0);
  }
}

}  // namespace detail

// Ground-state fidelity susceptibility from overlaps at lambda +- delta/2,
// refined once by halving the interval. The symmetric interval makes the
// systematic error even in delta, so chi(delta) = chi + c2 delta^2 + ... and
// the Richardson combination (4 chi_{d/2} - chi_d) / 3 cancels c2. The
// reported error estimate is |chi_{d/2} - chi_d|.
inline SusceptibilityResult chi_f_finite_difference(const SparseOperator& h0,
                                                    const std::vector<std::int32_t>& hi,
                                                    double lambda, double delta,
                                                    const LanczosParams& p = {}) {
  if (delta <= 0.0) throw ArgumentError("chi_f_finite_difference: delta must be positive");

  const auto lo = lanczos_lowest_two(hamiltonian_at(h0, hi, lambda - delta / 2), p);
  detail::require_gap(lo.ground.e0, lo.e1, "chi_f_finite_difference");
  const auto hi_ = lanczos_lowest_two(hamiltonian_at(h0, hi, lambda + delta / 2), p);
  detail::require_gap(hi_.ground.e0, hi_.e1, "chi_f_finite_difference");

  const GroundState qlo = lanczos_ground(hamiltonian_at(h0, hi, lambda - delta / 4), p);
  const GroundState qhi = lanczos_ground(hamiltonian_at(h0, hi, lambda + delta / 4), p);

  const double f_full = overlap_fidelity(lo.ground.psi, hi_.ground.psi);
  const double f_half = overlap_fidelity(qlo.psi, qhi.psi);
  const double chi_full = -2.0 * std::log(f_full) / (delta * delta);
  const double chi_half = -2.0 * std::log(f_half) / (delta * delta / 4.0);

  SusceptibilityResult r;
  r.lambda = lambda;
  r.route = Route::finite_difference;
  r.delta = delta;
  r.fidelity = f_full;
  r.chi_f = std::max(0.0, (4.0 * chi_half - chi_full) / 3.0);
  r.error_estimate = std::abs(chi_half - chi_full);
  return r;
}

// Second-order perturbative sum over the exact spectrum:
//   chi_F = sum_{n>0} |<n|HI|0>|^2 / (E_n - E_0)^2.
inline SusceptibilityResult chi_f_spectral(const Spectrum& s,
                                           const std::vector<std::int32_t>& hi,
                                           double lambda = 0.0) {
  const std::size_t n = s.evals.size();
  if (hi.size() != n) throw ArgumentError("chi_f_spectral: dimension mismatch");
  if (n > 1) detail::require_gap(s.evals[0], s.evals[1], "chi_f_spectral");

  const auto w = detail::apply_diag(hi, std::span<const double>(s.evecs.col(0).data(), n));
  KahanSum acc;
  for (std::size_t k = 1; k < n; ++k) {
    const double amp = dot(std::span<const double>(s.evecs.col(static_cast<Eigen::Index>(k)).data(), n), w);
    const double de = s.evals[k] - s.evals[0];
    acc.add(amp * amp / (de * de));
  }
  SusceptibilityResult r;
  r.lambda = lambda;
  r.route = Route::spectral;
  r.chi_f = acc.value();
  return r;
}

// Same sum with regularized denominators (E_n - E_0)^2 + omega^2. At
// omega = 0 this reproduces the spectral route identically; for large omega
// it falls off as (total off-diagonal weight) / omega^2.
inline SusceptibilityResult chi_f_dynamic(const Spectrum& s,
                                          const std::vector<std::int32_t>& hi,
                                          double omega, double lambda = 0.0) {
  if (omega < 0.0) throw ArgumentError("chi_f_dynamic: omega must be >= 0");
  const std::size_t n = s.evals.size();
  if (hi.size() != n) throw ArgumentError("chi_f_dynamic: dimension mismatch");
  if (n > 1) detail::require_gap(s.evals[0], s.evals[1], "chi_f_dynamic");

  const auto w = detail::apply_diag(hi, std::span<const double>(s.evecs.col(0).data(), n));
  KahanSum acc;
  for (std::size_t k = 1; k < n; ++k) {
    const double amp = dot(std::span<const double>(s.evecs.col(static_cast<Eigen::Index>(k)).data(), n), w);
    const double de = s.evals[k] - s.evals[0];
    acc.add(amp * amp / (de * de + omega * omega));
  }
  SusceptibilityResult r;
  r.lambda = lambda;
  r.route = Route::dynamic_w0;
  r.omega = omega;
  r.chi_f = acc.value();
  return r;
}

namespace detail {

// Ritz decomposition of the connected perturbation correlator. With
// phi = (HI - <HI>) psi0 and a Krylov space of H built from phi (psi0 locked
// out), the tridiagonal eigenpairs give
//   C(tau) = sum_k w_k exp(-(theta_k - E0) tau),
// where w_k = ||phi||^2 * (first component of Ritz vector k)^2. Locking
// keeps the n = 0 term out of the sum exactly.
struct CorrelatorDecomposition {
  std::vector<double> theta;
  std::vector<double> weight;
  double e0 = 0.0;
  int m_used = 0;
  bool exhausted = false;
  std::vector<double> alpha, beta;  // tridiagonal bands, for sub-depth reruns
  double norm2 = 0.0;               // ||phi||^2 = <HI^2> - <HI>^2
};

inline CorrelatorDecomposition correlator_decomposition(
    const SparseOperator& H, const std::vector<std::int32_t>& hi,
    std::span<const double> psi0, double e0, int m) {
  const std::size_t n = H.dim();
  if (psi0.size() != n || hi.size() != n) {
    throw ArgumentError("correlator: dimension mismatch");
  }
  if (m < 1) throw ArgumentError("correlator: Krylov depth must be >= 1");

  using Vec = Eigen::VectorXd;
  const Eigen::Map<const Vec> p0(psi0.data(), static_cast<Eigen::Index>(n));

  Vec phi(n);
  for (std::size_t i = 0; i < n; ++i) phi[static_cast<Eigen::Index>(i)] = hi[i] * psi0[i];
  const double full_norm = phi.norm();
  phi -= (p0.dot(phi)) * p0;
  phi -= (p0.dot(phi)) * p0;

  CorrelatorDecomposition dec;
  dec.e0 = e0;
  const double nrm = phi.norm();
  if (nrm <= 1e-13 * std::max(1.0, full_norm)) return dec;  // HI acts as a constant here
  dec.norm2 = nrm * nrm;
  phi /= nrm;

  const int depth = static_cast<int>(std::min<std::size_t>(m, n));
  std::vector<Vec> basis;
  basis.push_back(phi);
  Vec w(n);
  double scale = 1.0;

  for (int j = 0; j < depth; ++j) {
    H.apply(basis[static_cast<std::size_t>(j)].data(), w.data());
    const double a = basis[static_cast<std::size_t>(j)].dot(w);
    dec.alpha.push_back(a);
    scale = std::max({scale, std::abs(a), j > 0 ? dec.beta.back() : 0.0});
    w -= a * basis[static_cast<std::size_t>(j)];
    if (j > 0) w -= dec.beta.back() * basis[static_cast<std::size_t>(j - 1)];
    for (int pass = 0; pass < 2; ++pass) {
      w -= (p0.dot(w)) * p0;
      for (const Vec& q : basis) w -= (q.dot(w)) * q;
    }
    const double b = w.norm();
    if (b <= 1e-13 * scale) {
      dec.exhausted = true;
      break;
    }
    if (j + 1 < depth) {
      dec.beta.push_back(b);
      basis.push_back(w / b);
    }
  }
  dec.m_used = static_cast<int>(dec.alpha.size());

  const int mm = dec.m_used;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
  Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(dec.alpha.data(), mm);
  Eigen::VectorXd e(mm > 1 ? mm - 1 : 0);
  for (int i = 0; i + 1 < mm; ++i) e[i] = dec.beta[static_cast<std::size_t>(i)];
  tri.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);

  dec.theta.resize(static_cast<std::size_t>(mm));
  dec.weight.resize(static_cast<std::size_t>(mm));
  for (int k = 0; k < mm; ++k) {
    dec.theta[static_cast<std::size_t>(k)] = tri.eigenvalues()[k];
    const double s0 = tri.eigenvectors()(0, k);
    dec.weight[static_cast<std::size_t>(k)] = dec.norm2 * s0 * s0;
  }

  const double gt = default_gap_tol(e0);
  if (!dec.theta.empty()) {
    if (dec.theta.front() < e0 - gt) {
      throw BreakdownError("correlator: Ritz value below the ground energy");
    }
    if (dec.theta.front() - e0 < gt) {
      throw DegeneracyError("correlator: excitation energy vanishes (degenerate ground state)",
                            dec.theta.front() - e0);
    }
  }
  return dec;
}

inline double chi_from_bands(const CorrelatorDecomposition& dec, int m) {
  // Re-diagonalize the leading m x m block; used for the depth-sensitivity
  // error estimate.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
  Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(dec.alpha.data(), m);
  Eigen::VectorXd e(m > 1 ? m - 1 : 0);
  for (int i = 0; i + 1 < m; ++i) e[i] = dec.beta[static_cast<std::size_t>(i)];
  tri.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
  KahanSum acc;
  for (int k = 0; k < m; ++k) {
    const double de = tri.eigenvalues()[k] - dec.e0;
    const double s0 = tri.eigenvectors()(0, k);
    acc.add(dec.norm2 * s0 * s0 / (de * de));
  }
  return acc.value();
}

}  // namespace detail

// Connected imaginary-time correlator
//   C(tau) = <psi0| (HI - <HI>) e^{-(H - E0) tau} (HI - <HI>) |psi0>,
// evaluated from the Ritz decomposition; nonnegative and nonincreasing.
inline double connected_correlator(std::span<const double> psi0, double e0,
                                   const SparseOperator& H,
                                   const std::vector<std::int32_t>& hi, double tau,
                                   int m = 100) {
  if (tau < 0.0) throw ArgumentError("connected_correlator: tau must be >= 0");
  const auto dec = detail::correlator_decomposition(H, hi, psi0, e0, m);
  KahanSum acc;
  for (std::size_t k = 0; k < dec.theta.size(); ++k) {
    acc.add(dec.weight[k] * std::exp(-(dec.theta[k] - e0) * tau));
  }
  return acc.value();
}

// chi_F as the integral int_0^inf tau C(tau) dtau, evaluated in closed form
// over the Ritz decomposition: sum_k w_k / (theta_k - E0)^2. This is the
// production route when the spectrum is out of dense reach. The error
// estimate compares depth m against depth m - 5 (zero when the Krylov space
// was exhausted, i.e. the decomposition is exact).
inline SusceptibilityResult chi_f_krylov(const SparseOperator& h0,
                                         const std::vector<std::int32_t>& hi,
                                         double lambda, int m = 100,
                                         const LanczosParams& p = {}) {
  const SparseOperator h = hamiltonian_at(h0, hi, lambda);
  const GroundState g = lanczos_ground(h, p);
  const auto dec = detail::correlator_decomposition(h, hi, g.psi, g.e0, m);

  KahanSum acc;
  for (std::size_t k = 0; k < dec.theta.size(); ++k) {
    const double de = dec.theta[k] - g.e0;
    acc.add(dec.weight[k] / (de * de));
  }

  SusceptibilityResult r;
  r.lambda = lambda;
  r.route = Route::krylov_integral;
  r.krylov_m = dec.m_used;
  r.chi_f = acc.value();
  if (!dec.exhausted && dec.m_used > 5) {
    r.error_estimate = std::abs(r.chi_f - detail::chi_from_bands(dec, dec.m_used - 5));
  }
  return r;
}

}  // namespace fidsus
