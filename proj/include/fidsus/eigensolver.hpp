#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "fidsus/common.hpp"
#include "fidsus/sparse.hpp"

namespace fidsus {

struct LanczosParams {
  double tol = 1e-10;      // absolute residual ||H psi - E0 psi||
  int max_iter = 500;      // Krylov depth cap
  std::uint64_t seed = 12345;
};

struct GroundState {
  double e0 = 0.0;
  std::vector<double> psi;
  double residual = 0.0;
  int iterations = 0;
};

struct LowestTwo {
  GroundState ground;
  double e1 = std::numeric_limits<double>::infinity();
  double e1_residual = 0.0;
};

enum class Degeneracy { nondegenerate, degenerate };

inline double default_gap_tol(double e0) {
  return 1e-8 * std::max(1.0, std::abs(e0));
}

inline Degeneracy gap_check(double e0, double e1, double gap_tol) {
  return (e1 - e0 < gap_tol) ? Degeneracy::degenerate : Degeneracy::nondegenerate;
}

namespace detail {

// Fix the overall sign so the largest-magnitude component (first such index
// on ties) is positive.
inline void canonical_sign(std::span<double> v) {
  std::size_t arg = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > best) {
      best = a;
      arg = i;
    }
  }
  if (v[arg] < 0.0) {
    for (double& x : v) x = -x;
  }
}

// Lanczos with full reorthogonalization (two classical Gram-Schmidt passes
// per step). An optional lock vector is projected out of the start vector
// and of every new direction, which turns the run into a solve on the
// orthogonal complement; that is how the second eigenvalue is obtained even
// when the lowest level is exactly degenerate.
inline GroundState lanczos_lowest(const SparseOperator& H, const LanczosParams& p,
                                  std::span<const double> lock) {
  const std::size_t n = H.dim();
  if (n == 0) throw ArgumentError("lanczos: empty operator");
  if (!lock.empty() && lock.size() != n) throw ArgumentError("lanczos: bad lock vector");
  if (p.tol <= 0.0 || p.max_iter < 1) throw ArgumentError("lanczos: bad parameters");

  using Vec = Eigen::VectorXd;
  const Eigen::Map<const Vec> lk(lock.empty() ? nullptr : lock.data(),
                                 static_cast<Eigen::Index>(lock.size()));

  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Vec v(n);
  for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = uni(rng);
  if (!lock.empty()) v -= (lk.dot(v)) * lk;
  if (!lock.empty()) v -= (lk.dot(v)) * lk;
  const double v0n = v.norm();
  if (v0n <= 0.0) throw BreakdownError("lanczos: start vector vanished");
  v /= v0n;

  const int depth = static_cast<int>(std::min<std::size_t>(p.max_iter, n));
  std::vector<Vec> basis;
  basis.push_back(v);
  std::vector<double> alpha, beta;
  Vec w(n), ritz(n), h_ritz(n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
  double scale = 1.0;
  double last_residual = std::numeric_limits<double>::infinity();

  auto solve_tridiag = [&] {
    const int m = static_cast<int>(alpha.size());
    Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
    Eigen::VectorXd e(m > 1 ? m - 1 : 0);
    for (int i = 0; i + 1 < m; ++i) e[i] = beta[static_cast<std::size_t>(i)];
    tri.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
  };

  auto assemble = [&] {
    const int m = static_cast<int>(alpha.size());
    ritz.setZero();
    for (int i = 0; i < m; ++i) {
      ritz += tri.eigenvectors()(i, 0) * basis[static_cast<std::size_t>(i)];
    }
    ritz.normalize();
    H.apply(ritz.data(), h_ritz.data());
    GroundState g;
    g.e0 = tri.eigenvalues()[0];
    g.residual = (h_ritz - g.e0 * ritz).norm();
    g.iterations = m;
    g.psi.assign(ritz.data(), ritz.data() + n);
    canonical_sign(g.psi);
    return g;
  };

  for (int j = 0; j < depth; ++j) {
    H.apply(basis[static_cast<std::size_t>(j)].data(), w.data());
    const double a = basis[static_cast<std::size_t>(j)].dot(w);
    alpha.push_back(a);
    scale = std::max({scale, std::abs(a), j > 0 ? beta.back() : 0.0});

    w -= a * basis[static_cast<std::size_t>(j)];
    if (j > 0) w -= beta.back() * basis[static_cast<std::size_t>(j - 1)];
    for (int pass = 0; pass < 2; ++pass) {
      if (!lock.empty()) w -= (lk.dot(w)) * lk;
      for (const Vec& q : basis) w -= (q.dot(w)) * q;
    }

    const double b = w.norm();
    // b ~ 0 means the Krylov space hit an invariant subspace: the
    // tridiagonal eigenpair is exact there and the basis cannot grow.
    const bool exhausted = b <= 1e-13 * scale;
    const bool last = (j + 1 == depth);

    if (exhausted || last || (j + 1) % 4 == 0 || j + 1 <= 16) {
      solve_tridiag();
      const int m = static_cast<int>(alpha.size());
      const double est = exhausted ? 0.0 : b * std::abs(tri.eigenvectors()(m - 1, 0));
      if (est <= p.tol) {
        GroundState g = assemble();
        if (exhausted || g.residual <= p.tol) return g;
        last_residual = g.residual;
      } else {
        last_residual = est;
      }
    }
    if (exhausted || last) break;
    beta.push_back(b);
    basis.push_back(w / b);
  }

  throw ConvergenceError("lanczos: no convergence within max_iter", last_residual);
}

}  // namespace detail

inline GroundState lanczos_ground(const SparseOperator& H, const LanczosParams& p = {}) {
  return detail::lanczos_lowest(H, p, {});
}

// Ground pair query: converge the ground state, then rerun with the ground
// vector locked out. Plain Lanczos from a single start vector cannot split
// an exactly degenerate pair (the Krylov space holds one direction of the
// degenerate subspace), so the deflated second run is what makes gap_check
// trustworthy.
inline LowestTwo lanczos_lowest_two(const SparseOperator& H, const LanczosParams& p = {}) {
  LowestTwo out;
  out.ground = detail::lanczos_lowest(H, p, {});
  if (H.dim() < 2) return out;
  LanczosParams p1 = p;
  p1.tol = std::max(p.tol, 1e-9);
  p1.seed = p.seed + 1;
  const GroundState excited = detail::lanczos_lowest(H, p1, out.ground.psi);
  out.e1 = excited.e0;
  out.e1_residual = excited.residual;
  return out;
}

struct Spectrum {
  std::vector<double> evals;   // ascending
  Eigen::MatrixXd evecs;       // orthonormal columns, canonical sign
};

inline Spectrum dense_spectrum(const SparseOperator& H, std::size_t threshold = 4096) {
  const std::size_t n = H.dim();
  if (n > threshold) {
    throw SizingError("dense_spectrum: dimension exceeds dense threshold; use the Lanczos route");
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = H.row_ptr()[r]; k < H.row_ptr()[r + 1]; ++k) {
      A(static_cast<Eigen::Index>(r), H.cols()[k]) = H.vals()[k];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw BreakdownError("dense_spectrum: eigensolver failed");

  Spectrum s;
  s.evals.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
  s.evecs = es.eigenvectors();
  for (std::size_t c = 0; c < n; ++c) {
    auto col = s.evecs.col(static_cast<Eigen::Index>(c));
    detail::canonical_sign(std::span<double>(col.data(), n));
  }
  return s;
}

}  // namespace fidsus
