#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fidsus {

struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Requested problem size exceeds what the chosen representation can hold
// (or a dense routine refuses and defers to the iterative path).
struct SizingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
  double residual;
  ConvergenceError(const std::string& msg, double r)
      : std::runtime_error(msg), residual(r) {}
};

struct DegeneracyError : std::runtime_error {
  double gap;
  DegeneracyError(const std::string& msg, double g)
      : std::runtime_error(msg), gap(g) {}
};

struct BreakdownError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CoverageError : std::runtime_error {
  std::vector<int> missing_bins;
  CoverageError(const std::string& msg, std::vector<int> missing)
      : std::runtime_error(msg), missing_bins(std::move(missing)) {}
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Compensated accumulator. Summation order is part of this library's
// determinism contract, so sums are always taken in a fixed sequence and
// Kahan compensation keeps long reductions accurate.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  }
  return r;
}

// Inner products feed directly into fidelities where errors are amplified
// by 1/delta^2, so accumulate in extended precision.
inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("dot: size mismatch");
  long double acc = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += static_cast<long double>(a[i]) * static_cast<long double>(b[i]);
  }
  return static_cast<double>(acc);
}

inline double norm(std::span<const double> a) {
  long double acc = 0.0L;
  for (double x : a) acc += static_cast<long double>(x) * static_cast<long double>(x);
  return static_cast<double>(std::sqrt(acc));
}

}  // namespace fidsus
