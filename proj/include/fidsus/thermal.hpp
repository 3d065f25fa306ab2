#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fidsus/common.hpp"

namespace fidsus {

// Classical 2D Ising model E = -J sum_<ij> s_i s_j on an Lx x Ly torus.
// Every site contributes its right and down bond (2 N bonds in total; on a
// width-2 torus the two directions coincide and the bond is counted twice),
// so E/J lives on an integer grid of step 4 between -2N and +2N.

enum class DosKind { exact, wang_landau };

struct DosBin {
  int e = 0;          // energy in units of J
  int m = 0;          // total magnetization (0 when not resolved)
  std::uint64_t count = 0;  // exact degeneracy (exact kind only)
  double ln_w = 0.0;  // log-weight; ln(count) for the exact kind
};

struct DensityOfStates {
  int lx = 0, ly = 0;
  double j_coupling = 1.0;
  DosKind kind = DosKind::exact;
  bool m_resolved = false;
  std::vector<DosBin> bins;  // sorted by (e, m)
  int n_sites() const { return lx * ly; }
};

namespace detail {

struct TorusMasks {
  int lx, ly, n;
  std::uint32_t full;
  std::uint32_t col0, coln;   // leftmost / rightmost column of every row
  std::uint32_t row0, rown;   // top / bottom row

  explicit TorusMasks(int lx_, int ly_) : lx(lx_), ly(ly_), n(lx_ * ly_) {
    full = (n == 32) ? ~std::uint32_t{0} : ((std::uint32_t{1} << n) - 1);
    col0 = coln = 0;
    for (int y = 0; y < ly; ++y) {
      col0 |= std::uint32_t{1} << (y * lx);
      coln |= std::uint32_t{1} << (y * lx + lx - 1);
    }
    row0 = (std::uint32_t{1} << lx) - 1;
    rown = row0 << ((ly - 1) * lx);
  }

  // Configuration with each site replaced by its right / down neighbour.
  std::uint32_t shift_right(std::uint32_t c) const {
    return (((c & ~col0) >> 1) | ((c & col0) << (lx - 1))) & full;
  }
  std::uint32_t shift_down(std::uint32_t c) const {
    return ((c >> lx) | ((c & row0) << ((ly - 1) * lx))) & full;
  }

  // E/J = -(sum over the 2N bonds of s_i s_j) = -(2N - 2 * #unsatisfied).
  int energy_units(std::uint32_t c) const {
    const int uneq = std::popcount(c ^ shift_right(c)) + std::popcount(c ^ shift_down(c));
    return -(2 * n - 2 * uneq);
  }
  int magnetization(std::uint32_t c) const { return 2 * std::popcount(c) - n; }
};

inline void check_lattice(int lx, int ly) {
  if (lx < 2 || ly < 2) throw ArgumentError("ising: lattice sides must be >= 2");
  if (lx * ly > 25) throw SizingError("ising: exact enumeration is limited to <= 25 sites");
}

}  // namespace detail

// Exact joint density of states g(E, M) by full enumeration (<= 2^25 states).
inline DensityOfStates enumerate_dos(int lx, int ly, double j_coupling = 1.0) {
  detail::check_lattice(lx, ly);
  if (j_coupling <= 0.0) throw ArgumentError("ising: J must be positive");
  const detail::TorusMasks torus(lx, ly);
  const int n = torus.n;

  // e index (e + 2n)/2 in [0, 2n]; m index (m + n)/2 in [0, n].
  std::vector<std::uint64_t> counts(static_cast<std::size_t>((2 * n + 1) * (n + 1)), 0);
  const std::uint64_t n_states = std::uint64_t{1} << n;
  for (std::uint64_t c = 0; c < n_states; ++c) {
    const auto cc = static_cast<std::uint32_t>(c);
    const int ei = (torus.energy_units(cc) + 2 * n) / 2;
    const int mi = (torus.magnetization(cc) + n) / 2;
    ++counts[static_cast<std::size_t>(ei * (n + 1) + mi)];
  }

  DensityOfStates dos;
  dos.lx = lx;
  dos.ly = ly;
  dos.j_coupling = j_coupling;
  dos.kind = DosKind::exact;
  dos.m_resolved = true;
  for (int ei = 0; ei <= 2 * n; ++ei) {
    for (int mi = 0; mi <= n; ++mi) {
      const std::uint64_t cnt = counts[static_cast<std::size_t>(ei * (n + 1) + mi)];
      if (cnt == 0) continue;
      DosBin b;
      b.e = 2 * ei - 2 * n;
      b.m = 2 * mi - n;
      b.count = cnt;
      b.ln_w = std::log(static_cast<double>(cnt));
      dos.bins.push_back(b);
    }
  }
  return dos;
}

struct WangLandauParams {
  double flatness = 0.8;        // min(hist) >= flatness * mean(hist)
  double ln_f_final = 1e-8;     // stop once the modification factor is below this
  double ln_f_init = 1.0;
  std::uint64_t seed = 1;
  std::uint64_t coverage_cap_sweeps = 1'000'000;  // bins still unseen after this -> error
};

// Flat-histogram estimate of ln g(E) with a single random walker. Bins are
// the a-priori reachable torus energies: the fully aligned levels +-2N plus
// every step-4 level in between except +-(2N - 4), which no spin pattern on
// an even-sided torus can produce (a flipped cluster boundary is at least
// four bonds). The estimate is normalized so the ground bin matches the
// exact twofold degeneracy, ln g(-2N) = ln 2.
inline DensityOfStates wang_landau(int lx, int ly, double j_coupling = 1.0,
                                   const WangLandauParams& params = {}) {
  detail::check_lattice(lx, ly);
  if (lx % 2 != 0 || ly % 2 != 0) {
    throw ArgumentError("wang_landau: lattice sides must be even (reachable-energy set)");
  }
  if (j_coupling <= 0.0) throw ArgumentError("ising: J must be positive");
  if (params.flatness <= 0.0 || params.flatness >= 1.0 || params.ln_f_final <= 0.0 ||
      params.ln_f_init <= params.ln_f_final) {
    throw ArgumentError("wang_landau: bad schedule parameters");
  }
  const detail::TorusMasks torus(lx, ly);
  const int n = torus.n;

  std::vector<int> levels;
  levels.push_back(-2 * n);
  for (int e = -2 * n + 8; e <= 2 * n - 8; e += 4) levels.push_back(e);
  levels.push_back(2 * n);
  const auto nbins = levels.size();
  std::vector<int> bin_of(static_cast<std::size_t>(2 * n + 1), -1);
  for (std::size_t b = 0; b < nbins; ++b) {
    bin_of[static_cast<std::size_t>((levels[b] + 2 * n) / 2)] = static_cast<int>(b);
  }

  std::mt19937_64 rng(params.seed);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  std::uint32_t state = static_cast<std::uint32_t>(rng()) & torus.full;
  int e = torus.energy_units(state);

  auto flip_delta = [&](int site) {
    const int x = site % lx, y = site / lx;
    const auto at = [&](int xx, int yy) {
      return (state >> (((yy + ly) % ly) * lx + ((xx + lx) % lx))) & 1u;
    };
    const int si = at(x, y) ? 1 : -1;
    const int nb = (at(x + 1, y) ? 1 : -1) + (at(x - 1, y) ? 1 : -1) +
                   (at(x, y + 1) ? 1 : -1) + (at(x, y - 1) ? 1 : -1);
    return 2 * si * nb;  // change of E/J when flipping this site
  };

  std::vector<double> ln_g(nbins, 0.0);
  std::vector<std::uint64_t> hist(nbins, 0);
  std::vector<char> seen(nbins, 0);
  double ln_f = params.ln_f_init;
  std::uint64_t sweeps = 0;
  bool all_seen = false;

  while (ln_f >= params.ln_f_final) {
    for (int step = 0; step < n; ++step) {
      const int site = pick(rng);
      const int e_new = e + flip_delta(site);
      const int b_old = bin_of[static_cast<std::size_t>((e + 2 * n) / 2)];
      const int b_new = bin_of[static_cast<std::size_t>((e_new + 2 * n) / 2)];
      if (b_new < 0) throw BreakdownError("wang_landau: walker left the energy grid");
      if (ln_g[static_cast<std::size_t>(b_old)] - ln_g[static_cast<std::size_t>(b_new)] >=
              0.0 ||
          uni(rng) < std::exp(ln_g[static_cast<std::size_t>(b_old)] -
                              ln_g[static_cast<std::size_t>(b_new)])) {
        state ^= std::uint32_t{1} << site;
        e = e_new;
      }
      const int b_cur = bin_of[static_cast<std::size_t>((e + 2 * n) / 2)];
      ln_g[static_cast<std::size_t>(b_cur)] += ln_f;
      ++hist[static_cast<std::size_t>(b_cur)];
      seen[static_cast<std::size_t>(b_cur)] = 1;
    }
    ++sweeps;

    if (!all_seen) {
      all_seen = std::find(seen.begin(), seen.end(), char{0}) == seen.end();
      if (!all_seen && sweeps > params.coverage_cap_sweeps) {
        std::vector<int> missing;
        for (std::size_t b = 0; b < nbins; ++b) {
          if (!seen[b]) missing.push_back(levels[b]);
        }
        throw CoverageError("wang_landau: energy bins never visited", std::move(missing));
      }
    }

    if (sweeps % 100 == 0 && all_seen) {
      std::uint64_t lo = hist[0], total = 0;
      for (std::uint64_t h : hist) {
        lo = std::min(lo, h);
        total += h;
      }
      const double mean = static_cast<double>(total) / static_cast<double>(nbins);
      // Beyond flatness, demand ~1/sqrt(ln_f) visits per bin before halving:
      // a stage cut short freezes its error into ln g, and later stages have
      // too little weight per visit to repair it.
      const double visit_floor = 100.0 / std::sqrt(ln_f);
      if (static_cast<double>(lo) >= params.flatness * mean &&
          static_cast<double>(lo) >= visit_floor) {
        ln_f /= 2.0;
        std::fill(hist.begin(), hist.end(), 0);
      }
    }
  }

  DensityOfStates dos;
  dos.lx = lx;
  dos.ly = ly;
  dos.j_coupling = j_coupling;
  dos.kind = DosKind::wang_landau;
  dos.m_resolved = false;
  for (std::size_t b = 0; b < nbins; ++b) {
    DosBin bin;
    bin.e = levels[b];
    bin.ln_w = (ln_g[b] - ln_g[0]) + std::log(2.0);  // anchor exact at the ground bin
    dos.bins.push_back(bin);
  }
  return dos;
}

inline double log_partition_function(const DensityOfStates& dos, double beta,
                                     double h = 0.0) {
  if (beta <= 0.0) throw ArgumentError("partition function: beta must be positive");
  if (h != 0.0 && !dos.m_resolved) {
    throw ArgumentError("partition function: field term needs magnetization-resolved bins");
  }
  double peak = -std::numeric_limits<double>::infinity();
  for (const DosBin& b : dos.bins) {
    peak = std::max(peak, b.ln_w - beta * (dos.j_coupling * b.e - h * b.m));
  }
  KahanSum acc;
  for (const DosBin& b : dos.bins) {
    acc.add(std::exp(b.ln_w - beta * (dos.j_coupling * b.e - h * b.m) - peak));
  }
  return peak + std::log(acc.value());
}

inline double partition_function(const DensityOfStates& dos, double beta, double h = 0.0) {
  return std::exp(log_partition_function(dos, beta, h));
}

// F(beta; dbeta) = Z(beta) / sqrt(Z(beta - dbeta/2) Z(beta + dbeta/2)).
// Log-convexity of Z makes this <= 1; it equals 1 at dbeta = 0.
inline double thermal_fidelity(const DensityOfStates& dos, double beta, double dbeta) {
  if (dbeta < 0.0 || beta - dbeta / 2 <= 0.0) {
    throw ArgumentError("thermal_fidelity: need 0 <= dbeta < 2 beta");
  }
  if (dbeta == 0.0) return 1.0;
  const double lnf = log_partition_function(dos, beta) -
                     0.5 * (log_partition_function(dos, beta - dbeta / 2) +
                            log_partition_function(dos, beta + dbeta / 2));
  return std::min(std::exp(lnf), 1.0);
}

struct ThermalMoments {
  double mean_e = 0.0, var_e = 0.0;
  double mean_m = 0.0, var_m = 0.0;
};

inline ThermalMoments thermal_moments(const DensityOfStates& dos, double beta,
                                      double h = 0.0) {
  if (beta <= 0.0) throw ArgumentError("thermal_moments: beta must be positive");
  if (h != 0.0 && !dos.m_resolved) {
    throw ArgumentError("thermal_moments: field term needs magnetization-resolved bins");
  }
  double peak = -std::numeric_limits<double>::infinity();
  for (const DosBin& b : dos.bins) {
    peak = std::max(peak, b.ln_w - beta * (dos.j_coupling * b.e - h * b.m));
  }
  KahanSum z, ze, zm;
  for (const DosBin& b : dos.bins) {
    const double w = std::exp(b.ln_w - beta * (dos.j_coupling * b.e - h * b.m) - peak);
    z.add(w);
    ze.add(w * dos.j_coupling * b.e);
    zm.add(w * b.m);
  }
  ThermalMoments mom;
  mom.mean_e = ze.value() / z.value();
  mom.mean_m = zm.value() / z.value();
  // Centered second pass avoids the <E^2> - <E>^2 cancellation at low T.
  KahanSum ve, vm;
  for (const DosBin& b : dos.bins) {
    const double w = std::exp(b.ln_w - beta * (dos.j_coupling * b.e - h * b.m) - peak);
    const double de = dos.j_coupling * b.e - mom.mean_e;
    const double dm = b.m - mom.mean_m;
    ve.add(w * de * de);
    vm.add(w * dm * dm);
  }
  mom.var_e = ve.value() / z.value();
  mom.var_m = vm.value() / z.value();
  return mom;
}

struct ThermalChi {
  double chi_f = 0.0;           // fluctuation form
  double chi_f_fd = 0.0;        // Richardson-refined finite difference of ln Z
  double rel_deviation = 0.0;   // |fd - fluctuation| / fluctuation
  double aux = 0.0;             // C_v for the beta sweep, susceptibility chi for the field sweep
};

namespace detail {

inline double richardson_lnz_curvature(const DensityOfStates& dos, double beta,
                                       double h, double d, bool in_beta) {
  // -2 ln F / d^2 with F the symmetric three-point ratio in the swept
  // variable; even error series, so one interval halving cancels the d^2 term.
  const auto chi_at = [&](double dd) {
    double lnf;
    if (in_beta) {
      lnf = log_partition_function(dos, beta, h) -
            0.5 * (log_partition_function(dos, beta - dd / 2, h) +
                   log_partition_function(dos, beta + dd / 2, h));
    } else {
      lnf = log_partition_function(dos, beta, h) -
            0.5 * (log_partition_function(dos, beta, h - dd / 2) +
                   log_partition_function(dos, beta, h + dd / 2));
    }
    return -2.0 * lnf / (dd * dd);
  };
  const double full = chi_at(d);
  const double half = chi_at(d / 2);
  return (4.0 * half - full) / 3.0;
}

}  // namespace detail

// Thermal fidelity susceptibility in temperature: chi_F = C_v / (4 beta^2)
// = Var(E) / 4, cross-checked against -2 ln F / dbeta^2.
inline ThermalChi chi_f_temperature(const DensityOfStates& dos, double beta,
                                    double dbeta = 1e-3) {
  if (dbeta <= 0.0 || beta - dbeta / 2 <= 0.0) {
    throw ArgumentError("chi_f_temperature: need 0 < dbeta < 2 beta");
  }
  const ThermalMoments mom = thermal_moments(dos, beta);
  ThermalChi out;
  out.chi_f = mom.var_e / 4.0;
  out.aux = beta * beta * mom.var_e;  // specific heat C_v
  out.chi_f_fd = detail::richardson_lnz_curvature(dos, beta, 0.0, dbeta, true);
  out.rel_deviation = std::abs(out.chi_f_fd - out.chi_f) /
                      std::max(std::abs(out.chi_f), 1e-300);
  return out;
}

// Field counterpart at fixed beta: chi_F = beta chi / 4 = beta^2 Var(M) / 4
// with chi = beta Var(M), cross-checked the same way in h.
inline ThermalChi chi_f_field(const DensityOfStates& dos, double beta, double h,
                              double dh = 1e-3) {
  if (dh <= 0.0) throw ArgumentError("chi_f_field: dh must be positive");
  if (!dos.m_resolved) {
    throw ArgumentError("chi_f_field: needs magnetization-resolved bins");
  }
  const ThermalMoments mom = thermal_moments(dos, beta, h);
  ThermalChi out;
  out.chi_f = beta * beta * mom.var_m / 4.0;
  out.aux = beta * mom.var_m;  // magnetic susceptibility
  out.chi_f_fd = detail::richardson_lnz_curvature(dos, beta, h, dh, false);
  out.rel_deviation = std::abs(out.chi_f_fd - out.chi_f) /
                      std::max(std::abs(out.chi_f), 1e-300);
  return out;
}

// --- dos file format -------------------------------------------------------
//
//   # fidsus-dos v1
//   # lattice <lx> <ly> <J>
//   # kind <exact|wang_landau>
//   # m_resolved <0|1>
//   <e> <m> <ln_w>
//
// ln_w and J are printed with 17 significant digits so a load/save cycle is
// byte-identical.

inline void save_dos(const DensityOfStates& dos, std::ostream& os) {
  char buf[64];
  os << "# fidsus-dos v1\n";
  std::snprintf(buf, sizeof buf, "%.17g", dos.j_coupling);
  os << "# lattice " << dos.lx << " " << dos.ly << " " << buf << "\n";
  os << "# kind " << (dos.kind == DosKind::exact ? "exact" : "wang_landau") << "\n";
  os << "# m_resolved " << (dos.m_resolved ? 1 : 0) << "\n";
  for (const DosBin& b : dos.bins) {
    std::snprintf(buf, sizeof buf, "%.17g", b.ln_w);
    os << b.e << " " << b.m << " " << buf << "\n";
  }
}

inline void save_dos(const DensityOfStates& dos, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("save_dos: cannot open " + path);
  save_dos(dos, f);
  if (!f.good()) throw IoError("save_dos: write failed for " + path);
}

inline DensityOfStates load_dos(std::istream& is) {
  DensityOfStates dos;
  std::string line;
  if (!std::getline(is, line) || line != "# fidsus-dos v1") {
    throw IoError("load_dos: missing fidsus-dos v1 header");
  }
  std::string kind_word;
  {
    std::getline(is, line);
    std::istringstream ls(line);
    std::string hash, word;
    if (!(ls >> hash >> word >> dos.lx >> dos.ly >> dos.j_coupling) || hash != "#" ||
        word != "lattice") {
      throw IoError("load_dos: bad lattice line");
    }
  }
  {
    std::getline(is, line);
    std::istringstream ls(line);
    std::string hash, word;
    if (!(ls >> hash >> word >> kind_word) || hash != "#" || word != "kind" ||
        (kind_word != "exact" && kind_word != "wang_landau")) {
      throw IoError("load_dos: bad kind line");
    }
    dos.kind = (kind_word == "exact") ? DosKind::exact : DosKind::wang_landau;
  }
  {
    std::getline(is, line);
    std::istringstream ls(line);
    std::string hash, word;
    int flag;
    if (!(ls >> hash >> word >> flag) || hash != "#" || word != "m_resolved" ||
        (flag != 0 && flag != 1)) {
      throw IoError("load_dos: bad m_resolved line");
    }
    dos.m_resolved = flag == 1;
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    DosBin b;
    if (!(ls >> b.e >> b.m >> b.ln_w)) throw IoError("load_dos: bad bin line: " + line);
    if (dos.kind == DosKind::exact) {
      b.count = static_cast<std::uint64_t>(std::llround(std::exp(b.ln_w)));
    }
    dos.bins.push_back(b);
  }
  if (dos.bins.empty()) throw IoError("load_dos: no bins");
  return dos;
}

inline DensityOfStates load_dos(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("load_dos: cannot open " + path);
  return load_dos(f);
}

}  // namespace fidsus
