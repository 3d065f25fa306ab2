#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fidsus/basis.hpp"
#include "fidsus/common.hpp"
#include "fidsus/eigensolver.hpp"
#include "fidsus/fidelity.hpp"
#include "fidsus/freefermion.hpp"
#include "fidsus/hamiltonian.hpp"
#include "fidsus/thermal.hpp"

namespace fidsus {

// Batch-run description. Parsed from flat "key = value" lines; lists are
// comma-separated. Grids are closed intervals walked in a fixed order, so a
// config plus seeds fully determines the output file.
struct SweepConfig {
  std::string model;  // hubbard | ising2d | freefermion

  // hubbard chain
  int L = 0;
  std::string boundary = "auto";  // auto = L mod 4 rule
  double t = 1.0;
  int n_up = -1, n_dn = -1;  // -1 = half filling
  double u_min = 0.0, u_max = 0.0, u_step = 0.0;
  std::vector<double> delta_list;     // finite-difference intervals
  std::vector<std::string> routes;

  // freefermion ladder
  std::vector<int> l_list;

  // ising2d torus (exact enumeration)
  int lx = 0, ly = 0;
  double j_coupling = 1.0;
  double beta_min = 0.0, beta_max = 0.0, beta_step = 0.0;
  double dbeta = 1e-3, dh = 1e-3;
  std::vector<double> field_list;

  // solver
  double tol = 1e-10;
  int max_iter = 500;
  int krylov_m = 100;
  std::uint64_t seed = 12345;

  // execution / output
  std::string out = "sweep.csv";
  int workers = 1;
  bool timing = false;  // wall_time column stays 0 unless enabled (see below)
};

struct SweepRow {
  std::string model;
  int L = 0;
  std::string boundary;
  double lambda = 0.0;
  double delta = 0.0;  // route parameter: FD interval, field, or Krylov depth
  double fidelity = std::numeric_limits<double>::quiet_NaN();
  double chi = std::numeric_limits<double>::quiet_NaN();
  double chi_per_site = std::numeric_limits<double>::quiet_NaN();
  std::string route;
  double error_estimate = std::numeric_limits<double>::quiet_NaN();
  double wall_time = 0.0;
  std::string error;  // empty on success; failed rows keep their coordinates
};

namespace detail {

inline std::string trim(std::string s) {
  const auto from = s.find_first_not_of(" \t\r");
  const auto to = s.find_last_not_of(" \t\r");
  if (from == std::string::npos) return {};
  return s.substr(from, to - from + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) items.push_back(cur);
  }
  return items;
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad numeric value for '" + key + "': " + v);
  }
}

inline int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const int x = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer value for '" + key + "': " + v);
  }
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on") return true;
  if (v == "0" || v == "false" || v == "off") return false;
  throw ConfigError("config: bad boolean value for '" + key + "': " + v);
}

// Shortest round-trip decimal form; keeps CSV output byte-deterministic
// without drowning grid values in digits.
inline std::string format_double(double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace detail

// Points lo, lo + step, ... up to and including hi (within one part in 1e9 of
// a step, so binary rounding cannot drop the endpoint).
inline std::vector<double> closed_grid(const std::string& what, double lo, double hi,
                                       double step) {
  std::vector<double> pts;
  if (step <= 0.0) {
    if (hi != lo) throw ConfigError("config: " + what + " range needs a positive step");
    pts.push_back(lo);
    return pts;
  }
  const double slack = 1e-9 * step;
  for (int i = 0;; ++i) {
    const double v = lo + i * step;
    if (v > hi + slack) break;
    pts.push_back(v);
  }
  return pts;
}

inline SweepConfig parse_sweep_config(std::istream& in) {
  SweepConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
    }

    if (key == "model") {
      cfg.model = val;
    } else if (key == "L") {
      cfg.L = detail::to_int(key, val);
    } else if (key == "boundary") {
      cfg.boundary = val;
    } else if (key == "t") {
      cfg.t = detail::to_double(key, val);
    } else if (key == "n_up") {
      cfg.n_up = detail::to_int(key, val);
    } else if (key == "n_dn") {
      cfg.n_dn = detail::to_int(key, val);
    } else if (key == "u_min") {
      cfg.u_min = detail::to_double(key, val);
    } else if (key == "u_max") {
      cfg.u_max = detail::to_double(key, val);
    } else if (key == "u_step") {
      cfg.u_step = detail::to_double(key, val);
    } else if (key == "delta") {
      cfg.delta_list.clear();
      for (const auto& item : detail::split_list(val)) {
        cfg.delta_list.push_back(detail::to_double(key, item));
      }
    } else if (key == "routes") {
      cfg.routes = detail::split_list(val);
    } else if (key == "L_list") {
      cfg.l_list.clear();
      for (const auto& item : detail::split_list(val)) {
        cfg.l_list.push_back(detail::to_int(key, item));
      }
    } else if (key == "lx") {
      cfg.lx = detail::to_int(key, val);
    } else if (key == "ly") {
      cfg.ly = detail::to_int(key, val);
    } else if (key == "J") {
      cfg.j_coupling = detail::to_double(key, val);
    } else if (key == "beta_min") {
      cfg.beta_min = detail::to_double(key, val);
    } else if (key == "beta_max") {
      cfg.beta_max = detail::to_double(key, val);
    } else if (key == "beta_step") {
      cfg.beta_step = detail::to_double(key, val);
    } else if (key == "dbeta") {
      cfg.dbeta = detail::to_double(key, val);
    } else if (key == "dh") {
      cfg.dh = detail::to_double(key, val);
    } else if (key == "field") {
      cfg.field_list.clear();
      for (const auto& item : detail::split_list(val)) {
        cfg.field_list.push_back(detail::to_double(key, item));
      }
    } else if (key == "tol") {
      cfg.tol = detail::to_double(key, val);
    } else if (key == "max_iter") {
      cfg.max_iter = detail::to_int(key, val);
    } else if (key == "krylov_m") {
      cfg.krylov_m = detail::to_int(key, val);
    } else if (key == "seed") {
      try {
        cfg.seed = std::stoull(val);
      } catch (const std::exception&) {
        throw ConfigError("config: bad seed value: " + val);
      }
    } else if (key == "out") {
      cfg.out = val;
    } else if (key == "workers") {
      cfg.workers = detail::to_int(key, val);
    } else if (key == "timing") {
      cfg.timing = detail::to_bool(key, val);
    } else {
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key +
                        "'");
    }
  }
  return cfg;
}

inline SweepConfig parse_sweep_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("config: cannot open " + path);
  return parse_sweep_config(f);
}

namespace detail {

inline Boundary resolve_boundary(const SweepConfig& cfg) {
  if (cfg.boundary == "auto") return boundary_rule(cfg.L);
  if (cfg.boundary == "periodic") return Boundary::periodic;
  if (cfg.boundary == "antiperiodic") return Boundary::antiperiodic;
  if (cfg.boundary == "open") return Boundary::open;
  throw ConfigError("config: unknown boundary '" + cfg.boundary + "'");
}

inline Route resolve_route(const std::string& name) {
  if (name == "finite_difference") return Route::finite_difference;
  if (name == "spectral") return Route::spectral;
  if (name == "dynamic_w0") return Route::dynamic_w0;
  if (name == "krylov_integral") return Route::krylov_integral;
  throw ConfigError("config: unknown hubbard route '" + name + "'");
}

// Each task owns its prototype row (coordinates prefilled) and a compute
// step; failures keep the coordinates and record the message instead.
struct RowTask {
  SweepRow row;
  std::function<void(SweepRow&)> compute;
};

inline void run_tasks(std::vector<RowTask>& tasks, std::vector<SweepRow>& rows,
                      int workers, bool timing) {
  rows.resize(tasks.size());
  if (workers < 1) throw ConfigError("config: workers must be >= 1");
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      SweepRow row = tasks[i].row;
      const auto start = std::chrono::steady_clock::now();
      try {
        tasks[i].compute(row);
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      if (timing) {
        row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                      start)
                            .count();
      }
      rows[i] = std::move(row);
    }
  };

  if (workers == 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace detail

// Runs every grid point and returns rows in grid order (lambda outer, route,
// then route parameter). The worker pool only changes scheduling: each row is
// an independent deterministic computation, so the output is identical for
// any worker count. Failed points (degenerate ground state, refused sizes)
// come back as rows with an error message and NaN observables.
inline std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
  std::vector<detail::RowTask> tasks;

  if (cfg.model == "hubbard") {
    if (cfg.L < 1) throw ConfigError("config: hubbard sweep needs L >= 1");
    const Boundary boundary = detail::resolve_boundary(cfg);
    const int n_up = cfg.n_up >= 0 ? cfg.n_up : cfg.L / 2;
    const int n_dn = cfg.n_dn >= 0 ? cfg.n_dn : cfg.L / 2;
    const auto grid = closed_grid("U", cfg.u_min, cfg.u_max, cfg.u_step);
    std::vector<std::string> routes =
        cfg.routes.empty() ? std::vector<std::string>{"finite_difference"} : cfg.routes;
    std::vector<double> deltas = cfg.delta_list.empty() ? std::vector<double>{1e-3}
                                                        : cfg.delta_list;
    for (const std::string& name : routes) detail::resolve_route(name);
    for (double d : deltas) {
      if (d <= 0.0) throw ConfigError("config: delta values must be positive");
    }
    if (grid.empty()) throw ConfigError("config: empty U grid");

    auto basis = std::make_shared<FockBasis>(cfg.L, n_up, n_dn);
    auto ops = std::make_shared<HubbardOperators>(
        build_hubbard({cfg.L, cfg.t, 0.0, boundary, n_up, n_dn}, *basis));
    LanczosParams params;
    params.tol = cfg.tol;
    params.max_iter = cfg.max_iter;
    params.seed = cfg.seed;

    SweepRow proto;
    proto.model = cfg.model;
    proto.L = cfg.L;
    proto.boundary = to_string(boundary);

    for (double u : grid) {
      for (const std::string& name : routes) {
        const Route route = detail::resolve_route(name);
        SweepRow row = proto;
        row.lambda = u;
        row.route = name;
        if (route == Route::finite_difference) {
          for (double d : deltas) {
            row.delta = d;
            tasks.push_back({row, [ops, u, d, params](SweepRow& r) {
                               const auto res =
                                   chi_f_finite_difference(ops->h0, ops->hi, u, d, params);
                               r.fidelity = res.fidelity;
                               r.chi = res.chi_f;
                               r.chi_per_site = res.chi_f / r.L;
                               r.error_estimate = res.error_estimate;
                             }});
          }
        } else if (route == Route::spectral || route == Route::dynamic_w0) {
          row.delta = 0.0;
          tasks.push_back({row, [ops, u, route](SweepRow& r) {
                             const auto s = dense_spectrum(hamiltonian_at(ops->h0, ops->hi, u));
                             const auto res = route == Route::spectral
                                                  ? chi_f_spectral(s, ops->hi, u)
                                                  : chi_f_dynamic(s, ops->hi, 0.0, u);
                             r.chi = res.chi_f;
                             r.chi_per_site = res.chi_f / r.L;
                             r.error_estimate = 0.0;
                           }});
        } else {
          const int m = cfg.krylov_m;
          row.delta = m;
          tasks.push_back({row, [ops, u, m, params](SweepRow& r) {
                             const auto res = chi_f_krylov(ops->h0, ops->hi, u, m, params);
                             r.delta = res.krylov_m;
                             r.chi = res.chi_f;
                             r.chi_per_site = res.chi_f / r.L;
                             r.error_estimate = res.error_estimate;
                           }});
        }
      }
    }
  } else if (cfg.model == "freefermion") {
    if (cfg.l_list.empty()) throw ConfigError("config: freefermion sweep needs L_list");
    if (!cfg.routes.empty() &&
        (cfg.routes.size() != 1 || cfg.routes[0] != "u0_closed_form")) {
      throw ConfigError("config: freefermion supports only route u0_closed_form");
    }
    for (int L : cfg.l_list) {
      SweepRow row;
      row.model = cfg.model;
      row.L = L;
      row.boundary = (L >= 2 && L % 2 == 0) ? to_string(boundary_rule(L)) : "auto";
      row.lambda = 0.0;
      row.delta = 0.0;
      row.route = "u0_closed_form";
      const double t = cfg.t;
      tasks.push_back({row, [L, t](SweepRow& r) {
                         const auto res = chi_f_u0(L, t);
                         r.chi = res.chi;
                         r.chi_per_site = res.chi_per_site;
                         r.error_estimate = 0.0;
                       }});
    }
  } else if (cfg.model == "ising2d") {
    if (cfg.lx < 2 || cfg.ly < 2) throw ConfigError("config: ising2d sweep needs lx, ly >= 2");
    const auto grid = closed_grid("beta", cfg.beta_min, cfg.beta_max, cfg.beta_step);
    if (grid.empty() || grid.front() <= 0.0) {
      throw ConfigError("config: ising2d sweep needs a positive beta grid");
    }
    if (!cfg.routes.empty()) {
      for (const auto& name : cfg.routes) {
        if (name != "thermal_beta" && name != "thermal_field") {
          throw ConfigError("config: unknown ising2d route '" + name + "'");
        }
      }
    }
    const bool want_beta = cfg.routes.empty() ||
                           std::find(cfg.routes.begin(), cfg.routes.end(),
                                     "thermal_beta") != cfg.routes.end();
    const bool want_field = std::find(cfg.routes.begin(), cfg.routes.end(),
                                      "thermal_field") != cfg.routes.end();
    if (want_field && cfg.field_list.empty()) {
      throw ConfigError("config: route thermal_field needs a field list");
    }

    auto dos = std::make_shared<DensityOfStates>(
        enumerate_dos(cfg.lx, cfg.ly, cfg.j_coupling));
    SweepRow proto;
    proto.model = cfg.model;
    proto.L = cfg.lx * cfg.ly;
    proto.boundary = "torus";

    const double dbeta = cfg.dbeta, dh = cfg.dh;
    for (double beta : grid) {
      if (want_beta) {
        SweepRow row = proto;
        row.lambda = beta;
        row.delta = dbeta;
        row.route = "thermal_beta";
        tasks.push_back({row, [dos, beta, dbeta](SweepRow& r) {
                           const auto res = chi_f_temperature(*dos, beta, dbeta);
                           r.fidelity = thermal_fidelity(*dos, beta, dbeta);
                           r.chi = res.chi_f;
                           r.chi_per_site = res.chi_f / r.L;
                           r.error_estimate = std::abs(res.chi_f_fd - res.chi_f);
                         }});
      }
      if (want_field) {
        for (double h : cfg.field_list) {
          SweepRow row = proto;
          row.lambda = beta;
          row.delta = h;
          row.route = "thermal_field";
          tasks.push_back({row, [dos, beta, h, dh](SweepRow& r) {
                             const auto res = chi_f_field(*dos, beta, h, dh);
                             r.chi = res.chi_f;
                             r.chi_per_site = res.chi_f / r.L;
                             r.error_estimate = std::abs(res.chi_f_fd - res.chi_f);
                           }});
        }
      }
    }
  } else if (cfg.model.empty()) {
    throw ConfigError("config: missing model");
  } else {
    throw ConfigError("config: unknown model '" + cfg.model + "'");
  }

  if (tasks.empty()) throw ConfigError("config: sweep grid is empty");

  std::vector<SweepRow> rows;
  detail::run_tasks(tasks, rows, cfg.workers, cfg.timing);
  return rows;
}

inline int count_failed(std::span<const SweepRow> rows) {
  int n = 0;
  for (const auto& r : rows) {
    if (!r.error.empty()) ++n;
  }
  return n;
}

// CSV format, one line per grid point:
//   # fidsus-csv v1
//   model,L,boundary,lambda,delta,F,chi_f,chi_f_per_site,route,error_estimate,wall_time
// Failed rows keep their coordinates with NaN observables and are followed by
// a "# error:" comment carrying the message (the schema has no error column).
inline void write_csv(std::span<const SweepRow> rows, std::ostream& os) {
  os << "# fidsus-csv v1\n";
  os << "model,L,boundary,lambda,delta,F,chi_f,chi_f_per_site,route,error_estimate,"
        "wall_time\n";
  for (const SweepRow& r : rows) {
    os << r.model << ',' << r.L << ',' << r.boundary << ',' << detail::format_double(r.lambda)
       << ',' << detail::format_double(r.delta) << ',' << detail::format_double(r.fidelity)
       << ',' << detail::format_double(r.chi) << ',' << detail::format_double(r.chi_per_site)
       << ',' << r.route << ',' << detail::format_double(r.error_estimate) << ','
       << detail::format_double(r.wall_time) << '\n';
    if (!r.error.empty()) os << "# error: " << r.error << '\n';
  }
}

inline void write_csv(std::span<const SweepRow> rows, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("write_csv: cannot open " + path);
  write_csv(rows, f);
  if (!f.good()) throw IoError("write_csv: write failed for " + path);
}

}  // namespace fidsus
