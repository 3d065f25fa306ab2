// Batch front end: parameter sweeps, scaling ladders, thermal runs, and the
// validation suite. Exit codes: 0 success, 1 partial or check failures,
// 2 configuration errors.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fidsus/checks.hpp"
#include "fidsus/sweep.hpp"

namespace {

void emit_csv(const std::vector<fidsus::SweepRow>& rows, const std::string& out) {
  if (out.empty() || out == "-") {
    fidsus::write_csv(rows, std::cout);
  } else {
    fidsus::write_csv(rows, out);
  }
}

int run_sweep_cmd(const std::string& config_path, const std::optional<std::string>& out,
                  const std::optional<int>& workers, const std::optional<std::uint64_t>& seed,
                  bool timing) {
  fidsus::SweepConfig cfg = fidsus::parse_sweep_config(config_path);
  if (out) cfg.out = *out;
  if (workers) cfg.workers = *workers;
  if (seed) cfg.seed = *seed;
  if (timing) cfg.timing = true;

  const auto rows = fidsus::run_sweep(cfg);
  emit_csv(rows, cfg.out);
  const int failed = fidsus::count_failed(rows);
  if (failed > 0) {
    std::cerr << "fidsus sweep: " << failed << " of " << rows.size()
              << " grid points failed (see # error rows)\n";
    return 1;
  }
  return 0;
}

int run_chi_u0_cmd(int l_max, double t, const std::string& out) {
  if (l_max < 6 || l_max % 2 != 0) {
    throw fidsus::ConfigError("chi-u0: --L-max must be even and >= 6");
  }
  // Roughly doubling ladder in the spirit of the large-N scaling runs; the
  // requested maximum is always included as the final point.
  std::vector<int> ladder;
  for (int L = 6; L < l_max; L = 2 * L - 2) ladder.push_back(L);
  while (!ladder.empty() && ladder.back() > l_max) ladder.pop_back();
  if (ladder.empty() || ladder.back() != l_max) ladder.push_back(l_max);

  std::vector<fidsus::SweepRow> rows;
  for (const auto& res : fidsus::chi_scaling_series(ladder, t)) {
    fidsus::SweepRow row;
    row.model = "freefermion";
    row.L = res.L;
    row.boundary = fidsus::to_string(res.boundary);
    row.lambda = 0.0;
    row.delta = 0.0;
    row.chi = res.chi;
    row.chi_per_site = res.chi_per_site;
    row.route = "u0_closed_form";
    row.error_estimate = 0.0;
    rows.push_back(std::move(row));
  }
  emit_csv(rows, out);
  return 0;
}

struct ThermalArgs {
  int lx = 0, ly = 0;
  double j_coupling = 1.0;
  double beta_min = 0.1, beta_max = 1.0, beta_step = 0.1;
  double dbeta = 1e-3, dh = 1e-3;
  std::vector<double> field;
  bool use_wang_landau = false;
  std::uint64_t seed = 1;
  std::string save_dos, load_dos, out;
};

int run_thermal_cmd(const ThermalArgs& args) {
  fidsus::DensityOfStates dos;
  if (!args.load_dos.empty()) {
    dos = fidsus::load_dos(args.load_dos);
  } else if (args.use_wang_landau) {
    fidsus::WangLandauParams p;
    p.seed = args.seed;
    dos = fidsus::wang_landau(args.lx, args.ly, args.j_coupling, p);
  } else {
    dos = fidsus::enumerate_dos(args.lx, args.ly, args.j_coupling);
  }
  if (!args.save_dos.empty()) fidsus::save_dos(dos, args.save_dos);

  const auto grid =
      fidsus::closed_grid("beta", args.beta_min, args.beta_max, args.beta_step);
  if (grid.empty() || grid.front() <= 0.0) {
    throw fidsus::ConfigError("thermal: need a positive beta grid");
  }
  if (!args.field.empty() && !dos.m_resolved) {
    throw fidsus::ConfigError(
        "thermal: field sweeps need magnetization-resolved (exact) bins");
  }

  std::vector<fidsus::SweepRow> rows;
  int failed = 0;
  fidsus::SweepRow proto;
  proto.model = "ising2d";
  proto.L = dos.n_sites();
  proto.boundary = "torus";
  for (double beta : grid) {
    {
      fidsus::SweepRow row = proto;
      row.lambda = beta;
      row.delta = args.dbeta;
      row.route = "thermal_beta";
      try {
        const auto res = fidsus::chi_f_temperature(dos, beta, args.dbeta);
        row.fidelity = fidsus::thermal_fidelity(dos, beta, args.dbeta);
        row.chi = res.chi_f;
        row.chi_per_site = res.chi_f / row.L;
        row.error_estimate = std::abs(res.chi_f_fd - res.chi_f);
      } catch (const std::exception& e) {
        row.error = e.what();
        ++failed;
      }
      rows.push_back(std::move(row));
    }
    for (double h : args.field) {
      fidsus::SweepRow row = proto;
      row.lambda = beta;
      row.delta = h;
      row.route = "thermal_field";
      try {
        const auto res = fidsus::chi_f_field(dos, beta, h, args.dh);
        row.chi = res.chi_f;
        row.chi_per_site = res.chi_f / row.L;
        row.error_estimate = std::abs(res.chi_f_fd - res.chi_f);
      } catch (const std::exception& e) {
        row.error = e.what();
        ++failed;
      }
      rows.push_back(std::move(row));
    }
  }
  emit_csv(rows, args.out);
  return failed > 0 ? 1 : 0;
}

int run_validate_cmd(bool inject_fault) {
  fidsus::ValidateOptions opts;
  opts.inject_fault = inject_fault;
  const auto checks = fidsus::run_validation(opts);
  fidsus::write_report(checks, std::cout);
  return fidsus::all_passed(checks) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fidelity susceptibility toolkit for quantum lattice models"};
  app.require_subcommand(1);

  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep from a config file");
  std::string config_path;
  sweep->add_option("--config", config_path, "flat key=value config file")->required();
  std::string sweep_out;
  auto* sweep_out_opt = sweep->add_option("--out", sweep_out, "output CSV path (overrides config)");
  int sweep_workers = 0;
  auto* sweep_workers_opt =
      sweep->add_option("--workers", sweep_workers, "worker threads (overrides config)");
  std::uint64_t sweep_seed = 0;
  auto* sweep_seed_opt =
      sweep->add_option("--seed", sweep_seed, "solver seed (overrides config)");
  bool sweep_timing = false;
  sweep->add_flag("--timing", sweep_timing,
                  "fill the wall_time column (makes output machine-dependent)");

  auto* chi_u0 = app.add_subcommand("chi-u0", "Free-fermion chi_F/L scaling ladder at U = 0");
  int l_max = 1906;
  chi_u0->add_option("--L-max", l_max, "largest chain length (even, >= 6)");
  double u0_t = 1.0;
  chi_u0->add_option("--t", u0_t, "hopping energy scale");
  std::string u0_out;
  chi_u0->add_option("--out", u0_out, "output CSV path (default: stdout)");

  auto* thermal = app.add_subcommand("thermal", "2D Ising thermal fidelity from a density of states");
  ThermalArgs targs;
  thermal->add_option("--lx", targs.lx, "torus width");
  thermal->add_option("--ly", targs.ly, "torus height");
  thermal->add_option("--J", targs.j_coupling, "ferromagnetic coupling");
  thermal->add_option("--beta-min", targs.beta_min, "lowest inverse temperature");
  thermal->add_option("--beta-max", targs.beta_max, "highest inverse temperature");
  thermal->add_option("--beta-step", targs.beta_step, "beta grid step");
  thermal->add_option("--dbeta", targs.dbeta, "finite-difference interval in beta");
  thermal->add_option("--dh", targs.dh, "finite-difference interval in field");
  thermal->add_option("--field", targs.field, "field values for thermal_field rows");
  thermal->add_flag("--wang-landau", targs.use_wang_landau,
                    "estimate the density of states instead of enumerating");
  thermal->add_option("--seed", targs.seed, "Wang-Landau walker seed");
  thermal->add_option("--save-dos", targs.save_dos, "write the density of states to a file");
  thermal->add_option("--load-dos", targs.load_dos,
                      "reuse a saved density of states (skips lattice options)");
  thermal->add_option("--out", targs.out, "output CSV path (default: stdout)");

  auto* validate = app.add_subcommand("validate", "Run the cross-route and oracle check suite");
  bool inject_fault = false;
  validate->add_flag("--inject-fault", inject_fault, "self-test: force one check to fail")
      ->group("");  // hidden

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad flags are configuration errors; help stays 0
  }

  try {
    if (sweep->parsed()) {
      std::optional<std::string> out_override;
      if (sweep_out_opt->count()) out_override = sweep_out;
      std::optional<int> workers_override;
      if (sweep_workers_opt->count()) workers_override = sweep_workers;
      std::optional<std::uint64_t> seed_override;
      if (sweep_seed_opt->count()) seed_override = sweep_seed;
      return run_sweep_cmd(config_path, out_override, workers_override, seed_override,
                           sweep_timing);
    }
    if (chi_u0->parsed()) return run_chi_u0_cmd(l_max, u0_t, u0_out);
    if (thermal->parsed()) {
      if (targs.load_dos.empty() && (targs.lx < 2 || targs.ly < 2)) {
        throw fidsus::ConfigError("thermal: need --lx and --ly >= 2 (or --load-dos)");
      }
      return run_thermal_cmd(targs);
    }
    if (validate->parsed()) return run_validate_cmd(inject_fault);
  } catch (const fidsus::ConfigError& e) {
    std::cerr << "fidsus: " << e.what() << "\n";
    return 2;
  } catch (const fidsus::ArgumentError& e) {
    std::cerr << "fidsus: " << e.what() << "\n";
    return 2;
  } catch (const fidsus::SizingError& e) {
    std::cerr << "fidsus: " << e.what() << "\n";
    return 2;
  } catch (const fidsus::IoError& e) {
    std::cerr << "fidsus: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fidsus: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
