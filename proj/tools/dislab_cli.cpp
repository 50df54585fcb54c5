#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dislab/bounds.hpp"
#include "dislab/experiment.hpp"
#include "dislab/io.hpp"
#include "dislab/meanfield_continuum.hpp"
#include "dislab/meanfield_lattice.hpp"
#include "dislab/metrics.hpp"
#include "dislab/potential.hpp"
#include "dislab/rw_simulator.hpp"
#include "dislab/sde_simulator.hpp"

using namespace dislab;

namespace {

struct Common {
  double delta = 0.25;
  double beta = 1.0;
  std::string mollifier = "bump";
  std::string green = "poisson";
  std::string cache;
  std::string family = "bumps";
  double mass_plus = 0.5;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--delta", c.delta, "regularization scale")->capture_default_str();
  app->add_option("--beta", c.beta, "inverse temperature")->capture_default_str();
  app->add_option("--mollifier", c.mollifier, "bump | poly6")->capture_default_str();
  app->add_option("--green", c.green, "poisson | literal")->capture_default_str();
  app->add_option("--cache", c.cache, "potential cache directory");
  app->add_option("--initial", c.family, "uniform | bumps")->capture_default_str();
  app->add_option("--mass-plus", c.mass_plus, "mass of the +1 species")->capture_default_str();
  app->add_option("--seed", c.seed, "master seed")->capture_default_str();
}

RegularizedPotential make_potential(const Common& c) {
  PotentialSpec s{c.delta, mollifier_from_string(c.mollifier), 0, 0, green_from_string(c.green)};
  return cached_potential(s, c.cache);
}

InitialCondition make_ic(const Common& c) {
  InitialCondition ic;
  ic.family = c.family;
  ic.mass_plus = c.mass_plus;
  validate(ic);
  return ic;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write '" + path + "'");
  return os;
}

SamplingOptions counts(int n, double mass_plus) {
  SamplingOptions s;
  s.n_plus = static_cast<int>(std::lround(n * mass_plus));
  s.n_minus = n - s.n_plus;
  return s;
}

// Reads a snapshot CSV (t,particle,x1,x2,b) and keeps the rows at time t.
SignedConfiguration read_snapshot(const std::string& path, double t) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  std::getline(in, line);
  if (line != "t,particle,x1,x2,b") throw std::runtime_error("'" + path + "' is not a snapshot CSV");
  SignedConfiguration c;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f[5];
    for (auto& x : f) std::getline(ss, x, ',');
    if (std::abs(std::stod(f[0]) - t) > 1e-12) continue;
    c.positions.push_back(wrap(std::stod(f[2]), std::stod(f[3])));
    c.signs.push_back(std::stoi(f[4]));
  }
  if (c.positions.empty()) throw std::runtime_error("no particles at the requested time in '" + path + "'");
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signed particle systems on the torus: simulators, mean-field solvers, metrics and bounds"};
  app.require_subcommand(1);

  // potential build
  auto* pot = app.add_subcommand("potential", "regularized interaction potential");
  auto* pot_build = pot->add_subcommand("build", "build, report constants, optionally save");
  pot->require_subcommand(1);
  Common pc;
  std::string pot_out;
  add_common(pot_build, pc);
  pot_build->add_option("--out", pot_out, "cache file to write");

  // simulate rw | sde
  auto* sim = app.add_subcommand("simulate", "particle simulations");
  sim->require_subcommand(1);
  auto* sim_rw = sim->add_subcommand("rw", "lattice random walk");
  auto* sim_sde = sim->add_subcommand("sde", "Euler-Maruyama diffusion");
  Common sc;
  double eps = 1.0 / 32, T = 0.1, dt = 0.0;
  int n = 16;
  std::string scheduler = "gillespie", events_out, snaps_out;
  std::vector<double> times;
  for (auto* s : {sim_rw, sim_sde}) {
    add_common(s, sc);
    s->add_option("--n", n, "particle count")->capture_default_str();
    s->add_option("--T", T, "final time")->capture_default_str();
    s->add_option("--times", times, "snapshot times (default: T)");
    s->add_option("--snapshots", snaps_out, "snapshot CSV path");
  }
  sim_rw->add_option("--eps", eps, "lattice spacing")->capture_default_str();
  sim_rw->add_option("--scheduler", scheduler, "gillespie | time_change")->capture_default_str();
  sim_rw->add_option("--events", events_out, "event log CSV path");
  sim_sde->add_option("--dt", dt, "time step (default: automatic)");

  // solve mfe | mf
  auto* solve = app.add_subcommand("solve", "mean-field solvers");
  solve->require_subcommand(1);
  auto* solve_mfe_cmd = solve->add_subcommand("mfe", "lattice mean-field system");
  auto* solve_mf_cmd = solve->add_subcommand("mf", "continuum mean-field equation");
  Common mc;
  std::string density_out;
  int grid = 128;
  for (auto* s : {solve_mfe_cmd, solve_mf_cmd}) {
    add_common(s, mc);
    s->add_option("--T", T, "final time")->capture_default_str();
    s->add_option("--times", times, "output times (default: T)");
    s->add_option("--out", density_out, "density CSV path")->required();
  }
  solve_mfe_cmd->add_option("--eps", eps, "lattice spacing")->capture_default_str();
  solve_mf_cmd->add_option("--grid", grid, "grid size")->capture_default_str();
  solve_mf_cmd->add_option("--dt", dt, "time step (default 1e-3)");

  // metric
  auto* metric = app.add_subcommand("metric", "distances between two snapshot files at one time");
  std::string snap_a, snap_b;
  double metric_t = 0.0;
  metric->add_option("a", snap_a, "first snapshot CSV")->required();
  metric->add_option("b", snap_b, "second snapshot CSV")->required();
  metric->add_option("--t", metric_t, "snapshot time")->capture_default_str();

  // bounds
  auto* bounds = app.add_subcommand("bounds", "evaluate an estimate's right-hand side");
  std::string bound_id = "T3";
  BoundParams bp;
  bp.eps = 1.0 / 32;
  double init_diff = 0.0, kappa = 0.0, lip = 0.0, sup = 0.0;
  bounds->add_option("--id", bound_id, "T1 | T2 | T3 | T4 | C1 | C2")->capture_default_str();
  bounds->add_option("--eps", bp.eps, "lattice spacing")->capture_default_str();
  bounds->add_option("--n", bp.n, "particle count")->capture_default_str();
  bounds->add_option("--beta", bp.beta, "inverse temperature")->capture_default_str();
  bounds->add_option("--delta", bp.delta, "regularization scale")->capture_default_str();
  bounds->add_option("--t", bp.t, "time")->capture_default_str();
  bounds->add_option("--T", bp.T, "horizon")->capture_default_str();
  bounds->add_option("--C", bp.C, "constant C")->capture_default_str();
  bounds->add_option("--C-prime", bp.C1, "constant C'")->capture_default_str();
  bounds->add_option("--C-double-prime", bp.C2, "constant C''")->capture_default_str();
  bounds->add_option("--c-v", bp.c_v, "potential constant, orders <= 5 (default: computed from --delta)");
  bounds->add_option("--c-v-low", bp.c_v_low, "potential constant, orders <= 2 (default: computed from --delta)");
  bounds->add_option("--initial-difference", init_diff, "initial L2 difference")->capture_default_str();
  bounds->add_option("--kappa", kappa, "mass discrepancy")->capture_default_str();
  bounds->add_option("--initial-lip-sum", lip, "sum over species of ||f0||_{1,inf}")->capture_default_str();
  bounds->add_option("--initial-sup-sum", sup, "sum over species of ||f0||_inf")->capture_default_str();

  // experiment run
  auto* exp = app.add_subcommand("experiment", "run a configured experiment");
  exp->require_subcommand(1);
  auto* exp_run = exp->add_subcommand("run", "run all grid cells and write the result CSV");
  std::string config_path;
  exp_run->add_option("config", config_path, "JSON config file")->required();

  auto* val = app.add_subcommand("validate", "check a config file against the parameter assumptions");
  val->add_option("config", config_path, "JSON config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (pot_build->parsed()) {
      RegularizedPotential p = make_potential(pc);
      AssumptionReport a = verify_assumption(p);
      std::cout << "delta " << format_double(p.delta()) << "\ncutoff " << p.cutoff() << "\ngrid " << p.grid() << '\n';
      for (int k = 0; k < 6; ++k) {
        std::cout << "sup|d^" << k << " V| " << format_double(a.sup_norms[k]) << "  constant "
                  << format_double(a.constants[k]) << '\n';
      }
      std::cout << "C_V " << format_double(a.c_v()) << '\n';
      if (!pot_out.empty()) save_potential(p, pot_out);
      return 0;
    }
    if (sim_rw->parsed() || sim_sde->parsed()) {
      RegularizedPotential p = make_potential(sc);
      InitialCondition ic = make_ic(sc);
      std::vector<double> ts = times.empty() ? std::vector<double>{T} : times;
      if (sim_rw->parsed()) {
        Lattice lat = Lattice::from_spacing(eps);
        LatticeConfiguration c0 = sample_particles(make_lattice_density(ic, lat), counts(n, sc.mass_plus), sc.seed);
        RwTrajectory tr = simulate_rw(c0, LatticeKernel(p, lat), sc.beta, T, sc.seed,
                                      scheduler_from_string(scheduler), ts);
        if (!events_out.empty()) {
          auto os = open_out(events_out);
          write_event_log(os, tr);
        }
        if (!snaps_out.empty()) {
          auto os = open_out(snaps_out);
          write_snapshots(os, tr.snapshot_times, tr.snapshots);
        }
        std::cout << tr.events.size() << " events\n";
      } else {
        SignedConfiguration c0 = sample_particles(make_grid_density(ic, 128), counts(n, sc.mass_plus), sc.seed);
        double h = dt > 0 ? dt : default_sde_step(verify_assumption(p), sc.delta, sc.beta);
        SdeOptions so;
        so.snapshot_times = ts;
        SdeTrajectory tr = simulate_sde(c0, p, sc.beta, T, h, sc.seed, so);
        if (!snaps_out.empty()) {
          auto os = open_out(snaps_out);
          write_snapshots(os, tr.times, tr.snapshots);
        }
        std::cout << "dt " << format_double(h) << ", " << tr.times.size() << " snapshots\n";
      }
      return 0;
    }
    if (solve_mfe_cmd->parsed() || solve_mf_cmd->parsed()) {
      RegularizedPotential p = make_potential(mc);
      InitialCondition ic = make_ic(mc);
      auto os = open_out(density_out);
      write_density_header(os);
      if (solve_mfe_cmd->parsed()) {
        MfeOptions o;
        o.snapshot_times = times;
        MfeTrajectory tr = solve_mfe(make_lattice_density(ic, Lattice::from_spacing(eps)), p, mc.beta, T, o);
        for (std::size_t k = 0; k < tr.times.size(); ++k) write_density(os, tr.times[k], tr.states[k]);
      } else {
        MfOptions o;
        if (dt > 0) o.dt = dt;
        o.snapshot_times = times;
        MfTrajectory tr = solve_mf(make_grid_density(ic, grid), p, mc.beta, T, o);
        for (std::size_t k = 0; k < tr.times.size(); ++k) write_density(os, tr.times[k], tr.states[k]);
      }
      return 0;
    }
    if (metric->parsed()) {
      auto a = empirical_measure(read_snapshot(snap_a, metric_t));
      auto b = empirical_measure(read_snapshot(snap_b, metric_t));
      write_metric_header(std::cout);
      for (int sp = 0; sp < 2; ++sp) {
        const auto& x = sp == 0 ? a.first : a.second;
        const auto& y = sp == 0 ? b.first : b.second;
        std::string tag = sp == 0 ? "_plus" : "_minus";
        if (x.atoms() == 0 && y.atoms() == 0) continue;
        MetricReport bl = bl_dual_norm(x, y);
        bl.metric += tag;
        write_metric_row(std::cout, "metric", metric_t, bl);
        if (std::abs(x.mass() - y.mass()) <= 1e-12) {
          MetricReport w = w1_distance(x, y);
          w.metric += tag;
          write_metric_row(std::cout, "metric", metric_t, w);
        }
      }
      return 0;
    }
    if (bounds->parsed()) {
      if (bounds->count("--c-v") == 0 || bounds->count("--c-v-low") == 0) {
        AssumptionReport a = verify_assumption(build_potential(PotentialSpec{bp.delta}));
        if (bounds->count("--c-v") == 0) bp.c_v = a.c_v();
        if (bounds->count("--c-v-low") == 0) bp.c_v_low = a.c_v_upto(2);
      }
      BoundInputs in;
      in.initial_difference = init_diff;
      in.kappa = kappa;
      in.initial_lip_sum = lip;
      in.initial_sup_sum = sup;
      BoundReport r = bound_rhs(bound_from_string(bound_id), bp, in);
      std::cout << "id " << to_string(r.id) << "\nc_v " << format_double(bp.c_v) << "\nc_v_low " << format_double(bp.c_v_low) << "\ngamma "
                << format_double(r.gamma) << "\nK " << format_double(r.K) << "\nrhs " << format_double(r.rhs)
                << '\n';
      return 0;
    }
    if (val->parsed()) {
      ValidationReport r = validate_config(load_config(config_path));
      if (r.ok()) {
        std::cout << "ok\n";
        return 0;
      }
      for (const auto& v : r.violations) std::cout << v << '\n';
      return 1;
    }
    if (exp_run->parsed()) {
      ExperimentConfig cfg = load_config(config_path);
      ValidationReport v = validate_config(cfg);
      if (!v.ok()) {
        for (const auto& s : v.violations) std::cerr << s << '\n';
        return 2;
      }
      ExperimentResult res;
      if (cfg.output.empty()) {
        res = run_experiment(cfg, &std::cout);
      } else {
        std::filesystem::create_directories(cfg.output);
        std::string path = (std::filesystem::path(cfg.output) / (cfg.experiment + ".csv")).string();
        auto os = open_out(path);
        res = run_experiment(cfg, &os);
        std::cerr << res.rows.size() << " rows written to " << path << '\n';
      }
      for (const auto& f : res.failures) std::cerr << "failed: " << f << '\n';
      return res.failures.empty() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
