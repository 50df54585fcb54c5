#include "dislab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "dislab/analysis.hpp"
#include "dislab/bounds.hpp"
#include "dislab/fokker_planck.hpp"
#include "dislab/meanfield_continuum.hpp"
#include "dislab/meanfield_lattice.hpp"
#include "dislab/metrics.hpp"
#include "dislab/sde_simulator.hpp"
#include "dislab/spectral.hpp"

namespace dislab {

using nlohmann::json;

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids = {"rw-vs-sde",        "mfe-vs-mf",        "sde-vs-mf",
                                               "rw-vs-mfe",        "rw-vs-mf-via-mfe", "rw-vs-mf-via-sde",
                                               "consistency",      "stability",        "bounds-only"};
  return ids;
}

// ---------------------------------------------------------------- config

namespace {

std::vector<double> number_list(const json& v, const char* key) {
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) throw std::invalid_argument(std::string("config: '") + key + "' must be a number or a list");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw std::invalid_argument(std::string("config: '") + key + "' entries must be numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Vec2 point(const json& v, const char* key) {
  if (!v.is_array() || v.size() != 2) throw std::invalid_argument(std::string("config: '") + key + "' must be [x1, x2]");
  return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  ExperimentConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    try {
      if (k == "experiment") c.experiment = v.get<std::string>();
      else if (k == "eps") c.eps = number_list(v, "eps");
      else if (k == "beta") c.beta = number_list(v, "beta");
      else if (k == "delta") c.delta = number_list(v, "delta");
      else if (k == "T") c.T = number_list(v, "T");
      else if (k == "n") {
        for (double x : number_list(v, "n")) {
          if (x != std::floor(x)) throw std::invalid_argument("config: 'n' entries must be integers");
          c.n.push_back(static_cast<int>(x));
        }
      } else if (k == "snapshot_times") c.snapshot_times = number_list(v, "snapshot_times");
      else if (k == "replications") c.replications = v.get<long>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "initial") {
        for (auto jt = v.begin(); jt != v.end(); ++jt) {
          const std::string& ik = jt.key();
          if (ik == "family") c.initial.family = jt->get<std::string>();
          else if (ik == "mass_plus") c.initial.mass_plus = jt->get<double>();
          else if (ik == "center_plus") c.initial.center_plus = point(*jt, "center_plus");
          else if (ik == "center_minus") c.initial.center_minus = point(*jt, "center_minus");
          else if (ik == "width") c.initial.width = jt->get<double>();
          else throw std::invalid_argument("config: unknown key 'initial." + ik + "'");
        }
      } else if (k == "mollifier") c.mollifier = mollifier_from_string(v.get<std::string>());
      else if (k == "green") c.green = green_from_string(v.get<std::string>());
      else if (k == "constants") {
        for (auto jt = v.begin(); jt != v.end(); ++jt) {
          if (jt.key() == "C") c.C = jt->get<double>();
          else if (jt.key() == "C_prime") c.C1 = jt->get<double>();
          else if (jt.key() == "C_double_prime") c.C2 = jt->get<double>();
          else throw std::invalid_argument("config: unknown key 'constants." + jt.key() + "'");
        }
      } else if (k == "output") c.output = v.get<std::string>();
      else if (k == "potential_cache") c.potential_cache = v.get<std::string>();
      else if (k == "threads") c.threads = v.get<int>();
      else if (k == "max_states") c.max_states = v.get<std::size_t>();
      else if (k == "mf_grid") c.mf_grid = v.get<int>();
      else if (k == "fp_grid") c.fp_grid = v.get<int>();
      else if (k == "bl_coarse") c.bl_coarse = v.get<int>();
      else if (k == "mf_dt") c.mf_dt = v.get<double>();
      else if (k == "mfe_dt") c.mfe_dt = v.get<double>();
      else if (k == "sde_dt") c.sde_dt = v.get<double>();
      else if (k == "kernel") {
        std::string s = v.get<std::string>();
        if (s == "exact") c.kernel = KernelEval::exact;
        else if (s == "interpolated") c.kernel = KernelEval::interpolated;
        else throw std::invalid_argument("config: kernel must be 'exact' or 'interpolated'");
      } else if (k == "scheduler") c.scheduler = scheduler_from_string(v.get<std::string>());
      else if (k == "random_signs") c.random_signs = v.get<bool>();
      else if (k == "coupling") c.coupling = v.get<bool>();
      else if (k == "test_function") c.test_function = v.get<std::string>();
      else if (k == "force") c.force = v.get<std::string>();
      else if (k == "force_strength") c.force_strength = v.get<double>();
      else if (k == "bounds") c.bounds = v.get<std::vector<std::string>>();
      else if (k == "initial_difference") c.initial_difference = v.get<double>();
      else if (k == "kappa") c.kappa = v.get<double>();
      else throw std::invalid_argument("config: unknown key '" + k + "'");
    } catch (const json::exception& e) {
      throw std::invalid_argument("config: bad value for '" + k + "': " + e.what());
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------- validation

namespace {

struct Needs {
  bool eps, n, T, reps;
  int max_n;  // 0: unbounded
};

Needs needs_of(const std::string& id) {
  if (id == "rw-vs-sde") return {true, true, true, false, 2};
  if (id == "mfe-vs-mf") return {true, false, true, false, 0};
  if (id == "sde-vs-mf") return {false, true, true, true, 0};
  if (id == "rw-vs-mfe") return {true, true, true, true, 0};
  if (id == "rw-vs-mf-via-mfe") return {true, true, true, true, 0};
  if (id == "rw-vs-mf-via-sde") return {true, true, true, false, 2};
  if (id == "consistency") return {true, false, false, false, 0};
  if (id == "stability") return {true, false, false, true, 0};
  return {true, true, true, false, 0};  // bounds-only
}

std::string num(double v) { return format_double(v); }

}  // namespace

ValidationReport validate_config(const ExperimentConfig& c) {
  ValidationReport r;
  auto bad = [&](const std::string& s) { r.violations.push_back(s); };
  const auto& ids = experiment_ids();
  if (std::find(ids.begin(), ids.end(), c.experiment) == ids.end()) {
    bad("unknown experiment id '" + c.experiment + "'");
    return r;
  }
  Needs need = needs_of(c.experiment);
  if (need.eps && c.eps.empty()) bad("'eps' is required for " + c.experiment);
  if (need.n && c.n.empty()) bad("'n' is required for " + c.experiment);
  if (need.T && c.T.empty()) bad("'T' is required for " + c.experiment);
  if (c.beta.empty()) bad("'beta' is required");
  if (c.delta.empty()) bad("'delta' is required");
  if (need.reps && c.replications < 1) bad("'replications' must be >= 1 for " + c.experiment);
  if (c.experiment == "consistency" && c.eps.size() < 3) bad("consistency needs at least 3 values of eps");

  for (double e : c.eps) {
    if (!(e > 0.0) || !std::isfinite(e)) {
      bad("eps = " + num(e) + " must be positive");
      continue;
    }
    double q = 1.0 / e;
    if (std::abs(q - std::round(q)) > 1e-9 * q) bad("1/eps = " + num(q) + " is not an integer (lattice spacing)");
  }
  for (double d : c.delta) {
    if (!(d > 0.0 && d <= 1.0)) bad("delta = " + num(d) + " outside (0, 1] (assumption eps <= delta <= 1)");
  }
  for (double b : c.beta) {
    if (!(b > 0.0) || !std::isfinite(b)) bad("beta = " + num(b) + " must be positive and finite");
  }
  for (double e : c.eps) {
    for (double d : c.delta) {
      if (e > d) bad("eps = " + num(e) + " > delta = " + num(d) + " (assumption eps <= delta <= 1)");
      for (double b : c.beta) {
        double ratio = b * e / d;
        if (ratio > c.C1 * (1.0 + 1e-12)) {
          bad("beta eps / delta = " + num(ratio) + " > C' = " + num(c.C1) + " for beta = " + num(b) + ", eps = " +
              num(e) + ", delta = " + num(d) + " (assumption beta <= C' delta / eps)");
        }
      }
    }
  }
  for (int n : c.n) {
    if (n < 1) bad("n = " + std::to_string(n) + " must be >= 1");
    if (need.max_n && n > need.max_n) {
      bad("n = " + std::to_string(n) + " exceeds " + std::to_string(need.max_n) + " for " + c.experiment +
          " (n-particle laws are tabulated on the full product space)");
    }
  }
  for (double t : c.T) {
    if (!(t > 0.0) || !std::isfinite(t)) bad("T = " + num(t) + " must be positive");
  }
  for (double t : c.snapshot_times) {
    if (!(t >= 0.0) || !std::isfinite(t)) bad("snapshot time " + num(t) + " must be nonnegative");
  }
  if (!(c.C > 0.0 && c.C1 > 0.0 && c.C2 > 0.0)) bad("constants C, C', C'' must be positive");
  try {
    validate(c.initial);
  } catch (const std::exception& e) {
    bad(std::string("initial condition: ") + e.what());
  }
  if (c.bl_coarse < 1) bad("bl_coarse must be >= 1");
  if (!(c.mf_dt > 0.0)) bad("mf_dt must be positive");
  if (c.mfe_dt < 0.0 || c.sde_dt < 0.0) bad("mfe_dt and sde_dt must be nonnegative");
  if (c.experiment == "consistency" || c.experiment == "stability") {
    try {
      test_function(c.test_function);
    } catch (const std::exception& e) {
      bad(e.what());
    }
    if (c.force != "zero" && c.force != "shear" && c.force != "smooth" && c.force != "pinned") {
      bad("unknown force '" + c.force + "'");
    }
  }
  for (const auto& b : c.bounds) {
    try {
      bound_from_string(b);
    } catch (const std::exception& e) {
      bad(e.what());
    }
  }
  return r;
}

// ---------------------------------------------------------------- seeds and threads

namespace {
std::uint64_t bits(double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, sizeof u);
  return u;
}
}  // namespace

std::uint64_t cell_seed(std::uint64_t master, double eps, int n, double beta, double delta, double T) {
  Rng r = make_rng(master, {0xce11, bits(eps), static_cast<std::uint64_t>(n), bits(beta), bits(delta), bits(T)});
  return r();
}

std::uint64_t replication_seed(std::uint64_t cell, long replication) {
  Rng r = make_rng(cell, {0x4e9, static_cast<std::uint64_t>(replication)});
  return r();
}

void parallel_for(long count, int threads, const std::function<void(long)>& body) {
  if (count <= 0) return;
  int w = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  w = static_cast<int>(std::min<long>(w, count));
  std::atomic<long> next{0};
  std::mutex mu;
  long fail_index = -1;
  std::exception_ptr fail;
  auto worker = [&] {
    for (;;) {
      long i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (fail_index < 0 || i < fail_index) {
          fail_index = i;
          fail = std::current_exception();
        }
      }
    }
  };
  if (w == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < w; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (fail) std::rethrow_exception(fail);
}

InitialNorms initial_norms(const InitialCondition& ic, int m) {
  GridDensityPair g = make_grid_density(ic, m);
  RealFft fft({m, m});
  int hl = fft.half_last();
  InitialNorms out;
  std::vector<cplx> spec, d1(fft.spectral_size()), d2(fft.spectral_size());
  std::vector<double> g1, g2;
  for (const auto* f : {&g.plus, &g.minus}) {
    fft.forward(*f, spec);
    for (int i1 = 0; i1 < m; ++i1) {
      int k1 = wavenumber(i1, m);
      if (2 * std::abs(k1) == m) k1 = 0;
      for (int i2 = 0; i2 < hl; ++i2) {
        int k2 = 2 * i2 == m ? 0 : i2;
        std::size_t s = static_cast<std::size_t>(i1) * hl + i2;
        d1[s] = cplx(0.0, 2.0 * M_PI * k1) * spec[s];
        d2[s] = cplx(0.0, 2.0 * M_PI * k2) * spec[s];
      }
    }
    fft.inverse(d1, g1);
    fft.inverse(d2, g2);
    double sup = 0.0, lip = 0.0;
    for (std::size_t i = 0; i < f->size(); ++i) {
      sup = std::max(sup, std::abs((*f)[i]));
      lip = std::max(lip, std::hypot(g1[i], g2[i]));
    }
    out.sup_sum += sup;
    out.lip_sum += sup + lip;
  }
  return out;
}

// ---------------------------------------------------------------- runners

namespace {

struct Cell {
  std::optional<double> eps;
  std::optional<int> n;
  double beta = 0, delta = 0;
  std::optional<double> T;
  std::uint64_t seed = 0;
};

struct Stat {
  double mean = 0.0, se = 0.0;
};

// Mean and standard error, summed in index order.
Stat stat_of(const std::vector<double>& v) {
  Stat s;
  if (v.empty()) return s;
  double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  s.mean = m;
  if (v.size() < 2) {
    s.se = std::nan("");
    return s;
  }
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  s.se = std::sqrt(ss / (v.size() - 1) / v.size());
  return s;
}

class Runner {
 public:
  Runner(const ExperimentConfig& cfg, std::ostream* csv) : cfg_(cfg), csv_(csv) {}

  ExperimentResult run() {
    if (csv_) write_result_header(*csv_);
    for (const Cell& cell : cells()) {
      try {
        run_cell(cell);
      } catch (const std::exception& e) {
        std::ostringstream os;
        os << cfg_.experiment << " cell (" << describe(cell) << "): " << e.what();
        result_.failures.push_back(os.str());
      }
    }
    return std::move(result_);
  }

 private:
  std::vector<Cell> cells() const {
    Needs need = needs_of(cfg_.experiment);
    std::vector<std::optional<double>> eps;
    if (cfg_.experiment == "consistency" || !need.eps) eps.push_back(std::nullopt);
    else for (double e : cfg_.eps) eps.push_back(e);
    std::vector<std::optional<int>> ns;
    if (!need.n) ns.push_back(std::nullopt);
    else for (int n : cfg_.n) ns.push_back(n);
    std::vector<std::optional<double>> Ts;
    if (!need.T) Ts.push_back(std::nullopt);
    else for (double t : cfg_.T) Ts.push_back(t);
    std::vector<Cell> out;
    for (auto e : eps)
      for (auto n : ns)
        for (double b : cfg_.beta)
          for (double d : cfg_.delta)
            for (auto T : Ts) {
              Cell c{e, n, b, d, T, 0};
              c.seed = cell_seed(cfg_.seed, e.value_or(0.0), n.value_or(0), b, d, T.value_or(0.0));
              out.push_back(c);
            }
    return out;
  }

  static std::string describe(const Cell& c) {
    std::ostringstream os;
    if (c.eps) os << "eps=" << format_double(*c.eps) << " ";
    if (c.n) os << "n=" << *c.n << " ";
    os << "beta=" << format_double(c.beta) << " delta=" << format_double(c.delta);
    if (c.T) os << " T=" << format_double(*c.T);
    return os.str();
  }

  const RegularizedPotential& potential(double delta) {
    auto it = potentials_.find(delta);
    if (it != potentials_.end()) return it->second;
    PotentialSpec spec{delta, cfg_.mollifier, 0, 0, cfg_.green};
    return potentials_.emplace(delta, cached_potential(spec, cfg_.potential_cache)).first->second;
  }

  const AssumptionReport& assumption(double delta) {
    auto it = assumptions_.find(delta);
    if (it != assumptions_.end()) return it->second;
    return assumptions_.emplace(delta, verify_assumption(potential(delta))).first->second;
  }

  const InitialNorms& norms() {
    if (!norms_) norms_ = initial_norms(cfg_.initial);
    return *norms_;
  }

  std::vector<double> times(double T) const {
    std::vector<double> out;
    for (double t : cfg_.snapshot_times) {
      if (t <= T * (1.0 + 1e-12)) out.push_back(std::min(t, T));
    }
    if (out.empty()) out.push_back(T);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  static std::vector<double> positive(const std::vector<double>& ts) {
    std::vector<double> out;
    for (double t : ts) {
      if (t > 0.0) out.push_back(t);
    }
    return out;
  }

  static std::size_t find_time(const std::vector<double>& have, double t) {
    for (std::size_t k = 0; k < have.size(); ++k) {
      if (std::abs(have[k] - t) <= 1e-12 * std::max(1.0, t)) return k;
    }
    throw std::runtime_error("internal: snapshot at t = " + format_double(t) + " missing");
  }

  BoundParams bound_params(const Cell& c, double t) {
    BoundParams p;
    p.eps = c.eps.value_or(1.0);
    p.n = c.n.value_or(1);
    p.beta = c.beta;
    p.delta = c.delta;
    p.t = t;
    p.T = c.T.value_or(t);
    p.C = cfg_.C;
    p.C1 = cfg_.C1;
    p.C2 = cfg_.C2;
    p.c_v = assumption(c.delta).c_v();
    p.c_v_low = assumption(c.delta).c_v_upto(2);
    return p;
  }

  ResultRow row(const Cell& c, std::optional<double> t, const std::string& metric, std::optional<double> value,
                std::optional<double> se, long reps) const {
    ResultRow r;
    r.experiment = cfg_.experiment;
    r.eps = c.eps;
    r.n = c.n;
    r.beta = c.beta;
    r.delta = c.delta;
    r.T = c.T;
    r.t = t;
    r.metric = metric;
    r.value = value;
    r.std_error = se;
    r.replications = reps;
    r.seed = cfg_.seed;
    r.build = build_id();
    return r;
  }

  void emit(ResultRow r) {
    if (csv_) {
      write_result_row(*csv_, r);
      csv_->flush();
    }
    result_.rows.push_back(std::move(r));
  }

  void attach(ResultRow& r, const BoundReport& b) {
    r.bound_id = to_string(b.id);
    r.bound_rhs = b.rhs;
  }

  void check_states(std::size_t states, const char* what) const {
    if (states > cfg_.max_states) {
      throw std::runtime_error(std::string("resource limit: ") + what + " needs " + std::to_string(states) +
                               " states, max_states = " + std::to_string(cfg_.max_states));
    }
  }

  // Continuum grid: a multiple of the lattice size compatible with the potential grid.
  int continuum_grid(const RegularizedPotential& p, int lattice, int fallback) const {
    if (cfg_.mf_grid > 0) return cfg_.mf_grid;
    int mp = p.grid();
    for (int m = lattice; m <= 8192; m += lattice) {
      if (m < fallback) continue;
      if (m % mp == 0 || mp % m == 0) return m;
    }
    throw std::runtime_error("no continuum grid compatible with lattice size " + std::to_string(lattice) +
                             " and potential grid " + std::to_string(mp) + "; set mf_grid");
  }

  SamplingOptions sampling(int n) const {
    SamplingOptions s;
    s.n_plus = static_cast<int>(std::lround(n * cfg_.initial.mass_plus));
    s.n_minus = n - s.n_plus;
    s.random_signs = cfg_.random_signs;
    return s;
  }

  void run_cell(const Cell& c) {
    const std::string& id = cfg_.experiment;
    if (id == "mfe-vs-mf") mfe_vs_mf(c);
    else if (id == "sde-vs-mf") sde_vs_mf(c);
    else if (id == "rw-vs-mfe") rw_vs_mfe(c);
    else if (id == "rw-vs-mf-via-mfe") rw_vs_mf_via_mfe(c);
    else if (id == "rw-vs-sde") rw_vs_sde(c);
    else if (id == "rw-vs-mf-via-sde") rw_vs_mf_via_sde(c);
    else if (id == "consistency") consistency(c);
    else if (id == "stability") stability(c);
    else bounds_only(c);
  }

  void mfe_vs_mf(const Cell& c) {
    const auto& p = potential(c.delta);
    Lattice lat = Lattice::from_spacing(*c.eps);
    int m = continuum_grid(p, lat.size(), 256);
    double T = *c.T;
    auto ts = times(T);
    GridDensityPair g0 = make_grid_density(cfg_.initial, m);
    LatticeDensityPair l0 = restrict_to_lattice(g0, *c.eps);
    MfOptions mo;
    mo.dt = cfg_.mf_dt;
    mo.snapshot_times = positive(ts);
    MfTrajectory mf = solve_mf(g0, p, c.beta, T, mo);
    MfeOptions eo;
    eo.dt = cfg_.mfe_dt;
    eo.snapshot_times = positive(ts);
    MfeTrajectory mfe = solve_mfe(l0, p, c.beta, T, eo);
    double init = l2_lattice_distance(l0, restrict_to_lattice(g0, *c.eps)).total;
    BoundInputs in;
    in.initial_difference = init;
    in.initial_lip_sum = norms().lip_sum;
    in.initial_sup_sum = norms().sup_sum;
    for (double t : ts) {
      const auto& a = mfe.states[find_time(mfe.times, t)];
      const auto& b = mf.states[find_time(mf.times, t)];
      L2Distance d = l2_lattice_distance(a, restrict_to_lattice(b, *c.eps));
      ResultRow r = row(c, t, "l2_lattice", d.total, std::nullopt, 0);
      r.method = "exact";
      attach(r, bound_rhs(BoundId::T2, bound_params(c, t), in));
      emit(r);
    }
  }

  void sde_vs_mf(const Cell& c) {
    const auto& p = potential(c.delta);
    int n = *c.n;
    double T = *c.T;
    auto ts = times(T);
    int m = continuum_grid(p, 1, 128);
    GridDensityPair g0 = make_grid_density(cfg_.initial, m);
    MfOptions mo;
    mo.dt = cfg_.mf_dt;
    mo.snapshot_times = positive(ts);
    MfTrajectory mf = solve_mf(g0, p, c.beta, T, mo);
    std::vector<std::pair<AtomicMeasure, AtomicMeasure>> target;
    for (double t : ts) target.push_back(atomize(mf.states[find_time(mf.times, t)], cfg_.bl_coarse));
    double dt = cfg_.sde_dt > 0.0 ? cfg_.sde_dt : default_sde_step(assumption(c.delta), c.delta, c.beta);
    SdeOptions so;
    so.eval = cfg_.kernel;
    so.snapshot_times = ts;
    long R = cfg_.replications;
    std::size_t nt = ts.size();
    std::vector<std::vector<double>> plus(nt, std::vector<double>(R)), minus = plus;
    std::vector<double> kappa(R), err(nt, 1.0);
    std::vector<std::string> method(nt, "exact-lp");
    std::mutex mu;
    SamplingOptions sopt = sampling(n);
    double mass_plus = g0.mass_plus() / g0.mass();
    parallel_for(R, cfg_.threads, [&](long r) {
      std::uint64_t seed = replication_seed(c.seed, r);
      SignedConfiguration c0 = sample_particles(g0, sopt, seed);
      kappa[r] = mass_discrepancy(mass_plus, count_plus(c0.signs), n);
      SdeTrajectory tr = simulate_sde(c0, p, c.beta, T, dt, seed, so);
      for (std::size_t k = 0; k < nt; ++k) {
        auto emp = empirical_measure(tr.snapshots[k]);
        MetricReport a = bl_dual_norm(emp.first, target[k].first);
        MetricReport b = bl_dual_norm(emp.second, target[k].second);
        plus[k][r] = a.value;
        minus[k][r] = b.value;
        std::lock_guard<std::mutex> lock(mu);
        double e = std::max(a.err_factor, b.err_factor);
        if (e > err[k]) err[k] = e;
        if (a.method == "relaxed" || b.method == "relaxed") method[k] = "relaxed";
      }
    });
    Stat ks = stat_of(kappa);
    emit(row(c, std::nullopt, "kappa", ks.mean, ks.se, R));
    BoundInputs in;
    in.kappa = ks.mean;
    for (std::size_t k = 0; k < nt; ++k) {
      BoundReport b = bound_rhs(BoundId::T3, bound_params(c, ts[k]), in);
      for (int sp = 0; sp < 2; ++sp) {
        Stat s = stat_of(sp == 0 ? plus[k] : minus[k]);
        ResultRow r = row(c, ts[k], sp == 0 ? "bl_plus" : "bl_minus", s.mean, s.se, R);
        r.method = method[k];
        r.err_factor = err[k];
        attach(r, b);
        emit(r);
      }
    }
  }

  void rw_vs_mfe(const Cell& c) {
    const auto& p = potential(c.delta);
    Lattice lat = Lattice::from_spacing(*c.eps);
    int n = *c.n;
    double T = *c.T;
    auto ts = times(T);
    LatticeDensityPair l0 = make_lattice_density(cfg_.initial, lat);
    MfeOptions eo;
    eo.dt = cfg_.mfe_dt;
    if (!cfg_.coupling) eo.snapshot_times = positive(ts);
    MfeTrajectory mfe = solve_mfe(l0, p, c.beta, T, eo);
    std::vector<std::pair<AtomicMeasure, AtomicMeasure>> target;
    for (double t : ts) {
      // Dense trajectories (coupling) are sampled at the nearest stored time at or before t.
      std::size_t k = 0;
      if (cfg_.coupling) {
        while (k + 1 < mfe.times.size() && mfe.times[k + 1] <= t * (1 + 1e-12)) ++k;
      } else {
        k = find_time(mfe.times, t);
      }
      target.push_back(atomize(mfe.states[k]));
    }
    LatticeKernel kernel(p, lat);
    long R = cfg_.replications;
    std::size_t nt = ts.size();
    std::vector<std::vector<double>> plus(nt, std::vector<double>(R)), minus = plus;
    std::vector<double> kappa(R), err(nt, 1.0);
    std::vector<std::string> method(nt, "exact-lp");
    int H = 4 * n;
    std::vector<std::vector<double>> count_gap(H, std::vector<double>(cfg_.coupling ? R : 0));
    std::vector<std::vector<double>> clock_gap = count_gap;
    std::mutex mu;
    SamplingOptions sopt = sampling(n);
    double mass_plus = l0.mass_plus() / l0.mass();
    parallel_for(R, cfg_.threads, [&](long r) {
      std::uint64_t seed = replication_seed(c.seed, r);
      LatticeConfiguration c0 = sample_particles(l0, sopt, seed);
      kappa[r] = mass_discrepancy(mass_plus, count_plus(c0.signs), n);
      RwTrajectory tr;
      if (cfg_.coupling) {
        CoupledRwResult cr = simulate_coupled_rw(c0, mfe, kernel, c.beta, T, seed, {T});
        for (int h = 0; h < H; ++h) {
          count_gap[h][r] = std::abs(static_cast<double>(cr.count[0][h] - cr.count_bar[0][h]));
          clock_gap[h][r] = std::abs(cr.tau[0][h] - cr.tau_bar[0][h]);
        }
        tr = simulate_rw(c0, kernel, c.beta, T, seed, cfg_.scheduler, ts);
      } else {
        tr = simulate_rw(c0, kernel, c.beta, T, seed, cfg_.scheduler, ts);
      }
      for (std::size_t k = 0; k < nt; ++k) {
        auto emp = empirical_measure(tr.snapshots[k]);
        MetricReport a = bl_dual_norm(emp.first, target[k].first);
        MetricReport b = bl_dual_norm(emp.second, target[k].second);
        plus[k][r] = a.value;
        minus[k][r] = b.value;
        std::lock_guard<std::mutex> lock(mu);
        err[k] = std::max({err[k], a.err_factor, b.err_factor});
        if (a.method == "relaxed" || b.method == "relaxed") method[k] = "relaxed";
      }
    });
    Stat ks = stat_of(kappa);
    emit(row(c, std::nullopt, "kappa", ks.mean, ks.se, R));
    BoundInputs in;
    in.kappa = ks.mean;
    for (std::size_t k = 0; k < nt; ++k) {
      BoundReport b = bound_rhs(BoundId::T4, bound_params(c, ts[k]), in);
      for (int sp = 0; sp < 2; ++sp) {
        Stat s = stat_of(sp == 0 ? plus[k] : minus[k]);
        ResultRow r = row(c, ts[k], sp == 0 ? "bl_plus" : "bl_minus", s.mean, s.se, R);
        r.method = method[k];
        r.err_factor = err[k];
        attach(r, b);
        emit(r);
      }
    }
    if (!cfg_.coupling) return;
    for (int h = 0; h < H; ++h) {
      std::vector<double> diff(R);
      for (long r = 0; r < R; ++r) diff[r] = count_gap[h][r] - clock_gap[h][r];
      std::string tag = ":h=" + std::to_string(h);
      Stat a = stat_of(count_gap[h]), b = stat_of(clock_gap[h]), d = stat_of(diff);
      emit(row(c, T, "count_gap" + tag, a.mean, a.se, R));
      emit(row(c, T, "clock_gap" + tag, b.mean, b.se, R));
      emit(row(c, T, "gap_difference" + tag, d.mean, d.se, R));
    }
  }

  void rw_vs_mf_via_mfe(const Cell& c) {
    const auto& p = potential(c.delta);
    Lattice lat = Lattice::from_spacing(*c.eps);
    int n = *c.n;
    double T = *c.T;
    auto ts = times(T);
    int m = continuum_grid(p, lat.size(), 128);
    GridDensityPair g0 = make_grid_density(cfg_.initial, m);
    LatticeDensityPair l0 = restrict_to_lattice(g0, *c.eps);
    MfOptions mo;
    mo.dt = cfg_.mf_dt;
    mo.snapshot_times = positive(ts);
    MfTrajectory mf = solve_mf(g0, p, c.beta, T, mo);
    std::vector<std::pair<AtomicMeasure, AtomicMeasure>> target;
    for (double t : ts) target.push_back(atomize(mf.states[find_time(mf.times, t)], cfg_.bl_coarse));
    LatticeKernel kernel(p, lat);
    long R = cfg_.replications;
    std::size_t nt = ts.size();
    std::vector<std::vector<double>> total(nt, std::vector<double>(R));
    std::vector<double> kappa(R), err(nt, 1.0);
    std::vector<std::string> method(nt, "exact-lp");
    std::mutex mu;
    SamplingOptions sopt = sampling(n);
    double mass_plus = g0.mass_plus() / g0.mass();
    parallel_for(R, cfg_.threads, [&](long r) {
      std::uint64_t seed = replication_seed(c.seed, r);
      LatticeConfiguration c0 = sample_particles(l0, sopt, seed);
      kappa[r] = mass_discrepancy(mass_plus, count_plus(c0.signs), n);
      RwTrajectory tr = simulate_rw(c0, kernel, c.beta, T, seed, cfg_.scheduler, ts);
      for (std::size_t k = 0; k < nt; ++k) {
        auto emp = empirical_measure(tr.snapshots[k]);
        MetricReport a = bl_dual_norm(emp.first, target[k].first);
        MetricReport b = bl_dual_norm(emp.second, target[k].second);
        total[k][r] = a.value + b.value;
        std::lock_guard<std::mutex> lock(mu);
        err[k] = std::max({err[k], a.err_factor, b.err_factor});
        if (a.method == "relaxed" || b.method == "relaxed") method[k] = "relaxed";
      }
    });
    Stat ks = stat_of(kappa);
    emit(row(c, std::nullopt, "kappa", ks.mean, ks.se, R));
    BoundInputs in;
    in.kappa = ks.mean;
    in.initial_difference = 0.0;  // the lattice datum is the restriction of the continuum one
    in.initial_lip_sum = norms().lip_sum;
    in.initial_sup_sum = norms().sup_sum;
    for (std::size_t k = 0; k < nt; ++k) {
      Stat s = stat_of(total[k]);
      ResultRow r = row(c, ts[k], "bl_sum", s.mean, s.se, R);
      r.method = method[k];
      r.err_factor = err[k];
      attach(r, bound_rhs(BoundId::C1, bound_params(c, ts[k]), in));
      emit(r);
    }
  }

  std::vector<int> fp_signs(int n) const { return n == 1 ? std::vector<int>{1} : std::vector<int>{1, -1}; }

  int fp_grid(int lattice) const {
    if (cfg_.fp_grid > 0) return cfg_.fp_grid;
    int m = lattice;
    while (m < 16) m += lattice;
    if (m % 2) m *= 2;
    return m;
  }

  void rw_vs_sde(const Cell& c) {
    const auto& p = potential(c.delta);
    Lattice lat = Lattice::from_spacing(*c.eps);
    int n = *c.n;
    double T = *c.T;
    auto ts = times(T);
    auto signs = fp_signs(n);
    LatticeStateSpace space{lat, n};
    int m = fp_grid(lat.size());
    check_states(space.states(), "lattice law");
    check_states(static_cast<std::size_t>(std::pow(static_cast<double>(m), 2 * n)), "continuum law");
    FpOptions fo;
    fo.snapshot_times = positive(ts);
    auto f0 = product_initial_law(cfg_.initial, signs, space);
    auto g0 = product_initial_law(cfg_.initial, signs, m);
    FpTrajectory disc = solve_discrete_fp(f0, space, signs, p, c.beta, T, fo);
    fo.dt = cfg_.mf_dt;
    FpTrajectory cont = solve_continuum_fp(g0, m, signs, p, c.beta, T, fo);
    BoundInputs in;
    in.initial_difference = l2_law_distance(f0, restrict_law(g0, m, space), space);
    for (double t : ts) {
      double d = l2_law_distance(disc.states[find_time(disc.times, t)],
                                 restrict_law(cont.states[find_time(cont.times, t)], m, space), space);
      ResultRow r = row(c, t, "l2_law", d, std::nullopt, 0);
      r.method = "exact";
      attach(r, bound_rhs(BoundId::T1, bound_params(c, t), in));
      emit(r);
    }
  }

  void rw_vs_mf_via_sde(const Cell& c) {
    const auto& p = potential(c.delta);
    Lattice lat = Lattice::from_spacing(*c.eps);
    int n = *c.n;
    double T = *c.T;
    auto ts = times(T);
    auto signs = fp_signs(n);
    LatticeStateSpace space{lat, n};
    check_states(space.states() * space.states(), "transport problem");
    int m = continuum_grid(p, lat.size(), 64);
    auto f0 = product_initial_law(cfg_.initial, signs, space);
    FpOptions fo;
    fo.snapshot_times = positive(ts);
    FpTrajectory disc = solve_discrete_fp(f0, space, signs, p, c.beta, T, fo);
    GridDensityPair g0 = make_grid_density(cfg_.initial, m);
    MfOptions mo;
    mo.dt = cfg_.mf_dt;
    mo.snapshot_times = positive(ts);
    MfTrajectory mf = solve_mf(g0, p, c.beta, T, mo);
    int N = lat.size();
    auto atoms_of = [&](const std::vector<double>& w) {
      AtomicMeasure a;
      a.components = n;
      double total = std::accumulate(w.begin(), w.end(), 0.0);
      for (std::size_t s = 0; s < w.size(); ++s) {
        std::vector<TorusPoint> pts;
        for (const LatticeSite& l : space.decode(s)) pts.push_back(site_position(l, N));
        a.add(pts, std::max(w[s], 0.0) / total);
      }
      return a;
    };
    double mass_plus = g0.mass_plus() / g0.mass();
    double kappa = mass_discrepancy(mass_plus, count_plus(signs), n);
    BoundInputs in;
    in.kappa = kappa;
    in.initial_difference = 0.0;
    for (double t : ts) {
      const auto& law = disc.states[find_time(disc.times, t)];
      LatticeDensityPair rho = restrict_to_lattice(mf.states[find_time(mf.times, t)], *c.eps);
      std::vector<double> prod(space.states());
      for (std::size_t s = 0; s < prod.size(); ++s) {
        double v = 1.0;
        auto x = space.decode(s);
        for (int i = 0; i < n; ++i) {
          const auto& f = signs[i] > 0 ? rho.plus : rho.minus;
          v *= f[site_index(x[i], N)];
        }
        prod[s] = v;
      }
      MetricReport w = w1_distance(atoms_of(law), atoms_of(prod), n);
      ResultRow r = row(c, t, "w1_per_particle", w.value / n, std::nullopt, 0);
      r.method = w.method;
      r.err_factor = w.err_factor;
      attach(r, bound_rhs(BoundId::C2, bound_params(c, t), in));
      emit(r);
    }
  }

  void consistency(const Cell& c) {
    const auto& p = potential(c.delta);
    GeneratorDefect d = consistency_order(test_function(cfg_.test_function),
                                          test_force(cfg_.force, cfg_.force_strength, &p), cfg_.eps, c.beta, 1,
                                          cfg_.test_function);
    for (std::size_t k = 0; k < d.eps.size(); ++k) {
      Cell ck = c;
      ck.eps = d.eps[k];
      ResultRow r = row(ck, std::nullopt, "generator_defect", d.defects[k], std::nullopt, 0);
      r.method = cfg_.test_function + "/" + cfg_.force;
      emit(r);
    }
    ResultRow o = row(c, std::nullopt, "fitted_order", d.order, std::nullopt, 0);
    o.method = "least-squares";
    emit(o);
    ResultRow ci = row(c, std::nullopt, "fitted_order_ci95", d.order_ci, std::nullopt, 0);
    ci.method = "student-t";
    emit(ci);
  }

  void stability(const Cell& c) {
    const auto& p = potential(c.delta);
    LatticeStateSpace space{Lattice::from_spacing(*c.eps), 1};
    SmoothForce force = test_force(cfg_.force, cfg_.force_strength, &p);
    DiscreteGenerator gen(space, force, c.beta);
    long R = cfg_.replications;
    std::vector<double> vals(R);
    parallel_for(R, cfg_.threads, [&](long r) {
      Rng rng = make_rng(replication_seed(c.seed, r), {7});
      std::vector<double> f(space.states());
      for (double& v : f) v = 2.0 * uniform01(rng) - 1.0;
      std::vector<double> g;
      gen.apply_adjoint(f, g);
      double gf = 0.0, ff = 0.0;
      for (std::size_t s = 0; s < f.size(); ++s) {
        gf += g[s] * f[s];
        ff += f[s] * f[s];
      }
      vals[r] = gf / ff;
    });
    Stat s = stat_of(vals);
    ResultRow mean = row(c, std::nullopt, "rayleigh_mean", s.mean, s.se, R);
    mean.method = cfg_.force;
    emit(mean);
    ResultRow mx = row(c, std::nullopt, "rayleigh_max", *std::max_element(vals.begin(), vals.end()), std::nullopt, R);
    mx.method = cfg_.force;
    emit(mx);
  }

  void bounds_only(const Cell& c) {
    std::vector<BoundId> ids;
    if (cfg_.bounds.empty()) {
      ids = {BoundId::T1, BoundId::T2, BoundId::T3, BoundId::T4, BoundId::C1, BoundId::C2};
    } else {
      for (const auto& s : cfg_.bounds) ids.push_back(bound_from_string(s));
    }
    BoundInputs in;
    in.initial_difference = cfg_.initial_difference;
    in.kappa = cfg_.kappa;
    in.initial_lip_sum = norms().lip_sum;
    in.initial_sup_sum = norms().sup_sum;
    for (double t : times(*c.T)) {
      for (BoundId id : ids) {
        ResultRow r = row(c, t, "", std::nullopt, std::nullopt, 0);
        attach(r, bound_rhs(id, bound_params(c, t), in));
        emit(r);
      }
    }
  }

  const ExperimentConfig& cfg_;
  std::ostream* csv_;
  ExperimentResult result_;
  std::map<double, RegularizedPotential> potentials_;
  std::map<double, AssumptionReport> assumptions_;
  std::optional<InitialNorms> norms_;
};

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* csv) {
  ValidationReport v = validate_config(cfg);
  if (!v.ok()) {
    std::string msg = "invalid configuration:";
    for (const auto& s : v.violations) msg += "\n  " + s;
    throw std::invalid_argument(msg);
  }
  return Runner(cfg, csv).run();
}

}  // namespace dislab
