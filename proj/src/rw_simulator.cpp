#include "dislab/rw_simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dislab {

std::string to_string(Scheduler s) { return s == Scheduler::gillespie ? "gillespie" : "time_change"; }

Scheduler scheduler_from_string(const std::string& s) {
  if (s == "gillespie") return Scheduler::gillespie;
  if (s == "time_change") return Scheduler::time_change;
  throw std::invalid_argument("unknown scheduler '" + s + "'");
}

double PoissonStream::arrival(std::size_t k) {
  while (arrivals_.size() < k) {
    double last = arrivals_.empty() ? 0.0 : arrivals_.back();
    arrivals_.push_back(last + exponential1(rng_));
  }
  return arrivals_[k - 1];
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Positions, forces and rates of the interacting walk, updated in O(n) per jump.
class RwState {
 public:
  RwState(const LatticeConfiguration& c0, const LatticeKernel& k, double beta)
      : c_(c0), k_(k), beta_(beta), n_(static_cast<int>(c0.size())) {
    double e = c0.lattice.spacing();
    base_ = 1.0 / (beta * e * e);
    half_ = 0.5 * beta * e;
    forces_ = particle_forces(c_, k_);
    rates_.resize(4 * n_);
    for (int i = 0; i < n_; ++i) refresh_rates(i);
  }

  const LatticeConfiguration& config() const { return c_; }
  const std::vector<double>& rates() const { return rates_; }
  double rate(int h) const { return rates_[h]; }

  void jump(int particle, int dir) {
    Direction d = kDirections[dir];
    LatticeSite from = c_.sites[particle];
    LatticeSite to = step(from, d, c_.lattice.size());
    double inv_n = 1.0 / n_;
    int bi = c_.signs[particle];
    Vec2 fi{};
    for (int j = 0; j < n_; ++j) {
      if (j == particle) continue;
      double w = bi * c_.signs[j] * inv_n;
      Vec2 g_old = k_.gradient(k_.offset(c_.sites[j], from));
      Vec2 g_new = k_.gradient(k_.offset(c_.sites[j], to));
      forces_[j] -= (g_new - g_old) * w;
      fi -= k_.gradient(k_.offset(to, c_.sites[j])) * w;
      refresh_rates(j);
    }
    c_.sites[particle] = to;
    forces_[particle] = fi;
    refresh_rates(particle);
  }

 private:
  void refresh_rates(int i) {
    double a1 = half_ * forces_[i].x1, a2 = half_ * forces_[i].x2;
    double e1 = std::exp(a1), e2 = std::exp(a2);
    rates_[4 * i + 0] = base_ * e1;
    rates_[4 * i + 1] = base_ / e1;
    rates_[4 * i + 2] = base_ * e2;
    rates_[4 * i + 3] = base_ / e2;
  }

  LatticeConfiguration c_;
  const LatticeKernel& k_;
  double beta_;
  int n_;
  double base_ = 0, half_ = 0;
  std::vector<Vec2> forces_;
  std::vector<double> rates_;
};

void check_inputs(const LatticeConfiguration& c0, const LatticeKernel& k, double beta, double T) {
  validate(c0);
  if (!(c0.lattice == k.lattice())) throw std::invalid_argument("simulate_rw: configuration and kernel lattices differ");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("simulate_rw: beta must be positive");
  if (!(T >= 0.0) || !std::isfinite(T)) throw std::invalid_argument("simulate_rw: T must be nonnegative");
}

std::vector<double> sorted_marks(const std::vector<double>& times, double T) {
  std::vector<double> m = times;
  for (double t : m) {
    if (!(t >= 0.0 && t <= T)) throw std::invalid_argument("snapshot time outside [0, T]");
  }
  std::sort(m.begin(), m.end());
  return m;
}

// Streams of a walk with n particles: 4 per particle, seeded by (seed, particle, direction).
std::vector<PoissonStream> make_streams(std::uint64_t seed, int n) {
  std::vector<PoissonStream> s;
  s.reserve(4 * n);
  for (int h = 0; h < 4 * n; ++h) s.emplace_back(make_rng(seed, {2, static_cast<std::uint64_t>(h)}));
  return s;
}

struct ClockState {
  std::vector<double> tau;
  std::vector<long> count;
  std::vector<double> next;  // next arrival beyond count
};

// Time-change run of the interacting walk on the given streams.
void run_time_change(RwState& st, std::vector<PoissonStream>& streams, double T, const std::vector<double>& marks,
                     RwTrajectory& traj, std::vector<std::vector<double>>* tau_rec,
                     std::vector<std::vector<long>>* count_rec) {
  int H = static_cast<int>(streams.size());
  ClockState cs{std::vector<double>(H, 0.0), std::vector<long>(H, 0), std::vector<double>(H)};
  for (int h = 0; h < H; ++h) cs.next[h] = streams[h].arrival(1);
  std::size_t mi = 0;
  double t = 0.0;
  auto advance = [&](double dt) {
    for (int h = 0; h < H; ++h) cs.tau[h] += st.rate(h) * dt;
  };
  auto take = [&](double when) {
    traj.snapshot_times.push_back(when);
    traj.snapshots.push_back(st.config());
    if (tau_rec) tau_rec->push_back(cs.tau);
    if (count_rec) count_rec->push_back(cs.count);
  };
  for (;;) {
    double best = kInf;
    int fire = -1;
    for (int h = 0; h < H; ++h) {
      double dt = (cs.next[h] - cs.tau[h]) / st.rate(h);
      if (dt < best) {
        best = dt;
        fire = h;
      }
    }
    double t_next = t + best;
    // Rates are constant until the next event, so marks before it only advance the clocks.
    while (mi < marks.size() && marks[mi] < t_next) {
      advance(marks[mi] - t);
      t = marks[mi];
      take(t);
      ++mi;
    }
    if (t_next > T) {
      advance(T - t);
      t = T;
      while (mi < marks.size()) take(marks[mi++]);
      break;
    }
    advance(t_next - t);
    t = t_next;
    cs.tau[fire] = cs.next[fire];
    cs.count[fire] += 1;
    cs.next[fire] = streams[fire].arrival(cs.count[fire] + 1);
    int particle = fire / 4, dir = fire % 4;
    st.jump(particle, dir);
    traj.events.push_back({t, particle, kDirections[dir].axis, kDirections[dir].sign});
  }
}

}  // namespace

std::vector<double> jump_rates(const LatticeConfiguration& c, const LatticeKernel& k, double beta) {
  validate(c);
  if (!(beta > 0.0)) throw std::invalid_argument("jump_rates: beta must be positive");
  RwState st(c, k, beta);
  return st.rates();
}

std::vector<double> jump_rates(const LatticeConfiguration& c, const RegularizedPotential& p, double beta, double eps) {
  Lattice lat = Lattice::from_spacing(eps);
  if (!(lat == c.lattice)) throw std::invalid_argument("jump_rates: eps does not match the configuration lattice");
  return jump_rates(c, LatticeKernel(p, lat), beta);
}

RwTrajectory simulate_rw(const LatticeConfiguration& c0, const LatticeKernel& k, double beta, double T,
                         std::uint64_t seed, Scheduler scheduler, const std::vector<double>& snapshot_times) {
  check_inputs(c0, k, beta, T);
  std::vector<double> marks = sorted_marks(snapshot_times, T);
  RwTrajectory traj;
  traj.seed = seed;
  traj.scheduler = scheduler;
  RwState st(c0, k, beta);
  if (scheduler == Scheduler::time_change) {
    auto streams = make_streams(seed, static_cast<int>(c0.size()));
    run_time_change(st, streams, T, marks, traj, nullptr, nullptr);
    return traj;
  }
  Rng rng = make_rng(seed, {1});
  std::size_t mi = 0;
  double t = 0.0;
  for (;;) {
    const auto& r = st.rates();
    double total = 0.0;
    for (double v : r) total += v;
    double t_next = t + exponential1(rng) / total;
    while (mi < marks.size() && marks[mi] < t_next) {
      traj.snapshot_times.push_back(marks[mi]);
      traj.snapshots.push_back(st.config());
      ++mi;
    }
    if (t_next > T) break;
    double u = uniform01(rng) * total;
    int pick = static_cast<int>(r.size()) - 1;
    double acc = 0.0;
    for (std::size_t h = 0; h < r.size(); ++h) {
      acc += r[h];
      if (u < acc) {
        pick = static_cast<int>(h);
        break;
      }
    }
    t = t_next;
    st.jump(pick / 4, pick % 4);
    traj.events.push_back({t, pick / 4, kDirections[pick % 4].axis, kDirections[pick % 4].sign});
  }
  return traj;
}

RwTrajectory simulate_rw(const LatticeConfiguration& c0, const RegularizedPotential& p, double beta, double eps,
                         double T, std::uint64_t seed, Scheduler scheduler, const std::vector<double>& snapshot_times) {
  Lattice lat = Lattice::from_spacing(eps);
  if (!(lat == c0.lattice)) throw std::invalid_argument("simulate_rw: eps does not match the configuration lattice");
  return simulate_rw(c0, LatticeKernel(p, lat), beta, T, seed, scheduler, snapshot_times);
}

namespace {

// Integral of c exp(g u) over u in [0, len].
double exp_integral(double c, double g, double len) {
  double x = g * len;
  if (std::abs(x) < 1e-8) return c * len * (1.0 + 0.5 * x + x * x / 6.0);
  return c * std::expm1(x) / g;
}

// Smallest u >= 0 with exp_integral(c, g, u) = r, or +inf.
double exp_crossing(double c, double g, double r) {
  double z = g * r / c;
  if (z <= -1.0) return kInf;
  if (std::abs(z) < 1e-8) return (r / c) * (1.0 - 0.5 * z + z * z / 3.0);
  return std::log1p(z) / g;
}

}  // namespace

CoupledRwResult simulate_coupled_rw(const LatticeConfiguration& c0, const MfeTrajectory& mfe, const LatticeKernel& k,
                                    double beta, double T, std::uint64_t seed,
                                    const std::vector<double>& snapshot_times) {
  check_inputs(c0, k, beta, T);
  if (mfe.times.empty() || mfe.forces.size() != mfe.times.size()) {
    throw std::invalid_argument("simulate_coupled_rw: mean-field trajectory has no force snapshots");
  }
  if (mfe.times.front() > 0.0 || mfe.times.back() < T * (1.0 - 1e-12)) {
    throw std::invalid_argument("simulate_coupled_rw: mean-field trajectory does not cover [0, T]");
  }
  if (!(mfe.states.front().lattice == c0.lattice)) {
    throw std::invalid_argument("simulate_coupled_rw: mean-field lattice differs from the configuration");
  }
  std::vector<double> marks = sorted_marks(snapshot_times, T);
  int n = static_cast<int>(c0.size());
  auto streams = make_streams(seed, n);

  CoupledRwResult out;
  out.x.seed = out.xbar.seed = seed;
  out.x.scheduler = out.xbar.scheduler = Scheduler::time_change;
  RwState st(c0, k, beta);
  run_time_change(st, streams, T, marks, out.x, &out.tau, &out.count);

  // Auxiliary walk: particles are independent given the mean-field force.
  int N = c0.lattice.size();
  double e = c0.lattice.spacing();
  double base = 1.0 / (beta * e * e);
  double half = 0.5 * beta * e;
  std::size_t nm = marks.size();
  out.tau_bar.assign(nm, std::vector<double>(4 * n, 0.0));
  out.count_bar.assign(nm, std::vector<long>(4 * n, 0));
  std::vector<std::vector<LatticeSite>> snap_sites(nm, std::vector<LatticeSite>(n));
  std::vector<RwEvent> events;
  // Interval boundaries: snapshot times of the mean-field run, cut at T.
  std::vector<double> grid;
  for (double tk : mfe.times) {
    if (tk < T) grid.push_back(tk);
  }
  grid.push_back(T);

  for (int i = 0; i < n; ++i) {
    int b = c0.signs[i];
    LatticeSite site = c0.sites[i];
    double tau[4] = {0, 0, 0, 0};
    long cnt[4] = {0, 0, 0, 0};
    double next[4];
    for (int d = 0; d < 4; ++d) next[d] = streams[4 * i + d].arrival(1);
    std::size_t mi = 0;
    for (std::size_t iv = 0; iv + 1 < grid.size(); ++iv) {
      double t0 = grid[iv], t1 = grid[iv + 1];
      // Force at the interval ends; mfe.times[iv] == grid[iv].
      const ForceField& fa = mfe.forces[iv];
      const ForceField& fb = mfe.forces[std::min(iv + 1, mfe.forces.size() - 1)];
      double tb = iv + 1 < mfe.times.size() ? mfe.times[iv + 1] : t0;
      double span = tb - t0;
      double t = t0;
      for (;;) {
        std::size_t idx = site_index(site, N);
        Vec2 f0 = fa.at(idx, b), f1 = fb.at(idx, b);
        double c[4], g[4];
        for (int d = 0; d < 4; ++d) {
          int axis = kDirections[d].axis, sgn = kDirections[d].sign;
          double a0 = half * sgn * f0[axis], a1 = half * sgn * f1[axis];
          double slope = span > 0.0 ? (a1 - a0) / span : 0.0;
          g[d] = slope;
          c[d] = base * std::exp(a0 + slope * (t - t0));  // rate at time t
        }
        // Snapshot marks inside [t, t1) are recorded when the interval is processed.
        double best = kInf;
        int fire = -1;
        for (int d = 0; d < 4; ++d) {
          double u = exp_crossing(c[d], g[d], next[d] - tau[d]);
          if (u < best) {
            best = u;
            fire = d;
          }
        }
        double t_event = t + best;
        double stop = std::min(t_event, t1);
        while (mi < nm && marks[mi] < stop) {
          for (int d = 0; d < 4; ++d) {
            out.tau_bar[mi][4 * i + d] = tau[d] + exp_integral(c[d], g[d], marks[mi] - t);
            out.count_bar[mi][4 * i + d] = cnt[d];
          }
          snap_sites[mi][i] = site;
          ++mi;
        }
        if (t_event > t1) {
          for (int d = 0; d < 4; ++d) tau[d] += exp_integral(c[d], g[d], t1 - t);
          break;
        }
        for (int d = 0; d < 4; ++d) tau[d] += exp_integral(c[d], g[d], best);
        tau[fire] = next[fire];
        cnt[fire] += 1;
        next[fire] = streams[4 * i + fire].arrival(cnt[fire] + 1);
        site = step(site, kDirections[fire], N);
        t = t_event;
        events.push_back({t, i, kDirections[fire].axis, kDirections[fire].sign});
      }
    }
    while (mi < nm) {
      for (int d = 0; d < 4; ++d) {
        out.tau_bar[mi][4 * i + d] = tau[d];
        out.count_bar[mi][4 * i + d] = cnt[d];
      }
      snap_sites[mi][i] = site;
      ++mi;
    }
  }
  std::sort(events.begin(), events.end(), [](const RwEvent& a, const RwEvent& b) {
    return a.t < b.t || (a.t == b.t && a.particle < b.particle);
  });
  out.xbar.events = std::move(events);
  for (std::size_t m = 0; m < nm; ++m) {
    LatticeConfiguration c = c0;
    c.sites = snap_sites[m];
    out.xbar.snapshot_times.push_back(marks[m]);
    out.xbar.snapshots.push_back(std::move(c));
  }
  return out;
}

double total_displacement(const LatticeConfiguration& a, const LatticeConfiguration& b) {
  if (a.size() != b.size() || !(a.lattice == b.lattice)) throw std::invalid_argument("total_displacement: mismatch");
  int n = a.lattice.size();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += torus_distance(site_position(a.sites[i], n), site_position(b.sites[i], n));
  return s;
}

}  // namespace dislab
