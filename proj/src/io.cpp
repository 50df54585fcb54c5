#include "dislab/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#ifndef DISLAB_BUILD_ID
#define DISLAB_BUILD_ID "unknown"
#endif

namespace dislab {

std::string build_id() { return DISLAB_BUILD_ID; }

const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> cols = {
      "schema",     "experiment", "eps",    "n",        "beta",         "delta", "T",    "t",
      "metric",     "value",      "std_error", "method", "err_factor", "bound_id", "bound_rhs",
      "replications", "seed",     "build"};
  return cols;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

// Fields never contain commas, quotes or newlines; reject them instead of quoting.
const std::string& plain(const std::string& s) {
  if (s.find_first_of(",\"\n\r") != std::string::npos) throw std::invalid_argument("CSV field contains a separator: " + s);
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  std::size_t pos = 0;
  double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument(s);
  return v;
}

std::optional<double> parse_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

}  // namespace

void write_result_header(std::ostream& os) {
  const auto& c = result_columns();
  for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
  os << '\n';
}

void write_result_row(std::ostream& os, const ResultRow& r) {
  os << kResultSchemaVersion << ',' << plain(r.experiment) << ',' << opt(r.eps) << ','
     << (r.n ? std::to_string(*r.n) : std::string()) << ',' << opt(r.beta) << ',' << opt(r.delta) << ','
     << opt(r.T) << ',' << opt(r.t) << ',' << plain(r.metric) << ',' << opt(r.value) << ',' << opt(r.std_error)
     << ',' << plain(r.method) << ',' << opt(r.err_factor) << ',' << plain(r.bound_id) << ',' << opt(r.bound_rhs)
     << ',' << r.replications << ',' << r.seed << ',' << plain(r.build) << '\n';
}

std::vector<ResultRow> read_results(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("results CSV: missing header");
  auto head = split(line);
  if (head != result_columns()) throw std::runtime_error("results CSV: unexpected header '" + line + "'");
  std::vector<ResultRow> rows;
  long lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split(line);
    if (f.size() != head.size()) {
      throw std::runtime_error("results CSV line " + std::to_string(lineno) + ": expected " +
                               std::to_string(head.size()) + " fields, got " + std::to_string(f.size()));
    }
    try {
      if (std::stoi(f[0]) != kResultSchemaVersion) throw std::runtime_error("unsupported schema version " + f[0]);
      ResultRow r;
      r.experiment = f[1];
      r.eps = parse_opt(f[2]);
      if (!f[3].empty()) r.n = std::stoi(f[3]);
      r.beta = parse_opt(f[4]);
      r.delta = parse_opt(f[5]);
      r.T = parse_opt(f[6]);
      r.t = parse_opt(f[7]);
      r.metric = f[8];
      r.value = parse_opt(f[9]);
      r.std_error = parse_opt(f[10]);
      r.method = f[11];
      r.err_factor = parse_opt(f[12]);
      r.bound_id = f[13];
      r.bound_rhs = parse_opt(f[14]);
      r.replications = std::stol(f[15]);
      r.seed = std::stoull(f[16]);
      r.build = f[17];
      rows.push_back(std::move(r));
    } catch (const std::runtime_error&) {
      throw;
    } catch (const std::exception& e) {
      throw std::runtime_error("results CSV line " + std::to_string(lineno) + ": bad number (" + e.what() + ")");
    }
  }
  return rows;
}

void write_event_log(std::ostream& os, const RwTrajectory& tr) {
  os << "t,particle,axis,sign\n";
  for (const RwEvent& e : tr.events) {
    os << format_double(e.t) << ',' << e.particle << ',' << e.axis << ',' << e.sign << '\n';
  }
}

void write_snapshots(std::ostream& os, const std::vector<double>& times,
                     const std::vector<SignedConfiguration>& configs) {
  os << "t,particle,x1,x2,b\n";
  for (std::size_t k = 0; k < configs.size(); ++k) {
    const auto& c = configs[k];
    for (std::size_t i = 0; i < c.size(); ++i) {
      os << format_double(times.at(k)) << ',' << i << ',' << format_double(c.positions[i].x1()) << ','
         << format_double(c.positions[i].x2()) << ',' << c.signs[i] << '\n';
    }
  }
}

void write_snapshots(std::ostream& os, const std::vector<double>& times,
                     const std::vector<LatticeConfiguration>& configs) {
  std::vector<SignedConfiguration> off;
  for (const auto& c : configs) {
    SignedConfiguration s;
    s.signs = c.signs;
    for (const LatticeSite& l : c.sites) s.positions.push_back(site_position(l, c.lattice.size()));
    off.push_back(std::move(s));
  }
  write_snapshots(os, times, off);
}

void write_density_header(std::ostream& os) { os << "t,species,i1,i2,value\n"; }

namespace {
void density_rows(std::ostream& os, double t, int m, const std::vector<double>& plus, const std::vector<double>& minus) {
  std::string ts = format_double(t);
  for (int sp = 0; sp < 2; ++sp) {
    const auto& v = sp == 0 ? plus : minus;
    for (std::size_t i = 0; i < v.size(); ++i) {
      os << ts << ',' << (sp == 0 ? "+" : "-") << ',' << i / m << ',' << i % m << ',' << format_double(v[i]) << '\n';
    }
  }
}
}  // namespace

void write_density(std::ostream& os, double t, const LatticeDensityPair& rho) {
  density_rows(os, t, rho.lattice.size(), rho.plus, rho.minus);
}

void write_density(std::ostream& os, double t, const GridDensityPair& rho) {
  density_rows(os, t, rho.grid, rho.plus, rho.minus);
}

void write_metric_header(std::ostream& os) { os << "experiment,t,metric,value,method,err_factor\n"; }

void write_metric_row(std::ostream& os, const std::string& experiment, double t, const MetricReport& m) {
  os << plain(experiment) << ',' << format_double(t) << ',' << plain(m.metric) << ',' << format_double(m.value) << ','
     << plain(m.method) << ',' << format_double(m.err_factor) << '\n';
}

}  // namespace dislab
