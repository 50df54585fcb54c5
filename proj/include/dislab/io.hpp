#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dislab/densities.hpp"
#include "dislab/interaction.hpp"
#include "dislab/metrics.hpp"
#include "dislab/rw_simulator.hpp"

namespace dislab {

inline constexpr int kResultSchemaVersion = 1;

// One line of an experiment CSV. Empty optionals are written as empty fields.
struct ResultRow {
  std::string experiment;
  std::optional<double> eps;
  std::optional<int> n;
  std::optional<double> beta, delta, T, t;
  std::string metric;
  std::optional<double> value, std_error;
  std::string method;
  std::optional<double> err_factor;
  std::string bound_id;
  std::optional<double> bound_rhs;
  long replications = 0;
  std::uint64_t seed = 0;
  std::string build;

  bool operator==(const ResultRow&) const = default;
};

const std::vector<std::string>& result_columns();
// Shortest round-trip representation ("%.17g"); nan and inf spelled as such.
std::string format_double(double v);

void write_result_header(std::ostream& os);
void write_result_row(std::ostream& os, const ResultRow& r);
// Throws std::runtime_error when the header differs from result_columns() or
// a row has the wrong field count or an unparsable number.
std::vector<ResultRow> read_results(std::istream& is);

// t,particle,axis,sign
void write_event_log(std::ostream& os, const RwTrajectory& tr);
// t,particle,x1,x2,b
void write_snapshots(std::ostream& os, const std::vector<double>& times,
                     const std::vector<SignedConfiguration>& configs);
void write_snapshots(std::ostream& os, const std::vector<double>& times,
                     const std::vector<LatticeConfiguration>& configs);
// t,species,i1,i2,value
void write_density_header(std::ostream& os);
void write_density(std::ostream& os, double t, const LatticeDensityPair& rho);
void write_density(std::ostream& os, double t, const GridDensityPair& rho);
// experiment,t,metric,value,method,err_factor
void write_metric_header(std::ostream& os);
void write_metric_row(std::ostream& os, const std::string& experiment, double t, const MetricReport& m);

// Build identifier baked in at configure time.
std::string build_id();

}  // namespace dislab
