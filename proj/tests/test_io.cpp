#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <sstream>

#include "dislab/io.hpp"

using namespace dislab;

namespace {

ResultRow sample_row() {
  ResultRow r;
  r.experiment = "sde-vs-mf";
  r.eps = 1.0 / 64;
  r.n = 256;
  r.beta = 5;
  r.delta = 0.3;
  r.T = 0.25;
  r.t = 0.125;
  r.metric = "bl";
  r.value = 0.1 + 0.2;  // not exactly representable in short form
  r.std_error = 1.25e-4;
  r.method = "flow";
  r.err_factor = 1.0;
  r.bound_id = "T3";
  r.bound_rhs = 0.6;
  r.replications = 200;
  r.seed = 18446744073709551615ull;
  r.build = "abc123";
  return r;
}

std::string header() {
  std::ostringstream os;
  write_result_header(os);
  return os.str();
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("header layout") {
    CHECK(header() ==
          "schema,experiment,eps,n,beta,delta,T,t,metric,value,std_error,method,err_factor,bound_id,bound_rhs,"
          "replications,seed,build\n");
    CHECK(result_columns().size() == 18u);
  }

  TEST_CASE("round trip") {
    std::ostringstream os;
    write_result_header(os);
    ResultRow a = sample_row(), b;
    b.experiment = "bounds-only";
    b.bound_id = "T1";
    b.bound_rhs = std::numeric_limits<double>::infinity();
    write_result_row(os, a);
    write_result_row(os, b);
    std::istringstream is(os.str());
    auto rows = read_results(is);
    REQUIRE(rows.size() == 2u);
    CHECK(rows[0] == a);
    CHECK(rows[1] == b);
    CHECK(!rows[1].value);
    CHECK(!rows[1].n);
  }

  TEST_CASE("empty optionals are empty fields") {
    std::ostringstream os;
    ResultRow r;
    r.experiment = "bounds-only";
    write_result_row(os, r);
    CHECK(os.str() == "1,bounds-only,,,,,,,,,,,,,,0,0,\n");
  }

  TEST_CASE("rejects malformed input") {
    std::ostringstream good;
    write_result_header(good);
    write_result_row(good, sample_row());
    std::string text = good.str();

    std::istringstream bad_header("schema,experiment\n");
    CHECK_THROWS_AS(read_results(bad_header), std::runtime_error);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_results(empty), std::runtime_error);

    std::string short_row = header() + "1,x,1\n";
    std::istringstream s1(short_row);
    CHECK_THROWS_AS(read_results(s1), std::runtime_error);

    std::string bad_num = text;
    bad_num.replace(bad_num.find("0.015625"), 8, "0.01x625");
    std::istringstream s2(bad_num);
    CHECK_THROWS_AS(read_results(s2), std::runtime_error);

    std::string version = header() + "2" + text.substr(text.find('\n') + 2);
    std::istringstream s3(version);
    CHECK_THROWS_AS(read_results(s3), std::runtime_error);

    ResultRow r = sample_row();
    r.method = "a,b";
    std::ostringstream os;
    CHECK_THROWS(write_result_row(os, r));
  }

  TEST_CASE("number formatting") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(1.0 / 3) == "0.3333333333333333");
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    for (double v : {0.1, 1e-300, 123456789.125, -2.5e17}) CHECK(std::stod(format_double(v)) == v);
  }

  TEST_CASE("trajectory and density writers") {
    RwTrajectory tr;
    tr.events = {{0.25, 1, 0, -1}, {0.5, 0, 1, 1}};
    std::ostringstream ev;
    write_event_log(ev, tr);
    CHECK(ev.str() == "t,particle,axis,sign\n0.25,1,0,-1\n0.5,0,1,1\n");

    LatticeConfiguration c;
    c.lattice = Lattice(4);
    c.sites = {{1, 3}};
    c.signs = {-1};
    std::ostringstream sn;
    write_snapshots(sn, {0.5}, std::vector<LatticeConfiguration>{c});
    CHECK(sn.str() == "t,particle,x1,x2,b\n0.5,0,0.25,-0.25,-1\n");

    GridDensityPair rho(2);
    rho.plus = {1, 2, 3, 4};
    rho.minus = {0, 0, 0, 0.5};
    std::ostringstream d;
    write_density(d, 0.0, rho);
    std::string out = d.str();
    CHECK(out.find("0,+,1,0,3\n") != std::string::npos);
    CHECK(out.find("0,-,1,1,0.5\n") != std::string::npos);

    MetricReport m{"w1", 0.125, "exact-lp", 1.0, 0.0};
    std::ostringstream mr;
    write_metric_header(mr);
    write_metric_row(mr, "rw-vs-sde", 0.25, m);
    CHECK(mr.str() == "experiment,t,metric,value,method,err_factor\nrw-vs-sde,0.25,w1,0.125,exact-lp,1\n");
    CHECK(!build_id().empty());
  }
}
