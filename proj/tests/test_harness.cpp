#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "exlab/harness.hpp"
#include "exlab/parallel.hpp"
#include "exlab/stats.hpp"

using namespace exlab;

namespace {

ExperimentConfig terminal_config(std::size_t replicas, std::uint64_t seed) {
  ExperimentConfig c;
  c.kind = ExperimentKind::sde1d;
  c.model = {{"experiment", "terminal"}, {"gamma", 0.3}, {"delta", 0.1}, {"z0", 0.05}, {"eps", 0.01}};
  c.replicas = replicas;
  c.dt = 1e-3;
  c.horizon = 0.2;
  c.seed = seed;
  return c;
}

ExperimentConfig coupling_config() {
  ExperimentConfig c;
  c.kind = ExperimentKind::coupling;
  c.model = {{"box_radius", 15}, {"gamma", 0.3}, {"delta", 0.05}, {"cut", 4}, {"radii", {3, 6}}};
  c.replicas = 20;
  c.dt = 1e-2;
  c.horizon = 0.5;
  c.seed = 11;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing") {
  const Json j = {{"kind", "lattice-support"}, {"model", {{"box_radius", 10}, {"radii", {5}}}}, {"replicas", 3},
                  {"dt", 0.01},                {"horizon", 0.5},               {"seed", 18446744073709551615ull}};
  const auto c = ExperimentConfig::from_json(j);
  CHECK(c.kind == ExperimentKind::lattice_support);
  CHECK(c.replicas == 3);
  CHECK(c.seed == 18446744073709551615ull);
  CHECK_NOTHROW(c.validate());
  CHECK(ExperimentConfig::from_json(c.to_json()).to_json() == c.to_json());

  CHECK_THROWS(ExperimentConfig::from_json({{"kind", "sde1d"}, {"replica", 3}}));
  CHECK_THROWS(ExperimentConfig::from_json({{"kind", "sde1d"}, {"replicas", 0}}));
  CHECK_THROWS(ExperimentConfig::from_json({{"kind", "sde1d"}, {"seed", -1}}));
  CHECK_THROWS(ExperimentConfig::from_json({{"kind", "heat"}}));

  auto bad = terminal_config(1, 1);
  bad.model["gama"] = 0.3;
  CHECK_THROWS(bad.validate());
  bad = terminal_config(1, 1);
  bad.dt = 0.0;
  CHECK_THROWS(bad.validate());
  bad = terminal_config(1, 1);
  bad.model["gamma"] = 1.5;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("lattice JSON setup") {
  const Json j = {{"dim", 2},
                  {"box_radius", 4},
                  {"rates", {{{"offset", {1, 0}}, {"rate", 0.25}}, {{"offset", {-1, 0}}, {"rate", 0.25}}}},
                  {"x0", {{{"site", {1, -2}}, {"mass", 2.0}}}}};
  const auto s = lattice_setup_from_json(j);
  CHECK(s.kernel.total_rate() == Catch::Approx(0.5));
  CHECK(s.x0.total_mass() == 2.0);
  CHECK(s.x0.values[s.x0.box().index({1, -2})] == 2.0);
  CHECK_THROWS(lattice_setup_from_json({{"box_radius", 4}, {"x0", {{{"site", {9}}, {"mass", 1.0}}}}}));

  const auto k = kernel_from_json({{"kernel", {{"exponential", {{"scale", 3.0}, {"total_rate", 4.0}}}}}});
  CHECK(k.total_rate() + k.dropped_rate == Catch::Approx(4.0));
  CHECK(k.rate({1}) / k.rate({2}) == Catch::Approx(std::exp(1.0 / 3.0)));
}

TEST_CASE("replicas = 1 equals a direct module call") {
  const auto c = terminal_config(1, 42);
  const auto r = run_ensemble(c);
  SdeParams p;
  p.delta = 0.1;
  p.noise = NoiseSpec::power(0.3);
  p.z0 = 0.05;
  auto rng = split_stream(42, {0});
  const auto path = simulate_path(p, c.horizon, c.dt, rng);
  REQUIRE(r.records.rows.size() == 1);
  CHECK(std::get<double>(r.records.rows[0][1]) == path.values.back());
  CHECK(std::get<double>(r.records.rows[0][2]) == occupation_time(path, 0.01, c.horizon));
}

TEST_CASE("report bytes are stable and round-trip") {
  const auto c = coupling_config();
  const auto a = run_ensemble(c, 1);
  const auto b = run_ensemble(c, 1);
  CHECK(report_json_text(a) == report_json_text(b));
  CHECK(report_csv_text(a) == report_csv_text(b));

  const auto back = report_from_json(Json::parse(report_json_text(a)));
  CHECK(back == normalized(a));
  CHECK(report_json_text(back) == report_json_text(a));

  const auto j = Json::parse(report_json_text(a));
  CHECK(j.at("format_version") == kFormatVersion);
  CHECK(j.at("config") == c.to_json());
  for (const auto& p : j.at("predicates")) {
    CHECK(p.contains("name"));
    CHECK(p.contains("value"));
    CHECK(p.contains("bound"));
    CHECK(p.contains("pass"));
  }
}

TEST_CASE("parallel and serial runs are byte-identical") {
  for (const auto& c : {terminal_config(64, 5), coupling_config()}) {
    const auto serial = run_ensemble(c, 1);
    const auto parallel = run_ensemble(c, 4);
    CHECK(report_json_text(serial) == report_json_text(parallel));
    CHECK(report_csv_text(serial) == report_csv_text(parallel));
  }
  ExperimentConfig l;
  l.kind = ExperimentKind::lattice_support;
  l.model = {{"box_radius", 12}, {"gammas", {0.25, 0.5}}, {"radii", {4}}, {"contrast", {{"radius", 4}, {"min", 0.0}}}};
  l.replicas = 6;
  l.dt = 0.01;
  l.horizon = 0.3;
  CHECK(report_json_text(run_ensemble(l, 1)) == report_json_text(run_ensemble(l, 3)));
}

TEST_CASE("csv columns follow the declared schemas") {
  const auto header = [](const ResultSet& r) {
    const auto text = report_csv_text(r);
    return text.substr(0, text.find('\n'));
  };
  CHECK(header(run_ensemble(coupling_config(), 1)) ==
        "replica,i,T_delta,tau1,horizon,max_y_minus_ybar,fraction_inside_r3,fraction_inside_r6");

  ExperimentConfig lad;
  lad.kind = ExperimentKind::ladder;
  lad.model = {{"experiment", "two_zeta"}, {"gamma", 0.25}, {"delta", 0.01}, {"zeta", 1e-2}};
  lad.replicas = 1000;
  lad.dt = 1e-5;
  CHECK(header(run_ensemble(lad, 1)) == "experiment,index,estimate,stderr,envelope_lo,envelope_hi,pass");

  ExperimentConfig bvp;
  bvp.kind = ExperimentKind::bvp;
  bvp.model = {{"family", "constant"}, {"p", 0.5}, {"N", 10}};
  const auto r = run_ensemble(bvp);
  CHECK(header(r) == "n,p,g");
  CHECK(r.all_pass());
}

TEST_CASE("emit_report writes files and reports the path on failure") {
  const auto dir = std::filesystem::temp_directory_path() / "exlab_test_harness";
  std::filesystem::remove_all(dir);
  const auto r = run_ensemble(terminal_config(8, 3));
  emit_reports(r, (dir / "sub" / "rep").string());
  CHECK(slurp(dir / "sub" / "rep.json") == report_json_text(r));
  CHECK(slurp(dir / "sub" / "rep.csv") == report_csv_text(r));
  // A regular file where a directory is needed.
  try {
    emit_report(r, ReportFormat::json, dir / "sub" / "rep.json" / "x.json");
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("rep.json") != std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("doubling replicas shrinks confidence intervals by about sqrt 2") {
  double small = 0.0, large = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto a = run_ensemble(terminal_config(200, 1000 + s));
    const auto b = run_ensemble(terminal_config(400, 2000 + s));
    const auto width = [](const ResultSet& r) {
      for (const auto& g : r.aggregates)
        if (g.name == "z_T") return g.ci_hi - g.ci_lo;
      return 0.0;
    };
    small += width(a);
    large += width(b);
  }
  const double ratio = small / large;
  CHECK(ratio >= 1.3);
  CHECK(ratio <= 1.6);
}

TEST_CASE("replica failures are surfaced with their index") {
  // Drift that explodes once a site exceeds mass 2.
  ExperimentConfig c;
  c.kind = ExperimentKind::lattice_support;
  c.model = {{"box_radius", 6},
             {"gamma", 0.5},
             {"radii", {2}},
             {"drift", {{"mode", "table"}, {"L", 1e300}, {"knots", {{1.0, 0.0}, {2.0, 0.0}, {3.0, 1e300}}}}}};
  c.replicas = 40;
  c.dt = 0.05;
  c.horizon = 1.0;
  c.seed = 9;
  const auto r = run_ensemble(c, 2);
  REQUIRE(!r.failures.empty());
  CHECK(r.failures.size() < c.replicas);
  CHECK(r.records.rows.size() + r.failures.size() == c.replicas);
  for (std::size_t k = 1; k < r.failures.size(); ++k) CHECK(r.failures[k - 1].replica < r.failures[k].replica);
  CHECK(!r.all_pass());
  const auto j = Json::parse(report_json_text(r));
  CHECK(j.at("failures").size() == r.failures.size());
  CHECK(j.at("pass") == false);
}
