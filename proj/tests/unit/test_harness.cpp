#include <fcntl.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "doctest.h"
#include "formctl/cli.hpp"
#include "formctl/trace_io.hpp"
#include "helpers.hpp"
#include "json.hpp"

using namespace formctl;
using namespace formctl::testing;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& leaf) {
  static int counter = 0;
  fs::path dir = fs::temp_directory_path() / "formctl_unit";
  fs::create_directories(dir);
  return dir / (std::to_string(counter++) + "_" + leaf);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

nlohmann::json bundled_json(int dim) {
  return nlohmann::json::parse(
      slurp(scenario_dir() + (dim == 3 ? "/paper_3d.json" : "/paper_2d.json")));
}

Scenario parse_doc(const nlohmann::json& doc) { return parse_scenario(doc.dump(), "patched"); }

// The CLI reports through C stdio, so capture at the file-descriptor level.
std::string capture_stdout(const std::function<void()>& body) {
  std::fflush(stdout);
  const int saved = dup(1);
  REQUIRE(saved >= 0);
  fs::path sink = temp_path("stdout.txt");
  const int fd = open(sink.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  REQUIRE(fd >= 0);
  dup2(fd, 1);
  close(fd);
  body();
  std::fflush(stdout);
  dup2(saved, 1);
  close(saved);
  return slurp(sink);
}

SimulationTrace short_trace(int dim, ControlLaw law, double duration = 1.0) {
  Scenario scenario = paper_scenario(dim);
  IntegratorConfig config = scenario.integrator;
  config.duration = duration;
  config.snapshot_stride = 20;
  return simulate(scenario, law, config);
}

}  // namespace

TEST_CASE("bundled three-dimensional scenario loads with its published constants") {
  Scenario s = paper_scenario(3);
  CHECK(s.name == "paper-3d");
  CHECK(s.dim == 3);
  CHECK(s.n == 6);
  CHECK(s.num_leaders == 2);
  CHECK(s.graph.num_edges() == 9);
  CHECK(s.reference.u_c == doctest::Approx(0.15).epsilon(1e-15));
  CHECK(s.reference.h_c(0) == doctest::Approx(std::cos(M_PI / 6)).epsilon(1e-15));
  CHECK(s.reference.h_c(1) == doctest::Approx(std::sin(M_PI / 6)).epsilon(1e-15));
  CHECK(s.reference.h_c(2) == 0.0);
  CHECK(s.bearing_gains.k1 == 15.0);
  CHECK(s.bearing_gains.k2 == 7.0);
  CHECK(s.displacement_gains.k1 == 5.0);
  CHECK(s.displacement_gains.k2 == 3.0);
  CHECK(s.integrator.dt == 0.005);
  CHECK(s.integrator.duration == 120.0);
  CHECK(s.rigidity.rigid);
  CHECK(s.rigidity.rank == 14);
  CHECK(s.warnings.empty());
  // Followers start aligned with the reference and with settled estimators.
  const Vec v_c = s.v_c();
  for (int i = 2; i < 6; ++i) {
    CHECK((s.initial_h.segment(i * 3, 3) - s.reference.h_c).norm() < 1e-12);
    CHECK((s.initial_xi.segment(i * 3, 3) - v_c).norm() < 1e-12);
  }
}

TEST_CASE("bundled planar scenario loads with its published constants") {
  Scenario s = paper_scenario(2);
  CHECK(s.name == "paper-2d");
  CHECK(s.dim == 2);
  CHECK(s.reference.u_c == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(s.reference.h_c(0) == doctest::Approx(std::cos(M_PI / 6)).epsilon(1e-15));
  CHECK(s.reference.h_c(1) == doctest::Approx(std::sin(M_PI / 6)).epsilon(1e-15));
  CHECK(s.rigidity.rigid);
  CHECK(s.rigidity.rank == 9);
  CHECK(s.warnings.empty());
}

TEST_CASE("scenario file errors carry the offending field") {
  CHECK_THROWS_AS(load_scenario(scenario_dir() + "/does_not_exist.json"), IoError);
  CHECK_THROWS_AS(parse_scenario("this is not json", "bad"), ParseError);
  CHECK_THROWS_AS(parse_scenario("[1,2,3]", "bad"), ParseError);

  nlohmann::json doc = bundled_json(2);
  doc.erase("gains");
  CHECK_THROWS_WITH_AS(parse_doc(doc), "scenario: missing field 'gains'", ParseError);
}

TEST_CASE("a single leader is rejected by name") {
  nlohmann::json doc = bundled_json(2);
  doc["agents"][1]["leader"] = false;
  doc["agents"][1]["h"] = {1.0, 0.0};
  CHECK_THROWS_WITH_AS(parse_doc(doc), "agents: at least two leaders required", ValidationError);
}

TEST_CASE("agent ordering rules are enforced") {
  nlohmann::json doc = bundled_json(2);
  doc["agents"][2]["id"] = 7;
  CHECK_THROWS_AS(parse_doc(doc), ValidationError);

  // A leader listed after a follower breaks the leaders-first convention.
  doc = bundled_json(2);
  doc["agents"][4]["leader"] = true;
  CHECK_THROWS_AS(parse_doc(doc), ValidationError);
}

TEST_CASE("followers must declare an initial heading") {
  nlohmann::json doc = bundled_json(2);
  doc["agents"][3].erase("h");
  CHECK_THROWS_AS(parse_doc(doc), ValidationError);
}

TEST_CASE("leader headings must match the reference") {
  nlohmann::json doc = bundled_json(2);
  doc["agents"][0]["h"] = {0.0, 1.0};
  CHECK_THROWS_AS(parse_doc(doc), ValidationError);
}

TEST_CASE("reference and gain validation") {
  nlohmann::json doc = bundled_json(2);
  doc["reference"]["u_c"] = -0.1;
  CHECK_THROWS_AS(parse_doc(doc), ValidationError);

  doc = bundled_json(2);
  doc["reference"]["h_c"] = {1.0, 1.0};
  CHECK_THROWS_AS(parse_doc(doc), ValidationError);

  doc = bundled_json(2);
  doc["gains"]["bearing_only"]["k1"] = 0.0;
  CHECK_THROWS_AS(parse_doc(doc), ValidationError);

  doc = bundled_json(2);
  doc["integrator"]["dt"] = -0.005;
  CHECK_THROWS_AS(parse_doc(doc), ValidationError);

  doc = bundled_json(2);
  doc["format_version"] = 2;
  CHECK_THROWS_AS(parse_doc(doc), ValidationError);

  doc = bundled_json(2);
  doc["dimension"] = 4;
  CHECK_THROWS_AS(parse_doc(doc), ValidationError);
}

TEST_CASE("edge lists are validated") {
  nlohmann::json doc = bundled_json(2);
  doc["edges"].push_back(doc["edges"][1]);  // duplicate
  CHECK_THROWS_AS(parse_doc(doc), ValidationError);

  doc = bundled_json(2);
  doc["edges"][1]["j"] = 9;  // endpoint out of range
  CHECK_THROWS_AS(parse_doc(doc), ValidationError);

  doc = bundled_json(2);
  doc["edges"][1]["g"] = {0.0, 0.0};  // zero-length bearing
  CHECK_THROWS_AS(parse_doc(doc), ValidationError);
}

TEST_CASE("off-unit desired bearings are renormalized with a warning") {
  nlohmann::json doc = bundled_json(2);
  doc["edges"][1]["g"] = {-1.0, 1.0};  // direction right, length sqrt(2)
  Scenario s = parse_doc(doc);
  REQUIRE(s.warnings.size() == 1);
  CHECK(s.warnings[0].find("renormalized") != std::string::npos);
  const int k = s.graph.edge_index(0, 2);
  CHECK((s.bearings.per_edge[k] - vec2(-1 / std::sqrt(2.0), 1 / std::sqrt(2.0))).norm() < 1e-12);
}

TEST_CASE("edges listed high-to-low are folded onto the canonical orientation") {
  nlohmann::json doc = bundled_json(2);
  doc["edges"][0] = {{"i", 2}, {"j", 1}, {"g", {0.0, -1.0}}};
  Scenario s = parse_doc(doc);
  const int k = s.graph.edge_index(0, 1);
  CHECK((s.bearings.per_edge[k] - vec2(0, 1)).norm() == 0.0);
}

TEST_CASE("missing inter-leader bearing falls back to the leader placement") {
  nlohmann::json doc = bundled_json(2);
  doc["edges"].erase(0);  // (1,2) is recoverable from the leader positions
  Scenario s = parse_doc(doc);
  const int k = s.graph.edge_index(0, 1);
  CHECK((s.bearings.per_edge[k] - vec2(0, 1)).norm() < 1e-12);
}

TEST_CASE("non-rigid scenarios need the explicit override") {
  // Three collinear leaders: target solvable (no followers) but the shape is
  // free to scale each gap independently, so the rank test fails.
  nlohmann::json doc = {
      {"format_version", 1},
      {"name", "collinear"},
      {"dimension", 2},
      {"reference", {{"u_c", 0.1}, {"h_c", {1.0, 0.0}}}},
      {"gains",
       {{"bearing_only", {{"k1", 1.0}, {"k2", 1.0}}},
        {"displacement", {{"k1", 1.0}, {"k2", 1.0}}}}},
      {"agents",
       {{{"id", 1}, {"leader", true}, {"p", {0.0, 0.0}}},
        {{"id", 2}, {"leader", true}, {"p", {1.0, 0.0}}},
        {{"id", 3}, {"leader", true}, {"p", {2.0, 0.0}}}}},
      {"edges", nlohmann::json::array()},
  };
  CHECK_THROWS_AS(parse_doc(doc), ValidationError);
  doc["allow_nonrigid"] = true;
  Scenario s = parse_doc(doc);
  CHECK_FALSE(s.rigidity.rigid);
  CHECK(s.rigidity.rank == 2);
}

TEST_CASE("trace column contract") {
  auto cols3 = trace_columns(3, 6, 2);
  CHECK(cols3.size() == 1 + 6 * (3 * 3 + 1 + 3) + 4 + 4);
  CHECK(cols3[0] == "t");
  CHECK(cols3[1] == "p1_x");
  CHECK(cols3[10] == "u1");
  CHECK(cols3[11] == "omega1_x");
  CHECK(cols3[cols3.size() - 1] == "vel_err_6");
  CHECK(cols3[cols3.size() - 8] == "V");

  auto cols2 = trace_columns(2, 6, 2);
  CHECK(cols2.size() == 1 + 6 * (3 * 2 + 1 + 1) + 4 + 4);
  CHECK(cols2[7] == "u1");
  CHECK(cols2[8] == "omega1");
}

TEST_CASE("traces round-trip losslessly through CSV") {
  for (int dim : {2, 3}) {
    for (ControlLaw law : {ControlLaw::BearingOnly, ControlLaw::Displacement}) {
      SimulationTrace trace = short_trace(dim, law);
      fs::path first = temp_path("trace_a.csv");
      fs::path second = temp_path("trace_b.csv");
      write_trace_csv(trace, first.string());
      SimulationTrace loaded = read_trace_csv(first.string());

      CHECK(loaded.dim == trace.dim);
      CHECK(loaded.n == trace.n);
      CHECK(loaded.num_leaders == trace.num_leaders);
      REQUIRE(loaded.snapshots.size() == trace.snapshots.size());
      for (size_t k = 0; k < trace.snapshots.size(); ++k) {
        const Snapshot& a = trace.snapshots[k];
        const Snapshot& b = loaded.snapshots[k];
        CHECK(a.t == b.t);
        CHECK((a.p - b.p).norm() == 0.0);
        CHECK((a.h - b.h).norm() == 0.0);
        CHECK((a.xi - b.xi).norm() == 0.0);
        CHECK(a.lyapunov == b.lyapunov);
        CHECK(a.bearing_error == b.bearing_error);
        for (size_t i = 0; i < a.u.size(); ++i) CHECK(a.u[i] == b.u[i]);
        for (size_t i = 0; i < a.omega.size(); ++i) {
          CHECK((a.omega[i].value - b.omega[i].value).norm() == 0.0);
        }
      }
      write_trace_csv(loaded, second.string());
      CHECK(slurp(first) == slurp(second));
    }
  }
}

TEST_CASE("identical runs produce byte-identical traces") {
  fs::path first = temp_path("det_a.csv");
  fs::path second = temp_path("det_b.csv");
  write_trace_csv(short_trace(3, ControlLaw::BearingOnly), first.string());
  write_trace_csv(short_trace(3, ControlLaw::BearingOnly), second.string());
  CHECK(slurp(first) == slurp(second));
}

TEST_CASE("trace files with a broken contract are rejected") {
  fs::path path = temp_path("broken.csv");
  {
    std::ofstream out(path);
    out << "t,p1_x,p1_y\n0,1,2\n";  // header is not a valid layout
  }
  CHECK_THROWS_AS(read_trace_csv(path.string()), ParseError);

  SimulationTrace trace = short_trace(2, ControlLaw::BearingOnly);
  fs::path good = temp_path("good.csv");
  write_trace_csv(trace, good.string());
  std::string text = slurp(good);
  {
    std::ofstream out(path);
    out << text.substr(0, text.size() - 2) << ",99\n";  // extra trailing field
  }
  CHECK_THROWS_AS(read_trace_csv(path.string()), ParseError);

  CHECK_THROWS_AS(read_trace_csv((temp_path("missing.csv")).string()), IoError);
}

TEST_CASE("stored metrics agree with recomputation from the state columns") {
  for (int dim : {2, 3}) {
    for (ControlLaw law : {ControlLaw::BearingOnly, ControlLaw::Displacement}) {
      Scenario scenario = paper_scenario(dim);
      SimulationTrace trace = short_trace(dim, law);
      MetricsReport report = recompute_metrics(trace, scenario, law);
      CHECK(report.max_discrepancy <= 1e-9);
    }
  }
}

TEST_CASE("metric recomputation flags tampered columns") {
  Scenario scenario = paper_scenario(2);
  SimulationTrace trace = short_trace(2, ControlLaw::BearingOnly);
  trace.snapshots[3].lyapunov += 1.0;
  MetricsReport report = recompute_metrics(trace, scenario, ControlLaw::BearingOnly);
  CHECK(report.lyapunov_gap == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(report.max_discrepancy >= 1.0 - 1e-9);
}

TEST_CASE("plot emission writes the four panel series") {
  SimulationTrace trace = short_trace(2, ControlLaw::Displacement);
  fs::path dir = temp_path("plots");
  emit_plot_data(trace, dir.string());
  for (const char* leaf :
       {"trajectories.csv", "velocity_errors.csv", "bearing_error.csv", "lyapunov.csv"}) {
    CAPTURE(leaf);
    REQUIRE(fs::exists(dir / leaf));
    std::string text = slurp(dir / leaf);
    const auto rows = static_cast<size_t>(std::count(text.begin(), text.end(), '\n'));
    CHECK(rows == trace.snapshots.size() + 1);
  }
}

TEST_CASE("plot emission of an empty trace leaves headers only") {
  SimulationTrace trace;
  trace.dim = 2;
  trace.n = 6;
  trace.num_leaders = 2;
  fs::path dir = temp_path("plots_empty");
  emit_plot_data(trace, dir.string());
  for (const char* leaf :
       {"trajectories.csv", "velocity_errors.csv", "bearing_error.csv", "lyapunov.csv"}) {
    CAPTURE(leaf);
    REQUIRE(fs::exists(dir / leaf));
    std::string text = slurp(dir / leaf);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1);
  }
}

TEST_CASE("cli check reports the rigidity verdict") {
  int code = -1;
  std::string out = capture_stdout(
      [&] { code = run_cli({"check", scenario_dir() + "/paper_3d.json"}); });
  CHECK(code == 0);
  CHECK(out.find("rigid: true (rank 14/18, nullity 4)") != std::string::npos);
  CHECK(out.find("lambda_min(B_ff): 0.0347542844511") != std::string::npos);
  CHECK(out.find("||H||: 2.44948974278318") != std::string::npos);
  CHECK(out.find("certificate") == std::string::npos);  // no kappa requested
}

TEST_CASE("cli check evaluates certificates when asked") {
  int code = -1;
  std::string out = capture_stdout([&] {
    code = run_cli({"check", scenario_dir() + "/paper_2d.json", "--kappa", "2", "--beta", "0"});
  });
  CHECK(code == 0);
  CHECK(out.find("certificate[bearing]") != std::string::npos);
  CHECK(out.find("certificate[displacement]") != std::string::npos);
  CHECK(out.find("holds=true") != std::string::npos);
}

TEST_CASE("cli run writes a trace and a summary") {
  fs::path out_path = temp_path("cli_trace.csv");
  int code = -1;
  std::string out = capture_stdout([&] {
    code = run_cli({"run", scenario_dir() + "/paper_2d.json", "--law", "displacement",
                    "--duration", "1", "--stride", "50", "--out", out_path.string()});
  });
  CHECK(code == 0);
  CHECK(out.find("law=displacement") != std::string::npos);
  CHECK(out.find("bearing_error=") != std::string::npos);
  SimulationTrace trace = read_trace_csv(out_path.string());
  CHECK(trace.snapshots.size() == 5);
}

TEST_CASE("cli run emits plot data on request") {
  fs::path out_path = temp_path("cli_trace_plots.csv");
  fs::path plot_dir = temp_path("cli_plots");
  int code = -1;
  capture_stdout([&] {
    code = run_cli({"run", scenario_dir() + "/paper_2d.json", "--law", "bearing", "--duration",
                    "1", "--stride", "50", "--out", out_path.string(), "--plots",
                    plot_dir.string()});
  });
  CHECK(code == 0);
  CHECK(fs::exists(plot_dir / "trajectories.csv"));
  CHECK(fs::exists(plot_dir / "lyapunov.csv"));
}

TEST_CASE("cli run exits 2 when agents collide") {
  nlohmann::json doc = bundled_json(2);
  doc["agents"][4]["p"] = {doc["agents"][5]["p"][0].get<double>() + 4e-4,
                           doc["agents"][5]["p"][1].get<double>()};
  fs::path scenario_path = temp_path("collide.json");
  {
    std::ofstream out(scenario_path);
    out << doc.dump(2);
  }
  fs::path out_path = temp_path("collide.csv");
  int code = -1;
  std::string out = capture_stdout([&] {
    code = run_cli(
        {"run", scenario_path.string(), "--law", "bearing", "--out", out_path.string()});
  });
  CHECK(code == 2);
  CHECK(out.find("aborted=true") != std::string::npos);
  // The partial trace is still written.
  SimulationTrace trace = read_trace_csv(out_path.string());
  CHECK(trace.snapshots.size() == 1);
}

TEST_CASE("cli surfaces usage and validation failures as exit 1") {
  capture_stdout([&] {
    CHECK(run_cli({}) == 1);
    CHECK(run_cli({"frobnicate"}) == 1);
    CHECK(run_cli({"check", scenario_dir() + "/does_not_exist.json"}) == 1);
    CHECK(run_cli({"run", scenario_dir() + "/paper_2d.json", "--law", "sideways", "--out",
                   "/tmp/x.csv"}) == 1);
    CHECK(run_cli({"check", scenario_dir() + "/paper_2d.json", "--kappa", "17"}) == 1);
  });
}

TEST_CASE("cli metrics recomputes a trace against its scenario") {
  fs::path out_path = temp_path("metrics_trace.csv");
  int code = -1;
  capture_stdout([&] {
    code = run_cli({"run", scenario_dir() + "/paper_3d.json", "--law", "bearing", "--duration",
                    "1", "--stride", "20", "--out", out_path.string()});
  });
  REQUIRE(code == 0);
  std::string out = capture_stdout([&] {
    code = run_cli({"metrics", out_path.string(), scenario_dir() + "/paper_3d.json", "--law",
                    "bearing"});
  });
  CHECK(code == 0);
  REQUIRE(out.find("max_discrepancy: ") != std::string::npos);
  const double reported =
      std::stod(out.substr(out.find("max_discrepancy: ") + std::string("max_discrepancy: ").size()));
  CHECK(reported <= 1e-9);
}
