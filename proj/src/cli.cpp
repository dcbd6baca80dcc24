#include "formctl/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"

#include "formctl/analysis.hpp"
#include "formctl/trace_io.hpp"

namespace formctl {

namespace {

Scenario load_with_warnings(const std::string& path) {
  Scenario scenario = load_scenario(path);
  for (const auto& warning : scenario.warnings) {
    std::cerr << "warning: " << warning << "\n";
  }
  return scenario;
}

void print_certificate(const Scenario& scenario, ControlLaw law, double kappa, double beta,
                       bool beta_given) {
  const double level = beta_given ? beta : initial_lyapunov(scenario, law);
  const auto cert = collision_certificate(scenario, law, kappa, level);
  std::printf("certificate[%s]: kappa=%.15g beta=%.15g epsilon=%.15g phi=%.15g holds=%s\n",
              law_name(law), cert.kappa, cert.beta, cert.epsilon, cert.phi,
              cert.holds ? "true" : "false");
}

int cmd_check(const std::string& scenario_path, double kappa, bool kappa_given, double beta,
              bool beta_given) {
  const Scenario scenario = load_with_warnings(scenario_path);
  const int dn = scenario.dim * scenario.graph.n;
  std::printf("scenario: %s\n", scenario.name.c_str());
  std::printf("dimension: %d  agents: %d (leaders %d)  edges: %d\n", scenario.dim, scenario.graph.n,
              scenario.graph.num_leaders, scenario.graph.num_edges());
  std::printf("rigid: %s (rank %d/%d, nullity %d)\n", scenario.rigidity.rigid ? "true" : "false",
              scenario.rigidity.rank, dn, scenario.rigidity.nullity);
  const auto spectral = spectral_quantities(bearing_laplacian(scenario.graph, scenario.bearings),
                                            build_incidence(scenario.graph));
  std::printf("lambda_min(B_ff): %.15g\n", spectral.lambda_min_ff);
  std::printf("||H||: %.15g\n", spectral.incidence_norm);
  if (kappa_given) {
    print_certificate(scenario, ControlLaw::BearingOnly, kappa, beta, beta_given);
    print_certificate(scenario, ControlLaw::Displacement, kappa, beta, beta_given);
  }
  return 0;
}

int cmd_run(const std::string& scenario_path, const std::string& law_text, double dt, bool dt_given,
            double duration, bool duration_given, int stride, bool stride_given,
            const std::string& out_path, const std::string& plot_dir) {
  const Scenario scenario = load_with_warnings(scenario_path);
  const ControlLaw law =
      law_text == "bearing" ? ControlLaw::BearingOnly : ControlLaw::Displacement;

  IntegratorConfig config = scenario.integrator;
  if (dt_given) config.dt = dt;
  if (duration_given) config.duration = duration;
  if (stride_given) config.snapshot_stride = stride;

  const SimulationTrace trace = simulate(scenario, law, config);
  write_trace_csv(trace, out_path);
  if (!plot_dir.empty()) emit_plot_data(trace, plot_dir);

  if (trace.aborted) {
    std::fprintf(stderr, "aborted: %s\n", trace.abort_reason.c_str());
    std::printf("law=%s snapshots=%zu aborted=true trace=%s\n", law_name(law),
                trace.snapshots.size(), out_path.c_str());
    return 2;
  }
  const Snapshot& last = trace.snapshots.back();
  double max_vel_err = 0;
  for (double err : last.velocity_errors) max_vel_err = std::max(max_vel_err, err);
  std::printf(
      "law=%s t_final=%.15g V=%.15g bearing_error=%.15g position_error=%.15g "
      "max_velocity_error=%.15g min_distance=%.15g trace=%s\n",
      law_name(law), last.t, last.lyapunov, last.bearing_error, last.position_error, max_vel_err,
      last.min_distance, out_path.c_str());
  return 0;
}

int cmd_metrics(const std::string& trace_path, const std::string& scenario_path,
                const std::string& law_text) {
  const Scenario scenario = load_with_warnings(scenario_path);
  const SimulationTrace trace = read_trace_csv(trace_path);
  const ControlLaw law =
      law_text == "bearing" ? ControlLaw::BearingOnly : ControlLaw::Displacement;
  const MetricsReport report = recompute_metrics(trace, scenario, law);
  std::printf("rows: %zu\n", trace.snapshots.size());
  std::printf("lyapunov_gap: %.15g\n", report.lyapunov_gap);
  std::printf("bearing_error_gap: %.15g\n", report.bearing_error_gap);
  std::printf("position_error_gap: %.15g\n", report.position_error_gap);
  std::printf("min_distance_gap: %.15g\n", report.min_distance_gap);
  std::printf("command_gap: %.15g\n", report.command_gap);
  std::printf("velocity_error_gap: %.15g\n", report.velocity_error_gap);
  std::printf("max_discrepancy: %.15g\n", report.max_discrepancy);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"bearing-constrained formation tracking for unicycle agents"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string trace_path;
  std::string out_path;
  std::string plot_dir;
  std::string law_text = "bearing";
  double kappa = 0;
  double beta = 0;
  double dt = 0;
  double duration = 0;
  int stride = 1;

  auto* check = app.add_subcommand("check", "validate a scenario and report rigidity");
  check->add_option("scenario", scenario_path, "scenario JSON file")->required();
  auto* kappa_opt = check->add_option("--kappa", kappa, "clearance for the collision certificate");
  auto* beta_opt =
      check->add_option("--beta", beta, "Lyapunov level for the certificate (default: V(0))");

  auto* run = app.add_subcommand("run", "simulate a scenario and write the trace");
  run->add_option("scenario", scenario_path, "scenario JSON file")->required();
  run->add_option("--law", law_text, "control law")
      ->required()
      ->check(CLI::IsMember({"bearing", "displacement"}));
  auto* dt_opt = run->add_option("--dt", dt, "integration step override [s]");
  auto* duration_opt = run->add_option("--duration", duration, "run length override [s]");
  auto* stride_opt = run->add_option("--stride", stride, "snapshot stride override");
  run->add_option("--out", out_path, "output trace CSV")->required();
  run->add_option("--plots", plot_dir, "also emit plot series into this directory");

  auto* metrics = app.add_subcommand("metrics", "recompute derived columns of a trace");
  metrics->add_option("trace", trace_path, "trace CSV file")->required();
  metrics->add_option("scenario", scenario_path, "scenario JSON file")->required();
  metrics->add_option("--law", law_text, "law the trace was produced with")
      ->check(CLI::IsMember({"bearing", "displacement"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (check->parsed()) {
      return cmd_check(scenario_path, kappa, kappa_opt->count() > 0, beta, beta_opt->count() > 0);
    }
    if (run->parsed()) {
      return cmd_run(scenario_path, law_text, dt, dt_opt->count() > 0, duration,
                     duration_opt->count() > 0, stride, stride_opt->count() > 0, out_path,
                     plot_dir);
    }
    return cmd_metrics(trace_path, scenario_path, law_text);
  } catch (const CoincidentAgents& e) {
    std::fprintf(stderr, "aborted: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace formctl
