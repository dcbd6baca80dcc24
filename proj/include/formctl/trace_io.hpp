#pragma once

#include <string>
#include <vector>

#include "formctl/dynamics.hpp"
#include "formctl/scenario.hpp"

namespace formctl {

// Column names in file order: t, then per agent p/h/xi components, u, omega
// (scalar in 2-D, three components in 3-D), then V, bearing_error,
// position_error, min_distance, then one velocity error per follower.
std::vector<std::string> trace_columns(int dim, int n, int num_leaders);

// Writes one row per snapshot at 17 significant digits, so values round-trip
// exactly. Throws IoError when the file cannot be written.
void write_trace_csv(const SimulationTrace& trace, const std::string& path);

// Reads a trace back; layout (dimension, agent count, leader count) is
// recovered from the header. Throws ParseError on any contract violation.
SimulationTrace read_trace_csv(const std::string& path);

// Four plain CSV series for plotting: trajectories.csv, velocity_errors.csv,
// bearing_error.csv, lyapunov.csv inside `directory` (created if needed).
void emit_plot_data(const SimulationTrace& trace, const std::string& directory);

// Largest gaps between stored derived columns and values recomputed from the
// state columns alone.
struct MetricsReport {
  double lyapunov_gap = 0;
  double bearing_error_gap = 0;
  double position_error_gap = 0;
  double min_distance_gap = 0;
  double command_gap = 0;         // over u and omega columns
  double velocity_error_gap = 0;
  double max_discrepancy = 0;
};

MetricsReport recompute_metrics(const SimulationTrace& trace, const Scenario& scenario,
                                ControlLaw law);

}  // namespace formctl
