#pragma once

#include <string>
#include <vector>

#include "formctl/control.hpp"
#include "formctl/formation.hpp"

namespace formctl {

struct Scenario;

struct IntegratorConfig {
  double dt = 0.005;
  double duration = 120.0;
  // Abort threshold: any pairwise distance below this at any integration
  // stage raises CoincidentAgents.
  double min_separation_abort = 1e-3;
  // Record every k-th step (plus the initial state).
  int snapshot_stride = 1;
};

// Full closed-loop state: stacked positions, unit headings, and follower
// velocity estimates (leader xi blocks are carried but inert).
struct SystemState {
  double t = 0;
  int dim = 0;
  Vec p;
  Vec h;
  Vec xi;

  int agent_count() const { return dim == 0 ? 0 : static_cast<int>(p.size()) / dim; }
};

struct StateDerivative {
  Vec dp;
  Vec dh;
  Vec dxi;
};

// Recorded sample of the run: state, commands, and derived metrics.
struct Snapshot {
  double t = 0;
  Vec p;
  Vec h;
  Vec xi;
  std::vector<double> u;
  std::vector<AngularVelocity> omega;
  double lyapunov = 0;
  double bearing_error = 0;    // ||g - g*|| over all edges
  double position_error = 0;   // ||p - p*(t)||
  double min_distance = 0;
  std::vector<double> velocity_errors;  // ||u_i h_i - v_c|| per follower
};

struct SimulationTrace {
  int dim = 0;
  int n = 0;
  int num_leaders = 0;
  ControlLaw law = ControlLaw::BearingOnly;
  bool aborted = false;
  std::string abort_reason;
  std::vector<Snapshot> snapshots;
};

SystemState initial_state(const Scenario& scenario);

// Per-follower error vector r_i for the active law, assembled from the
// neighbor measurements the law permits; leaders get zero entries.
std::vector<Vec> error_vectors(const SystemState& state, const Scenario& scenario, ControlLaw law);

// Commands for every agent at the given state (leaders included).
std::vector<AgentCommand> closed_loop_commands(const SystemState& state, const Scenario& scenario,
                                               ControlLaw law);

StateDerivative derivative(const SystemState& state, const Scenario& scenario, ControlLaw law);

// One classical fixed-step fourth-order step; headings are renormalized to
// unit length afterward. Throws CoincidentAgents when agents come within
// config.min_separation_abort at any stage.
SystemState step(const SystemState& state, const Scenario& scenario, ControlLaw law,
                 const IntegratorConfig& config);

// Integrates scenario.integrator.duration; on CoincidentAgents returns the
// partial trace with `aborted` set instead of propagating.
SimulationTrace simulate(const Scenario& scenario, ControlLaw law);
SimulationTrace simulate(const Scenario& scenario, ControlLaw law, const IntegratorConfig& config);

// Metrics for a single state, as recorded in traces.
Snapshot make_snapshot(const SystemState& state, const Scenario& scenario, ControlLaw law);

// Euclidean norm of the full stacked state (p, h, xi).
double state_norm(const SystemState& state);

// Per-step slack allowed when checking numerical descent of the Lyapunov
// value: max(1e-9, 10 dt^4 ||state||).
double descent_tolerance(const SystemState& state, double dt);

}  // namespace formctl
