#include "formctl/dynamics.hpp"

#include <cmath>

#include "formctl/analysis.hpp"
#include "formctl/scenario.hpp"

namespace formctl {

SystemState initial_state(const Scenario& scenario) {
  SystemState state;
  state.t = 0;
  state.dim = scenario.dim;
  state.p = scenario.initial_p;
  state.h = scenario.initial_h;
  state.xi = scenario.initial_xi;
  return state;
}

std::vector<Vec> error_vectors(const SystemState& state, const Scenario& scenario, ControlLaw law) {
  const int d = state.dim;
  std::vector<Vec> r(scenario.graph.n);
  std::vector<NeighborMeasurement> measurements;
  for (int i = 0; i < scenario.graph.n; ++i) {
    if (scenario.graph.is_leader(i)) {
      r[i] = Vec::Zero(d);
      continue;
    }
    measurements.clear();
    for (const auto& ref : scenario.graph.adjacency[i]) {
      NeighborMeasurement m;
      m.desired = scenario.bearings.oriented(ref);
      if (law == ControlLaw::BearingOnly) {
        m.relative = bearing(state.p.segment(i * d, d), state.p.segment(ref.agent * d, d));
      } else {
        m.relative = state.p.segment(ref.agent * d, d) - state.p.segment(i * d, d);
      }
      measurements.push_back(std::move(m));
    }
    r[i] = (law == ControlLaw::BearingOnly) ? bearing_error_vector(measurements)
                                            : displacement_error_vector(measurements);
  }
  return r;
}

std::vector<AgentCommand> closed_loop_commands(const SystemState& state, const Scenario& scenario,
                                               ControlLaw law) {
  const int d = state.dim;
  const Vec v_c = scenario.v_c();
  const auto r = error_vectors(state, scenario, law);
  const auto& gains = scenario.gains(law);
  std::vector<AgentCommand> commands(scenario.graph.n);
  for (int i = 0; i < scenario.graph.n; ++i) {
    if (scenario.graph.is_leader(i)) {
      commands[i] = leader_command(v_c);
    } else {
      commands[i] =
          follower_command(state.h.segment(i * d, d), state.xi.segment(i * d, d), r[i], gains);
    }
  }
  return commands;
}

StateDerivative derivative(const SystemState& state, const Scenario& scenario, ControlLaw law) {
  const int d = state.dim;
  const int n = state.agent_count();
  const auto commands = closed_loop_commands(state, scenario, law);
  const Vec v_c = scenario.v_c();
  StateDerivative dot;
  dot.dp = Vec::Zero(d * n);
  dot.dh = Vec::Zero(d * n);
  dot.dxi = Vec::Zero(d * n);
  for (int i = 0; i < n; ++i) {
    if (scenario.graph.is_leader(i)) {
      dot.dp.segment(i * d, d) = v_c;
      continue;
    }
    dot.dp.segment(i * d, d) = commands[i].u * state.h.segment(i * d, d);
    dot.dh.segment(i * d, d) = heading_rate(state.h.segment(i * d, d), commands[i].omega);
    dot.dxi.segment(i * d, d) = commands[i].xi_dot;
  }
  return dot;
}

namespace {

void check_separation(const Vec& p, int dim, double min_separation) {
  if (min_pairwise_distance(p, dim) < min_separation) {
    throw CoincidentAgents("agents closer than min_separation_abort");
  }
}

SystemState advanced(const SystemState& base, double scale, const StateDerivative& k) {
  SystemState s = base;
  s.t += scale;
  s.p += scale * k.dp;
  s.h += scale * k.dh;
  s.xi += scale * k.dxi;
  return s;
}

}  // namespace

SystemState step(const SystemState& state, const Scenario& scenario, ControlLaw law,
                 const IntegratorConfig& config) {
  const double dt = config.dt;
  check_separation(state.p, state.dim, config.min_separation_abort);
  const StateDerivative k1 = derivative(state, scenario, law);
  SystemState stage = advanced(state, dt / 2, k1);
  check_separation(stage.p, state.dim, config.min_separation_abort);
  const StateDerivative k2 = derivative(stage, scenario, law);
  stage = advanced(state, dt / 2, k2);
  check_separation(stage.p, state.dim, config.min_separation_abort);
  const StateDerivative k3 = derivative(stage, scenario, law);
  stage = advanced(state, dt, k3);
  check_separation(stage.p, state.dim, config.min_separation_abort);
  const StateDerivative k4 = derivative(stage, scenario, law);

  SystemState next = state;
  next.t = state.t + dt;
  next.p += (dt / 6) * (k1.dp + 2 * k2.dp + 2 * k3.dp + k4.dp);
  next.h += (dt / 6) * (k1.dh + 2 * k2.dh + 2 * k3.dh + k4.dh);
  next.xi += (dt / 6) * (k1.dxi + 2 * k2.dxi + 2 * k3.dxi + k4.dxi);
  // The exact flow keeps headings on the unit sphere; pull the numerical one
  // back so the drift cannot compound.
  for (int i = 0; i < next.agent_count(); ++i) {
    next.h.segment(i * state.dim, state.dim).normalize();
  }
  return next;
}

Snapshot make_snapshot(const SystemState& state, const Scenario& scenario, ControlLaw law) {
  const int d = state.dim;
  Snapshot snap;
  snap.t = state.t;
  snap.p = state.p;
  snap.h = state.h;
  snap.xi = state.xi;
  const auto commands = closed_loop_commands(state, scenario, law);
  const Vec v_c = scenario.v_c();
  snap.u.reserve(commands.size());
  snap.omega.reserve(commands.size());
  for (const auto& cmd : commands) {
    snap.u.push_back(cmd.u);
    snap.omega.push_back(cmd.omega);
  }
  const Vec g = stacked_bearings(scenario.graph, state.p, d);
  snap.bearing_error = (g - scenario.bearings.stacked()).norm();
  snap.position_error = (state.p - scenario.target.at_time(v_c, state.t)).norm();
  snap.min_distance = min_pairwise_distance(state.p, d);
  for (int i = scenario.graph.num_leaders; i < scenario.graph.n; ++i) {
    snap.velocity_errors.push_back((commands[i].u * state.h.segment(i * d, d) - v_c).norm());
  }
  snap.lyapunov = lyapunov(state, scenario, law).value;
  return snap;
}

SimulationTrace simulate(const Scenario& scenario, ControlLaw law) {
  return simulate(scenario, law, scenario.integrator);
}

SimulationTrace simulate(const Scenario& scenario, ControlLaw law, const IntegratorConfig& config) {
  if (!(config.dt > 0)) throw ValidationError("integrator.dt: must be positive");
  if (!(config.duration >= config.dt)) {
    throw ValidationError("integrator.duration: must cover at least one step");
  }
  if (config.snapshot_stride < 1) {
    throw ValidationError("integrator.snapshot_stride: must be at least 1");
  }

  SimulationTrace trace;
  trace.dim = scenario.dim;
  trace.n = scenario.graph.n;
  trace.num_leaders = scenario.graph.num_leaders;
  trace.law = law;

  SystemState state = initial_state(scenario);
  const long steps = std::lround(config.duration / config.dt);
  try {
    trace.snapshots.push_back(make_snapshot(state, scenario, law));
    for (long k = 1; k <= steps; ++k) {
      state = step(state, scenario, law, config);
      if (k % config.snapshot_stride == 0) {
        trace.snapshots.push_back(make_snapshot(state, scenario, law));
      }
    }
  } catch (const CoincidentAgents& e) {
    trace.aborted = true;
    trace.abort_reason = e.what();
  }
  return trace;
}

double state_norm(const SystemState& state) {
  return std::sqrt(state.p.squaredNorm() + state.h.squaredNorm() + state.xi.squaredNorm());
}

double descent_tolerance(const SystemState& state, double dt) {
  return std::max(1e-9, 10.0 * dt * dt * dt * dt * state_norm(state));
}

}  // namespace formctl
