#pragma once

#include <cmath>
#include <random>
#include <string>

#include "formctl/analysis.hpp"
#include "formctl/scenario.hpp"

namespace formctl::testing {

inline std::string scenario_dir() { return FORMCTL_SCENARIO_DIR; }

inline Scenario paper_scenario(int dim) {
  return load_scenario(scenario_dir() + (dim == 3 ? "/paper_3d.json" : "/paper_2d.json"));
}

inline Vec vec2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

inline Vec vec3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

inline Vec random_unit(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec v(dim);
  do {
    for (int k = 0; k < dim; ++k) v(k) = gauss(rng);
  } while (v.norm() < 1e-6);
  return v / v.norm();
}

// Random well-separated placement: positions inside a box, min pairwise
// distance at least 0.5.
inline Vec random_positions(std::mt19937_64& rng, int n, int dim, double box = 8.0) {
  std::uniform_real_distribution<double> coord(-box, box);
  Vec p(n * dim);
  for (;;) {
    for (Eigen::Index k = 0; k < p.size(); ++k) p(k) = coord(rng);
    if (min_pairwise_distance(p, dim) > 0.5) return p;
  }
}

// Random full state over a scenario's layout: unit headings, bounded
// estimator values.
inline SystemState random_state(std::mt19937_64& rng, const Scenario& scenario) {
  std::uniform_real_distribution<double> xi_coord(-1.0, 1.0);
  SystemState state;
  state.t = 0;
  state.dim = scenario.dim;
  state.p = random_positions(rng, scenario.graph.n, scenario.dim);
  state.h = Vec(state.p.size());
  state.xi = Vec(state.p.size());
  for (int i = 0; i < scenario.graph.n; ++i) {
    state.h.segment(i * scenario.dim, scenario.dim) = random_unit(rng, scenario.dim);
    for (int a = 0; a < scenario.dim; ++a) state.xi(i * scenario.dim + a) = xi_coord(rng);
  }
  return state;
}

// Two leaders plus one follower in the plane, rigid by construction. The
// follower starts `offset` away from its target corner at [5, 2.5].
inline Scenario triangle_scenario(double u_c, const Vec& offset) {
  const double s5 = 1.0 / std::sqrt(5.0);
  Scenario scenario;
  scenario.name = "triangle";
  scenario.dim = 2;
  scenario.n = 3;
  scenario.num_leaders = 2;
  scenario.edge_specs = {{0, 1, vec2(0, 1)},
                         {0, 2, vec2(2 * s5, s5)},
                         {1, 2, vec2(2 * s5, -s5)}};
  scenario.initial_p = Vec(6);
  scenario.initial_p << 0, 0, 0, 5, 5 + offset(0), 2.5 + offset(1);
  scenario.initial_h = Vec(6);
  scenario.initial_h << 1, 0, 1, 0, 1, 0;
  scenario.initial_xi = Vec::Zero(6);
  scenario.reference.u_c = u_c;
  scenario.reference.h_c = vec2(1, 0);
  scenario.bearing_gains = {2.0, 2.0};
  scenario.displacement_gains = {1.0, 1.0};
  finalize_scenario(scenario);
  return scenario;
}

// Two leaders, no followers.
inline Scenario leaders_only_scenario(double u_c) {
  Scenario scenario;
  scenario.name = "leaders-only";
  scenario.dim = 2;
  scenario.n = 2;
  scenario.num_leaders = 2;
  scenario.edge_specs = {{0, 1, vec2(0, 1)}};
  scenario.initial_p = Vec(4);
  scenario.initial_p << 0, 0, 0, 5;
  scenario.initial_h = Vec(4);
  scenario.initial_h << 1, 0, 1, 0;
  scenario.initial_xi = Vec::Zero(4);
  scenario.reference.u_c = u_c;
  scenario.reference.h_c = vec2(1, 0);
  scenario.bearing_gains = {1.0, 1.0};
  scenario.displacement_gains = {1.0, 1.0};
  finalize_scenario(scenario);
  return scenario;
}

// Exact moving-target equilibrium: everyone on target, aligned, estimators
// settled at the reference velocity.
inline SystemState equilibrium_state(const Scenario& scenario) {
  SystemState state;
  state.t = 0;
  state.dim = scenario.dim;
  state.p = scenario.target.positions;
  state.h = Vec(state.p.size());
  state.xi = Vec(state.p.size());
  const Vec v_c = scenario.v_c();
  for (int i = 0; i < scenario.n; ++i) {
    state.h.segment(i * scenario.dim, scenario.dim) = scenario.reference.h_c;
    state.xi.segment(i * scenario.dim, scenario.dim) = v_c;
  }
  return state;
}

// Central-difference derivative of V along the closed-loop flow.
inline double fd_lyapunov_rate(const SystemState& state, const Scenario& scenario, ControlLaw law,
                               double delta = 1e-6) {
  const StateDerivative dot = derivative(state, scenario, law);
  SystemState fwd = state;
  fwd.t += delta;
  fwd.p += delta * dot.dp;
  fwd.h += delta * dot.dh;
  fwd.xi += delta * dot.dxi;
  SystemState bwd = state;
  bwd.t -= delta;
  bwd.p -= delta * dot.dp;
  bwd.h -= delta * dot.dh;
  bwd.xi -= delta * dot.dxi;
  return (lyapunov(fwd, scenario, law).value - lyapunov(bwd, scenario, law).value) / (2 * delta);
}

}  // namespace formctl::testing
