#include "formctl/analysis.hpp"

#include <cmath>
#include <string>

namespace formctl {

CompactOperators compact_operators(const SystemState& state, const Scenario& scenario) {
  const int d = state.dim;
  const int n = state.agent_count();
  const int m = scenario.graph.num_edges();
  CompactOperators ops;

  const Mat incidence = build_incidence(scenario.graph);
  ops.incidence_kron = Mat::Zero(m * d, n * d);
  for (int k = 0; k < m; ++k) {
    for (int c = 0; c < n; ++c) {
      if (incidence(k, c) != 0) {
        ops.incidence_kron.block(k * d, c * d, d, d) = incidence(k, c) * Mat::Identity(d, d);
      }
    }
  }

  ops.selector = Mat::Zero(n * d, n * d);
  ops.heading_proj = Mat::Zero(n * d, n * d);
  for (int i = 0; i < n; ++i) {
    const Vec h_i = state.h.segment(i * d, d);
    ops.heading_proj.block(i * d, i * d, d, d) = h_i * h_i.transpose();
    if (!scenario.graph.is_leader(i)) {
      ops.selector.block(i * d, i * d, d, d) = Mat::Identity(d, d);
    }
  }
  ops.heading_perp = Mat::Identity(n * d, n * d) - ops.heading_proj;

  ops.xi_full = state.xi;
  const Vec v_c = scenario.v_c();
  for (int i = 0; i < scenario.graph.num_leaders; ++i) {
    ops.xi_full.segment(i * d, d) = v_c;
  }
  return ops;
}

LyapunovReport lyapunov(const SystemState& state, const Scenario& scenario, ControlLaw law) {
  const int d = state.dim;
  const int n = state.agent_count();
  const Vec v_c = scenario.v_c();
  const auto& gains = scenario.gains(law);

  LyapunovReport report;
  if (law == ControlLaw::BearingOnly) {
    const Vec z = stacked_displacements(scenario.graph, state.p, d);
    const Vec g = stacked_bearings(scenario.graph, state.p, d);
    report.relative_term = z.dot(g - scenario.bearings.stacked());
  } else {
    const Vec dp = state.p - scenario.target.at_time(v_c, state.t);
    const Mat laplacian = bearing_laplacian(scenario.graph, scenario.bearings).matrix;
    report.relative_term = 0.5 * dp.dot(laplacian * dp);
  }

  for (int i = scenario.graph.num_leaders; i < n; ++i) {
    report.estimator_term += 0.5 * (state.xi.segment(i * d, d) - v_c).squaredNorm();
  }
  double heading_misalignment = 0;
  for (int i = 0; i < n; ++i) {
    heading_misalignment += (state.h.segment(i * d, d) - scenario.reference.h_c).squaredNorm();
  }
  report.heading_term = scenario.reference.u_c / (2 * gains.k2) * heading_misalignment;
  report.value = report.relative_term + report.estimator_term + report.heading_term;

  // Dissipation: the axial error component is burned by k1, the off-axis
  // estimator component decays on its own; both enter as squares.
  const auto r = error_vectors(state, scenario, law);
  double vdot = 0;
  for (int i = scenario.graph.num_leaders; i < n; ++i) {
    const Vec h_i = state.h.segment(i * d, d);
    const Vec xi_i = state.xi.segment(i * d, d);
    const double axial = h_i.dot(r[i]);
    const double xi_axial = h_i.dot(xi_i);
    vdot -= gains.k1 * axial * axial + (xi_i.squaredNorm() - xi_axial * xi_axial);
  }
  report.vdot = vdot;
  return report;
}

double initial_lyapunov(const Scenario& scenario, ControlLaw law) {
  return lyapunov(initial_state(scenario), scenario, law).value;
}

double compact_residual(const SystemState& state, const Scenario& scenario, ControlLaw law) {
  const int d = state.dim;
  const int n = state.agent_count();
  const auto ops = compact_operators(state, scenario);
  const auto& gains = scenario.gains(law);
  const Vec v_c = scenario.v_c();

  Vec drive;  // stacked error signal: H^T (g - g*) for bearings, B dp otherwise
  if (law == ControlLaw::BearingOnly) {
    const Vec g = stacked_bearings(scenario.graph, state.p, d);
    drive = ops.incidence_kron.transpose() * (g - scenario.bearings.stacked());
  } else {
    const Vec dp = state.p - scenario.target.at_time(v_c, state.t);
    drive = bearing_laplacian(scenario.graph, scenario.bearings).matrix * dp;
  }

  Vec reference_stack(n * d);
  for (int i = 0; i < n; ++i) reference_stack.segment(i * d, d) = v_c;
  const Mat identity = Mat::Identity(n * d, n * d);

  const Vec dp_compact = (identity - ops.selector) * reference_stack -
                         ops.selector * (ops.heading_proj * (gains.k1 * drive - ops.xi_full));
  const Vec dxi_compact =
      -ops.selector * (ops.heading_proj * drive) - ops.selector * (ops.heading_perp * ops.xi_full);
  const Vec dh_compact = -ops.selector * (ops.heading_perp * (gains.k2 * (drive - ops.xi_full)));

  const StateDerivative per_agent = derivative(state, scenario, law);
  const double dp_gap = (dp_compact - per_agent.dp).lpNorm<Eigen::Infinity>();
  const double dh_gap = (dh_compact - per_agent.dh).lpNorm<Eigen::Infinity>();
  const double dxi_gap = (dxi_compact - per_agent.dxi).lpNorm<Eigen::Infinity>();
  return std::max({dp_gap, dh_gap, dxi_gap});
}

CollisionCertificate collision_certificate(const Scenario& scenario, ControlLaw law, double kappa,
                                           double beta) {
  const double min_spacing = scenario.target.min_pairwise_distance();
  if (!(kappa > 0) || !(kappa < min_spacing)) {
    throw InvalidKappa("kappa must lie in (0, " + std::to_string(min_spacing) +
                       "), the minimum target spacing");
  }
  if (beta < 0) throw ValidationError("beta: must be nonnegative");

  CollisionCertificate cert;
  cert.law = law;
  cert.kappa = kappa;
  cert.beta = beta;
  cert.epsilon = (min_spacing - kappa) / std::sqrt(static_cast<double>(scenario.graph.n));

  const auto spectral = spectral_quantities(bearing_laplacian(scenario.graph, scenario.bearings),
                                            build_incidence(scenario.graph));
  cert.gamma = 2 * spectral.incidence_norm / spectral.lambda_min_ff;
  if (law == ControlLaw::BearingOnly) {
    const double gb = cert.gamma * beta;
    cert.phi = 0.5 * (gb + std::sqrt(gb * gb + 4 * gb * scenario.target.centered.norm()));
  } else {
    cert.phi = std::sqrt(2 * beta / spectral.lambda_min_ff);
  }
  cert.holds = cert.phi <= cert.epsilon;
  return cert;
}

CollisionCertificate collision_certificate(const Scenario& scenario, ControlLaw law, double kappa) {
  return collision_certificate(scenario, law, kappa, initial_lyapunov(scenario, law));
}

}  // namespace formctl
