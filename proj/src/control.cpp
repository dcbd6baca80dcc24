#include "formctl/control.hpp"

#include <cassert>

namespace formctl {

const char* law_name(ControlLaw law) {
  return law == ControlLaw::BearingOnly ? "bearing" : "displacement";
}

Vec bearing_error_vector(std::span<const NeighborMeasurement> measurements) {
  assert(!measurements.empty());
  Vec r = Vec::Zero(measurements.front().relative.size());
  for (const auto& m : measurements) r += m.relative - m.desired;
  return r;
}

Vec displacement_error_vector(std::span<const NeighborMeasurement> measurements) {
  assert(!measurements.empty());
  Vec r = Vec::Zero(measurements.front().relative.size());
  for (const auto& m : measurements) {
    // projector(g*) z, expanded to avoid forming the matrix
    r += m.relative - m.desired * m.desired.dot(m.relative);
  }
  return r;
}

AgentCommand follower_command(const Vec& h, const Vec& xi, const Vec& r, const ControlGains& gains) {
  AgentCommand cmd;
  cmd.u = h.dot(gains.k1 * r + xi);
  cmd.omega = heading_cross(h, gains.k2 * (r + xi));
  // Axial part of r feeds the estimate, the off-axis part of xi decays.
  cmd.xi_dot = h * h.dot(r) - (xi - h * h.dot(xi));
  return cmd;
}

AgentCommand leader_command(const Vec& v_c) {
  AgentCommand cmd;
  cmd.u = v_c.norm();
  cmd.omega = AngularVelocity::zero(static_cast<int>(v_c.size()));
  cmd.xi_dot = Vec::Zero(v_c.size());
  return cmd;
}

}  // namespace formctl
