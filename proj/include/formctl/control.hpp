#pragma once

#include <span>
#include <vector>

#include "formctl/geometry.hpp"

namespace formctl {

enum class ControlLaw { BearingOnly, Displacement };

const char* law_name(ControlLaw law);

struct ControlGains {
  double k1 = 0;  // translational feedback gain
  double k2 = 0;  // heading alignment gain
};

// What a follower senses about one neighbor. `relative` holds the measured
// bearing g_ij (unit) under the bearing-only law and the displacement
// z_ij = p_j - p_i under the displacement law; `desired` is g*_ij in both.
struct NeighborMeasurement {
  Vec relative;
  Vec desired;
};

// Sum of bearing mismatches: sum_j (g_ij - g*_ij).
Vec bearing_error_vector(std::span<const NeighborMeasurement> measurements);

// Projector-weighted displacement error: sum_j projector(g*_ij) z_ij, i.e.
// -sum_j projector(g*_ij) (p_i - p_j).
Vec displacement_error_vector(std::span<const NeighborMeasurement> measurements);

// One agent's commanded inputs plus the estimator update that produced them.
struct AgentCommand {
  double u = 0;            // forward speed along the heading
  AngularVelocity omega;   // steering rate
  Vec xi_dot;              // velocity-estimator state derivative
};

// Saturation-free follower law. The estimator integrates the component of the
// error the agent can act on and bleeds off the component it cannot:
//   u      = h . (k1 r + xi)
//   omega  = h x k2 (r + xi)
//   xi_dot = (h h^T) r - (I - h h^T) xi
AgentCommand follower_command(const Vec& h, const Vec& xi, const Vec& r, const ControlGains& gains);

// Leaders move at the shared reference velocity with frozen heading.
AgentCommand leader_command(const Vec& v_c);

}  // namespace formctl
