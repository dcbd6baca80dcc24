#pragma once

#include <Eigen/Dense>

#include "formctl/errors.hpp"

namespace formctl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Pairwise distances at or below this are treated as coincident agents.
inline constexpr double kCoincidenceTol = 1e-9;

// Rigid-body angular velocity. In 3-D this is the usual vector; in 2-D it
// collapses to the scalar yaw rate (the z-component of the embedded cross
// product), stored as a size-1 vector.
struct AngularVelocity {
  Vec value;

  static AngularVelocity zero(int dim);
  int dim() const { return value.size() == 1 ? 2 : 3; }
  double norm() const { return value.norm(); }
};

// Unit vector pointing from p_i toward p_j. Throws CoincidentAgents when the
// two points are within kCoincidenceTol of each other.
Vec bearing(const Vec& p_i, const Vec& p_j);

// Orthogonal projector I - g g^T onto the complement of span{g}; g unit.
Mat projector(const Vec& g);

// -x cross (x cross y) for unit x. Equals projector(x) * y, which is also how
// the 2-D case is computed.
Vec double_cross(const Vec& x, const Vec& y);

// Heading kinematics dh/dt: omega cross h in 3-D, omega * [-h_y, h_x] in 2-D.
Vec heading_rate(const Vec& h, const AngularVelocity& omega);

// h cross v, reduced to its scalar z-component in 2-D.
AngularVelocity heading_cross(const Vec& h, const Vec& v);

}  // namespace formctl
