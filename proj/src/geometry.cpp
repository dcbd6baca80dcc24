#include "formctl/geometry.hpp"

namespace formctl {

AngularVelocity AngularVelocity::zero(int dim) {
  AngularVelocity w;
  w.value = Vec::Zero(dim == 2 ? 1 : 3);
  return w;
}

Vec bearing(const Vec& p_i, const Vec& p_j) {
  Vec z = p_j - p_i;
  const double dist = z.norm();
  if (dist <= kCoincidenceTol) {
    throw CoincidentAgents("bearing undefined: agents within coincidence tolerance");
  }
  return z / dist;
}

Mat projector(const Vec& g) {
  const auto d = g.size();
  return Mat::Identity(d, d) - g * g.transpose();
}

Vec double_cross(const Vec& x, const Vec& y) {
  if (x.size() == 3) {
    const Eigen::Vector3d x3 = x;
    const Eigen::Vector3d y3 = y;
    return -x3.cross(x3.cross(y3));
  }
  return projector(x) * y;
}

Vec heading_rate(const Vec& h, const AngularVelocity& omega) {
  if (omega.value.size() == 3) {
    const Eigen::Vector3d w = omega.value;
    const Eigen::Vector3d h3 = h;
    return w.cross(h3);
  }
  Vec out(2);
  out << -h(1), h(0);
  return out * omega.value(0);
}

AngularVelocity heading_cross(const Vec& h, const Vec& v) {
  AngularVelocity w;
  if (h.size() == 3) {
    const Eigen::Vector3d h3 = h;
    const Eigen::Vector3d v3 = v;
    w.value = h3.cross(v3);
  } else {
    w.value = Vec::Constant(1, h(0) * v(1) - h(1) * v(0));
  }
  return w;
}

}  // namespace formctl
