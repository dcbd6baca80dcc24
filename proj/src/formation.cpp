#include "formctl/formation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <string>

namespace formctl {

namespace {

std::string edge_str(int i, int j) {
  return "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
}

}  // namespace

int FormationGraph::edge_index(int i, int j) const {
  if (i > j) std::swap(i, j);
  for (int k = 0; k < num_edges(); ++k) {
    if (edges[k].first == i && edges[k].second == j) return k;
  }
  return -1;
}

FormationGraph make_formation_graph(int n, int num_leaders,
                                    const std::vector<std::pair<int, int>>& sensing_edges) {
  if (n < 2) throw ValidationError("agents: at least two agents required");
  if (num_leaders < 2) throw ValidationError("agents: at least two leaders required");
  if (num_leaders > n) throw ValidationError("agents: more leaders than agents");

  std::set<std::pair<int, int>> canonical;
  for (auto [i, j] : sensing_edges) {
    if (i < 0 || i >= n || j < 0 || j >= n) {
      throw ValidationError("edges: endpoint out of range in edge " + edge_str(i, j));
    }
    if (i == j) throw ValidationError("edges: self-loop at agent " + std::to_string(i + 1));
    if (i > j) std::swap(i, j);
    if (!canonical.insert({i, j}).second) {
      throw ValidationError("edges: duplicate edge " + edge_str(i, j));
    }
  }
  // Leaders track the common reference exactly, so every leader pair behaves
  // as a satisfied constraint; augmenting with those pairs is what makes the
  // grounding block definite.
  for (int i = 0; i < num_leaders; ++i) {
    for (int j = i + 1; j < num_leaders; ++j) canonical.insert({i, j});
  }

  FormationGraph graph;
  graph.n = n;
  graph.num_leaders = num_leaders;
  graph.edges.assign(canonical.begin(), canonical.end());
  graph.adjacency.resize(n);
  for (int k = 0; k < graph.num_edges(); ++k) {
    auto [i, j] = graph.edges[k];
    graph.adjacency[i].push_back({j, k, +1.0});
    graph.adjacency[j].push_back({i, k, -1.0});
  }
  return graph;
}

bool graph_connected(const FormationGraph& graph) {
  if (graph.n == 0) return false;
  std::vector<char> seen(graph.n, 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const int i = frontier.front();
    frontier.pop();
    for (const auto& ref : graph.adjacency[i]) {
      if (!seen[ref.agent]) {
        seen[ref.agent] = 1;
        ++reached;
        frontier.push(ref.agent);
      }
    }
  }
  return reached == graph.n;
}

Mat build_incidence(const FormationGraph& graph) {
  Mat incidence = Mat::Zero(graph.num_edges(), graph.n);
  for (int k = 0; k < graph.num_edges(); ++k) {
    incidence(k, graph.edges[k].first) = -1.0;
    incidence(k, graph.edges[k].second) = 1.0;
  }
  return incidence;
}

Vec stacked_displacements(const FormationGraph& graph, const Vec& p, int dim) {
  Vec z(graph.num_edges() * dim);
  for (int k = 0; k < graph.num_edges(); ++k) {
    auto [i, j] = graph.edges[k];
    z.segment(k * dim, dim) = p.segment(j * dim, dim) - p.segment(i * dim, dim);
  }
  return z;
}

Vec stacked_bearings(const FormationGraph& graph, const Vec& p, int dim) {
  Vec g(graph.num_edges() * dim);
  for (int k = 0; k < graph.num_edges(); ++k) {
    auto [i, j] = graph.edges[k];
    g.segment(k * dim, dim) = bearing(p.segment(i * dim, dim), p.segment(j * dim, dim));
  }
  return g;
}

Vec DesiredBearingSet::stacked() const {
  Vec g(static_cast<Eigen::Index>(per_edge.size()) * dim);
  for (size_t k = 0; k < per_edge.size(); ++k) {
    g.segment(static_cast<Eigen::Index>(k) * dim, dim) = per_edge[k];
  }
  return g;
}

Mat BearingLaplacian::ll() const {
  const int dl = dim * num_leaders;
  return matrix.topLeftCorner(dl, dl);
}

Mat BearingLaplacian::lf() const {
  const int dl = dim * num_leaders;
  return matrix.topRightCorner(dl, dim * n - dl);
}

Mat BearingLaplacian::fl() const {
  const int dl = dim * num_leaders;
  return matrix.bottomLeftCorner(dim * n - dl, dl);
}

Mat BearingLaplacian::ff() const {
  const int df = dim * (n - num_leaders);
  return matrix.bottomRightCorner(df, df);
}

BearingLaplacian bearing_laplacian(const FormationGraph& graph, const DesiredBearingSet& bearings) {
  const int d = bearings.dim;
  BearingLaplacian lap;
  lap.dim = d;
  lap.n = graph.n;
  lap.num_leaders = graph.num_leaders;
  lap.matrix = Mat::Zero(d * graph.n, d * graph.n);
  for (int k = 0; k < graph.num_edges(); ++k) {
    auto [i, j] = graph.edges[k];
    const Mat proj = projector(bearings.per_edge[k]);
    lap.matrix.block(d * i, d * j, d, d) -= proj;
    lap.matrix.block(d * j, d * i, d, d) -= proj;
    lap.matrix.block(d * i, d * i, d, d) += proj;
    lap.matrix.block(d * j, d * j, d, d) += proj;
  }
  return lap;
}

Vec FormationTarget::at_time(const Vec& v_c, double t) const {
  Vec p = positions;
  const int n = agent_count();
  for (int i = 0; i < n; ++i) p.segment(i * dim, dim) += v_c * t;
  return p;
}

double FormationTarget::min_pairwise_distance() const {
  return formctl::min_pairwise_distance(positions, dim);
}

double min_pairwise_distance(const Vec& stacked_p, int dim) {
  const int n = static_cast<int>(stacked_p.size()) / dim;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double dist = (stacked_p.segment(j * dim, dim) - stacked_p.segment(i * dim, dim)).norm();
      best = std::min(best, dist);
    }
  }
  return best;
}

RigidityReport check_rigidity(const FormationGraph& graph, const FormationTarget& target) {
  const int d = target.dim;
  if (min_pairwise_distance(target.positions, d) <= kCoincidenceTol) {
    throw DegenerateTarget("target placement has coincident agents");
  }
  DesiredBearingSet rebuilt;
  rebuilt.dim = d;
  rebuilt.per_edge.reserve(graph.num_edges());
  for (auto [i, j] : graph.edges) {
    rebuilt.per_edge.push_back(
        bearing(target.positions.segment(i * d, d), target.positions.segment(j * d, d)));
  }
  const Mat laplacian = bearing_laplacian(graph, rebuilt).matrix;

  Eigen::JacobiSVD<Mat> svd(laplacian);
  const Vec sigma = svd.singularValues();
  const double tol = kRankTolScale * sigma(0);
  int rank = 0;
  for (Eigen::Index k = 0; k < sigma.size(); ++k) {
    if (sigma(k) > tol) ++rank;
  }

  RigidityReport report;
  report.rank = rank;
  report.nullity = d * graph.n - rank;
  report.rigid = (rank == d * graph.n - d - 1);
  report.scaling_null_residual = (laplacian * target.centered).norm();
  double trans = 0;
  for (int axis = 0; axis < d; ++axis) {
    Vec ones = Vec::Zero(d * graph.n);
    for (int i = 0; i < graph.n; ++i) ones(i * d + axis) = 1.0;
    trans = std::max(trans, (laplacian * ones).norm());
  }
  report.translation_null_residual = trans;
  return report;
}

FormationTarget solve_target(const FormationGraph& graph, const DesiredBearingSet& bearings,
                             const Vec& leader_positions) {
  const int d = bearings.dim;
  const int n = graph.n;
  const int nl = graph.num_leaders;
  const int nf = graph.num_followers();

  // Leaders must already sit where the inter-leader bearings say they sit.
  for (int k = 0; k < graph.num_edges(); ++k) {
    auto [i, j] = graph.edges[k];
    if (j >= nl) continue;
    Vec actual;
    try {
      actual = bearing(leader_positions.segment(i * d, d), leader_positions.segment(j * d, d));
    } catch (const CoincidentAgents&) {
      throw InconsistentLeaders("leaders " + edge_str(i, j) + " are coincident");
    }
    if ((actual - bearings.per_edge[k]).norm() > 1e-6) {
      throw InconsistentLeaders("leader positions contradict desired bearing on edge " +
                                edge_str(i, j));
    }
  }

  FormationTarget target;
  target.dim = d;
  target.positions = Vec::Zero(d * n);
  target.positions.head(d * nl) = leader_positions;

  if (nf > 0) {
    const BearingLaplacian lap = bearing_laplacian(graph, bearings);
    const Mat ff = lap.ff();
    Eigen::SelfAdjointEigenSolver<Mat> eig(ff, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues()(0) < 1e-10) {
      throw SingularSystem("follower grounding block is singular (lambda_min < 1e-10)");
    }
    const Vec rhs = -lap.fl() * leader_positions;
    const Vec followers = ff.ldlt().solve(rhs);
    if ((ff * followers - rhs).norm() > 1e-9) {
      throw SingularSystem("follower solve residual exceeds 1e-9");
    }
    target.positions.tail(d * nf) = followers;
  }

  // The placement must reproduce every desired bearing, not merely satisfy
  // the projector-weighted normal equations.
  for (int k = 0; k < graph.num_edges(); ++k) {
    auto [i, j] = graph.edges[k];
    Vec actual;
    try {
      actual = bearing(target.positions.segment(i * d, d), target.positions.segment(j * d, d));
    } catch (const CoincidentAgents&) {
      throw DegenerateTarget("solved target places agents " + edge_str(i, j) + " together");
    }
    if ((actual - bearings.per_edge[k]).norm() > 1e-9) {
      throw InconsistentLeaders("desired bearing set is not realizable: solved placement misses edge " +
                                edge_str(i, j));
    }
  }

  target.centroid = Vec::Zero(d);
  for (int i = 0; i < n; ++i) target.centroid += target.positions.segment(i * d, d);
  target.centroid /= n;
  target.centered = target.positions;
  for (int i = 0; i < n; ++i) target.centered.segment(i * d, d) -= target.centroid;
  return target;
}

SpectralQuantities spectral_quantities(const BearingLaplacian& laplacian, const Mat& incidence) {
  SpectralQuantities out;
  const Mat ff = laplacian.ff();
  if (ff.rows() == 0) {
    out.lambda_min_ff = std::numeric_limits<double>::infinity();
  } else {
    Eigen::SelfAdjointEigenSolver<Mat> eig(ff, Eigen::EigenvaluesOnly);
    out.lambda_min_ff = eig.eigenvalues()(0);
  }
  Eigen::JacobiSVD<Mat> svd(incidence);
  out.incidence_norm = svd.singularValues()(0);
  return out;
}

}  // namespace formctl
