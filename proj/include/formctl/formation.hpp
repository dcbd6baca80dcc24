#pragma once

#include <utility>
#include <vector>

#include "formctl/geometry.hpp"

namespace formctl {

// Singular values below threshold_scale * sigma_max count as zero when taking
// numerical ranks.
inline constexpr double kRankTolScale = 1e-8;

// One entry of an agent's neighbor list. `edge` indexes the canonical edge
// list; `sign` is +1 when the agent is the lower-id endpoint (so the stored
// edge quantity already points away from it) and -1 otherwise.
struct NeighborRef {
  int agent = 0;
  int edge = 0;
  double sign = 1.0;
};

// Interaction topology over agents 0..n-1 with the first num_leaders agents
// acting as leaders. Construction augments the sensing edges with every
// leader-leader pair, deduplicates, and stores edges in canonical form:
// (i, j) with i < j, sorted lexicographically.
struct FormationGraph {
  int n = 0;
  int num_leaders = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<NeighborRef>> adjacency;

  int num_followers() const { return n - num_leaders; }
  int num_edges() const { return static_cast<int>(edges.size()); }
  bool is_leader(int i) const { return i < num_leaders; }
  // Index into `edges` for the unordered pair {i, j}, or -1 when absent.
  int edge_index(int i, int j) const;
};

FormationGraph make_formation_graph(int n, int num_leaders,
                                    const std::vector<std::pair<int, int>>& sensing_edges);

bool graph_connected(const FormationGraph& graph);

// Signed incidence matrix, m x n: row k has -1 at the source (lower id) of
// edge k and +1 at the sink.
Mat build_incidence(const FormationGraph& graph);

// Edge quantities stacked in canonical edge order and oriented source->sink.
Vec stacked_displacements(const FormationGraph& graph, const Vec& p, int dim);
Vec stacked_bearings(const FormationGraph& graph, const Vec& p, int dim);

// Unit desired bearings, one per canonical edge, oriented source->sink.
struct DesiredBearingSet {
  int dim = 0;
  std::vector<Vec> per_edge;

  Vec stacked() const;
  // Desired bearing seen from an agent toward the neighbor in `ref`.
  Vec oriented(const NeighborRef& ref) const { return ref.sign * per_edge[ref.edge]; }
};

// Projector-weighted graph Laplacian: dn x dn symmetric PSD, block (i, j)
// equal to -projector(g*_ij) for edges and block (i, i) summing the incident
// projectors. Leader blocks come first, matching agent order.
struct BearingLaplacian {
  int dim = 0;
  int n = 0;
  int num_leaders = 0;
  Mat matrix;

  Mat ll() const;
  Mat lf() const;
  Mat fl() const;
  // Follower-follower grounding block; positive definite exactly when the
  // formation is rigid and at least two leaders are present.
  Mat ff() const;
};

BearingLaplacian bearing_laplacian(const FormationGraph& graph, const DesiredBearingSet& bearings);

// Target placement at t = 0, stacked dn. The moving target translates rigidly
// at the reference velocity.
struct FormationTarget {
  int dim = 0;
  Vec positions;
  Vec centroid;
  // positions minus the centroid replicated per agent; a null direction of
  // the bearing Laplacian (the scaling mode).
  Vec centered;

  int agent_count() const { return dim == 0 ? 0 : static_cast<int>(positions.size()) / dim; }
  Vec at_time(const Vec& v_c, double t) const;
  double min_pairwise_distance() const;
};

struct RigidityReport {
  int rank = 0;
  int nullity = 0;
  bool rigid = false;
  // ||B p_centered|| and max_k ||B (1_n kron e_k)||; both should vanish.
  double scaling_null_residual = 0;
  double translation_null_residual = 0;
};

// Rebuilds bearings from the target placement and tests whether the bearing
// Laplacian has rank dn - d - 1. Throws DegenerateTarget on coincident target
// agents.
RigidityReport check_rigidity(const FormationGraph& graph, const FormationTarget& target);

// Grounds the desired bearing set with the leader positions (stacked d*n_l)
// and solves the follower block for the unique target placement. Throws
// InconsistentLeaders when leader positions contradict a desired inter-leader
// bearing (tolerance 1e-6) or the solved placement fails to reproduce some
// desired bearing, SingularSystem when the grounding block is singular.
FormationTarget solve_target(const FormationGraph& graph, const DesiredBearingSet& bearings,
                             const Vec& leader_positions);

struct SpectralQuantities {
  // Smallest eigenvalue of the follower-follower block; +inf when there are
  // no followers.
  double lambda_min_ff = 0;
  // Spectral norm of the incidence matrix (unchanged by the Kronecker lift).
  double incidence_norm = 0;
};

SpectralQuantities spectral_quantities(const BearingLaplacian& laplacian, const Mat& incidence);

// Smallest pairwise distance within a stacked placement.
double min_pairwise_distance(const Vec& stacked_p, int dim);

}  // namespace formctl
