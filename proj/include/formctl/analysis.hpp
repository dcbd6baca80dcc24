#pragma once

#include "formctl/dynamics.hpp"
#include "formctl/scenario.hpp"

namespace formctl {

// Dense whole-network operators used to cross-check the per-agent loop
// against its stacked matrix form.
struct CompactOperators {
  Mat incidence_kron;  // incidence lifted by Kronecker with I_d
  Mat selector;        // identity on follower blocks, zero on leader blocks
  Mat heading_proj;    // blkdiag(h_i h_i^T)
  Mat heading_perp;    // I - heading_proj
  Vec xi_full;         // follower estimates with leader blocks pinned to v_c
};

CompactOperators compact_operators(const SystemState& state, const Scenario& scenario);

struct LyapunovReport {
  double value = 0;
  double relative_term = 0;   // z.(g - g*) (bearing law) or dp.B dp / 2 (displacement law)
  double estimator_term = 0;  // ||xi - v_c||^2 / 2 summed over followers
  double heading_term = 0;    // u_c/(2 k2) ||h - h_c||^2 summed over agents
  double vdot = 0;            // analytic time derivative along the closed loop
};

// Tracking-error energy for the given law. Nonnegative, zero exactly on the
// moving target with aligned headings and settled estimators, and vdot <= 0
// wherever headings are unit.
LyapunovReport lyapunov(const SystemState& state, const Scenario& scenario, ControlLaw law);

// V at the scenario's initial state.
double initial_lyapunov(const Scenario& scenario, ControlLaw law);

// Max infinity-norm gap between derivative() and the dense stacked form of
// the same closed loop, over the dp, dh, dxi blocks.
double compact_residual(const SystemState& state, const Scenario& scenario, ControlLaw law);

struct CollisionCertificate {
  ControlLaw law = ControlLaw::BearingOnly;
  double kappa = 0;    // required clearance between any two agents
  double beta = 0;     // Lyapunov level the bound is evaluated at
  double epsilon = 0;  // per-agent deviation budget implied by kappa
  double phi = 0;      // worst-case per-agent deviation at level beta
  double gamma = 0;    // 2 ||H|| / lambda_min(B_ff)
  bool holds = false;  // phi <= epsilon
};

// Sufficient condition: while V stays at or below beta, no two agents can
// come closer than kappa. Throws InvalidKappa unless kappa lies strictly
// inside (0, min target spacing); beta must be nonnegative.
CollisionCertificate collision_certificate(const Scenario& scenario, ControlLaw law, double kappa,
                                           double beta);
// Same, with beta defaulted to the scenario's initial Lyapunov value.
CollisionCertificate collision_certificate(const Scenario& scenario, ControlLaw law, double kappa);

}  // namespace formctl
