#pragma once

#include <string>
#include <utility>
#include <vector>

#include "formctl/control.hpp"
#include "formctl/dynamics.hpp"
#include "formctl/formation.hpp"

namespace formctl {

// Shared constant-velocity reference all leaders follow.
struct LeaderReference {
  double u_c = 0;
  Vec h_c;

  Vec velocity() const { return u_c * h_c; }
};

// A raw edge as listed in the input: endpoints in listed orientation
// (0-based) plus the desired bearing pointing from first to second.
struct EdgeSpec {
  int i = 0;
  int j = 0;
  Vec g;
};

// Complete problem description. Raw fields mirror the input file; the derived
// fields (graph, bearings, target) are filled by finalize_scenario, which
// every loader calls.
struct Scenario {
  int format_version = 1;
  std::string name;
  int dim = 0;
  int n = 0;
  int num_leaders = 0;
  std::vector<EdgeSpec> edge_specs;
  Vec initial_p;
  Vec initial_h;
  Vec initial_xi;
  LeaderReference reference;
  ControlGains bearing_gains;
  ControlGains displacement_gains;
  IntegratorConfig integrator;
  bool allow_nonrigid = false;

  // Derived by finalize_scenario.
  FormationGraph graph;
  DesiredBearingSet bearings;
  FormationTarget target;
  RigidityReport rigidity;
  std::vector<std::string> warnings;

  const ControlGains& gains(ControlLaw law) const {
    return law == ControlLaw::BearingOnly ? bearing_gains : displacement_gains;
  }
  Vec v_c() const { return reference.velocity(); }
};

// Validates the raw fields, builds the canonical graph and bearing set,
// solves the target placement, and checks rigidity (unless allow_nonrigid).
// Throws ValidationError (or the solver's own errors) on violations; appends
// to `warnings` for conditions that are repaired in place, such as
// renormalizing a desired bearing that is off unit length by more than 1e-6.
void finalize_scenario(Scenario& scenario);

// Reads a scenario from a JSON file. ParseError for malformed input, IoError
// if unreadable, otherwise everything finalize_scenario throws.
Scenario load_scenario(const std::string& path);

// Same, from a JSON document already in memory.
Scenario parse_scenario(const std::string& json_text, const std::string& name);

}  // namespace formctl
