#include "formctl/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace formctl {

namespace {

using nlohmann::json;

std::string agent_label(int index) { return "agents[" + std::to_string(index) + "]"; }

const json& require_field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
  return *it;
}

double require_number(const json& obj, const char* key, const std::string& where) {
  const json& field = require_field(obj, key, where);
  if (!field.is_number()) throw ParseError(where + "." + key + ": expected a number");
  return field.get<double>();
}

int require_int(const json& obj, const char* key, const std::string& where) {
  const json& field = require_field(obj, key, where);
  if (!field.is_number_integer()) throw ParseError(where + "." + key + ": expected an integer");
  return field.get<int>();
}

Vec parse_vec(const json& arr, int dim, const std::string& where) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != dim) {
    throw ParseError(where + ": expected an array of " + std::to_string(dim) + " numbers");
  }
  Vec v(dim);
  for (int k = 0; k < dim; ++k) {
    if (!arr[k].is_number()) throw ParseError(where + ": expected an array of numbers");
    v(k) = arr[k].get<double>();
  }
  return v;
}

ControlGains parse_gains(const json& obj, const char* key) {
  const std::string where = std::string("gains.") + key;
  const json& field = require_field(obj, key, "gains");
  if (!field.is_object()) throw ParseError(where + ": expected an object");
  ControlGains gains;
  gains.k1 = require_number(field, "k1", where);
  gains.k2 = require_number(field, "k2", where);
  return gains;
}

}  // namespace

void finalize_scenario(Scenario& s) {
  if (s.dim != 2 && s.dim != 3) throw ValidationError("dimension: must be 2 or 3");
  const int d = s.dim;
  if (s.n < 2) throw ValidationError("agents: at least two agents required");
  if (s.num_leaders < 2) throw ValidationError("agents: at least two leaders required");
  if (s.num_leaders > s.n) throw ValidationError("agents: more leaders than agents");
  const auto dn = static_cast<Eigen::Index>(d) * s.n;
  if (s.initial_p.size() != dn || s.initial_h.size() != dn || s.initial_xi.size() != dn) {
    throw ValidationError("agents: state vectors must have dimension * n entries");
  }

  if (!(s.reference.u_c >= 0)) throw ValidationError("reference.u_c: must be nonnegative");
  if (s.reference.h_c.size() != d) throw ValidationError("reference.h_c: wrong dimension");
  const double hc_norm = s.reference.h_c.norm();
  if (std::abs(hc_norm - 1.0) > 1e-6) throw ValidationError("reference.h_c: must be unit length");
  s.reference.h_c /= hc_norm;

  for (ControlLaw law : {ControlLaw::BearingOnly, ControlLaw::Displacement}) {
    const auto& gains = s.gains(law);
    if (!(gains.k1 > 0) || !(gains.k2 > 0)) {
      throw ValidationError(std::string("gains.") +
                            (law == ControlLaw::BearingOnly ? "bearing_only" : "displacement") +
                            ": k1 and k2 must be positive");
    }
  }

  if (!(s.integrator.dt > 0)) throw ValidationError("integrator.dt: must be positive");
  if (!(s.integrator.duration >= s.integrator.dt)) {
    throw ValidationError("integrator.duration: must cover at least one step");
  }
  if (!(s.integrator.min_separation_abort > 0)) {
    throw ValidationError("integrator.min_separation_abort: must be positive");
  }
  if (s.integrator.snapshot_stride < 1) {
    throw ValidationError("integrator.snapshot_stride: must be at least 1");
  }

  std::vector<std::pair<int, int>> sensing;
  sensing.reserve(s.edge_specs.size());
  for (const auto& spec : s.edge_specs) sensing.push_back({spec.i, spec.j});
  s.graph = make_formation_graph(s.n, s.num_leaders, sensing);
  if (!graph_connected(s.graph)) throw ValidationError("edges: interaction graph is not connected");

  // Map listed bearings onto canonical edges, flipping orientation as needed.
  s.bearings.dim = d;
  s.bearings.per_edge.assign(s.graph.num_edges(), Vec());
  for (const auto& spec : s.edge_specs) {
    const int k = s.graph.edge_index(spec.i, spec.j);
    const std::string label =
        "edges(" + std::to_string(spec.i + 1) + "," + std::to_string(spec.j + 1) + ")";
    if (spec.g.size() != d) throw ValidationError(label + ": bearing has wrong dimension");
    const double norm = spec.g.norm();
    if (norm <= kCoincidenceTol) throw ValidationError(label + ": bearing has zero length");
    if (std::abs(norm - 1.0) > 1e-6) {
      std::ostringstream msg;
      msg << label << ": desired bearing renormalized (|g| = " << norm << ")";
      s.warnings.push_back(msg.str());
    }
    Vec g = spec.g / norm;
    if (spec.i > spec.j) g = -g;
    s.bearings.per_edge[k] = g;
  }
  // Augmented leader-leader edges without a listed bearing take it from the
  // leader placement itself; any other uncovered edge is an error.
  for (int k = 0; k < s.graph.num_edges(); ++k) {
    if (s.bearings.per_edge[k].size() != 0) continue;
    auto [i, j] = s.graph.edges[k];
    if (j < s.num_leaders) {
      try {
        s.bearings.per_edge[k] = bearing(s.initial_p.segment(i * d, d), s.initial_p.segment(j * d, d));
      } catch (const CoincidentAgents&) {
        throw ValidationError("agents: leaders " + std::to_string(i + 1) + " and " +
                              std::to_string(j + 1) + " coincide");
      }
    } else {
      throw ValidationError("edges: no desired bearing for edge (" + std::to_string(i + 1) + "," +
                            std::to_string(j + 1) + ")");
    }
  }

  for (int i = 0; i < s.n; ++i) {
    auto h_i = s.initial_h.segment(i * d, d);
    const double norm = h_i.norm();
    if (std::abs(norm - 1.0) > 1e-6) {
      throw ValidationError(agent_label(i + 1) + ".h: heading must be unit length");
    }
    h_i /= norm;
    if (s.graph.is_leader(i) && (h_i - s.reference.h_c).norm() > 1e-9) {
      throw ValidationError(agent_label(i + 1) + ".h: leader heading must equal reference heading");
    }
  }

  s.target = solve_target(s.graph, s.bearings, s.initial_p.head(d * s.num_leaders));
  s.rigidity = check_rigidity(s.graph, s.target);
  if (!s.rigidity.rigid && !s.allow_nonrigid) {
    throw ValidationError("formation: target placement is not bearing rigid (rank " +
                          std::to_string(s.rigidity.rank) + "/" + std::to_string(d * s.n) +
                          "); set allow_nonrigid to override");
  }
}

Scenario parse_scenario(const std::string& json_text, const std::string& name) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("scenario: top level must be an object");

  Scenario s;
  s.name = doc.value("name", name);
  s.format_version = require_int(doc, "format_version", "scenario");
  if (s.format_version != 1) {
    throw ValidationError("format_version: unsupported version " + std::to_string(s.format_version));
  }
  s.dim = require_int(doc, "dimension", "scenario");
  if (s.dim != 2 && s.dim != 3) throw ValidationError("dimension: must be 2 or 3");
  const int d = s.dim;

  const json& ref = require_field(doc, "reference", "scenario");
  if (!ref.is_object()) throw ParseError("reference: expected an object");
  s.reference.u_c = require_number(ref, "u_c", "reference");
  s.reference.h_c = parse_vec(require_field(ref, "h_c", "reference"), d, "reference.h_c");

  const json& gains = require_field(doc, "gains", "scenario");
  if (!gains.is_object()) throw ParseError("gains: expected an object");
  s.bearing_gains = parse_gains(gains, "bearing_only");
  s.displacement_gains = parse_gains(gains, "displacement");

  if (doc.contains("integrator")) {
    const json& integ = doc.at("integrator");
    if (!integ.is_object()) throw ParseError("integrator: expected an object");
    IntegratorConfig defaults;
    s.integrator.dt = integ.contains("dt") ? require_number(integ, "dt", "integrator") : defaults.dt;
    s.integrator.duration =
        integ.contains("duration") ? require_number(integ, "duration", "integrator") : defaults.duration;
    s.integrator.min_separation_abort = integ.contains("min_separation_abort")
                                            ? require_number(integ, "min_separation_abort", "integrator")
                                            : defaults.min_separation_abort;
    s.integrator.snapshot_stride =
        integ.contains("snapshot_stride") ? require_int(integ, "snapshot_stride", "integrator")
                                          : defaults.snapshot_stride;
  }
  if (doc.contains("allow_nonrigid")) {
    const json& flag = doc.at("allow_nonrigid");
    if (!flag.is_boolean()) throw ParseError("allow_nonrigid: expected a boolean");
    s.allow_nonrigid = flag.get<bool>();
  }

  const json& agents = require_field(doc, "agents", "scenario");
  if (!agents.is_array() || agents.empty()) throw ParseError("agents: expected a non-empty array");
  s.n = static_cast<int>(agents.size());
  s.initial_p = Vec::Zero(static_cast<Eigen::Index>(d) * s.n);
  s.initial_h = Vec::Zero(static_cast<Eigen::Index>(d) * s.n);
  s.initial_xi = Vec::Zero(static_cast<Eigen::Index>(d) * s.n);
  s.num_leaders = 0;
  bool follower_seen = false;
  for (int i = 0; i < s.n; ++i) {
    const json& agent = agents[i];
    const std::string where = agent_label(i + 1);
    if (!agent.is_object()) throw ParseError(where + ": expected an object");
    const int id = require_int(agent, "id", where);
    if (id != i + 1) {
      throw ValidationError(where + ".id: ids must be 1..n in listed order (got " +
                            std::to_string(id) + ")");
    }
    const json& leader_flag = require_field(agent, "leader", where);
    if (!leader_flag.is_boolean()) throw ParseError(where + ".leader: expected a boolean");
    const bool leader = leader_flag.get<bool>();
    if (leader) {
      if (follower_seen) throw ValidationError(where + ".leader: leaders must precede followers");
      ++s.num_leaders;
    } else {
      follower_seen = true;
    }
    s.initial_p.segment(i * d, d) = parse_vec(require_field(agent, "p", where), d, where + ".p");
    if (agent.contains("h")) {
      s.initial_h.segment(i * d, d) = parse_vec(agent.at("h"), d, where + ".h");
    } else if (leader) {
      s.initial_h.segment(i * d, d) = s.reference.h_c;
    } else {
      throw ValidationError(where + ".h: required for followers");
    }
    if (agent.contains("xi")) {
      s.initial_xi.segment(i * d, d) = parse_vec(agent.at("xi"), d, where + ".xi");
    }
  }

  const json& edges = require_field(doc, "edges", "scenario");
  if (!edges.is_array()) throw ParseError("edges: expected an array");
  for (size_t k = 0; k < edges.size(); ++k) {
    const json& edge = edges[k];
    const std::string where = "edges[" + std::to_string(k) + "]";
    if (!edge.is_object()) throw ParseError(where + ": expected an object");
    EdgeSpec spec;
    spec.i = require_int(edge, "i", where) - 1;
    spec.j = require_int(edge, "j", where) - 1;
    spec.g = parse_vec(require_field(edge, "g", where), d, where + ".g");
    s.edge_specs.push_back(std::move(spec));
  }

  finalize_scenario(s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("failed reading scenario file: " + path);
  return parse_scenario(buffer.str(), path);
}

}  // namespace formctl
