#include "formctl/trace_io.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace formctl {

namespace {

const char* kAxes[3] = {"x", "y", "z"};

std::string fmt17(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_row(std::ofstream& out, const std::vector<double>& row) {
  for (size_t c = 0; c < row.size(); ++c) {
    if (c) out << ',';
    out << fmt17(row[c]);
  }
  out << '\n';
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_double(const std::string& text, const std::string& where) {
  double value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(where + ": not a number: '" + text + "'");
  }
  return value;
}

}  // namespace

std::vector<std::string> trace_columns(int dim, int n, int num_leaders) {
  std::vector<std::string> cols;
  cols.push_back("t");
  for (int i = 0; i < n; ++i) {
    const std::string id = std::to_string(i + 1);
    for (int a = 0; a < dim; ++a) cols.push_back("p" + id + "_" + kAxes[a]);
    for (int a = 0; a < dim; ++a) cols.push_back("h" + id + "_" + kAxes[a]);
    for (int a = 0; a < dim; ++a) cols.push_back("xi" + id + "_" + kAxes[a]);
    cols.push_back("u" + id);
    if (dim == 2) {
      cols.push_back("omega" + id);
    } else {
      for (int a = 0; a < 3; ++a) cols.push_back("omega" + id + "_" + std::string(kAxes[a]));
    }
  }
  cols.push_back("V");
  cols.push_back("bearing_error");
  cols.push_back("position_error");
  cols.push_back("min_distance");
  for (int i = num_leaders; i < n; ++i) {
    cols.push_back("vel_err_" + std::to_string(i + 1));
  }
  return cols;
}

void write_trace_csv(const SimulationTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open trace file for writing: " + path);

  const auto cols = trace_columns(trace.dim, trace.n, trace.num_leaders);
  for (size_t c = 0; c < cols.size(); ++c) {
    if (c) out << ',';
    out << cols[c];
  }
  out << '\n';

  std::vector<double> row;
  row.reserve(cols.size());
  for (const auto& snap : trace.snapshots) {
    row.clear();
    row.push_back(snap.t);
    for (int i = 0; i < trace.n; ++i) {
      for (int a = 0; a < trace.dim; ++a) row.push_back(snap.p(i * trace.dim + a));
      for (int a = 0; a < trace.dim; ++a) row.push_back(snap.h(i * trace.dim + a));
      for (int a = 0; a < trace.dim; ++a) row.push_back(snap.xi(i * trace.dim + a));
      row.push_back(snap.u[i]);
      for (Eigen::Index a = 0; a < snap.omega[i].value.size(); ++a) {
        row.push_back(snap.omega[i].value(a));
      }
    }
    row.push_back(snap.lyapunov);
    row.push_back(snap.bearing_error);
    row.push_back(snap.position_error);
    row.push_back(snap.min_distance);
    for (double err : snap.velocity_errors) row.push_back(err);
    write_row(out, row);
  }
  out.flush();
  if (!out) throw IoError("failed writing trace file: " + path);
}

SimulationTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty trace file");
  const auto header = split(line);

  // Recover the layout from the header, then demand an exact match.
  int dim = 0;
  int n = 0;
  int followers = 0;
  for (const auto& name : header) {
    if (name.rfind("p1_", 0) == 0) ++dim;
    if (name.rfind("u", 0) == 0 && name.size() > 1 && std::isdigit(name[1])) ++n;
    if (name.rfind("vel_err_", 0) == 0) ++followers;
  }
  if (dim < 2 || dim > 3 || n < 2 || followers > n) {
    throw ParseError(path + ": header does not describe a valid trace layout");
  }
  const int num_leaders = n - followers;
  const auto expected = trace_columns(dim, n, num_leaders);
  if (header != expected) {
    throw ParseError(path + ": header deviates from the trace column contract");
  }

  SimulationTrace trace;
  trace.dim = dim;
  trace.n = n;
  trace.num_leaders = num_leaders;

  int row_index = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row_index;
    const std::string where = path + " row " + std::to_string(row_index);
    const auto fields = split(line);
    if (fields.size() != expected.size()) {
      throw ParseError(where + ": expected " + std::to_string(expected.size()) + " columns, got " +
                       std::to_string(fields.size()));
    }
    size_t c = 0;
    auto next = [&]() {
      const size_t idx = c++;
      return parse_double(fields[idx], where + " '" + expected[idx] + "'");
    };

    Snapshot snap;
    snap.t = next();
    snap.p = Vec::Zero(n * dim);
    snap.h = Vec::Zero(n * dim);
    snap.xi = Vec::Zero(n * dim);
    for (int i = 0; i < n; ++i) {
      for (int a = 0; a < dim; ++a) snap.p(i * dim + a) = next();
      for (int a = 0; a < dim; ++a) snap.h(i * dim + a) = next();
      for (int a = 0; a < dim; ++a) snap.xi(i * dim + a) = next();
      snap.u.push_back(next());
      AngularVelocity omega = AngularVelocity::zero(dim);
      for (Eigen::Index a = 0; a < omega.value.size(); ++a) omega.value(a) = next();
      snap.omega.push_back(omega);
    }
    snap.lyapunov = next();
    snap.bearing_error = next();
    snap.position_error = next();
    snap.min_distance = next();
    for (int i = 0; i < followers; ++i) snap.velocity_errors.push_back(next());
    trace.snapshots.push_back(std::move(snap));
  }
  return trace;
}

void emit_plot_data(const SimulationTrace& trace, const std::string& directory) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw IoError("cannot create plot directory: " + directory);

  auto open = [&](const char* name) {
    std::ofstream out(fs::path(directory) / name);
    if (!out) throw IoError(std::string("cannot write plot file: ") + name);
    return out;
  };

  {
    auto out = open("trajectories.csv");
    out << "t";
    for (int i = 0; i < trace.n; ++i) {
      for (int a = 0; a < trace.dim; ++a) out << ",p" << (i + 1) << "_" << kAxes[a];
    }
    out << '\n';
    for (const auto& snap : trace.snapshots) {
      out << fmt17(snap.t);
      for (Eigen::Index k = 0; k < snap.p.size(); ++k) out << ',' << fmt17(snap.p(k));
      out << '\n';
    }
  }
  {
    auto out = open("velocity_errors.csv");
    out << "t";
    for (int i = trace.num_leaders; i < trace.n; ++i) out << ",vel_err_" << (i + 1);
    out << '\n';
    for (const auto& snap : trace.snapshots) {
      out << fmt17(snap.t);
      for (double err : snap.velocity_errors) out << ',' << fmt17(err);
      out << '\n';
    }
  }
  {
    auto out = open("bearing_error.csv");
    out << "t,bearing_error\n";
    for (const auto& snap : trace.snapshots) {
      out << fmt17(snap.t) << ',' << fmt17(snap.bearing_error) << '\n';
    }
  }
  {
    auto out = open("lyapunov.csv");
    out << "t,V\n";
    for (const auto& snap : trace.snapshots) {
      out << fmt17(snap.t) << ',' << fmt17(snap.lyapunov) << '\n';
    }
  }
}

MetricsReport recompute_metrics(const SimulationTrace& trace, const Scenario& scenario,
                                ControlLaw law) {
  if (trace.dim != scenario.dim || trace.n != scenario.graph.n ||
      trace.num_leaders != scenario.graph.num_leaders) {
    throw ValidationError("trace: layout does not match the scenario");
  }
  MetricsReport report;
  for (const auto& snap : trace.snapshots) {
    SystemState state;
    state.t = snap.t;
    state.dim = trace.dim;
    state.p = snap.p;
    state.h = snap.h;
    state.xi = snap.xi;
    const Snapshot fresh = make_snapshot(state, scenario, law);

    report.lyapunov_gap = std::max(report.lyapunov_gap, std::abs(fresh.lyapunov - snap.lyapunov));
    report.bearing_error_gap =
        std::max(report.bearing_error_gap, std::abs(fresh.bearing_error - snap.bearing_error));
    report.position_error_gap =
        std::max(report.position_error_gap, std::abs(fresh.position_error - snap.position_error));
    report.min_distance_gap =
        std::max(report.min_distance_gap, std::abs(fresh.min_distance - snap.min_distance));
    for (int i = 0; i < trace.n; ++i) {
      report.command_gap = std::max(report.command_gap, std::abs(fresh.u[i] - snap.u[i]));
      report.command_gap = std::max(
          report.command_gap, (fresh.omega[i].value - snap.omega[i].value).lpNorm<Eigen::Infinity>());
    }
    for (size_t k = 0; k < snap.velocity_errors.size(); ++k) {
      report.velocity_error_gap = std::max(
          report.velocity_error_gap, std::abs(fresh.velocity_errors[k] - snap.velocity_errors[k]));
    }
  }
  report.max_discrepancy =
      std::max({report.lyapunov_gap, report.bearing_error_gap, report.position_error_gap,
                report.min_distance_gap, report.command_gap, report.velocity_error_gap});
  return report;
}

}  // namespace formctl
