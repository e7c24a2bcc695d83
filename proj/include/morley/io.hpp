#pragma once

// File formats: trace/contour/report CSV, legacy ASCII VTK snapshots, and the
// flat key=value run configuration.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "morley/dynamics.hpp"
#include "morley/harness.hpp"

namespace morley {

namespace detail {

inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  return os;
}

inline void close_out(std::ofstream& os, const std::string& path) {
  os.flush();
  if (!os) throw IoError("write failed: " + path);
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

inline constexpr const char* kTraceHeader =
    "step,time,energy,mass,linf,increment_l2,newton_iters";

inline void write_trace_csv(const Trace& trace, const std::string& path) {
  std::ofstream os = detail::open_out(path);
  os << kTraceHeader << "\n";
  for (const TraceRow& r : trace.rows)
    os << r.step << ',' << detail::g17(r.time) << ',' << detail::g17(r.energy)
       << ',' << detail::g17(r.mass) << ',' << detail::g17(r.linf) << ','
       << detail::g17(r.increment_l2) << ',' << r.newton_iters << "\n";
  detail::close_out(os, path);
}

inline Trace read_trace_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(is, line) || detail::trim(line) != kTraceHeader)
    throw IoError("bad trace header in " + path);
  Trace trace;
  while (std::getline(is, line)) {
    if (detail::trim(line).empty()) continue;
    TraceRow r;
    if (std::sscanf(line.c_str(), "%d,%lg,%lg,%lg,%lg,%lg,%d", &r.step,
                    &r.time, &r.energy, &r.mass, &r.linf, &r.increment_l2,
                    &r.newton_iters) != 7)
      throw IoError("bad trace row in " + path + ": " + line);
    trace.rows.push_back(r);
  }
  return trace;
}

// Legacy ASCII VTK unstructured grid; point data = vertex values of u.
inline void write_field_vtk(const Mesh& mesh, const Eigen::VectorXd& u,
                            const std::string& path) {
  std::ofstream os = detail::open_out(path);
  os << "# vtk DataFile Version 3.0\n"
     << "morley field\n"
     << "ASCII\n"
     << "DATASET UNSTRUCTURED_GRID\n"
     << "POINTS " << mesh.n_vertices() << " double\n";
  for (int v = 0; v < mesh.n_vertices(); ++v)
    os << detail::g17(mesh.vertex(v).x()) << ' '
       << detail::g17(mesh.vertex(v).y()) << " 0\n";
  os << "CELLS " << mesh.n_triangles() << ' ' << 4 * mesh.n_triangles()
     << "\n";
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    os << "3 " << tri.v[0] << ' ' << tri.v[1] << ' ' << tri.v[2] << "\n";
  }
  os << "CELL_TYPES " << mesh.n_triangles() << "\n";
  for (int t = 0; t < mesh.n_triangles(); ++t) os << "5\n";
  os << "POINT_DATA " << mesh.n_vertices() << "\n"
     << "SCALARS u double 1\n"
     << "LOOKUP_TABLE default\n";
  for (int v = 0; v < mesh.n_vertices(); ++v) os << detail::g17(u[v]) << "\n";
  detail::close_out(os, path);
}

inline void write_contour_csv(const ContourSet& contours,
                              const std::string& path) {
  std::ofstream os = detail::open_out(path);
  os << "polyline_id,x,y\n";
  for (std::size_t i = 0; i < contours.polylines.size(); ++i)
    for (const Vec2& p : contours.polylines[i])
      os << i << ',' << detail::g17(p.x()) << ',' << detail::g17(p.y())
         << "\n";
  detail::close_out(os, path);
}

// scale + one error column per norm, then a trailing `order` row.
inline void write_report_csv(const ConvergenceReport& rep, std::ostream& os) {
  os << "scale";
  for (const auto& c : rep.columns) os << ',' << c;
  os << "\n";
  for (std::size_t i = 0; i < rep.scales.size(); ++i) {
    os << detail::g17(rep.scales[i]);
    for (double e : rep.rows[i]) os << ',' << detail::g17(e);
    os << "\n";
  }
  os << "order";
  for (double o : rep.orders) os << ',' << detail::g17(o);
  os << "\n";
}

inline void write_report_csv(const ConvergenceReport& rep,
                             const std::string& path) {
  std::ofstream os = detail::open_out(path);
  write_report_csv(rep, os);
  detail::close_out(os, path);
}

// Flat `key = value` configuration; '#' starts a comment, blank lines are
// skipped, unknown keys are errors.
inline SimConfig parse_config(std::istream& is) {
  SimConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key or value");

    auto as_double = [&] {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(val, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != val.size())
        throw std::invalid_argument("config key " + key +
                                    ": bad number: " + val);
      return v;
    };
    auto as_int = [&] {
      std::size_t used = 0;
      int v = 0;
      try {
        v = std::stoi(val, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != val.size())
        throw std::invalid_argument("config key " + key +
                                    ": bad integer: " + val);
      return v;
    };

    if (key == "epsilon") cfg.epsilon = as_double();
    else if (key == "dt") cfg.dt = as_double();
    else if (key == "t_final") cfg.t_final = as_double();
    else if (key == "n") cfg.n = as_int();
    else if (key == "newton_tol") cfg.newton_tol = as_double();
    else if (key == "newton_max_iter") cfg.newton_max_iter = as_int();
    else if (key == "alpha") cfg.alpha = as_double();
    else if (key == "beta") cfg.beta = as_double();
    else if (key == "initial") cfg.initial = val;
    else if (key == "init_mode") cfg.init_mode = val;
    else if (key == "output_every") cfg.output_every = as_int();
    else if (key == "out_dir") cfg.out_dir = val;
    else throw std::invalid_argument("unknown config key: " + key);
  }
  return cfg;
}

inline SimConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file: " + path);
  return parse_config(is);
}

}  // namespace morley
