#pragma once

// Command line front end: simulation runs, convergence studies, DOF table,
// and level-set extraction.  Usage problems (bad flags, bad config) exit 2;
// runtime failures exit 1.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "morley/io.hpp"

namespace morley {

namespace detail {

inline std::string snapshot_path(const std::string& dir, int step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "field_%06d.vtk", step);
  return dir + "/" + buf;
}

inline int run_simulate(const SimConfig& cfg, const ScalarFunction& u0,
                        std::ostream& out) {
  std::filesystem::create_directories(cfg.out_dir);
  const Mesh mesh = Mesh::crisscross(cfg.n);
  const ElementCache cache(mesh);
  for (const std::string& note : cfg.constraint_notes())
    out << "note: " << note << "\n";

  Trace trace;
  run_simulation(cache, cfg, u0, trace,
                 [&](int step, double, const Eigen::VectorXd& u) {
                   write_field_vtk(mesh, u, snapshot_path(cfg.out_dir, step));
                 });
  const std::string trace_path = cfg.out_dir + "/trace.csv";
  write_trace_csv(trace, trace_path);

  const TraceRow& a = trace.rows.front();
  const TraceRow& b = trace.rows.back();
  out << "steps " << b.step << "  energy " << a.energy << " -> " << b.energy
      << "  mass drift " << std::abs(b.mass - a.mass) << "  max|u| " << b.linf
      << "\n"
      << "trace written to " << trace_path << "\n";
  return 0;
}

inline int run_contour(const SimConfig& cfg, const ScalarFunction& u0,
                       const std::string& out_path, std::ostream& out) {
  const Mesh mesh = Mesh::crisscross(cfg.n);
  const ElementCache cache(mesh);
  const Eigen::VectorXd u = initial_field(cache, u0, cfg);
  const ContourSet contours = extract_zero_level_set(mesh, u);
  std::string path = out_path;
  if (path.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    path = cfg.out_dir + "/contour.csv";
  }
  write_contour_csv(contours, path);
  std::size_t pts = 0;
  for (const auto& line : contours.polylines) pts += line.size();
  out << contours.polylines.size() << " polylines, " << pts
      << " points written to " << path << "\n";
  return 0;
}

inline int emit_report(const ConvergenceReport& rep, const std::string& out_path,
                       std::ostream& out) {
  write_report_csv(rep, out);
  if (!out_path.empty()) {
    write_report_csv(rep, out_path);
    out << "report written to " << out_path << "\n";
  }
  return 0;
}

}  // namespace detail

inline int cli_main(int argc, char** argv, std::ostream& out,
                    std::ostream& err) {
  CLI::App app{"Morley Cahn-Hilliard solver and diagnostics"};
  app.require_subcommand(1);

  std::string config_path, study, out_path;

  CLI::App* simulate = app.add_subcommand(
      "simulate", "run the implicit scheme from a config file");
  simulate->add_option("--config", config_path, "key = value config file")
      ->required();

  CLI::App* converge =
      app.add_subcommand("converge", "convergence study at pinned parameters");
  converge
      ->add_option("--study", study, "which study: space | time | projection")
      ->required()
      ->check(CLI::IsMember({"space", "time", "projection"}));
  converge->add_option("--config", config_path,
                       "optional config (supplies out_dir)");
  converge->add_option("--out", out_path, "report CSV path");

  CLI::App* interp =
      app.add_subcommand("interp-study", "Morley interpolation error rates");
  interp->add_option("--out", out_path, "report CSV path");

  CLI::App* enrich =
      app.add_subcommand("enrich-study", "enriching-operator error rates");
  enrich->add_option("--out", out_path, "report CSV path");

  CLI::App* dof =
      app.add_subcommand("dof-table", "DOF counts for the standard meshes");

  CLI::App* contour = app.add_subcommand(
      "contour", "zero level set of the configured initial state");
  contour->add_option("--config", config_path, "key = value config file")
      ->required();
  contour->add_option("--out", out_path, "contour CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  if (dof->parsed()) {
    for (int n : {5, 10, 20, 40, 80}) {
      const Mesh m = Mesh::crisscross(n);
      out << m.grid_h() << " " << m.n_dofs() << "\n";
    }
    return 0;
  }

  // Configuration phase: parse errors and bad values are usage errors.
  SimConfig cfg;
  ScalarFunction u0;
  if (simulate->parsed() || contour->parsed() ||
      (converge->parsed() && !config_path.empty())) {
    try {
      cfg = parse_config_file(config_path);
      cfg.validate();
      if (simulate->parsed() || contour->parsed())
        u0 = named_initial(cfg.initial, cfg.epsilon);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return 2;
    }
  }

  try {
    if (simulate->parsed()) return detail::run_simulate(cfg, u0, out);
    if (contour->parsed()) return detail::run_contour(cfg, u0, out_path, out);
    if (interp->parsed())
      return detail::emit_report(
          interpolation_study(sin_pix_cos_piy(), {8, 16, 32}), out_path, out);
    if (enrich->parsed())
      return detail::emit_report(
          enrichment_study(sin_pix_cos_piy(), {8, 16, 32}), out_path, out);
    if (converge->parsed()) {
      if (out_path.empty() && !config_path.empty())
        out_path = cfg.out_dir + "/" + study + ".csv";
      if (!out_path.empty()) {
        const auto parent = std::filesystem::path(out_path).parent_path();
        if (!parent.empty()) std::filesystem::create_directories(parent);
      }
      ConvergenceReport rep;
      if (study == "space")
        rep = space_convergence(manufactured_problem(0.5), 0.5, {8, 16, 32},
                                1e-5, 5e-4);
      else if (study == "time")
        rep = time_convergence(manufactured_problem(0.5), 0.5, 32,
                               {4e-3, 2e-3, 1e-3}, 0.04);
      else
        rep = projection_study(cos_pix_piy(), 0.5, {8, 16, 32});
      return detail::emit_report(rep, out_path, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace morley
