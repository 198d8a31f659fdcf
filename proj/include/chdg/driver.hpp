#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chdg/config.hpp"
#include "chdg/diagnostics.hpp"
#include "chdg/io.hpp"
#include "chdg/model.hpp"
#include "chdg/solver.hpp"

namespace chdg {

inline Mesh build_mesh(const RunConfig& c) { return build_rect_mesh(c.domain, c.nx, c.ny, c.bc); }

inline Model build_model(const RunConfig& c) {
  return Model{c.epsilon, c.mobility, Potential(c.potential), c.preset};
}

// exact-solution presets start from the projected solution at t=0, everything
// else from a seeded elementwise perturbation of a constant state
inline Vec initial_coefficients(const DgSpace& space, const RunConfig& c) {
  if (c.preset && c.preset->has_exact) {
    const ProblemPreset* p = c.preset;
    const double eps = c.epsilon;
    return project_l2(
        space, [p, eps](double x, double y) { return p->exact_fn(x, y, 0.0, eps); },
        space.load_quad_degree());
  }
  return random_perturbed_constant(space, c.ic_mean, c.ic_amplitude, c.seed);
}

struct RunOutputs {
  DiagnosticsSeries series;
  StateVector state;
  int steps = 0;
  std::string csv_path;
  std::vector<std::string> snapshot_paths;
};

// Execute one configured run and write diagnostics.csv, config.txt, and
// initial/final (plus optional strided) field snapshots under out_dir.
// If a step fails, whatever was recorded so far is flushed along with an
// error.txt record before the exception is rethrown.
inline RunOutputs run_config(const RunConfig& config, const std::string& out_dir,
                             int snapshot_stride = 0) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string csv_path = (fs::path(out_dir) / "diagnostics.csv").string();

  {
    std::ofstream cfg_out(fs::path(out_dir) / "config.txt");
    cfg_out << serialize_config(config);
  }

  Mesh mesh = build_mesh(config);
  DgSpace space(mesh, config.q, config.sigma_override);
  Model model = build_model(config);
  AvfIntegrator integrator(space, model, config.newton);

  RunOutputs out;
  out.csv_path = csv_path;

  TimeLoopOptions opt;
  opt.t_end = config.T;
  opt.dt = config.dt;
  opt.record_stride = config.stride;
  opt.snapshot_stride = snapshot_stride;
  opt.check_invariants = !model.has_source();
  opt.row_cb = [&](const DiagnosticsRow& row) { out.series.push_back(row); };
  opt.snapshot_cb = [&](const StateVector& s, int step) {
    char name[32];
    std::snprintf(name, sizeof name, "u_%08d.vtk", step);
    std::string path = (fs::path(out_dir) / name).string();
    write_field_snapshot(space, s.xi, s.t, path);
    out.snapshot_paths.push_back(path);
  };

  try {
    TimeLoopResult result = run_time_loop(integrator, initial_coefficients(space, config), opt);
    out.state = std::move(result.state);
    out.steps = result.steps;
  } catch (const std::exception& e) {
    write_diagnostics_csv(out.series, csv_path);
    std::ofstream err(fs::path(out_dir) / "error.txt");
    err << e.what() << "\n";
    throw;
  }
  write_diagnostics_csv(out.series, csv_path);
  return out;
}

struct ConvergenceLevel {
  int nx = 0;
  int dof = 0;
  double h_label = 0;
  double dt = 0;
  double error = 0;
};

struct ConvergenceResult {
  std::vector<ConvergenceLevel> levels;
  ConvergenceTable table;
};

// Mesh ladder nx, 2nx, 4nx, ... against the exact solution at t=T. The mesh
// size label is side/(2 nx): the shortest edge of the split-rectangle cells.
// Presets flagged dt_auto_per_level re-derive dt = label/2 on every level;
// otherwise the configured dt applies unchanged to all levels.
inline ConvergenceResult run_convergence(
    const RunConfig& config, int levels,
    const std::function<void(const ConvergenceLevel&)>& on_level = {}) {
  if (levels < 1) throw std::invalid_argument("run_convergence: need at least one level");
  if (!config.preset || !config.preset->has_exact)
    throw std::invalid_argument("run_convergence: preset without an exact solution");
  const bool auto_dt = config.preset->dt_auto_per_level;

  ConvergenceResult out;
  std::vector<double> errors;
  for (int level = 0; level < levels; ++level) {
    RunConfig c = config;
    c.nx = config.nx << level;
    c.ny = config.ny << level;

    ConvergenceLevel lv;
    lv.nx = c.nx;
    lv.h_label = c.domain.width() / (2.0 * c.nx);
    c.dt = auto_dt ? 0.5 * lv.h_label : config.dt;
    lv.dt = c.dt;

    Mesh mesh = build_mesh(c);
    DgSpace space(mesh, c.q, c.sigma_override);
    Model model = build_model(c);
    AvfIntegrator integrator(space, model, c.newton);
    lv.dof = space.n_dof();

    TimeLoopOptions opt;
    opt.t_end = c.T;
    opt.dt = c.dt;
    opt.record_stride = c.stride;
    TimeLoopResult result = run_time_loop(integrator, initial_coefficients(space, c), opt);
    lv.error = l2_error(space, result.state.xi, *c.preset, result.state.t, c.epsilon);

    out.levels.push_back(lv);
    errors.push_back(lv.error);
    if (on_level) on_level(lv);
  }

  for (size_t i = 0; i < out.levels.size(); ++i) {
    ConvergenceRow row;
    row.h_label = out.levels[i].h_label;
    row.dof = out.levels[i].dof;
    row.l2_error = out.levels[i].error;
    if (i > 0) row.order = std::log2(errors[i - 1] / errors[i]);
    out.table.push_back(row);
  }
  return out;
}

}  // namespace chdg
