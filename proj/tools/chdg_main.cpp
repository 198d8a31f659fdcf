#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "chdg/chdg.hpp"

namespace {

// precedence: --out flag, then config key, then CHDG_OUT_DIR, then cwd
std::string resolve_out_dir(const std::string& cli_out, const chdg::RunConfig& config) {
  if (!cli_out.empty()) return cli_out;
  if (!config.out_dir.empty()) return config.out_dir;
  if (const char* env = std::getenv("CHDG_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return ".";
}

int cmd_run(const std::string& config_path, const std::string& cli_out, int snapshot_stride) {
  chdg::RunConfig config = chdg::load_config(config_path);
  const std::string out_dir = resolve_out_dir(cli_out, config);
  std::cout << "run: " << (config.preset_name.empty() ? "explicit config" : config.preset_name)
            << "  mesh " << config.nx << "x" << config.ny << "  q=" << config.q
            << "  dt=" << config.dt << "  T=" << config.T << "\n";
  auto start = std::chrono::steady_clock::now();
  chdg::RunOutputs out = chdg::run_config(config, out_dir, snapshot_stride);
  std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;

  const chdg::DiagnosticsRow& first = out.series.front();
  const chdg::DiagnosticsRow& last = out.series.back();
  std::printf("steps: %d  wall: %.2fs\n", out.steps, wall.count());
  std::printf("energy: %.10g -> %.10g\n", first.energy, last.energy);
  std::printf("mass drift: %.3e\n", last.mass - first.mass);
  std::cout << "wrote " << out.csv_path << "\n";
  for (const std::string& p : out.snapshot_paths) std::cout << "wrote " << p << "\n";
  return 0;
}

int cmd_converge(const std::string& config_path, const std::string& cli_out, int levels) {
  chdg::RunConfig config = chdg::load_config(config_path);
  const std::string out_dir = resolve_out_dir(cli_out, config);
  std::cout << "converge: " << config.preset_name << "  levels=" << levels << "  q=" << config.q
            << "\n";
  double prev_error = 0;
  auto start = std::chrono::steady_clock::now();
  chdg::ConvergenceResult result =
      chdg::run_convergence(config, levels, [&](const chdg::ConvergenceLevel& lv) {
        std::printf("  h=%-12.6g dof=%-8d dt=%-12.6g error=%.6e", lv.h_label, lv.dof, lv.dt,
                    lv.error);
        if (prev_error > 0) std::printf("  order=%.2f", std::log2(prev_error / lv.error));
        std::printf("\n");
        prev_error = lv.error;
      });
  std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;

  std::filesystem::create_directories(out_dir);
  const std::string report = (std::filesystem::path(out_dir) / "convergence.csv").string();
  chdg::write_convergence_report(result.table, report);
  std::printf("wall: %.2fs\n", wall.count());
  std::cout << "wrote " << report << "\n";
  return 0;
}

int cmd_preset_list() {
  for (const chdg::ProblemPreset& p : chdg::presets()) {
    std::printf("%-14s [%g,%g]x[%g,%g] %-8s q=%d nx=%d dt=%-10.4g T=%-6g %s/%s%s\n",
                p.name.c_str(), p.domain.x_min, p.domain.x_max, p.domain.y_min, p.domain.y_max,
                chdg::to_string(p.bc), p.q, p.nx, p.dt, p.T, chdg::to_string(p.potential.kind),
                chdg::to_string(p.mobility.kind), p.has_exact ? " (exact solution)" : "");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"interior-penalty DG solver for the Cahn-Hilliard equation"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int levels = 4;
  int snapshot_stride = 0;

  CLI::App* run = app.add_subcommand("run", "execute one configured simulation");
  run->add_option("--config", config_path, "config file (key=value lines)")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--snapshot-stride", snapshot_stride,
                  "also write a field snapshot every N steps");

  CLI::App* converge = app.add_subcommand("converge", "mesh-refinement error study");
  converge->add_option("--config", config_path, "config file; preset needs an exact solution")
      ->required()
      ->check(CLI::ExistingFile);
  converge->add_option("--levels", levels, "number of meshes, each halving h")->required();
  converge->add_option("--out", out_dir, "output directory");

  CLI::App* preset = app.add_subcommand("preset", "inspect built-in presets");
  bool list = false;
  preset->add_flag("--list", list, "list presets and their parameters");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, snapshot_stride);
    if (converge->parsed()) return cmd_converge(config_path, out_dir, levels);
    if (preset->parsed()) {
      if (list) return cmd_preset_list();
      std::cout << preset->help();
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
