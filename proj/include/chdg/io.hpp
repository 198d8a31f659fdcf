#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "chdg/diagnostics.hpp"
#include "chdg/space.hpp"
#include "chdg/types.hpp"

namespace chdg {

inline constexpr const char* kDiagnosticsHeader = "t,energy,mass,newton_iters,clamp_events";
inline constexpr const char* kConvergenceHeader = "h_label,dof,l2_error,order";

struct ConvergenceRow {
  double h_label = 0;
  int dof = 0;
  double l2_error = 0;
  std::optional<double> order;  // empty on the coarsest level
};

using ConvergenceTable = std::vector<ConvergenceRow>;

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

inline double field_to_double(const std::string& s, const std::string& path, int line) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw std::runtime_error(path + " line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& s) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t comma = s.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace detail

// doubles printed with %.17g, so a read-back reproduces the values exactly
inline void write_diagnostics_csv(const DiagnosticsSeries& series, const std::string& path) {
  std::ofstream out = detail::open_out(path);
  out << kDiagnosticsHeader << "\n";
  for (const DiagnosticsRow& r : series)
    out << detail::fmt_double(r.t) << ',' << detail::fmt_double(r.energy) << ','
        << detail::fmt_double(r.mass) << ',' << r.newton_iters << ',' << r.clamp_events << "\n";
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline DiagnosticsSeries read_diagnostics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kDiagnosticsHeader)
    throw std::runtime_error(path + ": unexpected header '" + line + "'");
  DiagnosticsSeries series;
  int ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    if (f.size() != 5)
      throw std::runtime_error(path + " line " + std::to_string(ln) + ": expected 5 fields");
    DiagnosticsRow r;
    r.t = detail::field_to_double(f[0], path, ln);
    r.energy = detail::field_to_double(f[1], path, ln);
    r.mass = detail::field_to_double(f[2], path, ln);
    r.newton_iters = static_cast<int>(detail::field_to_double(f[3], path, ln));
    r.clamp_events = static_cast<std::uint64_t>(detail::field_to_double(f[4], path, ln));
    series.push_back(r);
  }
  return series;
}

inline void write_convergence_report(const ConvergenceTable& table, const std::string& path) {
  std::ofstream out = detail::open_out(path);
  out << kConvergenceHeader << "\n";
  for (const ConvergenceRow& r : table) {
    out << detail::fmt_double(r.h_label) << ',' << r.dof << ',' << detail::fmt_double(r.l2_error)
        << ',';
    if (r.order) out << detail::fmt_double(*r.order);
    else out << '-';
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

// Legacy ASCII VTK unstructured grid. The field is discontinuous, so every
// triangle emits its own three vertices and samples u with its own polynomial.
inline void write_field_snapshot(const DgSpace& space, const Vec& xi, double t,
                                 const std::string& path) {
  if (xi.size() != space.n_dof())
    throw std::invalid_argument("write_field_snapshot: coefficient vector length mismatch");
  const Mesh& mesh = space.mesh();
  const int ntri = mesh.n_triangles();
  static const Point ref_corners[3] = {Point(0, 0), Point(1, 0), Point(0, 1)};

  std::ofstream out = detail::open_out(path);
  out << "# vtk DataFile Version 3.0\n";
  out << "u t=" << detail::fmt_double(t) << "\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << 3 * ntri << " double\n";
  for (int k = 0; k < ntri; ++k)
    for (const Point& rc : ref_corners) {
      Point x = mesh.ref_to_phys(k, rc);
      out << detail::fmt_double(x.x()) << ' ' << detail::fmt_double(x.y()) << " 0\n";
    }
  out << "CELLS " << ntri << ' ' << 4 * ntri << "\n";
  for (int k = 0; k < ntri; ++k)
    out << "3 " << 3 * k << ' ' << 3 * k + 1 << ' ' << 3 * k + 2 << "\n";
  out << "CELL_TYPES " << ntri << "\n";
  for (int k = 0; k < ntri; ++k) out << "5\n";
  out << "POINT_DATA " << 3 * ntri << "\n";
  out << "SCALARS u double 1\n";
  out << "LOOKUP_TABLE default\n";
  for (int k = 0; k < ntri; ++k)
    for (const Point& rc : ref_corners) out << detail::fmt_double(eval_field(space, xi, k, rc)) << "\n";
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace chdg
