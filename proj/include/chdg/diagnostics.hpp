#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "chdg/model.hpp"
#include "chdg/quadrature.hpp"
#include "chdg/space.hpp"
#include "chdg/types.hpp"

namespace chdg {

// one row of the per-step diagnostics series
struct DiagnosticsRow {
  double t = 0;
  double energy = 0;
  double mass = 0;
  int newton_iters = 0;
  std::uint64_t clamp_events = 0;  // potential clamps during this step's solve
};

using DiagnosticsSeries = std::vector<DiagnosticsRow>;

inline double total_mass(const DgSpace& space, const Vec& xi) {
  if (xi.size() != space.n_dof())
    throw std::invalid_argument("total_mass: coefficient vector length mismatch");
  QuadratureRule rule = triangle_quadrature(space.degree());
  Mat phi = space.basis().tabulate_values(rule.points);
  double mass = 0;
  for (int t = 0; t < space.n_tri(); ++t) {
    const double dj = space.mesh().det_jac[t];
    for (int g = 0; g < rule.size(); ++g) {
      double u = 0;
      for (int j = 0; j < space.n_local(); ++j) u += xi(space.dof(t, j)) * phi(g, j);
      mass += rule.weights(g) * dj * u;
    }
  }
  return mass;
}

// E(u_h) = sum_K int eps^2/2 |grad u|^2 + F(u)
//        - sum_E int {eps^2 grad u . n} [u]  +  sum_E sigma eps^2 / (2 h_E) int [u]^2
// with [u] = u_0 - u_1 across each two-sided edge (n points from side 0 to 1).
inline double discrete_energy(const DgSpace& space, double epsilon, const Potential& potential,
                              const Vec& xi) {
  if (xi.size() != space.n_dof())
    throw std::invalid_argument("discrete_energy: coefficient vector length mismatch");
  const Mesh& mesh = space.mesh();
  const int nl = space.n_local();
  const double eps2 = epsilon * epsilon;

  QuadratureRule vol_rule = triangle_quadrature(potential.nonlinear_quad_degree(space.degree()));
  Mat phi = space.basis().tabulate_values(vol_rule.points);
  auto [gx_ref, gy_ref] = space.basis().tabulate_gradients(vol_rule.points);

  double energy = 0;
  for (int t = 0; t < space.n_tri(); ++t) {
    const Eigen::Matrix2d jit = mesh.jac_inv[t].transpose();
    const double dj = mesh.det_jac[t];
    for (int g = 0; g < vol_rule.size(); ++g) {
      double u = 0;
      Point grad_ref = Point::Zero();
      for (int j = 0; j < nl; ++j) {
        const double c = xi(space.dof(t, j));
        u += c * phi(g, j);
        grad_ref.x() += c * gx_ref(g, j);
        grad_ref.y() += c * gy_ref(g, j);
      }
      Point grad = jit * grad_ref;
      energy += vol_rule.weights(g) * dj *
                (0.5 * eps2 * grad.squaredNorm() + potential.eval(u).F);
    }
  }

  QuadratureRule edge_rule = edge_quadrature(space.edge_quad_degree());
  for (int e = 0; e < static_cast<int>(mesh.edges.size()); ++e) {
    if (mesh.edges[e].kind == EdgeKind::boundary) continue;
    EdgeTraceTable tr = edge_traces(space, e, edge_rule);
    const Point n = tr.normal;
    const double pen = space.sigma() * eps2 / (2.0 * tr.h_E);
    for (int g = 0; g < edge_rule.size(); ++g) {
      double u0 = 0, u1 = 0, dn0 = 0, dn1 = 0;
      for (int j = 0; j < nl; ++j) {
        const double c0 = xi(space.dof(tr.tri[0], j));
        const double c1 = xi(space.dof(tr.tri[1], j));
        u0 += c0 * tr.values[0](g, j);
        u1 += c1 * tr.values[1](g, j);
        dn0 += c0 * (tr.grad_x[0](g, j) * n.x() + tr.grad_y[0](g, j) * n.y());
        dn1 += c1 * (tr.grad_x[1](g, j) * n.x() + tr.grad_y[1](g, j) * n.y());
      }
      const double jump = u0 - u1;
      const double avg_dn = 0.5 * (dn0 + dn1);
      energy += tr.weights(g) * (-eps2 * avg_dn * jump + pen * jump * jump);
    }
  }
  return energy;
}

// ||u_h - u||_{L2} against an arbitrary field, quadrature degree >= max(2q+4, 12)
template <class Fn>
double l2_error_against(const DgSpace& space, const Vec& xi, Fn&& exact) {
  if (xi.size() != space.n_dof())
    throw std::invalid_argument("l2_error_against: coefficient vector length mismatch");
  QuadratureRule rule = triangle_quadrature(space.error_quad_degree());
  Mat phi = space.basis().tabulate_values(rule.points);
  double err2 = 0;
  for (int t = 0; t < space.n_tri(); ++t) {
    const double dj = space.mesh().det_jac[t];
    for (int g = 0; g < rule.size(); ++g) {
      double u = 0;
      for (int j = 0; j < space.n_local(); ++j) u += xi(space.dof(t, j)) * phi(g, j);
      Point x = space.mesh().ref_to_phys(t, rule.points.row(g).transpose());
      const double diff = u - exact(x.x(), x.y());
      err2 += rule.weights(g) * dj * diff * diff;
    }
  }
  return std::sqrt(err2);
}

inline double l2_error(const DgSpace& space, const Vec& xi, const ProblemPreset& preset, double t,
                       double epsilon) {
  if (!preset.has_exact)
    throw std::invalid_argument("l2_error: preset '" + preset.name + "' has no exact solution");
  return l2_error_against(space, xi,
                          [&](double x, double y) { return preset.exact_fn(x, y, t, epsilon); });
}

// observed orders under mesh (or step) halving: order_i = log2(e_{i-1} / e_i)
inline std::vector<double> convergence_order(const std::vector<double>& errors) {
  if (errors.size() < 2)
    throw std::invalid_argument("convergence_order: need at least two error values");
  for (double e : errors)
    if (!(e > 0) || !std::isfinite(e))
      throw std::invalid_argument("convergence_order: errors must be positive and finite");
  std::vector<double> orders;
  orders.reserve(errors.size() - 1);
  for (size_t i = 1; i < errors.size(); ++i)
    orders.push_back(std::log2(errors[i - 1] / errors[i]));
  return orders;
}

}  // namespace chdg
