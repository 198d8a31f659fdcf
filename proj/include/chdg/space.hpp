#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "chdg/basis.hpp"
#include "chdg/mesh.hpp"
#include "chdg/quadrature.hpp"
#include "chdg/types.hpp"

namespace chdg {

// Broken polynomial space P^q on a triangle mesh with the modal orthonormal
// reference basis. Dofs are element-major: dof(K, j) = K * n_local + j, so the
// mass matrix is det(J_K) * identity per element. Immutable after construction.
class DgSpace {
 public:
  DgSpace(const Mesh& mesh, int q, std::optional<double> sigma_override = {})
      : mesh_(&mesh), q_(q), basis_(reference_basis(q)) {
    sigma_ = sigma_override ? *sigma_override : 3.0 * q * (q + 1);
  }

  const Mesh& mesh() const { return *mesh_; }
  const BasisSet& basis() const { return basis_; }
  int degree() const { return q_; }
  int n_local() const { return basis_.size; }
  int n_tri() const { return mesh_->n_triangles(); }
  int n_dof() const { return n_local() * n_tri(); }
  double sigma() const { return sigma_; }

  int dof(int tri, int j) const { return tri * n_local() + j; }

  // default quadrature degrees
  int linear_quad_degree() const { return 2 * q_ + 2; }
  int edge_quad_degree() const { return 2 * q_ + 1; }
  int error_quad_degree() const { return std::max(2 * q_ + 4, 12); }
  int load_quad_degree() const { return std::max(2 * q_ + 2, 12); }

 private:
  const Mesh* mesh_;
  int q_;
  BasisSet basis_;
  double sigma_;
};

// u_h (and optionally its physical gradient) at a reference point of a triangle
inline double eval_field(const DgSpace& space, const Vec& coeffs, int tri, const Point& ref,
                         Point* grad = nullptr) {
  if (coeffs.size() != space.n_dof())
    throw std::invalid_argument("eval_field: coefficient vector has length " +
                                std::to_string(coeffs.size()) + ", expected " +
                                std::to_string(space.n_dof()));
  const int nl = space.n_local();
  double vals[10], gx[10], gy[10];
  space.basis().eval(ref.x(), ref.y(), vals);
  double u = 0;
  for (int j = 0; j < nl; ++j) u += coeffs(space.dof(tri, j)) * vals[j];
  if (grad) {
    space.basis().eval_grad(ref.x(), ref.y(), gx, gy);
    Point ref_grad = Point::Zero();
    for (int j = 0; j < nl; ++j) {
      ref_grad.x() += coeffs(space.dof(tri, j)) * gx[j];
      ref_grad.y() += coeffs(space.dof(tri, j)) * gy[j];
    }
    *grad = space.mesh().jac_inv[tri].transpose() * ref_grad;
  }
  return u;
}

// Elementwise L2 projection; exact on polynomials of degree <= q.
// With the orthonormal basis the local mass solve is a division by det(J).
// quad_degree <= 0 picks the linear default; raise it for transcendental data.
template <class F>
Vec project_l2(const DgSpace& space, F&& f, int quad_degree = 0) {
  QuadratureRule rule =
      triangle_quadrature(quad_degree > 0 ? quad_degree : space.linear_quad_degree());
  Mat phi = space.basis().tabulate_values(rule.points);
  const int nl = space.n_local();
  Vec coeffs = Vec::Zero(space.n_dof());
  for (int t = 0; t < space.n_tri(); ++t) {
    for (int g = 0; g < rule.size(); ++g) {
      Point x = space.mesh().ref_to_phys(t, rule.points.row(g).transpose());
      double fw = f(x.x(), x.y()) * rule.weights(g);  // det(J) cancels against the mass solve
      for (int j = 0; j < nl; ++j) coeffs(space.dof(t, j)) += fw * phi(g, j);
    }
  }
  return coeffs;
}

// coefficients of the globally constant field u = c
inline Vec constant_field(const DgSpace& space, double c) {
  Vec coeffs = Vec::Zero(space.n_dof());
  double phi0 = space.basis().coeff(0, 0);  // constant mode value
  for (int t = 0; t < space.n_tri(); ++t) coeffs(space.dof(t, 0)) = c / phi0;
  return coeffs;
}

// Traces of all basis functions of both adjacent elements at the quadrature
// points of one edge. Jump/average conventions live here and are shared by
// assembly and diagnostics: [u] = (u0 - u1) * normal, {u} = (u0 + u1) / 2,
// with normal outward from side 0. For periodic pairs the side-1 trace is
// evaluated at the shifted physical points.
struct EdgeTraceTable {
  bool two_sided = false;
  double h_E = 0;
  Point normal;
  std::array<int, 2> tri{-1, -1};
  Vec weights;                  // physical measure: rule weights * h_E
  std::array<Mat, 2> values;    // n_pts x n_local
  std::array<Mat, 2> grad_x;    // physical gradients
  std::array<Mat, 2> grad_y;
};

inline EdgeTraceTable edge_traces(const DgSpace& space, int edge_id, const QuadratureRule& rule) {
  const Mesh& mesh = space.mesh();
  const Edge& edge = mesh.edges[edge_id];
  const int np = rule.size();
  const int nl = space.n_local();

  EdgeTraceTable table;
  table.two_sided = edge.two_sided();
  table.h_E = edge.length;
  table.normal = edge.normal;
  table.tri = {edge.adj[0].tri, edge.adj[1].tri};
  table.weights = rule.weights * edge.length;

  const Point a = mesh.vertices[edge.v[0]];
  const Point d = mesh.vertices[edge.v[1]] - a;
  const int n_sides = table.two_sided ? 2 : 1;
  for (int side = 0; side < n_sides; ++side) {
    const int t = table.tri[side];
    table.values[side].resize(np, nl);
    table.grad_x[side].resize(np, nl);
    table.grad_y[side].resize(np, nl);
    const Eigen::Matrix2d jit = mesh.jac_inv[t].transpose();
    for (int g = 0; g < np; ++g) {
      Point x = a + rule.points(g, 0) * d;
      if (side == 1) x += edge.shift;
      Point ref = mesh.phys_to_ref(t, x);
      double vals[10], gx[10], gy[10];
      space.basis().eval(ref.x(), ref.y(), vals);
      space.basis().eval_grad(ref.x(), ref.y(), gx, gy);
      for (int j = 0; j < nl; ++j) {
        table.values[side](g, j) = vals[j];
        Point pg = jit * Point(gx[j], gy[j]);
        table.grad_x[side](g, j) = pg.x();
        table.grad_y[side](g, j) = pg.y();
      }
    }
  }
  return table;
}

// trace of a coefficient field on one side of an edge at quadrature point g
inline double trace_value(const DgSpace& space, const EdgeTraceTable& table, const Vec& coeffs,
                          int side, int g) {
  const int nl = space.n_local();
  double u = 0;
  for (int j = 0; j < nl; ++j) u += coeffs(space.dof(table.tri[side], j)) * table.values[side](g, j);
  return u;
}

}  // namespace chdg
