#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chdg/model.hpp"
#include "chdg/quadrature.hpp"
#include "chdg/space.hpp"
#include "chdg/types.hpp"

namespace chdg {

// Diffusion coefficient of the SIPG form: a constant (eps^2, or 1) or the
// mobility evaluated through a lagged DG state. On edges the state-dependent
// coefficient is the mean of the two trace evaluations.
struct CoefficientField {
  bool is_constant = true;
  double kappa = 1.0;
  MobilitySpec mobility;
  const Vec* state = nullptr;  // borrowed; must outlive the assembly call

  static CoefficientField constant(double kappa) { return {true, kappa, {}, nullptr}; }

  static CoefficientField lagged_mobility(const MobilitySpec& mobility, const Vec& state) {
    return {false, 0.0, mobility, &state};
  }
};

// block-diagonal mass matrix; det(J_K) * identity with the orthonormal basis
inline SparseMat assemble_mass(const DgSpace& space) {
  const int nl = space.n_local();
  std::vector<Triplet> trip;
  trip.reserve(space.n_dof());
  for (int t = 0; t < space.n_tri(); ++t) {
    double dj = space.mesh().det_jac[t];
    for (int j = 0; j < nl; ++j) trip.emplace_back(space.dof(t, j), space.dof(t, j), dj);
  }
  SparseMat M(space.n_dof(), space.n_dof());
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

// SIPG bilinear form: volume diffusion, two symmetric consistency terms over
// interior (and periodic-paired) edges, and the sigma*kappa/h_E jump penalty.
inline SparseMat assemble_stiffness(const DgSpace& space, const CoefficientField& coeff) {
  const Mesh& mesh = space.mesh();
  const int nl = space.n_local();
  const double sigma = space.sigma();
  std::vector<Triplet> trip;
  trip.reserve(static_cast<size_t>(space.n_dof()) * nl * 4);

  // volume: sum_K int kappa grad(w) . grad(v)
  QuadratureRule vol_rule = triangle_quadrature(space.linear_quad_degree());
  auto [gx_ref, gy_ref] = space.basis().tabulate_gradients(vol_rule.points);
  Mat phi_vol = space.basis().tabulate_values(vol_rule.points);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const Eigen::Matrix2d jit = mesh.jac_inv[t].transpose();
    const double dj = mesh.det_jac[t];
    Mat gx(vol_rule.size(), nl), gy(vol_rule.size(), nl);
    for (int g = 0; g < vol_rule.size(); ++g)
      for (int j = 0; j < nl; ++j) {
        Point pg = jit * Point(gx_ref(g, j), gy_ref(g, j));
        gx(g, j) = pg.x();
        gy(g, j) = pg.y();
      }
    Mat local = Mat::Zero(nl, nl);
    for (int g = 0; g < vol_rule.size(); ++g) {
      double kappa = coeff.kappa;
      if (!coeff.is_constant) {
        double u = 0;
        for (int j = 0; j < nl; ++j) u += (*coeff.state)(space.dof(t, j)) * phi_vol(g, j);
        kappa = mobility_eval(coeff.mobility, u);
      }
      if (!std::isfinite(kappa))
        throw std::runtime_error("assemble_stiffness: non-finite coefficient on triangle " +
                                 std::to_string(t));
      double w = vol_rule.weights(g) * dj * kappa;
      for (int i = 0; i < nl; ++i)
        for (int j = 0; j < nl; ++j) local(i, j) += w * (gx(g, i) * gx(g, j) + gy(g, i) * gy(g, j));
    }
    for (int i = 0; i < nl; ++i)
      for (int j = 0; j < nl; ++j) trip.emplace_back(space.dof(t, i), space.dof(t, j), local(i, j));
  }

  // edges: consistency and penalty terms, interior/periodic only
  QuadratureRule edge_rule = edge_quadrature(space.edge_quad_degree());
  for (int e = 0; e < static_cast<int>(mesh.edges.size()); ++e) {
    if (mesh.edges[e].kind == EdgeKind::boundary) continue;
    EdgeTraceTable tr = edge_traces(space, e, edge_rule);
    const Point n = tr.normal;
    // sign of each side in the jump: [u] = (u0 - u1) n
    const double sgn[2] = {1.0, -1.0};
    Mat local[2][2];
    for (int sa = 0; sa < 2; ++sa)
      for (int sb = 0; sb < 2; ++sb) local[sa][sb] = Mat::Zero(nl, nl);

    for (int g = 0; g < edge_rule.size(); ++g) {
      double kappa = coeff.kappa;
      if (!coeff.is_constant) {
        double mu0 = mobility_eval(coeff.mobility, trace_value(space, tr, *coeff.state, 0, g));
        double mu1 = mobility_eval(coeff.mobility, trace_value(space, tr, *coeff.state, 1, g));
        kappa = 0.5 * (mu0 + mu1);
      }
      if (!std::isfinite(kappa))
        throw std::runtime_error("assemble_stiffness: non-finite coefficient on edge " +
                                 std::to_string(e));
      const double w = tr.weights(g);
      const double pen = sigma * kappa / tr.h_E;
      for (int si = 0; si < 2; ++si) {
        for (int sj = 0; sj < 2; ++sj) {
          for (int i = 0; i < nl; ++i) {
            const double vi = tr.values[si](g, i);
            const double dni = tr.grad_x[si](g, i) * n.x() + tr.grad_y[si](g, i) * n.y();
            for (int j = 0; j < nl; ++j) {
              const double vj = tr.values[sj](g, j);
              const double dnj = tr.grad_x[sj](g, j) * n.x() + tr.grad_y[sj](g, j) * n.y();
              double val = 0.0;
              val -= kappa * 0.5 * dnj * sgn[si] * vi;  // -{kappa grad w}.[v]
              val -= kappa * 0.5 * dni * sgn[sj] * vj;  // -{kappa grad v}.[w]
              val += pen * sgn[sj] * vj * sgn[si] * vi;
              local[si][sj](i, j) += w * val;
            }
          }
        }
      }
    }
    for (int si = 0; si < 2; ++si)
      for (int sj = 0; sj < 2; ++sj)
        for (int i = 0; i < nl; ++i)
          for (int j = 0; j < nl; ++j)
            trip.emplace_back(space.dof(tr.tri[si], i), space.dof(tr.tri[sj], j),
                              local[si][sj](i, j));
  }

  SparseMat A(space.n_dof(), space.n_dof());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

// b_i(xi) = (f(u_h), phi_i)
inline Vec assemble_nonlinear(const DgSpace& space, const Potential& potential, const Vec& xi) {
  if (xi.size() != space.n_dof())
    throw std::invalid_argument("assemble_nonlinear: coefficient vector length mismatch");
  const int nl = space.n_local();
  QuadratureRule rule = triangle_quadrature(potential.nonlinear_quad_degree(space.degree()));
  Mat phi = space.basis().tabulate_values(rule.points);
  Vec b = Vec::Zero(space.n_dof());
  for (int t = 0; t < space.n_tri(); ++t) {
    const double dj = space.mesh().det_jac[t];
    for (int g = 0; g < rule.size(); ++g) {
      double u = 0;
      for (int j = 0; j < nl; ++j) u += xi(space.dof(t, j)) * phi(g, j);
      double fw = potential.eval(u).f * rule.weights(g) * dj;
      for (int i = 0; i < nl; ++i) b(space.dof(t, i)) += fw * phi(g, i);
    }
  }
  return b;
}

// AVF tau-average of the nonlinear vector without its Jacobian (cheap
// residual-only evaluations, e.g. line-search trials):
//   b_avg = sum_g w_g b(tau_g xi_next + (1-tau_g) xi_n)
inline Vec assemble_avf_b(const DgSpace& space, const Potential& potential, const Vec& xi_n,
                          const Vec& xi_next, int tau_points) {
  if (xi_n.size() != space.n_dof() || xi_next.size() != space.n_dof())
    throw std::invalid_argument("assemble_avf_b: coefficient vector length mismatch");
  if (tau_points < 2 || tau_points > 5)
    throw std::invalid_argument("assemble_avf_b: tau_points must be in 2..5");
  const int nl = space.n_local();
  auto [tau, tau_w] = gauss_legendre_01(tau_points);
  QuadratureRule rule = triangle_quadrature(potential.nonlinear_quad_degree(space.degree()));
  Mat phi = space.basis().tabulate_values(rule.points);
  Vec b = Vec::Zero(space.n_dof());
  for (int t = 0; t < space.n_tri(); ++t) {
    const double dj = space.mesh().det_jac[t];
    for (int g = 0; g < rule.size(); ++g) {
      double u_n = 0, u_next = 0;
      for (int j = 0; j < nl; ++j) {
        u_n += xi_n(space.dof(t, j)) * phi(g, j);
        u_next += xi_next(space.dof(t, j)) * phi(g, j);
      }
      double f_avg = 0;
      for (int k = 0; k < tau_points; ++k)
        f_avg += tau_w(k) * potential.eval(tau(k) * u_next + (1.0 - tau(k)) * u_n).f;
      // same product order as assemble_avf_nonlinear so both give one b
      const double wq = rule.weights(g) * dj;
      for (int i = 0; i < nl; ++i) b(space.dof(t, i)) += wq * f_avg * phi(g, i);
    }
  }
  return b;
}

// AVF tau-average of the nonlinear vector and its Jacobian w.r.t. xi_next:
//   b_avg = sum_g w_g b(tau_g xi_next + (1-tau_g) xi_n)
//   J_b   = sum_g w_g tau_g b'(tau_g xi_next + (1-tau_g) xi_n)
// J_b is block diagonal (f'(u_h) couples dofs within an element only).
inline std::pair<Vec, SparseMat> assemble_avf_nonlinear(const DgSpace& space,
                                                        const Potential& potential,
                                                        const Vec& xi_n, const Vec& xi_next,
                                                        int tau_points) {
  if (xi_n.size() != space.n_dof() || xi_next.size() != space.n_dof())
    throw std::invalid_argument("assemble_avf_nonlinear: coefficient vector length mismatch");
  if (tau_points < 2 || tau_points > 5)
    throw std::invalid_argument("assemble_avf_nonlinear: tau_points must be in 2..5");
  const int nl = space.n_local();
  auto [tau, tau_w] = gauss_legendre_01(tau_points);
  QuadratureRule rule = triangle_quadrature(potential.nonlinear_quad_degree(space.degree()));
  Mat phi = space.basis().tabulate_values(rule.points);

  Vec b = Vec::Zero(space.n_dof());
  std::vector<Triplet> trip;
  trip.reserve(static_cast<size_t>(space.n_tri()) * nl * nl);
  Mat block(nl, nl);
  for (int t = 0; t < space.n_tri(); ++t) {
    const double dj = space.mesh().det_jac[t];
    block.setZero();
    for (int g = 0; g < rule.size(); ++g) {
      double u_n = 0, u_next = 0;
      for (int j = 0; j < nl; ++j) {
        u_n += xi_n(space.dof(t, j)) * phi(g, j);
        u_next += xi_next(space.dof(t, j)) * phi(g, j);
      }
      double f_avg = 0, fp_avg = 0;
      for (int k = 0; k < tau_points; ++k) {
        PotentialValue pv = potential.eval(tau(k) * u_next + (1.0 - tau(k)) * u_n);
        f_avg += tau_w(k) * pv.f;
        fp_avg += tau_w(k) * tau(k) * pv.fp;
      }
      const double wq = rule.weights(g) * dj;
      for (int i = 0; i < nl; ++i) {
        b(space.dof(t, i)) += wq * f_avg * phi(g, i);
        for (int j = 0; j < nl; ++j) block(i, j) += wq * fp_avg * phi(g, i) * phi(g, j);
      }
    }
    for (int i = 0; i < nl; ++i)
      for (int j = 0; j < nl; ++j) trip.emplace_back(space.dof(t, i), space.dof(t, j), block(i, j));
  }
  SparseMat Jb(space.n_dof(), space.n_dof());
  Jb.setFromTriplets(trip.begin(), trip.end());
  return {std::move(b), std::move(Jb)};
}

// load_i = (g(.,.,t), phi_i) for the manufactured source of a preset
inline Vec assemble_load(const DgSpace& space, const ProblemPreset& preset, double epsilon,
                         double t) {
  if (!preset.has_exact)
    throw std::invalid_argument("assemble_load: preset '" + preset.name + "' has no source term");
  const int nl = space.n_local();
  QuadratureRule rule = triangle_quadrature(space.load_quad_degree());
  Mat phi = space.basis().tabulate_values(rule.points);
  Vec load = Vec::Zero(space.n_dof());
  for (int k = 0; k < space.n_tri(); ++k) {
    const double dj = space.mesh().det_jac[k];
    for (int g = 0; g < rule.size(); ++g) {
      Point x = space.mesh().ref_to_phys(k, rule.points.row(g).transpose());
      double gw = preset.source_fn(x.x(), x.y(), t, epsilon) * rule.weights(g) * dj;
      for (int i = 0; i < nl; ++i) load(space.dof(k, i)) += gw * phi(g, i);
    }
  }
  return load;
}

}  // namespace chdg
