#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "chdg/quadrature.hpp"
#include "chdg/space.hpp"

using namespace chdg;

TEST_CASE("dof layout is element-major and sigma defaults to 3 q (q+1)") {
  Mesh mesh = build_rect_mesh({0, 1, 0, 1}, 2, 2, BcKind::neumann);
  for (int q = 1; q <= 3; ++q) {
    DgSpace space(mesh, q);
    CHECK(space.n_local() == (q + 1) * (q + 2) / 2);
    CHECK(space.n_dof() == space.n_local() * mesh.n_triangles());
    CHECK(space.dof(3, 2) == 3 * space.n_local() + 2);
    CHECK(space.sigma() == 3.0 * q * (q + 1));
  }
  DgSpace with_override(mesh, 2, 50.0);
  CHECK(with_override.sigma() == 50.0);
}

TEST_CASE("projection reproduces polynomials of the space's degree") {
  Mesh mesh = build_rect_mesh({-1, 1, 0, 2}, 3, 2, BcKind::neumann);
  auto poly = [](int q) {
    return [q](double x, double y) {
      double v = 1 + 2 * x - y;
      if (q >= 2) v += 0.5 * x * y - x * x;
      if (q >= 3) v += 0.25 * x * x * y - y * y * y;
      return v;
    };
  };
  for (int q = 1; q <= 3; ++q) {
    DgSpace space(mesh, q);
    Vec xi = project_l2(space, poly(q));
    for (int t = 0; t < space.n_tri(); ++t)
      for (Point ref : {Point(0.2, 0.3), Point(0.6, 0.1)}) {
        Point x = mesh.ref_to_phys(t, ref);
        INFO("q=" << q << " tri " << t);
        CHECK(eval_field(space, xi, t, ref) ==
              Catch::Approx(poly(q)(x.x(), x.y())).margin(1e-12));
      }
  }
}

TEST_CASE("projection converges for smooth transcendental data") {
  auto f = [](double x, double y) { return std::sin(3 * x) * std::cos(2 * y); };
  double prev = 0;
  for (int nx : {4, 8, 16}) {
    Mesh mesh = build_rect_mesh({0, 1, 0, 1}, nx, nx, BcKind::neumann);
    DgSpace space(mesh, 1);
    Vec xi = project_l2(space, f, 8);
    QuadratureRule rule = triangle_quadrature(10);
    double err2 = 0;
    for (int t = 0; t < space.n_tri(); ++t)
      for (int g = 0; g < rule.size(); ++g) {
        Point ref = rule.points.row(g).transpose();
        Point x = mesh.ref_to_phys(t, ref);
        double d = eval_field(space, xi, t, ref) - f(x.x(), x.y());
        err2 += rule.weights(g) * mesh.det_jac[t] * d * d;
      }
    double err = std::sqrt(err2);
    if (prev > 0) CHECK(err < 0.3 * prev);  // second order: factor 4 per halving
    prev = err;
  }
}

TEST_CASE("constant fields evaluate exactly") {
  Mesh mesh = build_rect_mesh({0, 2, 0, 1}, 2, 3, BcKind::periodic);
  DgSpace space(mesh, 2);
  Vec xi = constant_field(space, -0.37);
  for (int t = 0; t < space.n_tri(); ++t) {
    Point grad;
    CHECK(eval_field(space, xi, t, Point(0.3, 0.3), &grad) == Catch::Approx(-0.37).epsilon(1e-15));
    CHECK(grad.norm() < 1e-15);
  }
}

TEST_CASE("eval_field reports physical gradients") {
  Mesh mesh = build_rect_mesh({0, 1, -1, 1}, 3, 3, BcKind::neumann);
  DgSpace space(mesh, 1);
  Vec xi = project_l2(space, [](double x, double y) { return 3 * x - 2 * y + 1; });
  for (int t : {0, 5, 11}) {
    Point grad;
    eval_field(space, xi, t, Point(0.25, 0.25), &grad);
    CHECK(grad.x() == Catch::Approx(3.0).margin(1e-12));
    CHECK(grad.y() == Catch::Approx(-2.0).margin(1e-12));
  }
  Vec bad = Vec::Zero(3);
  CHECK_THROWS_AS(eval_field(space, bad, 0, Point(0.2, 0.2)), std::invalid_argument);
}

TEST_CASE("edge traces see a continuous field identically from both sides") {
  Mesh mesh = build_rect_mesh({0, 1, 0, 1}, 3, 3, BcKind::neumann);
  DgSpace space(mesh, 2);
  Vec xi = project_l2(space, [](double x, double y) { return x * x - 0.5 * x * y + 2 * y; });
  QuadratureRule rule = edge_quadrature(space.edge_quad_degree());
  for (int e = 0; e < static_cast<int>(mesh.edges.size()); ++e) {
    if (mesh.edges[e].kind != EdgeKind::interior) continue;
    EdgeTraceTable tr = edge_traces(space, e, rule);
    REQUIRE(tr.two_sided);
    CHECK(tr.weights.sum() == Catch::Approx(tr.h_E).epsilon(1e-14));
    for (int g = 0; g < rule.size(); ++g) {
      double u0 = trace_value(space, tr, xi, 0, g);
      double u1 = trace_value(space, tr, xi, 1, g);
      CHECK(u0 == Catch::Approx(u1).margin(1e-12));
      // gradients of the continuous quadratic also match across the edge
      for (int side = 0; side < 2; ++side) {
        double gx = 0, gy = 0;
        for (int j = 0; j < space.n_local(); ++j) {
          gx += xi(space.dof(tr.tri[side], j)) * tr.grad_x[side](g, j);
          gy += xi(space.dof(tr.tri[side], j)) * tr.grad_y[side](g, j);
        }
        Point a = mesh.vertices[mesh.edges[e].v[0]];
        Point d = mesh.vertices[mesh.edges[e].v[1]] - a;
        Point x = a + rule.points(g, 0) * d;
        CHECK(gx == Catch::Approx(2 * x.x() - 0.5 * x.y()).margin(1e-11));
        CHECK(gy == Catch::Approx(-0.5 * x.x() + 2).margin(1e-11));
      }
    }
  }
}

TEST_CASE("periodic traces wrap continuously and orient the jump") {
  Domain dom{0, 2, 0, 1};
  Mesh mesh = build_rect_mesh(dom, 4, 2, BcKind::periodic);
  DgSpace space(mesh, 2);
  const double kx = M_PI;  // period 2 in x: matches the domain width
  Vec periodic = project_l2(
      space, [&](double x, double y) { return std::cos(kx * x) * (1 + 0.5 * y); }, 10);
  Vec linear = project_l2(space, [](double x, double) { return x; });
  QuadratureRule rule = edge_quadrature(space.edge_quad_degree());
  int wrapped = 0;
  for (int e = 0; e < static_cast<int>(mesh.edges.size()); ++e) {
    if (mesh.edges[e].kind != EdgeKind::periodic_pair) continue;
    if (mesh.edges[e].shift.x() == 0.0) continue;  // keep the x-wrapping pairs
    ++wrapped;
    EdgeTraceTable tr = edge_traces(space, e, rule);
    for (int g = 0; g < rule.size(); ++g) {
      CHECK(trace_value(space, tr, periodic, 0, g) ==
            Catch::Approx(trace_value(space, tr, periodic, 1, g)).margin(1e-10));
      // master side sits on x = 0, far trace on x = width: [x] = 0 - width
      double jump = trace_value(space, tr, linear, 0, g) - trace_value(space, tr, linear, 1, g);
      CHECK(jump == Catch::Approx(-dom.width()).margin(1e-12));
    }
  }
  CHECK(wrapped == 2);
}
