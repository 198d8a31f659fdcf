#include <catch2/catch_amalgamated.hpp>
#include <algorithm>
#include <cmath>
#include <set>

#include "chdg/mesh.hpp"

using namespace chdg;

namespace {

int count_kind(const Mesh& mesh, EdgeKind kind) {
  int n = 0;
  for (const Edge& e : mesh.edges)
    if (e.kind == kind) ++n;
  return n;
}

Point centroid(const Mesh& mesh, int tri) {
  const auto& t = mesh.triangles[tri];
  return (mesh.vertices[t[0]] + mesh.vertices[t[1]] + mesh.vertices[t[2]]) / 3.0;
}

std::set<int> vertex_set(const Mesh& mesh, int tri) {
  const auto& t = mesh.triangles[tri];
  return {t[0], t[1], t[2]};
}

}  // namespace

TEST_CASE("rectangle mesh has the expected counts and area") {
  for (auto [nx, ny] : {std::pair{1, 1}, {2, 3}, {4, 4}, {5, 2}}) {
    Domain dom{-1.0, 2.0, 0.5, 1.5};
    Mesh mesh = build_rect_mesh(dom, nx, ny, BcKind::neumann);
    INFO("nx=" << nx << " ny=" << ny);
    CHECK(static_cast<int>(mesh.vertices.size()) == (nx + 1) * (ny + 1));
    CHECK(mesh.n_triangles() == 2 * nx * ny);
    CHECK(mesh.total_area() == Catch::Approx(dom.area()).epsilon(1e-14));
    // Euler: E = V + F - 2 with the outer face gives 3 nx ny + nx + ny edges
    CHECK(static_cast<int>(mesh.edges.size()) == 3 * nx * ny + nx + ny);
    CHECK(count_kind(mesh, EdgeKind::boundary) == 2 * (nx + ny));
    CHECK(count_kind(mesh, EdgeKind::interior) == 3 * nx * ny - nx - ny);
    for (double dj : mesh.det_jac) CHECK(dj > 0);  // counterclockwise everywhere
  }
}

TEST_CASE("cell diagonals alternate with cell parity") {
  // cell (i,j) is split along v00-v11 when i+j is even, else along v10-v01;
  // a fixed diagonal direction would bias the discrete dispersion
  const int nx = 3, ny = 2;
  Mesh mesh = build_rect_mesh({0, 3, 0, 2}, nx, ny, BcKind::neumann);
  auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int cell = 2 * (j * nx + i);
      std::set<int> t0 = vertex_set(mesh, cell);
      std::set<int> t1 = vertex_set(mesh, cell + 1);
      INFO("cell (" << i << "," << j << ")");
      if ((i + j) % 2 == 0) {
        CHECK(t0 == std::set<int>{vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
        CHECK(t1 == std::set<int>{vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
      } else {
        CHECK(t0 == std::set<int>{vid(i, j), vid(i + 1, j), vid(i, j + 1)});
        CHECK(t1 == std::set<int>{vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
      }
    }
}

TEST_CASE("edge normals are unit length and point away from side 0") {
  Mesh mesh = build_rect_mesh({0, 1, 0, 1}, 3, 3, BcKind::neumann);
  for (const Edge& e : mesh.edges) {
    CHECK(e.normal.norm() == Catch::Approx(1.0).epsilon(1e-14));
    Point mid = 0.5 * (mesh.vertices[e.v[0]] + mesh.vertices[e.v[1]]);
    CHECK(e.normal.dot(mid - centroid(mesh, e.adj[0].tri)) > 0);
    CHECK(e.length == Catch::Approx((mesh.vertices[e.v[1]] - mesh.vertices[e.v[0]]).norm()));
  }
}

TEST_CASE("edge lengths on a uniform square grid are h or h*sqrt(2)") {
  const int n = 4;
  Mesh mesh = build_rect_mesh({0, 1, 0, 1}, n, n, BcKind::neumann);
  const double h = 1.0 / n;
  for (const Edge& e : mesh.edges) {
    bool axis = std::abs(e.length - h) < 1e-14;
    bool diag = std::abs(e.length - h * std::sqrt(2.0)) < 1e-14;
    CHECK((axis || diag));
  }
}

TEST_CASE("affine maps round-trip and carry the triangle geometry") {
  Mesh mesh = build_rect_mesh({-2, 1, 0, 2}, 3, 2, BcKind::neumann);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    CHECK(mesh.triangle_area(t) == Catch::Approx(0.5 * mesh.det_jac[t]));
    // corners map to the reference corners
    const auto& tri = mesh.triangles[t];
    CHECK((mesh.phys_to_ref(t, mesh.vertices[tri[0]]) - Point(0, 0)).norm() < 1e-13);
    CHECK((mesh.phys_to_ref(t, mesh.vertices[tri[1]]) - Point(1, 0)).norm() < 1e-13);
    CHECK((mesh.phys_to_ref(t, mesh.vertices[tri[2]]) - Point(0, 1)).norm() < 1e-13);
    Point ref(0.25, 0.3);
    CHECK((mesh.phys_to_ref(t, mesh.ref_to_phys(t, ref)) - ref).norm() < 1e-13);
  }
}

TEST_CASE("periodic pairing merges opposite boundary edges") {
  for (auto [nx, ny] : {std::pair{1, 1}, {2, 3}, {4, 4}}) {
    Domain dom{0.0, 2.0, -1.0, 1.0};
    Mesh mesh = build_rect_mesh(dom, nx, ny, BcKind::periodic);
    INFO("nx=" << nx << " ny=" << ny);
    CHECK(count_kind(mesh, EdgeKind::boundary) == 0);
    CHECK(count_kind(mesh, EdgeKind::periodic_pair) == nx + ny);
    CHECK(static_cast<int>(mesh.edges.size()) == 3 * nx * ny);
    for (const Edge& e : mesh.edges) {
      CHECK(e.two_sided());
      if (e.kind == EdgeKind::periodic_pair) {
        bool x_pair = (e.shift - Point(dom.width(), 0)).norm() < 1e-14;
        bool y_pair = (e.shift - Point(0, dom.height())).norm() < 1e-14;
        CHECK((x_pair || y_pair));
        // the shifted edge endpoints land on the partner triangle's side
        const int t1 = e.adj[1].tri;
        Point a = mesh.vertices[e.v[0]] + e.shift;
        Point b = mesh.vertices[e.v[1]] + e.shift;
        Point ra = mesh.phys_to_ref(t1, a);
        Point rb = mesh.phys_to_ref(t1, b);
        for (const Point& r : {ra, rb}) {
          CHECK(r.x() > -1e-12);
          CHECK(r.y() > -1e-12);
          CHECK(r.x() + r.y() < 1 + 1e-12);
        }
      } else {
        CHECK(e.shift.norm() == 0.0);
      }
    }
  }
}

TEST_CASE("edge_geometry mirrors the edge table") {
  Mesh mesh = build_rect_mesh({0, 1, 0, 1}, 2, 2, BcKind::periodic);
  for (int e = 0; e < static_cast<int>(mesh.edges.size()); ++e) {
    EdgeGeometry g = edge_geometry(mesh, e);
    CHECK(g.h_E == mesh.edges[e].length);
    CHECK(g.normal == mesh.edges[e].normal);
    CHECK(g.tris[0] == mesh.edges[e].adj[0].tri);
    CHECK(g.tris[1] == mesh.edges[e].adj[1].tri);
    CHECK(g.kind == mesh.edges[e].kind);
  }
  CHECK_THROWS_AS(edge_geometry(mesh, -1), std::invalid_argument);
  CHECK_THROWS_AS(edge_geometry(mesh, 1000), std::invalid_argument);
}

TEST_CASE("invalid meshes are rejected") {
  CHECK_THROWS_AS(build_rect_mesh({0, 1, 0, 1}, 0, 2, BcKind::neumann), std::invalid_argument);
  CHECK_THROWS_AS(build_rect_mesh({1, 1, 0, 1}, 2, 2, BcKind::neumann), std::invalid_argument);
  CHECK_THROWS_AS(build_rect_mesh({0, 1, 2, 1}, 2, 2, BcKind::neumann), std::invalid_argument);

  // clockwise triangle
  std::vector<Point> verts = {{0, 0}, {1, 0}, {0, 1}};
  std::vector<std::array<int, 3>> tris = {{0, 2, 1}};
  CHECK_THROWS_AS(build_mesh({0, 1, 0, 1}, BcKind::neumann, verts, tris), std::invalid_argument);
}
