#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "chdg/types.hpp"

namespace chdg {

enum class BcKind { neumann, periodic };

struct Domain {
  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }

  friend bool operator==(const Domain&, const Domain&) = default;
};

enum class EdgeKind { interior, boundary, periodic_pair };

struct EdgeAdjacency {
  int tri = -1;
  int local_edge = -1;
};

struct Edge {
  std::array<int, 2> v{-1, -1};   // endpoints, ordered along adj[0]'s orientation
  double length = 0;              // h_E
  Point normal;                   // unit, outward from adj[0]
  EdgeKind kind = EdgeKind::boundary;
  std::array<EdgeAdjacency, 2> adj;
  Point shift = Point::Zero();    // added to points when evaluating the adj[1] trace

  bool two_sided() const { return adj[1].tri >= 0; }
};

// Conforming triangle mesh of a rectangle. Immutable after construction.
struct Mesh {
  Domain domain;
  BcKind bc = BcKind::neumann;
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<Edge> edges;

  // affine map factors per triangle: x = v0 + J * ref
  std::vector<Eigen::Matrix2d> jac;
  std::vector<Eigen::Matrix2d> jac_inv;
  std::vector<double> det_jac;  // = 2 * area, positive
  std::vector<Point> base;      // v0

  int n_triangles() const { return static_cast<int>(triangles.size()); }

  Point ref_to_phys(int tri, const Point& ref) const { return base[tri] + jac[tri] * ref; }
  Point phys_to_ref(int tri, const Point& x) const { return jac_inv[tri] * (x - base[tri]); }
  double triangle_area(int tri) const { return 0.5 * det_jac[tri]; }

  double total_area() const {
    double a = 0;
    for (int t = 0; t < n_triangles(); ++t) a += triangle_area(t);
    return a;
  }
};

struct EdgeGeometry {
  double h_E;
  Point normal;
  std::array<int, 2> tris;  // second is -1 on boundary edges
  EdgeKind kind;
};

namespace detail {

inline void compute_geometry(Mesh& mesh) {
  const int n = mesh.n_triangles();
  mesh.jac.resize(n);
  mesh.jac_inv.resize(n);
  mesh.det_jac.resize(n);
  mesh.base.resize(n);
  for (int t = 0; t < n; ++t) {
    const auto& tri = mesh.triangles[t];
    const Point& a = mesh.vertices[tri[0]];
    Eigen::Matrix2d J;
    J.col(0) = mesh.vertices[tri[1]] - a;
    J.col(1) = mesh.vertices[tri[2]] - a;
    double det = J(0, 0) * J(1, 1) - J(0, 1) * J(1, 0);
    if (det <= 0)
      throw std::invalid_argument("mesh: triangle " + std::to_string(t) +
                                  " has non-positive area (vertices must be counterclockwise)");
    mesh.jac[t] = J;
    mesh.det_jac[t] = det;
    mesh.jac_inv[t] = J.inverse();
    mesh.base[t] = a;
  }
}

// local edge e of a triangle runs from vertex e to vertex (e+1)%3
inline void extract_edges(Mesh& mesh) {
  std::map<std::pair<int, int>, int> index;
  mesh.edges.clear();
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    for (int e = 0; e < 3; ++e) {
      int a = mesh.triangles[t][e];
      int b = mesh.triangles[t][(e + 1) % 3];
      auto key = std::minmax(a, b);
      auto it = index.find(key);
      if (it == index.end()) {
        Edge edge;
        edge.v = {a, b};
        edge.adj[0] = {t, e};
        edge.kind = EdgeKind::boundary;
        index.emplace(key, static_cast<int>(mesh.edges.size()));
        mesh.edges.push_back(edge);
      } else {
        Edge& edge = mesh.edges[it->second];
        if (edge.two_sided())
          throw std::invalid_argument("mesh: edge shared by more than two triangles");
        edge.adj[1] = {t, e};
        edge.kind = EdgeKind::interior;
      }
    }
  }
  for (Edge& edge : mesh.edges) {
    Point d = mesh.vertices[edge.v[1]] - mesh.vertices[edge.v[0]];
    edge.length = d.norm();
    // CCW triangles: rotating the directed edge by -90 degrees points outward
    edge.normal = Point(d.y(), -d.x()) / edge.length;
  }
}

// Match boundary edges on opposite faces of the rectangle and merge each
// pair into a single two-sided edge with a coordinate shift for the far trace.
inline void pair_periodic_edges(Mesh& mesh) {
  const Domain& dom = mesh.domain;
  const double tol = 1e-12 * std::max(dom.width(), dom.height());
  auto on = [&](double v, double face) { return std::abs(v - face) <= tol; };

  struct FaceEdge {
    int edge;
    double lo, hi;  // extent along the face
  };
  std::vector<FaceEdge> faces[4];  // left, right, bottom, top
  for (int e = 0; e < static_cast<int>(mesh.edges.size()); ++e) {
    const Edge& edge = mesh.edges[e];
    if (edge.kind != EdgeKind::boundary) continue;
    const Point& p = mesh.vertices[edge.v[0]];
    const Point& q = mesh.vertices[edge.v[1]];
    if (on(p.x(), dom.x_min) && on(q.x(), dom.x_min))
      faces[0].push_back({e, std::min(p.y(), q.y()), std::max(p.y(), q.y())});
    else if (on(p.x(), dom.x_max) && on(q.x(), dom.x_max))
      faces[1].push_back({e, std::min(p.y(), q.y()), std::max(p.y(), q.y())});
    else if (on(p.y(), dom.y_min) && on(q.y(), dom.y_min))
      faces[2].push_back({e, std::min(p.x(), q.x()), std::max(p.x(), q.x())});
    else if (on(p.y(), dom.y_max) && on(q.y(), dom.y_max))
      faces[3].push_back({e, std::min(p.x(), q.x()), std::max(p.x(), q.x())});
    else
      throw std::invalid_argument("mesh: boundary edge not on a domain face; cannot pair");
  }

  std::vector<bool> drop(mesh.edges.size(), false);
  auto pair_faces = [&](std::vector<FaceEdge>& a, std::vector<FaceEdge>& b, const Point& shift) {
    auto by_lo = [](const FaceEdge& x, const FaceEdge& y) { return x.lo < y.lo; };
    std::sort(a.begin(), a.end(), by_lo);
    std::sort(b.begin(), b.end(), by_lo);
    if (a.size() != b.size())
      throw std::invalid_argument("mesh: opposite faces have different edge counts");
    for (size_t i = 0; i < a.size(); ++i) {
      if (std::abs(a[i].lo - b[i].lo) > tol || std::abs(a[i].hi - b[i].hi) > tol)
        throw std::invalid_argument("mesh: periodic faces do not match up to tolerance");
      Edge& master = mesh.edges[a[i].edge];
      Edge& partner = mesh.edges[b[i].edge];
      master.adj[1] = partner.adj[0];
      master.kind = EdgeKind::periodic_pair;
      master.shift = shift;
      drop[b[i].edge] = true;
    }
  };
  pair_faces(faces[0], faces[1], Point(dom.width(), 0.0));   // left trace shifted right
  pair_faces(faces[2], faces[3], Point(0.0, dom.height()));  // bottom trace shifted up

  std::vector<Edge> kept;
  kept.reserve(mesh.edges.size());
  for (size_t e = 0; e < mesh.edges.size(); ++e)
    if (!drop[e]) kept.push_back(mesh.edges[e]);
  mesh.edges = std::move(kept);
}

}  // namespace detail

// Assemble a Mesh from raw vertices/triangles: edge extraction, classification,
// geometric factors, periodic pairing. Triangles must be counterclockwise.
inline Mesh build_mesh(const Domain& domain, BcKind bc, std::vector<Point> vertices,
                       std::vector<std::array<int, 3>> triangles) {
  Mesh mesh;
  mesh.domain = domain;
  mesh.bc = bc;
  mesh.vertices = std::move(vertices);
  mesh.triangles = std::move(triangles);
  detail::compute_geometry(mesh);
  detail::extract_edges(mesh);
  if (bc == BcKind::periodic) detail::pair_periodic_edges(mesh);
  return mesh;
}

// Uniform nx-by-ny grid of the rectangle, each cell split into two triangles
// along a diagonal that alternates with cell parity, giving 2*nx*ny triangles.
// The alternating pattern keeps the discrete dispersion orientation-free; a
// fixed diagonal biases near-marginal modes and can tip metastable states.
inline Mesh build_rect_mesh(const Domain& domain, int nx, int ny, BcKind bc) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("build_rect_mesh: need nx >= 1 and ny >= 1");
  if (!(domain.x_max > domain.x_min) || !(domain.y_max > domain.y_min))
    throw std::invalid_argument("build_rect_mesh: empty domain");

  std::vector<Point> vertices;
  vertices.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      double x = domain.x_min + domain.width() * (static_cast<double>(i) / nx);
      double y = domain.y_min + domain.height() * (static_cast<double>(j) / ny);
      if (i == nx) x = domain.x_max;
      if (j == ny) y = domain.y_max;
      vertices.emplace_back(x, y);
    }
  }
  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(2 * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      int v00 = vid(i, j), v10 = vid(i + 1, j);
      int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      if ((i + j) % 2 == 0) {
        triangles.push_back({v00, v10, v11});
        triangles.push_back({v00, v11, v01});
      } else {
        triangles.push_back({v00, v10, v01});
        triangles.push_back({v10, v11, v01});
      }
    }
  }
  return build_mesh(domain, bc, std::move(vertices), std::move(triangles));
}

inline EdgeGeometry edge_geometry(const Mesh& mesh, int edge_id) {
  if (edge_id < 0 || edge_id >= static_cast<int>(mesh.edges.size()))
    throw std::invalid_argument("edge_geometry: edge id " + std::to_string(edge_id) +
                                " out of range");
  const Edge& e = mesh.edges[edge_id];
  return {e.length, e.normal, {e.adj[0].tri, e.adj[1].tri}, e.kind};
}

}  // namespace chdg
