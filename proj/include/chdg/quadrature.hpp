#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "chdg/types.hpp"

namespace chdg {

// Rules beyond this polynomial degree are not provided.
inline constexpr int kMaxQuadDegree = 50;

// Quadrature on a reference element. For the unit triangle {x,y >= 0, x+y <= 1}
// points has two columns; for the unit edge [0,1] it has one.
struct QuadratureRule {
  Mat points;
  Vec weights;
  int exact_degree = 0;

  int size() const { return static_cast<int>(weights.size()); }
};

// Gauss-Legendre nodes and weights on [0,1], nodes ascending; weights sum
// to 1. n-point rule integrates polynomials up to degree 2n-1 exactly.
// Newton in extended precision so nodes and weights land within 1-2 ulps.
inline std::pair<Vec, Vec> gauss_legendre_01(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_01: need n >= 1");
  Vec x(n), w(n);
  for (int i = 0; i < n; ++i) {
    // i-th root of P_n on [-1,1], Chebyshev initial guess + Newton
    long double t = std::cos(M_PI * (i + 0.75L) / (n + 0.5L));
    long double dp = 0.0L;
    for (int it = 0; it < 100; ++it) {
      long double p0 = 1.0L, p1 = t;
      for (int k = 2; k <= n; ++k) {
        long double p2 = ((2.0L * k - 1.0L) * t * p1 - (k - 1.0L) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0L);
      long double dt = p1 / dp;
      t -= dt;
      if (std::abs(static_cast<double>(dt)) < 1e-17) break;
    }
    // the Chebyshev guesses enumerate roots in descending order
    x(n - 1 - i) = static_cast<double>(0.5L * (1.0L + t));
    w(n - 1 - i) = static_cast<double>(1.0L / ((1.0L - t * t) * dp * dp));
  }
  return {x, w};
}

inline QuadratureRule edge_quadrature(int degree) {
  if (degree < 0) throw std::invalid_argument("edge_quadrature: degree must be >= 0");
  if (degree > kMaxQuadDegree)
    throw std::invalid_argument("edge_quadrature: degree " + std::to_string(degree) +
                                " beyond maximum supported degree " +
                                std::to_string(kMaxQuadDegree));
  int n = degree / 2 + 1;
  auto [x, w] = gauss_legendre_01(n);
  QuadratureRule rule;
  rule.points = x;
  rule.weights = w;
  rule.exact_degree = 2 * n - 1;
  return rule;
}

// Collapsed (Duffy) tensor-product rule: x = a(1-b), y = b over (a,b) in [0,1]^2
// picks up the extra (1-b) Jacobian, so the b-direction needs one more point.
// All weights positive; weights sum to the reference area 1/2.
inline QuadratureRule triangle_quadrature(int degree) {
  if (degree < 0) throw std::invalid_argument("triangle_quadrature: degree must be >= 0");
  if (degree > kMaxQuadDegree)
    throw std::invalid_argument("triangle_quadrature: degree " + std::to_string(degree) +
                                " beyond maximum supported degree " +
                                std::to_string(kMaxQuadDegree));
  int na = (degree + 2) / 2;
  int nb = (degree + 3) / 2;
  auto [xa, wa] = gauss_legendre_01(na);
  auto [xb, wb] = gauss_legendre_01(nb);
  QuadratureRule rule;
  rule.points.resize(na * nb, 2);
  rule.weights.resize(na * nb);
  int k = 0;
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < nb; ++j, ++k) {
      double a = xa(i), b = xb(j);
      rule.points(k, 0) = a * (1.0 - b);
      rule.points(k, 1) = b;
      rule.weights(k) = wa(i) * wb(j) * (1.0 - b);
    }
  }
  rule.exact_degree = degree;
  return rule;
}

}  // namespace chdg
