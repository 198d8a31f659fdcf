#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "chdg/quadrature.hpp"

using namespace chdg;

namespace {

// int_0^1 x^k
double segment_monomial(int k) { return 1.0 / (k + 1); }

// int over the unit triangle of x^i y^j = i! j! / (i+j+2)!
double triangle_monomial(int i, int j) {
  long double v = 1.0L;
  // i! j! / (i+j+2)! computed as a product of ratios to stay in range
  for (int k = 1; k <= i + j + 2; ++k) v /= k;
  for (int k = 1; k <= i; ++k) v *= k;
  for (int k = 1; k <= j; ++k) v *= k;
  return static_cast<double>(v);
}

}  // namespace

TEST_CASE("segment rule matches frozen classical nodes") {
  auto [x2, w2] = gauss_legendre_01(2);
  CHECK(x2(0) == Catch::Approx(0.21132486540518711775).epsilon(1e-15));
  CHECK(x2(1) == Catch::Approx(0.78867513459481288225).epsilon(1e-15));
  CHECK(w2(0) == Catch::Approx(0.5).margin(1e-16));
  CHECK(w2(1) == Catch::Approx(0.5).margin(1e-16));

  auto [x3, w3] = gauss_legendre_01(3);
  CHECK(x3(0) == Catch::Approx(0.11270166537925831148).epsilon(1e-15));
  CHECK(x3(1) == Catch::Approx(0.5).margin(1e-15));
  CHECK(x3(2) == Catch::Approx(0.88729833462074168852).epsilon(1e-15));
  CHECK(w3(0) == Catch::Approx(5.0 / 18.0).epsilon(1e-15));
  CHECK(w3(1) == Catch::Approx(4.0 / 9.0).epsilon(1e-15));
  CHECK(w3(2) == Catch::Approx(5.0 / 18.0).epsilon(1e-15));
}

TEST_CASE("segment rule is exact to degree 2n-1 and symmetric") {
  for (int n = 1; n <= 12; ++n) {
    auto [x, w] = gauss_legendre_01(n);
    REQUIRE(x.size() == n);
    CHECK(w.sum() == Catch::Approx(1.0).epsilon(1e-14));
    for (int i = 0; i < n; ++i) {
      CHECK(x(i) > 0.0);
      CHECK(x(i) < 1.0);
      CHECK(w(i) > 0.0);
      CHECK(x(i) == Catch::Approx(1.0 - x(n - 1 - i)).margin(1e-14));
    }
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0;
      for (int i = 0; i < n; ++i) s += w(i) * std::pow(x(i), k);
      CHECK(s == Catch::Approx(segment_monomial(k)).epsilon(1e-13));
    }
  }
}

TEST_CASE("edge rule covers the requested degree") {
  for (int d = 0; d <= 25; ++d) {
    QuadratureRule r = edge_quadrature(d);
    REQUIRE(r.exact_degree >= d);
    for (int k = 0; k <= d; ++k) {
      double s = 0;
      for (int g = 0; g < r.size(); ++g) s += r.weights(g) * std::pow(r.points(g, 0), k);
      CHECK(s == Catch::Approx(segment_monomial(k)).epsilon(1e-13));
    }
  }
}

TEST_CASE("triangle rule integrates all monomials up to the requested degree") {
  for (int d = 0; d <= 20; ++d) {
    QuadratureRule r = triangle_quadrature(d);
    CHECK(r.weights.sum() == Catch::Approx(0.5).epsilon(1e-14));
    CHECK(r.weights.minCoeff() > 0.0);
    for (int g = 0; g < r.size(); ++g) {
      double a = r.points(g, 0), b = r.points(g, 1);
      CHECK(a >= 0.0);
      CHECK(b >= 0.0);
      CHECK(a + b <= 1.0 + 1e-14);
    }
    for (int i = 0; i + 0 <= d; ++i)
      for (int j = 0; i + j <= d; ++j) {
        double s = 0;
        for (int g = 0; g < r.size(); ++g)
          s += r.weights(g) * std::pow(r.points(g, 0), i) * std::pow(r.points(g, 1), j);
        INFO("degree " << d << " monomial x^" << i << " y^" << j);
        CHECK(s == Catch::Approx(triangle_monomial(i, j)).epsilon(1e-12));
      }
  }
}

TEST_CASE("rules reject degrees beyond the supported cap") {
  CHECK_THROWS_AS(triangle_quadrature(kMaxQuadDegree + 1), std::invalid_argument);
  CHECK_THROWS_AS(edge_quadrature(kMaxQuadDegree + 1), std::invalid_argument);
  CHECK_THROWS_AS(triangle_quadrature(-1), std::invalid_argument);
  CHECK_THROWS_AS(edge_quadrature(-1), std::invalid_argument);
  CHECK_THROWS_AS(gauss_legendre_01(0), std::invalid_argument);
}
