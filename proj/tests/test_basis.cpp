#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "chdg/basis.hpp"
#include "chdg/quadrature.hpp"

using namespace chdg;

namespace {

// independent Gram matrix: high-order quadrature of phi_i * phi_j
Mat quadrature_gram(const BasisSet& basis) {
  QuadratureRule rule = triangle_quadrature(2 * basis.degree + 2);
  Mat phi = basis.tabulate_values(rule.points);
  Mat G = Mat::Zero(basis.size, basis.size);
  for (int g = 0; g < rule.size(); ++g)
    G += rule.weights(g) * phi.row(g).transpose() * phi.row(g);
  return G;
}

}  // namespace

TEST_CASE("basis sizes and exponent layout") {
  for (int q = 1; q <= 3; ++q) {
    BasisSet basis = reference_basis(q);
    CHECK(basis.degree == q);
    CHECK(basis.size == (q + 1) * (q + 2) / 2);
    REQUIRE(static_cast<int>(basis.exponents.size()) == basis.size);
    int max_total = 0;
    for (auto [i, j] : basis.exponents) {
      CHECK(i >= 0);
      CHECK(j >= 0);
      max_total = std::max(max_total, i + j);
    }
    CHECK(max_total == q);
  }
  CHECK_THROWS_AS(reference_basis(0), std::invalid_argument);
  CHECK_THROWS_AS(reference_basis(4), std::invalid_argument);
}

TEST_CASE("mode zero is the constant sqrt(2)") {
  // the reference triangle has area 1/2, so the L2-normalized constant is sqrt(2)
  BasisSet basis = reference_basis(2);
  double vals[10];
  basis.eval(0.3, 0.2, vals);
  CHECK(vals[0] == Catch::Approx(std::sqrt(2.0)).epsilon(1e-15));
  basis.eval(0.0, 0.9, vals);
  CHECK(vals[0] == Catch::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("basis is orthonormal under quadrature") {
  for (int q = 1; q <= 3; ++q) {
    BasisSet basis = reference_basis(q);
    Mat G = quadrature_gram(basis);
    INFO("q = " << q);
    CHECK((G - Mat::Identity(basis.size, basis.size)).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("basis spans all monomials of its degree") {
  // solving G c = m for each monomial m and comparing pointwise residuals;
  // with an orthonormal basis c_i is just the quadrature inner product
  for (int q = 1; q <= 3; ++q) {
    BasisSet basis = reference_basis(q);
    QuadratureRule rule = triangle_quadrature(2 * q + 2);
    Mat phi = basis.tabulate_values(rule.points);
    for (int i = 0; i + 0 <= q; ++i)
      for (int j = 0; i + j <= q; ++j) {
        Vec coeffs = Vec::Zero(basis.size);
        for (int g = 0; g < rule.size(); ++g) {
          double mono = std::pow(rule.points(g, 0), i) * std::pow(rule.points(g, 1), j);
          coeffs += rule.weights(g) * mono * phi.row(g).transpose();
        }
        // reconstruct at points not in the rule
        for (double x : {0.05, 0.4}) {
          for (double y : {0.1, 0.33}) {
            double vals[10];
            basis.eval(x, y, vals);
            double u = 0;
            for (int k = 0; k < basis.size; ++k) u += coeffs(k) * vals[k];
            INFO("q=" << q << " x^" << i << " y^" << j << " at (" << x << "," << y << ")");
            CHECK(u == Catch::Approx(std::pow(x, i) * std::pow(y, j)).margin(1e-13));
          }
        }
      }
  }
}

TEST_CASE("gradients match central finite differences") {
  const double h = 1e-6;
  std::mt19937 rng(123);
  std::uniform_real_distribution<double> unif(0.05, 0.4);
  for (int q = 1; q <= 3; ++q) {
    BasisSet basis = reference_basis(q);
    for (int trial = 0; trial < 20; ++trial) {
      double x = unif(rng), y = unif(rng);
      double gx[10], gy[10], vp[10], vm[10];
      basis.eval_grad(x, y, gx, gy);
      basis.eval(x + h, y, vp);
      basis.eval(x - h, y, vm);
      for (int k = 0; k < basis.size; ++k)
        CHECK(gx[k] == Catch::Approx((vp[k] - vm[k]) / (2 * h)).margin(1e-7));
      basis.eval(x, y + h, vp);
      basis.eval(x, y - h, vm);
      for (int k = 0; k < basis.size; ++k)
        CHECK(gy[k] == Catch::Approx((vp[k] - vm[k]) / (2 * h)).margin(1e-7));
    }
  }
}

TEST_CASE("tabulations agree with pointwise evaluation") {
  BasisSet basis = reference_basis(3);
  Mat pts(3, 2);
  pts << 0.1, 0.2, 0.0, 0.5, 0.7, 0.25;
  Mat v = basis.tabulate_values(pts);
  auto [gx, gy] = basis.tabulate_gradients(pts);
  for (int p = 0; p < 3; ++p) {
    double vals[10], dx[10], dy[10];
    basis.eval(pts(p, 0), pts(p, 1), vals);
    basis.eval_grad(pts(p, 0), pts(p, 1), dx, dy);
    for (int k = 0; k < basis.size; ++k) {
      CHECK(v(p, k) == vals[k]);
      CHECK(gx(p, k) == dx[k]);
      CHECK(gy(p, k) == dy[k]);
    }
  }
}
