#pragma once

#include <array>
#include <stdexcept>
#include <utility>
#include <vector>

#include "chdg/types.hpp"

namespace chdg {

namespace detail {

inline long double factorial_ld(int n) {
  long double r = 1.0L;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

// exact integral of x^i y^j over the unit triangle: i! j! / (i+j+2)!
inline long double triangle_monomial_integral(int i, int j) {
  return factorial_ld(i) * factorial_ld(j) / factorial_ld(i + j + 2);
}

}  // namespace detail

// Modal basis on the reference triangle {x,y >= 0, x+y <= 1}, orthonormal in L2:
// monomials up to degree q, orthonormalized through a Cholesky factorization of
// their exact Gram matrix (done in long double; the result is orthonormal to
// ~1e-15 for q <= 3). Mode 0 is the constant sqrt(2).
struct BasisSet {
  int degree = 0;
  int size = 0;
  std::vector<std::array<int, 2>> exponents;  // monomial (i,j) per column
  Mat coeff;                                  // size x size, row = basis over monomials

  // values of all basis functions at a reference point
  void eval(double x, double y, double* vals) const {
    std::array<double, 10> mono;
    for (int m = 0; m < size; ++m) mono[m] = ipow(x, exponents[m][0]) * ipow(y, exponents[m][1]);
    for (int i = 0; i < size; ++i) {
      double s = 0.0;
      for (int m = 0; m <= i; ++m) s += coeff(i, m) * mono[m];
      vals[i] = s;
    }
  }

  // reference gradients of all basis functions
  void eval_grad(double x, double y, double* gx, double* gy) const {
    std::array<double, 10> dmx, dmy;
    for (int m = 0; m < size; ++m) {
      int i = exponents[m][0], j = exponents[m][1];
      dmx[m] = i > 0 ? i * ipow(x, i - 1) * ipow(y, j) : 0.0;
      dmy[m] = j > 0 ? j * ipow(x, i) * ipow(y, j - 1) : 0.0;
    }
    for (int i = 0; i < size; ++i) {
      double sx = 0.0, sy = 0.0;
      for (int m = 0; m <= i; ++m) {
        sx += coeff(i, m) * dmx[m];
        sy += coeff(i, m) * dmy[m];
      }
      gx[i] = sx;
      gy[i] = sy;
    }
  }

  // values at many points, one row per point (storage is column-major, so
  // eval goes through a contiguous scratch row)
  Mat tabulate_values(const Mat& pts) const {
    Mat v(pts.rows(), size);
    std::array<double, 10> row;
    for (Eigen::Index p = 0; p < pts.rows(); ++p) {
      eval(pts(p, 0), pts(p, 1), row.data());
      for (int i = 0; i < size; ++i) v(p, i) = row[i];
    }
    return v;
  }

  // reference gradients at many points
  std::pair<Mat, Mat> tabulate_gradients(const Mat& pts) const {
    Mat gx(pts.rows(), size), gy(pts.rows(), size);
    std::array<double, 10> rx, ry;
    for (Eigen::Index p = 0; p < pts.rows(); ++p) {
      eval_grad(pts(p, 0), pts(p, 1), rx.data(), ry.data());
      for (int i = 0; i < size; ++i) {
        gx(p, i) = rx[i];
        gy(p, i) = ry[i];
      }
    }
    return {gx, gy};
  }

 private:
  static double ipow(double x, int n) {
    double r = 1.0;
    for (int k = 0; k < n; ++k) r *= x;
    return r;
  }
};

inline BasisSet reference_basis(int q) {
  if (q < 1 || q > 3)
    throw std::invalid_argument("reference_basis: polynomial degree must be 1, 2 or 3");
  BasisSet basis;
  basis.degree = q;
  basis.size = (q + 1) * (q + 2) / 2;
  for (int d = 0; d <= q; ++d)
    for (int i = d; i >= 0; --i) basis.exponents.push_back({i, d - i});

  const int n = basis.size;
  std::vector<long double> G(n * n), L(n * n, 0.0L);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      G[a * n + b] = detail::triangle_monomial_integral(
          basis.exponents[a][0] + basis.exponents[b][0],
          basis.exponents[a][1] + basis.exponents[b][1]);

  // Cholesky G = L L^T
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      long double s = G[i * n + j];
      for (int k = 0; k < j; ++k) s -= L[i * n + k] * L[j * n + k];
      if (i == j) {
        L[i * n + i] = std::sqrt(s);
      } else {
        L[i * n + j] = s / L[j * n + j];
      }
    }
  }
  // rows of L^{-1} are the orthonormal basis coefficients
  std::vector<long double> Linv(n * n, 0.0L);
  for (int i = 0; i < n; ++i) {
    Linv[i * n + i] = 1.0L / L[i * n + i];
    for (int j = i - 1; j >= 0; --j) {
      long double s = 0.0L;
      for (int k = j + 1; k <= i; ++k) s += L[k * n + j] * Linv[i * n + k];
      Linv[i * n + j] = -s / L[j * n + j];
    }
  }
  basis.coeff = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) basis.coeff(i, j) = static_cast<double>(Linv[i * n + j]);
  return basis;
}

}  // namespace chdg
