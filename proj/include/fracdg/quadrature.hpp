// Quadrature rules: Gauss-Legendre on [0,1] (nodes by Newton iteration on the
// Legendre polynomial), Gauss-Lobatto point tables for the nodal fracture
// space, and triangle rules on the reference triangle (0,0),(1,0),(0,1) built
// by a Duffy collapse of a tensor Gauss grid.  Shifted Legendre polynomials
// provide the edge moment functionals of the staggered spaces.

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fracdg/geometry.hpp"

namespace fracdg {

struct QuadratureRule1D {
  std::vector<double> x, w;  // on [0,1], sum w = 1
  int n() const { return static_cast<int>(x.size()); }
};

/// Legendre polynomial P_n and derivative at t in [-1,1].
inline std::pair<double, double> legendre_pair(int n, double t) {
  double p0 = 1.0, p1 = t;
  if (n == 0) return {1.0, 0.0};
  for (int m = 1; m < n; ++m) {
    double p2 = ((2 * m + 1) * t * p1 - m * p0) / (m + 1);
    p0 = p1;
    p1 = p2;
  }
  double dp = n * (t * p1 - p0) / (t * t - 1.0);
  return {p1, dp};
}

/// n-point Gauss-Legendre rule mapped to [0,1]; exact for degree 2n-1.
inline QuadratureRule1D gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n < 1");
  QuadratureRule1D r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess, then Newton.
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      auto [p, dp] = legendre_pair(n, t);
      double dt = p / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    auto [p, dp] = legendre_pair(n, t);
    (void)p;
    r.x[n - 1 - i] = 0.5 * (1.0 + t);
    r.w[n - 1 - i] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
  return r;
}

/// 1D rule exact for polynomials of the given degree.
inline QuadratureRule1D edge_rule(int degree) { return gauss_legendre(degree / 2 + 1); }

/// Gauss-Lobatto points on [0,1] (endpoints included), n = 2..5.  These are
/// the nodes of the continuous fracture space, so conditioning stays mild for
/// the supported degrees.
inline std::vector<double> lobatto_points(int n) {
  switch (n) {
    case 2: return {0.0, 1.0};
    case 3: return {0.0, 0.5, 1.0};
    case 4: {
      double a = 1.0 / std::sqrt(5.0);
      return {0.0, 0.5 * (1.0 - a), 0.5 * (1.0 + a), 1.0};
    }
    case 5: {
      double a = std::sqrt(3.0 / 7.0);
      return {0.0, 0.5 * (1.0 - a), 0.5, 0.5 * (1.0 + a), 1.0};
    }
    default: throw std::invalid_argument("lobatto_points: supported n is 2..5");
  }
}

/// Shifted Legendre polynomial on [0,1]: L_0 = 1, L_1 = 2s-1, ...
inline double shifted_legendre(int m, double s) {
  double t = 2.0 * s - 1.0;
  double p0 = 1.0, p1 = t;
  if (m == 0) return 1.0;
  for (int j = 1; j < m; ++j) {
    double p2 = ((2 * j + 1) * t * p1 - j * p0) / (j + 1);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

struct TriangleRule {
  std::vector<Vec2> x;       // points on the reference triangle
  std::vector<double> w;     // sum w = 1/2
  int degree = 0;
  int n() const { return static_cast<int>(x.size()); }
};

/// Triangle rule exact for total degree `degree`.  Duffy map x = u,
/// y = v(1-u) with the extra factor (1-u) folded into the weights; the u
/// direction needs one degree more than requested.
inline TriangleRule triangle_rule(int degree) {
  int n = (degree + 3) / 2;
  QuadratureRule1D g = gauss_legendre(n);
  TriangleRule r;
  r.degree = degree;
  r.x.reserve(n * n);
  r.w.reserve(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double u = g.x[i], v = g.x[j];
      r.x.emplace_back(u, v * (1.0 - u));
      r.w.push_back(g.w[i] * g.w[j] * (1.0 - u));
    }
  return r;
}

/// Exact integral of x^a y^b over the reference triangle: a! b! / (a+b+2)!.
inline double reference_monomial_integral(int a, int b) {
  double v = 1.0;
  for (int i = 1; i <= b; ++i) v *= static_cast<double>(i) / (a + i);
  for (int i = a + b + 1; i <= a + b + 2; ++i) v /= i;
  return v;
}

/// Verify a triangle rule against closed-form monomial integrals and the 1D
/// rules against Legendre orthogonality.  Returns the worst absolute error.
inline double quadrature_check(int degree) {
  TriangleRule tr = triangle_rule(degree);
  double worst = 0.0;
  for (int a = 0; a + 0 <= degree; ++a)
    for (int b = 0; a + b <= degree; ++b) {
      double s = 0.0;
      for (int q = 0; q < tr.n(); ++q)
        s += tr.w[q] * std::pow(tr.x[q].x(), a) * std::pow(tr.x[q].y(), b);
      worst = std::max(worst, std::abs(s - reference_monomial_integral(a, b)));
    }
  QuadratureRule1D er = edge_rule(degree);
  for (int m = 0; 2 * m <= degree; ++m)
    for (int l = 0; l < m; ++l) {
      double s = 0.0;
      for (int q = 0; q < er.n(); ++q)
        s += er.w[q] * shifted_legendre(m, er.x[q]) * shifted_legendre(l, er.x[q]);
      worst = std::max(worst, std::abs(s));
    }
  return worst;
}

}  // namespace fracdg
