// Built-in flow configurations: two manufactured bulk/fracture solutions on
// the unit square with a vertical fracture at x = 1/2 (a smooth one and a
// boundary-layer one), and the quarter five-spot pattern with a diagonal
// fracture.  Manufactured sources are hardcoded closed forms derived from
// the exact fields; consistency is enforced by an interface-condition check
// at construction and a finite-difference oracle in check_case().

#pragma once

#include <numbers>
#include <random>

#include "fracdg/system.hpp"

namespace fracdg {

struct CaseDefinition {
  std::string name;
  Coefficients co;
  bool has_exact = false;
  ExactSolution exact;  // valid when has_exact
  Sources sources;
  BoundaryData bdata;
  std::function<BoundaryTag(const Vec2&)> btag;  // classify a boundary edge by midpoint
  Vec2 frac_a = Vec2::Zero(), frac_b = Vec2::Zero();  // fracture endpoints, chain direction a -> b
};

namespace detail {

constexpr double pi = std::numbers::pi;

/// Scaled residuals of the two interface conditions for the exact fields,
/// sampled along the fracture; both must vanish for consistent cases.
inline std::pair<double, double> interface_residuals(const CaseDefinition& c, int n_points) {
  Vec2 t = (c.frac_b - c.frac_a).normalized();
  Vec2 n(t.y(), -t.x());
  double len = (c.frac_b - c.frac_a).norm();
  double r_eta = 0.0, r_alpha = 0.0;
  for (int i = 0; i < n_points; ++i) {
    Vec2 x = c.frac_a + ((i + 0.5) / n_points * len) * t;
    double un1 = c.exact.u(x, 1).dot(n), un2 = c.exact.u(x, 2).dot(n);
    double p1 = c.exact.p(x, 1), p2 = c.exact.p(x, 2);
    double lhs1 = c.co.eta() * 0.5 * (un1 + un2), rhs1 = p1 - p2;
    double lhs2 = c.co.alpha() * (un1 - un2), rhs2 = 0.5 * (p1 + p2) - c.exact.p_gamma(x);
    r_eta = std::max(r_eta, std::abs(lhs1 - rhs1) / std::max({1.0, std::abs(lhs1), std::abs(rhs1)}));
    r_alpha = std::max(r_alpha, std::abs(lhs2 - rhs2) / std::max({1.0, std::abs(lhs2), std::abs(rhs2)}));
  }
  return {r_eta, r_alpha};
}

inline void require_consistent(const CaseDefinition& c) {
  if (!c.has_exact) return;
  auto [re, ra] = interface_residuals(c, 20);
  if (re > 1e-12 || ra > 1e-12)
    throw std::logic_error("case " + c.name + ": interface conditions violated by the exact fields");
}

}  // namespace detail

/// Smooth manufactured solution; the anisotropic variant raises K_xx from
/// 0.5 to 50 while the exact pressure stays fixed.
inline CaseDefinition case_ex1(bool anisotropic) {
  using detail::pi;
  CaseDefinition c;
  c.name = anisotropic ? "ex1-aniso" : "ex1-iso";
  c.co.kappa_n = anisotropic ? 1.0 : 0.01;
  c.co.kappa_star = 100.0;
  c.co.ell = 0.01;
  c.co.xi = 0.75;
  const double Kxx = c.co.kappa_n / (2.0 * c.co.ell);
  c.co.K1 = c.co.K2 = Vec2(Kxx, 1.0).asDiagonal();
  const double A = std::cos(2.0) + std::sin(2.0);

  c.has_exact = true;
  c.exact.p = [](const Vec2& x, int sub) {
    return (sub == 1 ? std::sin(4.0 * x.x()) : std::cos(4.0 * x.x())) * std::cos(pi * x.y());
  };
  c.exact.u = [Kxx](const Vec2& x, int sub) {
    double cy = std::cos(pi * x.y()), sy = std::sin(pi * x.y());
    if (sub == 1) return Vec2(-4.0 * Kxx * std::cos(4.0 * x.x()) * cy, pi * std::sin(4.0 * x.x()) * sy);
    return Vec2(4.0 * Kxx * std::sin(4.0 * x.x()) * cy, pi * std::cos(4.0 * x.x()) * sy);
  };
  c.exact.p_gamma = [A](const Vec2& x) { return 0.75 * A * std::cos(pi * x.y()); };
  c.exact.dpG_ds = [A](const Vec2& x) { return -0.75 * A * pi * std::sin(pi * x.y()); };

  c.sources.f = [Kxx, p = c.exact.p](const Vec2& x, int sub) { return (16.0 * Kxx + pi * pi) * p(x, sub); };
  c.sources.ell_f_gamma = [A, Kxx](const Vec2& x) {
    return (0.75 * pi * pi + 4.0 * Kxx) * A * std::cos(pi * x.y());
  };

  c.bdata.p0 = c.exact.p;
  c.bdata.g_n = [](const Vec2&) { return 0.0; };
  c.bdata.g_gamma = c.exact.p_gamma;
  c.btag = [](const Vec2&) { return BoundaryTag::dirichlet; };
  c.frac_a = Vec2(0.5, 0.0);
  c.frac_b = Vec2(0.5, 1.0);
  detail::require_consistent(c);
  return c;
}

/// Boundary-layer manufactured solution (exp(10y) profile) with the
/// isotropic coefficient set of case_ex1.
inline CaseDefinition case_ex3() {
  using detail::pi;
  CaseDefinition c = case_ex1(false);
  c.name = "ex3";
  const double Kxx = c.co.K1(0, 0);  // 0.5
  const double A = std::cos(2.0) + std::sin(2.0);

  c.exact.p = [](const Vec2& x, int sub) {
    return (sub == 1 ? std::sin(4.0 * x.x()) : std::cos(4.0 * x.x())) * std::exp(10.0 * x.y()) *
           std::sin(pi * x.y());
  };
  c.exact.u = [Kxx](const Vec2& x, int sub) {
    double ey = std::exp(10.0 * x.y());
    double sy = std::sin(pi * x.y()), cy = std::cos(pi * x.y());
    double gy = ey * (10.0 * sy + pi * cy);  // d/dy of exp(10y) sin(pi y)
    if (sub == 1) return Vec2(-4.0 * Kxx * std::cos(4.0 * x.x()) * ey * sy, -std::sin(4.0 * x.x()) * gy);
    return Vec2(4.0 * Kxx * std::sin(4.0 * x.x()) * ey * sy, -std::cos(4.0 * x.x()) * gy);
  };
  c.exact.p_gamma = [A](const Vec2& x) {
    return 0.75 * A * std::exp(10.0 * x.y()) * std::sin(pi * x.y());
  };
  c.exact.dpG_ds = [A](const Vec2& x) {
    double ey = std::exp(10.0 * x.y());
    return 0.75 * A * ey * (10.0 * std::sin(pi * x.y()) + pi * std::cos(pi * x.y()));
  };

  c.sources.f = [Kxx, p = c.exact.p](const Vec2& x, int sub) {
    double ey = std::exp(10.0 * x.y());
    double sy = std::sin(pi * x.y()), cy = std::cos(pi * x.y());
    double ddy = ey * ((100.0 - pi * pi) * sy + 20.0 * pi * cy);  // d2/dy2 of exp(10y) sin(pi y)
    double trig = sub == 1 ? std::sin(4.0 * x.x()) : std::cos(4.0 * x.x());
    return 16.0 * Kxx * p(x, sub) - trig * ddy;
  };
  c.sources.ell_f_gamma = [A](const Vec2& x) {
    double ey = std::exp(10.0 * x.y());
    double sy = std::sin(pi * x.y()), cy = std::cos(pi * x.y());
    double ddy = ey * ((100.0 - pi * pi) * sy + 20.0 * pi * cy);
    return -0.75 * A * ddy + 2.0 * A * ey * sy;  // -K_G pG'' - [u.n]
  };

  c.bdata.p0 = c.exact.p;
  c.bdata.g_gamma = c.exact.p_gamma;
  detail::require_consistent(c);
  return c;
}

/// Quarter five-spot: injection near (0,0), production near (1,1), diagonal
/// fracture x + y = 1, no-flow on the lower/left sides, zero pressure on the
/// upper/right sides.  No exact solution.
inline CaseDefinition case_fivespot(bool impermeable) {
  CaseDefinition c;
  c.name = impermeable ? "fivespot-impermeable" : "fivespot-permeable";
  c.co.kappa_n = impermeable ? 0.01 : 1.0;
  c.co.kappa_star = impermeable ? 1.0 : 100.0;
  c.co.ell = 0.01;
  c.co.xi = 0.75;
  c.co.K1 = c.co.K2 = Eigen::Matrix2d::Identity();
  c.has_exact = false;
  c.sources.f = [](const Vec2& x, int) {
    double r0 = std::hypot(x.x(), x.y());
    double r1 = std::hypot(x.x() - 1.0, x.y() - 1.0);
    return 10.1 * (std::tanh(200.0 * (0.2 - r0)) - std::tanh(200.0 * (0.2 - r1)));
  };
  c.sources.ell_f_gamma = [](const Vec2&) { return 0.0; };
  c.bdata.p0 = [](const Vec2&, int) { return 0.0; };
  c.bdata.g_n = [](const Vec2&) { return 0.0; };
  c.bdata.g_gamma = [](const Vec2&) { return 0.0; };
  c.btag = [](const Vec2& m) {
    return (m.x() < 1e-9 || m.y() < 1e-9) ? BoundaryTag::neumann : BoundaryTag::dirichlet;
  };
  c.frac_a = Vec2(1.0, 0.0);
  c.frac_b = Vec2(0.0, 1.0);
  return c;
}

inline CaseDefinition make_case(const std::string& name) {
  if (name == "ex1-iso") return case_ex1(false);
  if (name == "ex1-aniso") return case_ex1(true);
  if (name == "ex3") return case_ex3();
  if (name == "fivespot-permeable") return case_fivespot(false);
  if (name == "fivespot-impermeable") return case_fivespot(true);
  throw std::invalid_argument("unknown case '" + name +
                              "' (known: ex1-iso, ex1-aniso, ex3, fivespot-permeable, fivespot-impermeable)");
}

struct CaseCheck {
  bool has_exact = false;
  double interface_eta = 0.0;    // scaled residual of the jump condition
  double interface_alpha = 0.0;  // scaled residual of the average condition
  double grad_fd = 0.0;          // FD gradient of p vs -K^{-1} u, scaled
  double div_fd = 0.0;           // FD divergence of u vs f, scaled
  double gamma_fd = 0.0;         // FD tangential derivative of p_G vs dpG_ds, scaled
};

/// Cross-validate the hardcoded closed forms: interface conditions on the
/// fracture and central finite differences (step 1e-6) against the hardcoded
/// derivatives at random interior points, normalized by the sampled field
/// scale.
inline CaseCheck check_case(const CaseDefinition& c, int n_interface = 20, int n_random = 50,
                            std::uint64_t seed = 1234) {
  CaseCheck out;
  out.has_exact = c.has_exact;
  if (!c.has_exact) return out;
  auto [re, ra] = detail::interface_residuals(c, n_interface);
  out.interface_eta = re;
  out.interface_alpha = ra;

  LineRef line{c.frac_a, c.frac_b};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.02, 0.98);
  const double h = 1e-6;
  std::vector<std::pair<Vec2, int>> pts;
  while (pts.size() < static_cast<std::size_t>(2 * n_random)) {
    Vec2 x(U(rng), U(rng));
    double d = line.signed_dist(x);
    if (std::abs(d) < 0.02) continue;
    pts.emplace_back(x, d > 0.0 ? 1 : 2);
  }

  double grad_err = 0.0, grad_scale = 1.0, div_err = 0.0, div_scale = 1.0;
  for (auto& [x, sub] : pts) {
    Vec2 ex(h, 0.0), ey(0.0, h);
    Vec2 fd_grad((c.exact.p(x + ex, sub) - c.exact.p(x - ex, sub)) / (2.0 * h),
                 (c.exact.p(x + ey, sub) - c.exact.p(x - ey, sub)) / (2.0 * h));
    Vec2 ref = -(c.co.K(sub).inverse() * c.exact.u(x, sub));
    grad_err = std::max(grad_err, (fd_grad - ref).lpNorm<Eigen::Infinity>());
    grad_scale = std::max(grad_scale, ref.lpNorm<Eigen::Infinity>());
    double fd_div = (c.exact.u(x + ex, sub).x() - c.exact.u(x - ex, sub).x()) / (2.0 * h) +
                    (c.exact.u(x + ey, sub).y() - c.exact.u(x - ey, sub).y()) / (2.0 * h);
    double f = c.sources.f(x, sub);
    div_err = std::max(div_err, std::abs(fd_div - f));
    div_scale = std::max(div_scale, std::abs(f));
  }
  out.grad_fd = grad_err / grad_scale;
  out.div_fd = div_err / div_scale;

  double g_err = 0.0, g_scale = 1.0;
  double len = (c.frac_b - c.frac_a).norm();
  for (int i = 1; i < n_interface; ++i) {
    double s = i * len / n_interface;
    Vec2 x = c.frac_a + s * line.t;
    double fd = (c.exact.p_gamma(x + h * line.t) - c.exact.p_gamma(x - h * line.t)) / (2.0 * h);
    double ref = c.exact.dpG_ds(x);
    g_err = std::max(g_err, std::abs(fd - ref));
    g_scale = std::max(g_scale, std::abs(ref));
  }
  out.gamma_fd = g_err / g_scale;
  return out;
}

}  // namespace fracdg
