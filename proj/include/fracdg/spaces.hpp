// Discrete spaces of the staggered method, all of local degree k >= 1.
//
// Pressure space: per triangle dim P^k(tau) dofs split into
//   - k+1 moments against shifted Legendre polynomials on the base edge,
//     shared across primal edges (this pins the trace, so functions are
//     continuous over primal edges), one-sided on fracture edges;
//   - k(k+1)/2 interior moments against an orthonormal basis of P^{k-1}(tau).
// Flux space: per triangle dim P^k(tau)^2 dofs:
//   - k+1 normal moments per dual edge, shared inside the cell (continuous
//     normal trace over dual edges);
//   - k(k+1) interior moments against P^{k-1}(tau)^2.
// Fracture space: continuous piecewise P^k on the fracture chain with
// Gauss-Lobatto nodes; endpoint nodes carry Dirichlet data.
//
// Each triangle gets an L2-orthonormal polynomial frame built from monomials
// in affine reference coordinates (Gram factorization).  The affine map
// absorbs the shape anisotropy, so the Gram matrix is the same well-
// conditioned reference matrix for every triangle and the construction does
// not degrade on needle- or sliver-shaped triangles from small-edge meshes.

#pragma once

#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <tuple>

#include "fracdg/quadrature.hpp"
#include "fracdg/staggered.hpp"

namespace fracdg {

inline int poly_dim(int k) { return (k + 1) * (k + 2) / 2; }

/// Exponents of the monomial basis of P^k ordered by total degree.
inline std::vector<std::array<int, 2>> monomial_exponents(int k) {
  std::vector<std::array<int, 2>> e;
  for (int d = 0; d <= k; ++d)
    for (int j = 0; j <= d; ++j) e.push_back({d - j, j});
  return e;
}

struct LocalBasis {
  int k = 1, N = 3;
  Vec2 v0 = Vec2::Zero();                              // affine origin (first vertex)
  Eigen::Matrix2d Jinv = Eigen::Matrix2d::Identity();  // physical -> reference coordinates

  Eigen::MatrixXd F;   // frame coefficients: phi_i = sum_j F(i,j) m_j
  Eigen::MatrixXd Lp;  // pressure: local dof values -> frame coefficients
  Eigen::MatrixXd Lv;  // flux: local dof values -> frame coefficients (x block then y block)
  double cond_p = 0.0, cond_v = 0.0;

  Eigen::MatrixXd monomials(const std::vector<Vec2>& pts) const {
    auto ex = monomial_exponents(k);
    Eigen::MatrixXd M(N, pts.size());
    for (std::size_t q = 0; q < pts.size(); ++q) {
      Vec2 r = Jinv * (pts[q] - v0);
      for (int i = 0; i < N; ++i) M(i, q) = std::pow(r.x(), ex[i][0]) * std::pow(r.y(), ex[i][1]);
    }
    return M;
  }

  /// Frame values at the given points, N x n.
  Eigen::MatrixXd frame_values(const std::vector<Vec2>& pts) const { return F * monomials(pts); }

  /// Frame gradients at the given points: pair of N x n matrices (d/dx, d/dy).
  std::pair<Eigen::MatrixXd, Eigen::MatrixXd> frame_gradients(const std::vector<Vec2>& pts) const {
    auto ex = monomial_exponents(k);
    Eigen::MatrixXd Gx(N, pts.size()), Gy(N, pts.size());
    for (std::size_t q = 0; q < pts.size(); ++q) {
      Vec2 rc = Jinv * (pts[q] - v0);
      double x = rc.x(), y = rc.y();
      for (int i = 0; i < N; ++i) {
        int p = ex[i][0], r = ex[i][1];
        double gx = p == 0 ? 0.0 : p * std::pow(x, p - 1) * std::pow(y, r);
        double gy = r == 0 ? 0.0 : r * std::pow(x, p) * std::pow(y, r - 1);
        Gx(i, q) = gx * Jinv(0, 0) + gy * Jinv(1, 0);
        Gy(i, q) = gx * Jinv(0, 1) + gy * Jinv(1, 1);
      }
    }
    return {F * Gx, F * Gy};
  }
};

/// 1D Lagrange basis on Gauss-Lobatto nodes of [0,1], for the fracture space.
struct Lobatto1D {
  std::vector<double> x;

  explicit Lobatto1D(int k) : x(lobatto_points(k + 1)) {}

  double eval(int j, double s) const {
    double v = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (static_cast<int>(i) != j) v *= (s - x[i]) / (x[j] - x[i]);
    return v;
  }

  double deriv(int j, double s) const {
    double v = 0.0;
    for (std::size_t m = 0; m < x.size(); ++m) {
      if (static_cast<int>(m) == j) continue;
      double t = 1.0 / (x[j] - x[m]);
      for (std::size_t i = 0; i < x.size(); ++i)
        if (static_cast<int>(i) != j && i != m) t *= (s - x[i]) / (x[j] - x[i]);
      v += t;
    }
    return v;
  }
};

struct DofLayout {
  const StaggeredMesh* mesh = nullptr;
  int k = 1;
  int N = 3, Nkm1 = 1;  // dim P^k, dim P^{k-1}

  int np = 0, nv = 0, ng = 0;  // pressure, flux, fracture node counts

  // Raw contiguous block offsets (before the optional permutation).
  std::vector<int> edge_p0;   // per edge id: SD1 block start, or -1
  std::vector<int> frac_p0;   // per edge id: side-1 block start (side 2 at +k+1), or -1
  std::vector<int> tri_p0;    // per triangle: interior pressure block
  std::vector<int> dual_v0;   // per edge id: dual-edge flux block, or -1
  std::vector<int> tri_v0;    // per triangle: interior flux block (x moments then y)

  // Debug permutations of the global numbering (identity by default).
  std::vector<int> perm_p, perm_v, perm_g;

  // Gather maps and local bases per triangle.
  std::vector<std::vector<int>> ploc2glob;  // size N
  std::vector<std::vector<int>> vloc2glob;  // size 2N
  std::vector<LocalBasis> basis;

  // Fracture 1D mesh: chain element e has nodes elem_node(e, 0..k),
  // consecutive elements share endpoint nodes.
  int n_gamma_elems = 0;
  Lobatto1D lob{1};

  // Quadrature rules shared by assembly and interpolation.
  TriangleRule tri_asm, tri_err;
  QuadratureRule1D edge_asm, edge_err;

  int p_edge_dof(int e, int m) const { return perm_p[edge_p0[e] + m]; }
  int p_frac_dof(int e, int side, int m) const { return perm_p[frac_p0[e] + side * (k + 1) + m]; }
  int p_tri_dof(int t, int i) const { return perm_p[tri_p0[t] + i]; }
  int v_dual_dof(int e, int m) const { return perm_v[dual_v0[e] + m]; }
  int v_tri_dof(int t, int comp, int i) const { return perm_v[tri_v0[t] + comp * Nkm1 + i]; }
  int g_node(int elem, int n) const { return perm_g[elem * k + n]; }

  /// Global fracture node arclength.
  double g_node_s(int elem, int n) const {
    const auto& sm = *mesh;
    int e = sm.fracture_chain_edges[elem];
    return sm.fracture_s0[elem] + lob.x[n] * sm.edges[e].len;
  }

  bool gamma_boundary_node(int node_raw) const { return node_raw == 0 || node_raw == n_gamma_elems * k; }

  /// Copy with randomly permuted global numbering; solution fields must be
  /// invariant under this (used by tests only).
  DofLayout permuted(std::uint64_t seed) const;
};

namespace detail {

inline std::vector<Vec2> map_to_triangle(const StaggeredMesh& sm, const StagTri& t, const TriangleRule& r) {
  const Vec2 &a = sm.pts[t.v[0]], &b = sm.pts[t.v[1]], &c = sm.pts[t.v[2]];
  std::vector<Vec2> out(r.n());
  for (int q = 0; q < r.n(); ++q) out[q] = a + r.x[q].x() * (b - a) + r.x[q].y() * (c - a);
  return out;
}

inline std::vector<Vec2> map_to_edge(const StaggeredMesh& sm, const StagEdge& e, const QuadratureRule1D& r) {
  std::vector<Vec2> out(r.n());
  for (int q = 0; q < r.n(); ++q) out[q] = sm.pts[e.a] + r.x[q] * (sm.pts[e.b] - sm.pts[e.a]);
  return out;
}

inline LocalBasis build_local_basis(const StaggeredMesh& sm, int ti, int k, const TriangleRule& gram_rule,
                                    const QuadratureRule1D& edge_rule_) {
  const StagTri& t = sm.tris[ti];
  LocalBasis lb;
  lb.k = k;
  lb.N = poly_dim(k);
  lb.v0 = sm.pts[t.v[0]];
  {
    const Vec2 e1 = sm.pts[t.v[1]] - lb.v0, e2 = sm.pts[t.v[2]] - lb.v0;
    const double det = e1.x() * e2.y() - e1.y() * e2.x();  // = +-2 area, nonzero
    lb.Jinv << e2.y() / det, -e2.x() / det, -e1.y() / det, e1.x() / det;
  }

  // Orthonormal frame from the Gram matrix of reference-coordinate monomials.
  std::vector<Vec2> qp = map_to_triangle(sm, t, gram_rule);
  std::vector<double> qw(gram_rule.n());
  for (int q = 0; q < gram_rule.n(); ++q) qw[q] = gram_rule.w[q] * 2.0 * t.area;
  lb.F = Eigen::MatrixXd::Identity(lb.N, lb.N);
  Eigen::MatrixXd Mon = lb.monomials(qp);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(lb.N, lb.N);
  for (int q = 0; q < gram_rule.n(); ++q) G += qw[q] * Mon.col(q) * Mon.col(q).transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("build_layout: Gram factorization failed on triangle " + std::to_string(ti));
  lb.F = llt.matrixL().solve(Eigen::MatrixXd::Identity(lb.N, lb.N));

  const int Nkm1 = poly_dim(k - 1);
  const int ne = k + 1;

  // Pressure dof matrix: base edge moments then interior frame moments.
  const StagEdge& be = sm.edges[t.base];
  std::vector<Vec2> ep = map_to_edge(sm, be, edge_rule_);
  Eigen::MatrixXd Phi_e = lb.frame_values(ep);  // N x q
  Eigen::MatrixXd Dp = Eigen::MatrixXd::Zero(lb.N, lb.N);
  for (int m = 0; m < ne; ++m)
    for (int q = 0; q < edge_rule_.n(); ++q) {
      double w = edge_rule_.w[q] * be.len * shifted_legendre(m, edge_rule_.x[q]);
      Dp.row(m) += w * Phi_e.col(q).transpose();
    }
  for (int i = 0; i < Nkm1; ++i) Dp(ne + i, i) = 1.0;  // orthonormality of the frame
  Eigen::PartialPivLU<Eigen::MatrixXd> lup(Dp);
  lb.Lp = lup.solve(Eigen::MatrixXd::Identity(lb.N, lb.N));
  lb.cond_p = Dp.cwiseAbs().rowwise().sum().maxCoeff() * lb.Lp.cwiseAbs().rowwise().sum().maxCoeff();
  if (!(lb.Lp.allFinite()) || (Dp * lb.Lp - Eigen::MatrixXd::Identity(lb.N, lb.N)).cwiseAbs().maxCoeff() > 1e-6)
    throw std::runtime_error("build_layout: pressure dofs not unisolvent on triangle " + std::to_string(ti));

  // Flux dof matrix: normal moments on the two dual edges, then interior
  // component moments.
  Eigen::MatrixXd Dv = Eigen::MatrixXd::Zero(2 * lb.N, 2 * lb.N);
  for (int j = 0; j < 2; ++j) {
    const StagEdge& de = sm.edges[t.dual[j]];
    std::vector<Vec2> dp = map_to_edge(sm, de, edge_rule_);
    Eigen::MatrixXd Phi_d = lb.frame_values(dp);
    for (int m = 0; m < ne; ++m)
      for (int q = 0; q < edge_rule_.n(); ++q) {
        double w = edge_rule_.w[q] * de.len * shifted_legendre(m, edge_rule_.x[q]);
        Dv.row(j * ne + m).head(lb.N) += w * de.n.x() * Phi_d.col(q).transpose();
        Dv.row(j * ne + m).tail(lb.N) += w * de.n.y() * Phi_d.col(q).transpose();
      }
  }
  for (int i = 0; i < Nkm1; ++i) {
    Dv(2 * ne + i, i) = 1.0;
    Dv(2 * ne + Nkm1 + i, lb.N + i) = 1.0;
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> luv(Dv);
  lb.Lv = luv.solve(Eigen::MatrixXd::Identity(2 * lb.N, 2 * lb.N));
  lb.cond_v = Dv.cwiseAbs().rowwise().sum().maxCoeff() * lb.Lv.cwiseAbs().rowwise().sum().maxCoeff();
  if (!(lb.Lv.allFinite()) || (Dv * lb.Lv - Eigen::MatrixXd::Identity(2 * lb.N, 2 * lb.N)).cwiseAbs().maxCoeff() > 1e-6)
    throw std::runtime_error("build_layout: flux dofs not unisolvent on triangle " + std::to_string(ti));
  return lb;
}

}  // namespace detail

inline DofLayout build_layout(const StaggeredMesh& sm, int k) {
  if (k < 1 || k > 4) throw std::invalid_argument("build_layout: supported degrees are 1..4");
  DofLayout L;
  L.mesh = &sm;
  L.k = k;
  L.N = poly_dim(k);
  L.Nkm1 = poly_dim(k - 1);
  L.lob = Lobatto1D(k);
  L.tri_asm = triangle_rule(2 * k + 2);
  L.tri_err = triangle_rule(2 * k + 4);
  L.edge_asm = edge_rule(2 * k + 3);
  L.edge_err = edge_rule(2 * k + 4);

  const int ne = k + 1;
  L.edge_p0.assign(sm.edges.size(), -1);
  L.frac_p0.assign(sm.edges.size(), -1);
  L.dual_v0.assign(sm.edges.size(), -1);

  int p = 0;
  for (std::size_t e = 0; e < sm.edges.size(); ++e) {
    if (sm.edges[e].cls == EdgeClass::primal_interior || sm.edges[e].cls == EdgeClass::primal_boundary) {
      L.edge_p0[e] = p;
      p += ne;
    }
  }
  for (std::size_t e = 0; e < sm.edges.size(); ++e)
    if (sm.edges[e].cls == EdgeClass::fracture) {
      L.frac_p0[e] = p;
      p += 2 * ne;
    }
  L.tri_p0.resize(sm.tris.size());
  for (std::size_t t = 0; t < sm.tris.size(); ++t) {
    L.tri_p0[t] = p;
    p += L.Nkm1;
  }
  L.np = p;

  int v = 0;
  for (std::size_t e = 0; e < sm.edges.size(); ++e)
    if (sm.edges[e].cls == EdgeClass::dual) {
      L.dual_v0[e] = v;
      v += ne;
    }
  L.tri_v0.resize(sm.tris.size());
  for (std::size_t t = 0; t < sm.tris.size(); ++t) {
    L.tri_v0[t] = v;
    v += 2 * L.Nkm1;
  }
  L.nv = v;

  L.n_gamma_elems = static_cast<int>(sm.fracture_chain_edges.size());
  L.ng = L.n_gamma_elems > 0 ? L.n_gamma_elems * k + 1 : 0;

  L.perm_p.resize(L.np);
  L.perm_v.resize(L.nv);
  L.perm_g.resize(L.ng);
  std::iota(L.perm_p.begin(), L.perm_p.end(), 0);
  std::iota(L.perm_v.begin(), L.perm_v.end(), 0);
  std::iota(L.perm_g.begin(), L.perm_g.end(), 0);

  L.basis.reserve(sm.tris.size());
  TriangleRule gram_rule = triangle_rule(2 * k);
  for (std::size_t t = 0; t < sm.tris.size(); ++t)
    L.basis.push_back(detail::build_local_basis(sm, static_cast<int>(t), k, gram_rule, L.edge_asm));

  L.ploc2glob.resize(sm.tris.size());
  L.vloc2glob.resize(sm.tris.size());
  for (std::size_t t = 0; t < sm.tris.size(); ++t) {
    const StagTri& tr = sm.tris[t];
    auto& pm = L.ploc2glob[t];
    pm.resize(L.N);
    for (int m = 0; m < ne; ++m)
      pm[m] = sm.edges[tr.base].cls == EdgeClass::fracture ? L.p_frac_dof(tr.base, tr.subdomain - 1, m)
                                                           : L.p_edge_dof(tr.base, m);
    for (int i = 0; i < L.Nkm1; ++i) pm[ne + i] = L.p_tri_dof(static_cast<int>(t), i);
    auto& vm = L.vloc2glob[t];
    vm.resize(2 * L.N);
    for (int j = 0; j < 2; ++j)
      for (int m = 0; m < ne; ++m) vm[j * ne + m] = L.v_dual_dof(tr.dual[j], m);
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i < L.Nkm1; ++i) vm[2 * ne + c * L.Nkm1 + i] = L.v_tri_dof(static_cast<int>(t), c, i);
  }
  return L;
}

inline DofLayout DofLayout::permuted(std::uint64_t seed) const {
  DofLayout L = *this;
  std::mt19937_64 rng(seed);
  std::shuffle(L.perm_p.begin(), L.perm_p.end(), rng);
  std::shuffle(L.perm_v.begin(), L.perm_v.end(), rng);
  if (L.ng > 2) std::shuffle(L.perm_g.begin() + 1, L.perm_g.end() - 1, rng);  // keep end nodes recognizable
  const auto& sm = *L.mesh;
  const int ne = k + 1;
  for (std::size_t t = 0; t < sm.tris.size(); ++t) {
    const StagTri& tr = sm.tris[t];
    for (int m = 0; m < ne; ++m)
      L.ploc2glob[t][m] = sm.edges[tr.base].cls == EdgeClass::fracture
                              ? L.p_frac_dof(tr.base, tr.subdomain - 1, m)
                              : L.p_edge_dof(tr.base, m);
    for (int i = 0; i < L.Nkm1; ++i) L.ploc2glob[t][ne + i] = L.p_tri_dof(static_cast<int>(t), i);
    for (int j = 0; j < 2; ++j)
      for (int m = 0; m < ne; ++m) L.vloc2glob[t][j * ne + m] = L.v_dual_dof(tr.dual[j], m);
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i < L.Nkm1; ++i) L.vloc2glob[t][2 * ne + c * L.Nkm1 + i] = L.v_tri_dof(static_cast<int>(t), c, i);
  }
  return L;
}

enum class Field { pressure, flux, fracture };

struct DiscreteFunction {
  const DofLayout* L = nullptr;
  Field field = Field::pressure;
  Eigen::VectorXd x;

  DiscreteFunction() = default;
  DiscreteFunction(const DofLayout& layout, Field f)
      : L(&layout), field(f),
        x(Eigen::VectorXd::Zero(f == Field::pressure ? layout.np : f == Field::flux ? layout.nv : layout.ng)) {}

  /// Frame coefficients of the pressure on triangle t.
  Eigen::VectorXd pressure_coeffs(int t) const {
    Eigen::VectorXd loc(L->N);
    for (int i = 0; i < L->N; ++i) loc[i] = x[L->ploc2glob[t][i]];
    return L->basis[t].Lp * loc;
  }

  /// Frame coefficients of the flux on triangle t (x block then y block).
  Eigen::VectorXd flux_coeffs(int t) const {
    Eigen::VectorXd loc(2 * L->N);
    for (int i = 0; i < 2 * L->N; ++i) loc[i] = x[L->vloc2glob[t][i]];
    return L->basis[t].Lv * loc;
  }

  double pressure_value(int t, const Vec2& p) const {
    Eigen::MatrixXd Phi = L->basis[t].frame_values({p});
    return pressure_coeffs(t).dot(Phi.col(0));
  }

  Vec2 pressure_gradient(int t, const Vec2& p) const {
    auto [Gx, Gy] = L->basis[t].frame_gradients({p});
    Eigen::VectorXd c = pressure_coeffs(t);
    return Vec2(c.dot(Gx.col(0)), c.dot(Gy.col(0)));
  }

  Vec2 flux_value(int t, const Vec2& p) const {
    Eigen::MatrixXd Phi = L->basis[t].frame_values({p});
    Eigen::VectorXd c = flux_coeffs(t);
    return Vec2(c.head(L->N).dot(Phi.col(0)), c.tail(L->N).dot(Phi.col(0)));
  }

  /// Fracture value / tangential derivative at global arclength s.
  double gamma_value(double s) const {
    auto [elem, sl, len] = locate_gamma(s);
    double v = 0.0;
    for (int n = 0; n <= L->k; ++n) v += x[L->g_node(elem, n)] * L->lob.eval(n, sl);
    (void)len;
    return v;
  }

  double gamma_deriv(double s) const {
    auto [elem, sl, len] = locate_gamma(s);
    double v = 0.0;
    for (int n = 0; n <= L->k; ++n) v += x[L->g_node(elem, n)] * L->lob.deriv(n, sl);
    return v / len;
  }

  std::tuple<int, double, double> locate_gamma(double s) const {
    const auto& sm = *L->mesh;
    int elem = L->n_gamma_elems - 1;
    for (int e = 0; e + 1 < L->n_gamma_elems; ++e)
      if (s < sm.fracture_s0[e + 1]) {
        elem = e;
        break;
      }
    double len = sm.edges[sm.fracture_chain_edges[elem]].len;
    return {elem, (s - sm.fracture_s0[elem]) / len, len};
  }
};

/// Pressure interpolant: edge moments and interior moments of a bulk field
/// given as f(x, subdomain).
inline DiscreteFunction interpolate_pressure(const DofLayout& L, const std::function<double(const Vec2&, int)>& f) {
  const auto& sm = *L.mesh;
  DiscreteFunction df(L, Field::pressure);
  const auto& er = L.edge_err;
  for (std::size_t e = 0; e < sm.edges.size(); ++e) {
    const StagEdge& ed = sm.edges[e];
    if (ed.cls == EdgeClass::dual) continue;
    auto pts = detail::map_to_edge(sm, ed, er);
    if (ed.cls == EdgeClass::fracture) {
      for (int side = 0; side < 2; ++side)
        for (int m = 0; m <= L.k; ++m) {
          double s = 0.0;
          for (int q = 0; q < er.n(); ++q)
            s += er.w[q] * ed.len * shifted_legendre(m, er.x[q]) * f(pts[q], side + 1);
          df.x[L.p_frac_dof(static_cast<int>(e), side, m)] = s;
        }
    } else {
      int sub = sm.tris[ed.t1].subdomain;
      for (int m = 0; m <= L.k; ++m) {
        double s = 0.0;
        for (int q = 0; q < er.n(); ++q) s += er.w[q] * ed.len * shifted_legendre(m, er.x[q]) * f(pts[q], sub);
        df.x[L.p_edge_dof(static_cast<int>(e), m)] = s;
      }
    }
  }
  for (std::size_t t = 0; t < sm.tris.size(); ++t) {
    auto pts = detail::map_to_triangle(sm, sm.tris[t], L.tri_err);
    Eigen::MatrixXd Phi = L.basis[t].frame_values(pts);
    for (int i = 0; i < L.Nkm1; ++i) {
      double s = 0.0;
      for (int q = 0; q < L.tri_err.n(); ++q)
        s += L.tri_err.w[q] * 2.0 * sm.tris[t].area * Phi(i, q) * f(pts[q], sm.tris[t].subdomain);
      df.x[L.p_tri_dof(static_cast<int>(t), i)] = s;
    }
  }
  return df;
}

/// Flux interpolant: dual-edge normal moments and interior component moments.
inline DiscreteFunction interpolate_flux(const DofLayout& L, const std::function<Vec2(const Vec2&, int)>& u) {
  const auto& sm = *L.mesh;
  DiscreteFunction df(L, Field::flux);
  const auto& er = L.edge_err;
  for (int e : sm.dual) {
    const StagEdge& ed = sm.edges[e];
    auto pts = detail::map_to_edge(sm, ed, er);
    int sub = sm.tris[ed.t1].subdomain;
    for (int m = 0; m <= L.k; ++m) {
      double s = 0.0;
      for (int q = 0; q < er.n(); ++q)
        s += er.w[q] * ed.len * shifted_legendre(m, er.x[q]) * u(pts[q], sub).dot(ed.n);
      df.x[L.v_dual_dof(e, m)] = s;
    }
  }
  for (std::size_t t = 0; t < sm.tris.size(); ++t) {
    auto pts = detail::map_to_triangle(sm, sm.tris[t], L.tri_err);
    Eigen::MatrixXd Phi = L.basis[t].frame_values(pts);
    for (int i = 0; i < L.Nkm1; ++i) {
      double sx = 0.0, sy = 0.0;
      for (int q = 0; q < L.tri_err.n(); ++q) {
        Vec2 uv = u(pts[q], sm.tris[t].subdomain);
        double w = L.tri_err.w[q] * 2.0 * sm.tris[t].area * Phi(i, q);
        sx += w * uv.x();
        sy += w * uv.y();
      }
      df.x[L.v_tri_dof(static_cast<int>(t), 0, i)] = sx;
      df.x[L.v_tri_dof(static_cast<int>(t), 1, i)] = sy;
    }
  }
  return df;
}

/// Nodal interpolant into the fracture space; g takes a point on the fracture.
inline DiscreteFunction interpolate_fracture(const DofLayout& L, const std::function<double(const Vec2&)>& g) {
  const auto& sm = *L.mesh;
  DiscreteFunction df(L, Field::fracture);
  for (int e = 0; e < L.n_gamma_elems; ++e)
    for (int n = 0; n <= L.k; ++n) df.x[L.g_node(e, n)] = g(sm.gamma_point(L.g_node_s(e, n)));
  return df;
}

}  // namespace fracdg
