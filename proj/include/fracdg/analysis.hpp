// Discrete norms, the fracture Ritz projection, error reports and rate
// tables.
//
//   ||q||_Z^2  = sum_tau ||grad q||^2 + sum_tau sum_{dual e of tau}
//                (h_e / 2|tau|) ||[q]||^2_e
//   ||v||_X'^2 = ||v||_0^2 + sum_tau sum_{dual e of tau}
//                (|tau| / 2 h_e) ||v.n||^2_e
//
// Both dual-edge sums run over (triangle, edge) incidences, so each dual edge
// contributes once per adjacent triangle.  Pressure traces are continuous
// across primal edges by construction (shared edge moments pin a degree-k
// trace), so jumps live on dual and fracture edges only.

#pragma once

#include "fracdg/assembly.hpp"

namespace fracdg {

inline double norm_Z(const DiscreteFunction& p) {
  const DofLayout& L = *p.L;
  const StaggeredMesh& sm = *L.mesh;
  double acc = 0.0;
  for (std::size_t t = 0; t < sm.tris.size(); ++t) {
    auto pts = detail::map_to_triangle(sm, sm.tris[t], L.tri_err);
    auto [Gx, Gy] = L.basis[t].frame_gradients(pts);
    Eigen::VectorXd c = p.pressure_coeffs(static_cast<int>(t));
    Eigen::VectorXd gx = Gx.transpose() * c, gy = Gy.transpose() * c;
    for (int q = 0; q < L.tri_err.n(); ++q)
      acc += L.tri_err.w[q] * 2.0 * sm.tris[t].area * (gx[q] * gx[q] + gy[q] * gy[q]);
  }
  for (int e : sm.dual) {
    const StagEdge& ed = sm.edges[e];
    auto pts = detail::map_to_edge(sm, ed, L.edge_err);
    Eigen::VectorXd c1 = p.pressure_coeffs(ed.t1), c2 = p.pressure_coeffs(ed.t2);
    Eigen::MatrixXd P1 = L.basis[ed.t1].frame_values(pts), P2 = L.basis[ed.t2].frame_values(pts);
    double j2 = 0.0;
    for (int q = 0; q < L.edge_err.n(); ++q) {
      double jump = c1.dot(P1.col(q)) - c2.dot(P2.col(q));
      j2 += L.edge_err.w[q] * ed.len * jump * jump;
    }
    acc += 0.5 * ed.len * (1.0 / sm.tris[ed.t1].area + 1.0 / sm.tris[ed.t2].area) * j2;
  }
  return std::sqrt(acc);
}

inline double norm_Xprime(const DiscreteFunction& v) {
  const DofLayout& L = *v.L;
  const StaggeredMesh& sm = *L.mesh;
  double acc = 0.0;
  for (std::size_t t = 0; t < sm.tris.size(); ++t) {
    auto pts = detail::map_to_triangle(sm, sm.tris[t], L.tri_err);
    Eigen::MatrixXd Phi = L.basis[t].frame_values(pts);
    Eigen::VectorXd c = v.flux_coeffs(static_cast<int>(t));
    for (int q = 0; q < L.tri_err.n(); ++q) {
      double vx = c.head(L.N).dot(Phi.col(q)), vy = c.tail(L.N).dot(Phi.col(q));
      acc += L.tri_err.w[q] * 2.0 * sm.tris[t].area * (vx * vx + vy * vy);
    }
  }
  for (int e : sm.dual) {
    const StagEdge& ed = sm.edges[e];
    auto pts = detail::map_to_edge(sm, ed, L.edge_err);
    // v.n is single-valued across dual edges; the side-1 trace suffices.
    Eigen::MatrixXd Vn = detail::flux_normal_trace(L, ed.t1, pts, ed.n);
    Eigen::VectorXd loc(2 * L.N);
    for (int i = 0; i < 2 * L.N; ++i) loc[i] = v.x[L.vloc2glob[ed.t1][i]];
    double n2 = 0.0;
    for (int q = 0; q < L.edge_err.n(); ++q) {
      double vn = loc.dot(Vn.col(q));
      n2 += L.edge_err.w[q] * ed.len * vn * vn;
    }
    acc += (sm.tris[ed.t1].area + sm.tris[ed.t2].area) / (2.0 * ed.len) * n2;
  }
  return std::sqrt(acc);
}

/// Ritz projection into the fracture space: the K_Gamma-weighted stiffness
/// form of the projection matches that of the exact field for every test
/// function, and the endpoint values are fixed to the exact trace.
inline DiscreteFunction ritz_projection(const DofLayout& L, double K_gamma,
                                        const std::function<double(const Vec2&)>& dpG_ds,
                                        const std::function<double(const Vec2&)>& pG) {
  const StaggeredMesh& sm = *L.mesh;
  DiscreteFunction out(L, Field::fracture);
  if (L.ng == 0) return out;
  std::vector<Triplet> tA;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(L.ng);
  const QuadratureRule1D& r = L.edge_err;
  Eigen::MatrixXd Wd(L.k + 1, r.n());
  for (int n = 0; n <= L.k; ++n)
    for (int q = 0; q < r.n(); ++q) Wd(n, q) = L.lob.deriv(n, r.x[q]);
  for (int elem = 0; elem < L.n_gamma_elems; ++elem) {
    const StagEdge& ed = sm.edges[sm.fracture_chain_edges[elem]];
    for (int a = 0; a <= L.k; ++a) {
      for (int b = 0; b <= L.k; ++b) {
        double s = 0.0;
        for (int q = 0; q < r.n(); ++q) s += r.w[q] * Wd(a, q) * Wd(b, q);
        tA.emplace_back(L.g_node(elem, a), L.g_node(elem, b), K_gamma * s / ed.len);
      }
      // RHS: K_G int (dpG/ds) (dw_a/ds) ds; the 1/len of dw/ds cancels the
      // len of the arclength element.
      double s = 0.0;
      for (int q = 0; q < r.n(); ++q) {
        double sg = sm.fracture_s0[elem] + r.x[q] * ed.len;
        s += r.w[q] * Wd(a, q) * K_gamma * dpG_ds(sm.gamma_point(sg));
      }
      rhs[L.g_node(elem, a)] += s;
    }
  }
  SpMat A(L.ng, L.ng);
  A.setFromTriplets(tA.begin(), tA.end());

  int first = L.perm_g[0], last = L.perm_g[L.n_gamma_elems * L.k];
  Eigen::VectorXd lift = Eigen::VectorXd::Zero(L.ng);
  lift[first] = pG(sm.gamma_point(0.0));
  lift[last] = pG(sm.gamma_point(sm.gamma_length));
  rhs -= A * lift;

  std::vector<int> free;
  for (int i = 0; i < L.ng; ++i)
    if (i != first && i != last) free.push_back(i);
  std::vector<int> pos(L.ng, -1);
  for (std::size_t i = 0; i < free.size(); ++i) pos[free[i]] = static_cast<int>(i);
  std::vector<Triplet> tf;
  for (int c = 0; c < A.outerSize(); ++c)
    for (SpMat::InnerIterator it(A, c); it; ++it)
      if (pos[it.row()] >= 0 && pos[it.col()] >= 0) tf.emplace_back(pos[it.row()], pos[it.col()], it.value());
  SpMat Af(static_cast<int>(free.size()), static_cast<int>(free.size()));
  Af.setFromTriplets(tf.begin(), tf.end());
  Eigen::VectorXd rf(free.size());
  for (std::size_t i = 0; i < free.size(); ++i) rf[i] = rhs[free[i]];
  Eigen::SimplicialLDLT<SpMat> solver(Af);
  if (solver.info() != Eigen::Success) throw std::runtime_error("ritz_projection: singular fracture stiffness");
  Eigen::VectorXd xf = solver.solve(rf);
  out.x = lift;
  for (std::size_t i = 0; i < free.size(); ++i) out.x[free[i]] = xf[i];
  return out;
}

struct ExactSolution {
  std::function<double(const Vec2&, int)> p;
  std::function<Vec2(const Vec2&, int)> u;
  std::function<double(const Vec2&)> p_gamma;
  std::function<double(const Vec2&)> dpG_ds;  // tangential derivative along the chain direction
};

struct ErrorReport {
  double h = 0.0;
  int ndof = 0;
  double err_u = 0.0;         // ||K^{-1/2}(u - u_h)||_0
  double err_u_l2 = 0.0;      // ||u - u_h||_0
  double err_p = 0.0;         // ||p - p_h||_0
  double err_pG = 0.0;        // ||p_G - p_{G,h}||_0,Gamma
  double super_p = 0.0;       // ||I_h p - p_h||_Z
  double super_pG = 0.0;      // ||K_G^{1/2} d/ds (Ritz p_G - p_{G,h})||_0,Gamma
  double jump_eta_sq = 0.0;   // sum_frac ||eta^{-1/2}[I_h p - p_h]||^2
  double jump_alpha_sq = 0.0; // sum_frac ||alpha^{-1/2}({I_h p - p_h} - (Ritz p_G - p_{G,h}))||^2
};

inline ErrorReport compute_errors(const DofLayout& L, const Coefficients& co, const DiscreteFunction& u_h,
                                  const DiscreteFunction& p_h, const DiscreteFunction& pG_h,
                                  const ExactSolution& ex) {
  const StaggeredMesh& sm = *L.mesh;
  ErrorReport r;
  r.h = sm.h;
  r.ndof = L.nv + L.np + L.ng;

  double eu = 0.0, eul2 = 0.0, ep = 0.0;
  for (std::size_t t = 0; t < sm.tris.size(); ++t) {
    const StagTri& tr = sm.tris[t];
    auto pts = detail::map_to_triangle(sm, tr, L.tri_err);
    Eigen::MatrixXd Phi = L.basis[t].frame_values(pts);
    Eigen::VectorXd cu = u_h.flux_coeffs(static_cast<int>(t));
    Eigen::VectorXd cp = p_h.pressure_coeffs(static_cast<int>(t));
    Eigen::Matrix2d Ki = co.K_inv(tr.subdomain);
    for (int q = 0; q < L.tri_err.n(); ++q) {
      double w = L.tri_err.w[q] * 2.0 * tr.area;
      Vec2 du = ex.u(pts[q], tr.subdomain) - Vec2(cu.head(L.N).dot(Phi.col(q)), cu.tail(L.N).dot(Phi.col(q)));
      eu += w * du.dot(Ki * du);
      eul2 += w * du.squaredNorm();
      double dp = ex.p(pts[q], tr.subdomain) - cp.dot(Phi.col(q));
      ep += w * dp * dp;
    }
  }
  r.err_u = std::sqrt(eu);
  r.err_u_l2 = std::sqrt(eul2);
  r.err_p = std::sqrt(ep);

  double eg = 0.0;
  for (int elem = 0; elem < L.n_gamma_elems; ++elem) {
    const StagEdge& ed = sm.edges[sm.fracture_chain_edges[elem]];
    for (int q = 0; q < L.edge_err.n(); ++q) {
      double sg = sm.fracture_s0[elem] + L.edge_err.x[q] * ed.len;
      double d = ex.p_gamma(sm.gamma_point(sg)) - pG_h.gamma_value(sg);
      eg += L.edge_err.w[q] * ed.len * d * d;
    }
  }
  r.err_pG = std::sqrt(eg);

  DiscreteFunction Ip = interpolate_pressure(L, ex.p);
  DiscreteFunction gap = Ip;
  gap.x -= p_h.x;
  r.super_p = norm_Z(gap);

  DiscreteFunction Rp = ritz_projection(L, co.K_gamma(), ex.dpG_ds, ex.p_gamma);
  DiscreteFunction gG = Rp;
  gG.x -= pG_h.x;
  double sg2 = 0.0, je = 0.0, ja = 0.0;
  for (int elem = 0; elem < L.n_gamma_elems; ++elem) {
    int e = sm.fracture_chain_edges[elem];
    const StagEdge& ed = sm.edges[e];
    auto pts = detail::map_to_edge(sm, ed, L.edge_err);
    Eigen::VectorXd c1 = gap.pressure_coeffs(ed.t1), c2 = gap.pressure_coeffs(ed.t2);
    Eigen::MatrixXd P1 = L.basis[ed.t1].frame_values(pts), P2 = L.basis[ed.t2].frame_values(pts);
    for (int q = 0; q < L.edge_err.n(); ++q) {
      double w = L.edge_err.w[q] * ed.len;
      double sg = sm.fracture_s0[elem] + L.edge_err.x[q] * ed.len;
      double d = gG.gamma_deriv(sg);
      sg2 += w * co.K_gamma() * d * d;
      double g1 = c1.dot(P1.col(q)), g2 = c2.dot(P2.col(q));
      je += w * (g1 - g2) * (g1 - g2) / co.eta();
      double avg_gap = 0.5 * (g1 + g2) - gG.gamma_value(sg);
      ja += w * avg_gap * avg_gap / co.alpha();
    }
  }
  r.super_pG = std::sqrt(sg2);
  r.jump_eta_sq = je;
  r.jump_alpha_sq = ja;
  return r;
}

/// Convergence rate between consecutive refinements; NaN marks exact
/// reproduction (zero error).
inline double rate(double e_coarse, double e_fine, double h_coarse, double h_fine) {
  if (e_coarse <= 0.0 || e_fine <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

struct RateRow {
  double h = 0.0;
  double r_u = 0.0, r_p = 0.0, r_pG = 0.0, r_super_p = 0.0, r_super_pG = 0.0;
};

inline std::vector<RateRow> rates(const std::vector<ErrorReport>& reports) {
  std::vector<RateRow> out;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const ErrorReport &a = reports[i - 1], &b = reports[i];
    RateRow row;
    row.h = b.h;
    row.r_u = rate(a.err_u, b.err_u, a.h, b.h);
    row.r_p = rate(a.err_p, b.err_p, a.h, b.h);
    row.r_pG = rate(a.err_pG, b.err_pG, a.h, b.h);
    row.r_super_p = rate(a.super_p, b.super_p, a.h, b.h);
    row.r_super_pG = rate(a.super_pG, b.super_pG, a.h, b.h);
    out.push_back(row);
  }
  return out;
}

}  // namespace fracdg
