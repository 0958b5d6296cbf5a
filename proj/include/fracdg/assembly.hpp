// Assembly of the coupled staggered system blocks over the full dof sets:
//
//   M      flux mass matrix with K^{-1} weight (block diagonal per cell)
//   B      pressure-flux form  b_h(u,q)  = -sum_{dual e} <u.n,[q]> + sum_tau (u, grad q)
//   Bstar  flux-pressure form  b*_h(p,v) = sum_{int e} <p,[v.n]> - sum_tau (p, div v)
//                                        + sum_{frac e} <[p v.n],1> + sum_{bdry e} <p, v.n>
//   C_avg  (1/alpha) <{p},{q}>  on fracture edges
//   C_jump (1/eta)  <[p],[q]>   on fracture edges
//   D      -(1/alpha) <p_Gamma, {q}>
//   A_G    fracture stiffness  K_Gamma <dp_G/ds, dq_G/ds>
//   C_G    (1/alpha) <p_G, q_G>
//
// b*_h includes the boundary term over all boundary edges, which makes
// Bstar = B^T an exact identity before any boundary conditions are applied
// (the two are assembled from their own formulas here, so the transpose
// identity is a genuine cross-check).  Dirichlet data fixes the edge-moment
// dofs of tagged boundary edges; Neumann data enters the pressure rhs.
// Jumps are [q] = q_1 - q_2 with the edge normal pointing from side 1 to
// side 2; traces across shared-dof edges coincide, so per-side assembly of
// the single-valued factors is exact.

#pragma once

#include <cstdio>

#include <Eigen/Sparse>

#include "fracdg/coefficients.hpp"
#include "fracdg/spaces.hpp"

namespace fracdg {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

struct Sources {
  std::function<double(const Vec2&, int)> f;       // bulk source
  std::function<double(const Vec2&)> ell_f_gamma;  // aperture-scaled fracture source
};

struct BoundaryData {
  std::function<double(const Vec2&, int)> p0;  // Dirichlet pressure trace
  std::function<double(const Vec2&)> g_n;      // Neumann normal flux
  std::function<double(const Vec2&)> g_gamma;  // fracture endpoint pressure
};

struct DirichletData {
  std::vector<char> p_fixed;
  Eigen::VectorXd p_val;
  std::vector<char> g_fixed;
  Eigen::VectorXd g_val;
};

struct AssembledBlocks {
  SpMat M, B, Bstar, C_avg, C_jump, D, A_G, C_G;
  Eigen::VectorXd rhs_f, rhs_g;
  DirichletData bc;
  int nv = 0, np = 0, ng = 0;
};

namespace detail {

inline void scatter(std::vector<Triplet>& out, const Eigen::MatrixXd& loc, const std::vector<int>& rows,
                    const std::vector<int>& cols) {
  for (int i = 0; i < loc.rows(); ++i)
    for (int j = 0; j < loc.cols(); ++j)
      if (loc(i, j) != 0.0) out.emplace_back(rows[i], cols[j], loc(i, j));
}

/// Trace rows of the pressure dof basis on an edge: N x q matrix of frame
/// values premultiplied so row d gives the trace of the d-th local shape
/// function (dof basis) at the quadrature points.
inline Eigen::MatrixXd pressure_trace(const DofLayout& L, int tri, const std::vector<Vec2>& pts) {
  return L.basis[tri].Lp.transpose() * L.basis[tri].frame_values(pts);
}

inline Eigen::MatrixXd flux_normal_trace(const DofLayout& L, int tri, const std::vector<Vec2>& pts, const Vec2& n) {
  Eigen::MatrixXd Phi = L.basis[tri].frame_values(pts);  // N x q
  Eigen::MatrixXd Vn(2 * L.N, Phi.cols());
  Vn.topRows(L.N) = n.x() * Phi;
  Vn.bottomRows(L.N) = n.y() * Phi;
  return L.basis[tri].Lv.transpose() * Vn;  // 2N x q
}

/// Local 1D basis values of the fracture element living on edge e, evaluated
/// at the edge quadrature points (accounting for the chain orientation).
inline Eigen::MatrixXd gamma_trace(const DofLayout& L, const QuadratureRule1D& r, bool aligned) {
  Eigen::MatrixXd W(L.k + 1, r.n());
  for (int n = 0; n <= L.k; ++n)
    for (int q = 0; q < r.n(); ++q) W(n, q) = L.lob.eval(n, aligned ? r.x[q] : 1.0 - r.x[q]);
  return W;
}

}  // namespace detail

inline AssembledBlocks assemble(const DofLayout& L, const Coefficients& co, const Sources& src) {
  co.validate();
  const StaggeredMesh& sm = *L.mesh;
  AssembledBlocks bl;
  bl.nv = L.nv;
  bl.np = L.np;
  bl.ng = L.ng;
  bl.rhs_f = Eigen::VectorXd::Zero(L.np);
  bl.rhs_g = Eigen::VectorXd::Zero(L.ng);

  std::vector<Triplet> tM, tB, tBs, tCa, tCj, tD, tAG, tCG;
  const double alpha = co.alpha(), eta = co.eta(), KG = co.K_gamma();

  // Volume terms.
  for (std::size_t t = 0; t < sm.tris.size(); ++t) {
    const StagTri& tr = sm.tris[t];
    const LocalBasis& lb = L.basis[t];
    const auto& rows_p = L.ploc2glob[t];
    const auto& rows_v = L.vloc2glob[t];

    // Flux mass: the frame is orthonormal, so the coefficient-space mass
    // matrix is K^{-1} kron I.
    Eigen::Matrix2d Ki = co.K_inv(tr.subdomain);
    Eigen::MatrixXd Mc = Eigen::MatrixXd::Zero(2 * L.N, 2 * L.N);
    Mc.topLeftCorner(L.N, L.N) = Ki(0, 0) * Eigen::MatrixXd::Identity(L.N, L.N);
    Mc.topRightCorner(L.N, L.N) = Ki(0, 1) * Eigen::MatrixXd::Identity(L.N, L.N);
    Mc.bottomLeftCorner(L.N, L.N) = Ki(1, 0) * Eigen::MatrixXd::Identity(L.N, L.N);
    Mc.bottomRightCorner(L.N, L.N) = Ki(1, 1) * Eigen::MatrixXd::Identity(L.N, L.N);
    detail::scatter(tM, lb.Lv.transpose() * Mc * lb.Lv, rows_v, rows_v);

    // (u, grad q) and -(p, div v) by quadrature.
    auto pts = detail::map_to_triangle(sm, tr, L.tri_asm);
    Eigen::MatrixXd Phi = lb.frame_values(pts);
    auto [Gx, Gy] = lb.frame_gradients(pts);
    Eigen::VectorXd w(L.tri_asm.n());
    for (int q = 0; q < L.tri_asm.n(); ++q) w[q] = L.tri_asm.w[q] * 2.0 * tr.area;
    Eigen::MatrixXd GxW = Gx * w.asDiagonal(), GyW = Gy * w.asDiagonal();
    Eigen::MatrixXd A1(L.N, 2 * L.N);  // (Phi_J, d phi_i) pairings
    A1.leftCols(L.N) = GxW * Phi.transpose();
    A1.rightCols(L.N) = GyW * Phi.transpose();
    detail::scatter(tB, lb.Lp.transpose() * A1 * lb.Lv, rows_p, rows_v);
    // The same frame serves pressure and both flux components, so the
    // divergence pairing (phi_i, d Phi_J) is the blockwise transpose of A1.
    Eigen::MatrixXd A2(L.N, 2 * L.N);
    A2.leftCols(L.N) = A1.leftCols(L.N).transpose();
    A2.rightCols(L.N) = A1.rightCols(L.N).transpose();
    detail::scatter(tBs, -(lb.Lv.transpose() * A2.transpose() * lb.Lp), rows_v, rows_p);

    // Bulk source.
    Eigen::VectorXd fv(L.tri_asm.n());
    for (int q = 0; q < L.tri_asm.n(); ++q) fv[q] = w[q] * src.f(pts[q], tr.subdomain);
    Eigen::VectorXd floc = lb.Lp.transpose() * (Phi * fv);
    for (int i = 0; i < L.N; ++i) bl.rhs_f[rows_p[i]] += floc[i];
  }

  // Dual edges: -<u.n, [q]>, assembled one side at a time (u.n is
  // single-valued across dual edges).
  for (int e : sm.dual) {
    const StagEdge& ed = sm.edges[e];
    auto pts = detail::map_to_edge(sm, ed, L.edge_asm);
    Eigen::VectorXd w(L.edge_asm.n());
    for (int q = 0; q < L.edge_asm.n(); ++q) w[q] = L.edge_asm.w[q] * ed.len;
    for (int side = 0; side < 2; ++side) {
      int t = side == 0 ? ed.t1 : ed.t2;
      double sgn = side == 0 ? 1.0 : -1.0;
      Eigen::MatrixXd P = detail::pressure_trace(L, t, pts);          // N x q
      Eigen::MatrixXd Vn = detail::flux_normal_trace(L, t, pts, ed.n);  // 2N x q
      detail::scatter(tB, -sgn * (P * w.asDiagonal() * Vn.transpose()), L.ploc2glob[t], L.vloc2glob[t]);
    }
  }

  // Primal interior and fracture edges: <p, [v.n]> resp. <[p v.n], 1>; both
  // reduce to per-side +/- <p_s, v_s . n>.  Boundary edges: + <p, v.n_out>.
  for (std::size_t e = 0; e < sm.edges.size(); ++e) {
    const StagEdge& ed = sm.edges[e];
    if (ed.cls == EdgeClass::dual) continue;
    auto pts = detail::map_to_edge(sm, ed, L.edge_asm);
    Eigen::VectorXd w(L.edge_asm.n());
    for (int q = 0; q < L.edge_asm.n(); ++q) w[q] = L.edge_asm.w[q] * ed.len;
    int nsides = ed.cls == EdgeClass::primal_boundary ? 1 : 2;
    for (int side = 0; side < nsides; ++side) {
      int t = side == 0 ? ed.t1 : ed.t2;
      double sgn = side == 0 ? 1.0 : -1.0;
      Eigen::MatrixXd P = detail::pressure_trace(L, t, pts);
      Eigen::MatrixXd Vn = detail::flux_normal_trace(L, t, pts, ed.n);
      detail::scatter(tBs, sgn * (Vn * w.asDiagonal() * P.transpose()), L.vloc2glob[t], L.ploc2glob[t]);
    }
  }

  // Fracture couplings.
  for (int elem = 0; elem < L.n_gamma_elems; ++elem) {
    int e = sm.fracture_chain_edges[elem];
    const StagEdge& ed = sm.edges[e];
    auto pts = detail::map_to_edge(sm, ed, L.edge_asm);
    Eigen::VectorXd w(L.edge_asm.n());
    for (int q = 0; q < L.edge_asm.n(); ++q) w[q] = L.edge_asm.w[q] * ed.len;
    bool aligned = (sm.pts[ed.b] - sm.pts[ed.a]).dot(sm.t_gamma) > 0.0;
    Eigen::MatrixXd W = detail::gamma_trace(L, L.edge_asm, aligned);  // (k+1) x q
    std::vector<int> gcols(L.k + 1);
    for (int n = 0; n <= L.k; ++n) gcols[n] = L.g_node(elem, n);

    std::array<Eigen::MatrixXd, 2> P = {detail::pressure_trace(L, ed.t1, pts), detail::pressure_trace(L, ed.t2, pts)};
    std::array<double, 2> sgn = {1.0, -1.0};
    for (int a = 0; a < 2; ++a) {
      int ta = a == 0 ? ed.t1 : ed.t2;
      for (int b = 0; b < 2; ++b) {
        int tb = b == 0 ? ed.t1 : ed.t2;
        Eigen::MatrixXd avg = (1.0 / (4.0 * alpha)) * (P[a] * w.asDiagonal() * P[b].transpose());
        Eigen::MatrixXd jmp = (sgn[a] * sgn[b] / eta) * (P[a] * w.asDiagonal() * P[b].transpose());
        detail::scatter(tCa, avg, L.ploc2glob[ta], L.ploc2glob[tb]);
        detail::scatter(tCj, jmp, L.ploc2glob[ta], L.ploc2glob[tb]);
      }
      Eigen::MatrixXd Dl = (-1.0 / (2.0 * alpha)) * (P[a] * w.asDiagonal() * W.transpose());  // N x (k+1)
      detail::scatter(tD, Dl, L.ploc2glob[ta], gcols);
    }

    // 1D stiffness and mass on the element.
    Eigen::MatrixXd Wd(L.k + 1, L.edge_asm.n());
    for (int n = 0; n <= L.k; ++n)
      for (int q = 0; q < L.edge_asm.n(); ++q)
        Wd(n, q) = L.lob.deriv(n, aligned ? L.edge_asm.x[q] : 1.0 - L.edge_asm.x[q]);
    Eigen::VectorXd wref(L.edge_asm.n());
    for (int q = 0; q < L.edge_asm.n(); ++q) wref[q] = L.edge_asm.w[q];
    Eigen::MatrixXd Ag = (KG / ed.len) * (Wd * wref.asDiagonal() * Wd.transpose());
    Eigen::MatrixXd Cg = (ed.len / alpha) * (W * wref.asDiagonal() * W.transpose());
    detail::scatter(tAG, Ag, gcols, gcols);
    detail::scatter(tCG, Cg, gcols, gcols);

    // Fracture source.
    for (int n = 0; n <= L.k; ++n) {
      double s = 0.0;
      for (int q = 0; q < L.edge_asm.n(); ++q) s += wref[q] * ed.len * W(n, q) * src.ell_f_gamma(pts[q]);
      bl.rhs_g[gcols[n]] += s;
    }
  }

  auto build = [](SpMat& A, int r, int c, std::vector<Triplet>& t) {
    A.resize(r, c);
    A.setFromTriplets(t.begin(), t.end());
    t.clear();
    t.shrink_to_fit();
  };
  build(bl.M, L.nv, L.nv, tM);
  build(bl.B, L.np, L.nv, tB);
  build(bl.Bstar, L.nv, L.np, tBs);
  build(bl.C_avg, L.np, L.np, tCa);
  build(bl.C_jump, L.np, L.np, tCj);
  build(bl.D, L.np, L.ng, tD);
  build(bl.A_G, L.ng, L.ng, tAG);
  build(bl.C_G, L.ng, L.ng, tCG);

  bl.bc.p_fixed.assign(L.np, 0);
  bl.bc.p_val = Eigen::VectorXd::Zero(L.np);
  bl.bc.g_fixed.assign(L.ng, 0);
  bl.bc.g_val = Eigen::VectorXd::Zero(L.ng);
  return bl;
}

/// Fill Dirichlet dof values (edge moments of p0, fracture endpoint values)
/// and add Neumann data to the pressure rhs.
inline void apply_boundary(AssembledBlocks& bl, const DofLayout& L, const BoundaryData& bc) {
  const StaggeredMesh& sm = *L.mesh;
  for (int e : sm.primal_boundary) {
    const StagEdge& ed = sm.edges[e];
    auto pts = detail::map_to_edge(sm, ed, L.edge_err);
    if (ed.tag == BoundaryTag::dirichlet) {
      int sub = sm.tris[ed.t1].subdomain;
      for (int m = 0; m <= L.k; ++m) {
        double s = 0.0;
        for (int q = 0; q < L.edge_err.n(); ++q)
          s += L.edge_err.w[q] * ed.len * shifted_legendre(m, L.edge_err.x[q]) * bc.p0(pts[q], sub);
        int dof = L.p_edge_dof(e, m);
        bl.bc.p_fixed[dof] = 1;
        bl.bc.p_val[dof] = s;
      }
    } else {
      Eigen::VectorXd gv(L.edge_err.n());
      for (int q = 0; q < L.edge_err.n(); ++q) gv[q] = L.edge_err.w[q] * ed.len * bc.g_n(pts[q]);
      Eigen::MatrixXd P = detail::pressure_trace(L, ed.t1, pts);
      Eigen::VectorXd loc = -(P * gv);
      for (int i = 0; i < L.N; ++i) bl.rhs_f[L.ploc2glob[ed.t1][i]] += loc[i];
    }
  }
  if (L.ng > 0) {
    int first = L.perm_g[0], last = L.perm_g[L.n_gamma_elems * L.k];
    bl.bc.g_fixed[first] = 1;
    bl.bc.g_val[first] = bc.g_gamma(sm.gamma_point(0.0));
    bl.bc.g_fixed[last] = 1;
    bl.bc.g_val[last] = bc.g_gamma(sm.gamma_point(sm.gamma_length));
  }
}

/// Max absolute entry of B - Bstar^T relative to the largest entry of B; an
/// exact structural identity of the forms (both sides assembled from their
/// own formulas).
inline double adjoint_gap(const AssembledBlocks& bl) {
  SpMat diff = bl.B - SpMat(bl.Bstar.transpose());
  double scale = 0.0, gap = 0.0;
  for (int k = 0; k < bl.B.outerSize(); ++k)
    for (SpMat::InnerIterator it(bl.B, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SpMat::InnerIterator it(diff, k); it; ++it) gap = std::max(gap, std::abs(it.value()));
  return gap / std::max(scale, 1e-300);
}

/// Coordinate-format text export (row col value per line).
inline void export_matrix(const SpMat& A, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("export_matrix: cannot open " + path);
  f << A.rows() << " " << A.cols() << " " << A.nonZeros() << "\n";
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      char buf[80];
      std::snprintf(buf, sizeof buf, "%d %d %.17g\n", static_cast<int>(it.row()), static_cast<int>(it.col()),
                    it.value());
      f << buf;
    }
}

}  // namespace fracdg
