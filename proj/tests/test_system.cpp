// Coupled solver: zero-data solve, the piecewise-linear patch solution with
// constant flux (reproduced to roundoff), the discrete energy identity for
// homogeneous essential data, the inf-sup witness identity, invariance under
// permuted dof numbering, and detection of singular systems.

#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "fracdg/meshgen.hpp"
#include "fracdg/system.hpp"
#include "fracdg/voronoi.hpp"

using namespace fracdg;

namespace {

Coefficients iso_coefficients() {
  Coefficients co;
  co.K1 = Eigen::Vector2d(0.5, 1.0).asDiagonal();
  co.K2 = co.K1;
  co.kappa_n = 0.01;
  co.kappa_star = 100.0;
  co.ell = 0.01;
  co.xi = 0.75;
  return co;
}

Sources zero_sources() {
  Sources s;
  s.f = [](const Vec2&, int) { return 0.0; };
  s.ell_f_gamma = [](const Vec2&) { return 0.0; };
  return s;
}

BoundaryData zero_boundary() {
  BoundaryData bc;
  bc.p0 = [](const Vec2&, int) { return 0.0; };
  bc.g_n = [](const Vec2&) { return 0.0; };
  bc.g_gamma = [](const Vec2&) { return 0.0; };
  return bc;
}

Solution solve_problem(const DofLayout& L, const Coefficients& co, const Sources& src, const BoundaryData& bc) {
  AssembledBlocks bl = assemble(L, co, src);
  apply_boundary(bl, L, bc);
  return solve(L, bl);
}

/// Piecewise-linear exact solution with constant flux: p = x on side 1,
/// p = x + eta K_xx on side 2, p_G halfway between the traces, u = (-K_xx, 0).
/// Both interface conditions hold exactly and all sources vanish.
struct PatchProblem {
  Coefficients co;
  double Kxx, shift;
  ExactSolution ex;
  BoundaryData bc;

  explicit PatchProblem(const Coefficients& c) : co(c) {
    Kxx = co.K1(0, 0);
    shift = co.eta() * Kxx;
    ex.p = [this](const Vec2& x, int sub) { return sub == 1 ? x.x() : x.x() + shift; };
    ex.u = [this](const Vec2&, int) { return Vec2(-Kxx, 0.0); };
    ex.p_gamma = [this](const Vec2&) { return 0.5 + 0.5 * shift; };
    ex.dpG_ds = [](const Vec2&) { return 0.0; };
    bc.p0 = ex.p;
    bc.g_n = [](const Vec2&) { return 0.0; };
    bc.g_gamma = ex.p_gamma;
  }
};

ErrorReport run_patch(const PolygonalMesh& pm, int k) {
  StaggeredMesh sm = build_staggered(pm);
  DofLayout L = build_layout(sm, k);
  PatchProblem pp(iso_coefficients());
  Solution sol = solve_problem(L, pp.co, zero_sources(), pp.bc);
  return compute_errors(L, pp.co, sol.u, sol.p, sol.pG, pp.ex);
}

}  // namespace

TEST_CASE("zero data produces the zero solution") {
  for (int k : {1, 2}) {
    StaggeredMesh sm = build_staggered(generate_uniform(GridKind::rectangular, 4, 0.5));
    DofLayout L = build_layout(sm, k);
    Solution sol = solve_problem(L, iso_coefficients(), zero_sources(), zero_boundary());
    CHECK(sol.u.x.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(sol.p.x.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(sol.pG.x.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(sol.residual <= 1e-10);
    CHECK(sol.factor_nnz > 0);
  }
}

TEST_CASE("patch solution with constant flux is reproduced to roundoff") {
  // super_p is a Z-norm with 1/|tau| dual weights, so on cells with 1000:1
  // edge contrast it amplifies the solver roundoff by the inverse sliver
  // area; the gate widens accordingly there.
  auto gate = [](const ErrorReport& r, double super_tol = 1e-10) {
    CHECK(r.err_u < 1e-10);
    CHECK(r.err_p < 1e-10);
    CHECK(r.err_pG < 1e-10);
    CHECK(r.super_p < super_tol);
  };
  for (int k : {1, 2}) gate(run_patch(generate_uniform(GridKind::rectangular, 2, 0.5), k));
  gate(run_patch(generate_uniform(GridKind::triangular, 2, 0.5), 1));
  gate(run_patch(generate_cvt({64, 100, 7, 0.5, true}), 1));
  gate(run_patch(perturb_small_edges(generate_uniform(GridKind::rectangular, 4, 0.5), 0.001), 1), 1e-8);
  gate(run_patch(map_anisotropic(generate_uniform(GridKind::rectangular, 4, 0.5)), 1));
}

TEST_CASE("energy identity holds for homogeneous essential data") {
  Sources src;
  src.f = [](const Vec2& x, int) { return 1.0 + 0.2 * std::sin(5.0 * x.x() * x.y()); };
  src.ell_f_gamma = [](const Vec2& x) { return 0.3 * x.y(); };
  auto run = [&](const PolygonalMesh& pm, int k) {
    StaggeredMesh sm = build_staggered(pm);
    DofLayout L = build_layout(sm, k);
    Solution sol = solve_problem(L, iso_coefficients(), src, zero_boundary());
    EnergyReport er = energy_identity(L, iso_coefficients(), sol, src, zero_boundary());
    CHECK(er.energy > 0.0);
    CHECK(er.relative < 1e-10);
  };
  for (int k : {1, 2, 3}) run(generate_uniform(GridKind::rectangular, 4, 0.5), k);
  run(generate_cvt({64, 100, 7, 0.5, true}), 2);

  // Mixed boundary with homogeneous Neumann data stays exact.
  PolygonalMesh pm = generate_uniform(GridKind::rectangular, 4, 0.5);
  retag_boundary(pm, [](const Vec2& x) {
    return (x.x() < 1e-9 || x.y() < 1e-9) ? BoundaryTag::neumann : BoundaryTag::dirichlet;
  });
  run(pm, 2);
}

TEST_CASE("inf-sup witness turns the mixed form into the Z-norm") {
  std::mt19937_64 rng(424242);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto run = [&](const PolygonalMesh& pm, int k, double tol = 1e-11) {
    StaggeredMesh sm = build_staggered(pm);
    DofLayout L = build_layout(sm, k);
    AssembledBlocks bl = assemble(L, iso_coefficients(), zero_sources());
    DiscreteFunction q(L, Field::pressure);
    for (int i = 0; i < L.np; ++i) q.x[i] = gauss(rng);
    InfSupWitness w = infsup_witness(L, bl, q);
    CHECK(std::abs(w.bvalue - w.qZ * w.qZ) <= tol * w.qZ * w.qZ);
    return w.ratio;
  };
  for (int k : {1, 2, 3}) run(generate_uniform(GridKind::rectangular, 4, 0.5), k);
  run(generate_cvt({64, 100, 7, 0.5, true}), 2);
  // A rough random q on 1000:1 sliver cells drives ||q||_Z^2 through the
  // 1/|tau| weights to ~1e12; the identity then holds to eps * conditioning.
  run(perturb_small_edges(generate_uniform(GridKind::rectangular, 4, 0.5), 0.001), 2, 1e-8);

  // The witness stays bounded as the mesh is refined.
  std::vector<double> ratios;
  for (int n : {4, 8, 16, 32}) ratios.push_back(run(generate_uniform(GridKind::rectangular, n, 0.5), 1));
  double lo = *std::min_element(ratios.begin(), ratios.end());
  double hi = *std::max_element(ratios.begin(), ratios.end());
  CHECK(hi < 10.0);
  CHECK(hi / lo < 3.0);
}

TEST_CASE("witness of a global linear recovers its gradient norm") {
  StaggeredMesh sm = build_staggered(generate_uniform(GridKind::rectangular, 4, 0.5));
  DofLayout L = build_layout(sm, 2);
  AssembledBlocks bl = assemble(L, iso_coefficients(), zero_sources());
  DiscreteFunction q = interpolate_pressure(L, [](const Vec2& x, int) { return x.x() + 2.0 * x.y(); });
  InfSupWitness w = infsup_witness(L, bl, q);
  // No jumps anywhere, so ||q||_Z^2 = int |grad q|^2 = 5.
  CHECK(w.qZ * w.qZ == Catch::Approx(5.0).margin(1e-11));
  CHECK(w.bvalue == Catch::Approx(5.0).margin(1e-11));
}

TEST_CASE("solution fields are invariant under permuted dof numbering") {
  Sources src;
  src.f = [](const Vec2& x, int) { return std::cos(3.0 * x.x()) + x.y(); };
  src.ell_f_gamma = [](const Vec2&) { return 0.5; };
  StaggeredMesh sm = build_staggered(generate_uniform(GridKind::rectangular, 4, 0.5));
  DofLayout L0 = build_layout(sm, 1);
  DofLayout L1 = L0.permuted(123456789);
  Solution s0 = solve_problem(L0, iso_coefficients(), src, zero_boundary());
  Solution s1 = solve_problem(L1, iso_coefficients(), src, zero_boundary());
  double worst = 0.0;
  for (std::size_t t = 0; t < sm.tris.size(); ++t) {
    const auto& v = sm.tris[t].v;
    Vec2 x = (sm.pts[v[0]] + sm.pts[v[1]] + sm.pts[v[2]]) / 3.0;
    worst = std::max(worst, std::abs(s0.p.pressure_value(static_cast<int>(t), x) -
                                     s1.p.pressure_value(static_cast<int>(t), x)));
    worst = std::max(worst, (s0.u.flux_value(static_cast<int>(t), x) -
                             s1.u.flux_value(static_cast<int>(t), x)).norm());
  }
  for (double s : {0.25, 0.5, 0.75}) worst = std::max(worst, std::abs(s0.pG.gamma_value(s) - s1.pG.gamma_value(s)));
  CHECK(worst < 1e-12);
}

TEST_CASE("pure neumann bulk without a fracture is reported singular") {
  PolygonalMesh pm = generate_uniform_background(GridKind::rectangular, 2);
  retag_boundary(pm, [](const Vec2&) { return BoundaryTag::neumann; });
  StaggeredMesh sm = build_staggered(pm);
  DofLayout L = build_layout(sm, 1);
  // Incompatible data (net injection, no outflow) must not produce a silent
  // garbage solution.
  Sources src = zero_sources();
  src.f = [](const Vec2&, int) { return 1.0; };
  AssembledBlocks bl = assemble(L, iso_coefficients(), src);
  apply_boundary(bl, L, zero_boundary());
  CHECK_THROWS_AS(solve(L, bl), std::runtime_error);
}

TEST_CASE("fracture endpoint data anchors the fracture pressure") {
  StaggeredMesh sm = build_staggered(generate_uniform(GridKind::rectangular, 4, 0.5));
  DofLayout L = build_layout(sm, 2);
  BoundaryData bc = zero_boundary();
  bc.g_gamma = [](const Vec2& x) { return 1.0 + x.y(); };
  Solution sol = solve_problem(L, iso_coefficients(), zero_sources(), bc);
  CHECK(sol.pG.gamma_value(0.0) == Catch::Approx(1.0).margin(1e-12));
  CHECK(sol.pG.gamma_value(1.0) == Catch::Approx(2.0).margin(1e-12));
}
