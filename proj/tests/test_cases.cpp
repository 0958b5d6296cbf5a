// Benchmark case definitions and the study driver: self-consistency of the
// manufactured solutions (interface conditions, finite-difference checks of
// sources against fields), frozen spot values, mesh dispatch per case, a
// golden regression on one fixed run, and CSV/profile output determinism.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fracdg/cases.hpp"
#include "fracdg/study.hpp"

using namespace fracdg;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char ch : text)
    if (ch == '\n') ++n;
  return n;
}

// Pressure at a physical point, by scanning for a containing triangle.
double sample_pressure(const RunBundle& b, const Vec2& x) {
  const StaggeredMesh& sm = *b.sm;
  for (std::size_t t = 0; t < sm.tris.size(); ++t) {
    const StagTri& tr = sm.tris[t];
    if (point_in_triangle(x, sm.pts[tr.v[0]], sm.pts[tr.v[1]], sm.pts[tr.v[2]], 1e-12))
      return b.sol.p.pressure_value(static_cast<int>(t), x);
  }
  throw std::runtime_error("sample_pressure: point not inside any triangle");
}

}  // namespace

TEST_CASE("manufactured cases satisfy their own interface and source relations") {
  for (const char* name : {"ex1-iso", "ex1-aniso", "ex3"}) {
    INFO("case " << name);
    CaseDefinition c = make_case(name);
    CaseCheck chk = check_case(c);
    CHECK(chk.has_exact);
    CHECK(chk.interface_eta <= 1e-12);
    CHECK(chk.interface_alpha <= 1e-12);
    // Sources versus fields by central differences (scaled by field size).
    CHECK(chk.grad_fd <= 1e-6);
    CHECK(chk.div_fd <= 1e-6);
    CHECK(chk.gamma_fd <= 1e-6);
  }
  for (const char* name : {"fivespot-permeable", "fivespot-impermeable"}) {
    CaseDefinition c = make_case(name);
    CaseCheck chk = check_case(c);
    CHECK_FALSE(chk.has_exact);
  }
}

TEST_CASE("unknown case name throws") {
  CHECK_THROWS_AS(make_case("no-such-case"), std::invalid_argument);
  CHECK_THROWS_AS(make_case(""), std::invalid_argument);
}

TEST_CASE("coefficient combinations per case") {
  CaseDefinition iso = make_case("ex1-iso");
  CHECK(iso.co.K1(0, 0) == Catch::Approx(0.5).epsilon(1e-14));
  CHECK(iso.co.K1(1, 1) == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(iso.co.K2(0, 0) == Catch::Approx(0.5).epsilon(1e-14));
  CHECK(iso.co.eta() == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(iso.co.alpha() == Catch::Approx(0.125).epsilon(1e-14));
  CHECK(iso.co.K_gamma() == Catch::Approx(1.0).epsilon(1e-14));

  CaseDefinition an = make_case("ex1-aniso");
  CHECK(an.co.K1(0, 0) == Catch::Approx(50.0).epsilon(1e-14));
  CHECK(an.co.K1(1, 1) == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(an.co.eta() == Catch::Approx(0.01).epsilon(1e-14));
  CHECK(an.co.alpha() == Catch::Approx(0.00125).epsilon(1e-14));
  CHECK(an.co.K_gamma() == Catch::Approx(1.0).epsilon(1e-14));

  CaseDefinition fp = make_case("fivespot-permeable");
  CHECK(fp.co.K1.isApprox(Eigen::Matrix2d::Identity()));
  CHECK(fp.co.eta() == Catch::Approx(0.01).epsilon(1e-14));
  CHECK(fp.co.K_gamma() == Catch::Approx(1.0).epsilon(1e-14));

  CaseDefinition fi = make_case("fivespot-impermeable");
  CHECK(fi.co.eta() == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(fi.co.K_gamma() == Catch::Approx(0.01).epsilon(1e-14));
}

TEST_CASE("frozen spot values of the manufactured fields") {
  const double A = std::cos(2.0) + std::sin(2.0);

  SECTION("ex1: trigonometric solution with vertical fracture") {
    CaseDefinition c = make_case("ex1-iso");
    CHECK(c.frac_a.isApprox(Vec2(0.5, 0.0)));
    CHECK(c.frac_b.isApprox(Vec2(0.5, 1.0)));
    CHECK(c.exact.p(Vec2(0.25, 0.3), 1) ==
          Catch::Approx(std::sin(1.0) * std::cos(0.3 * pi)).epsilon(1e-14));
    CHECK(c.exact.p(Vec2(0.8, 0.3), 2) ==
          Catch::Approx(std::cos(3.2) * std::cos(0.3 * pi)).epsilon(1e-14));
    Vec2 u1 = c.exact.u(Vec2(0.25, 0.3), 1);
    CHECK(u1.x() == Catch::Approx(-2.0 * std::cos(1.0) * std::cos(0.3 * pi)).epsilon(1e-13));
    CHECK(u1.y() == Catch::Approx(pi * std::sin(1.0) * std::sin(0.3 * pi)).epsilon(1e-13));
    CHECK(c.exact.p_gamma(Vec2(0.5, 0.25)) ==
          Catch::Approx(0.75 * A * std::cos(0.25 * pi)).epsilon(1e-14));
    CHECK(c.exact.dpG_ds(Vec2(0.5, 0.25)) ==
          Catch::Approx(-0.75 * A * pi * std::sin(0.25 * pi)).epsilon(1e-13));
    // Bulk and fracture sources at the same points.
    CHECK(c.sources.f(Vec2(0.25, 0.3), 1) ==
          Catch::Approx((8.0 + pi * pi) * std::sin(1.0) * std::cos(0.3 * pi)).epsilon(1e-13));
    CHECK(c.sources.ell_f_gamma(Vec2(0.5, 0.25)) ==
          Catch::Approx((0.75 * pi * pi + 2.0) * A * std::cos(0.25 * pi)).epsilon(1e-13));
    // Boundary data restrict the exact fields.
    CHECK(c.bdata.p0(Vec2(0.0, 0.3), 1) == Catch::Approx(0.0).margin(1e-15));
    CHECK(c.bdata.p0(Vec2(1.0, 0.3), 2) ==
          Catch::Approx(std::cos(4.0) * std::cos(0.3 * pi)).epsilon(1e-13));
    CHECK(c.bdata.g_gamma(Vec2(0.5, 0.0)) == Catch::Approx(0.75 * A).epsilon(1e-14));
    CHECK(c.bdata.g_gamma(Vec2(0.5, 1.0)) == Catch::Approx(-0.75 * A).epsilon(1e-13));
    CHECK(c.btag(Vec2(0.0, 0.5)) == BoundaryTag::dirichlet);
    CHECK(c.btag(Vec2(0.5, 0.0)) == BoundaryTag::dirichlet);
  }

  SECTION("ex3: boundary-layer factor exp(10 y) sin(pi y)") {
    CaseDefinition c = make_case("ex3");
    const double E = std::exp(5.0);  // e^{10 y} at y = 1/2
    double mid = c.exact.p_gamma(Vec2(0.5, 0.5));
    CHECK(mid == Catch::Approx(0.75 * A * E).epsilon(1e-13));
    CHECK(std::abs(mid - 54.8982) < 0.01);
    CHECK(c.exact.p(Vec2(0.25, 0.5), 1) ==
          Catch::Approx(std::sin(1.0) * E).epsilon(1e-13));
  }

  SECTION("five-spot: smoothed corner source and diagonal fracture") {
    CaseDefinition c = make_case("fivespot-permeable");
    CHECK(c.frac_a.isApprox(Vec2(1.0, 0.0)));
    CHECK(c.frac_b.isApprox(Vec2(0.0, 1.0)));
    // Near the injection corner both tanh terms saturate: f -> 2 * 10.1.
    CHECK(c.sources.f(Vec2(0.0, 0.0), 1) == Catch::Approx(20.2).margin(1e-9));
    CHECK(c.sources.f(Vec2(1.0, 1.0), 2) == Catch::Approx(-20.2).margin(1e-9));
    // Equidistant from both corners the two terms cancel exactly.
    CHECK(c.sources.f(Vec2(0.5, 0.5), 1) == 0.0);
    CHECK(c.sources.ell_f_gamma(Vec2(0.5, 0.5)) == 0.0);
    // No-flow on the x = 0 and y = 0 sides, fixed pressure elsewhere.
    CHECK(c.btag(Vec2(0.0, 0.5)) == BoundaryTag::neumann);
    CHECK(c.btag(Vec2(0.5, 0.0)) == BoundaryTag::neumann);
    CHECK(c.btag(Vec2(1.0, 0.5)) == BoundaryTag::dirichlet);
    CHECK(c.btag(Vec2(0.5, 1.0)) == BoundaryTag::dirichlet);
    CHECK(c.bdata.p0(Vec2(1.0, 0.5), 2) == 0.0);
    CHECK(c.bdata.g_n(Vec2(0.0, 0.5)) == 0.0);
    CHECK(c.bdata.g_gamma(Vec2(0.5, 0.5)) == 0.0);
  }
}

TEST_CASE("mesh dispatch per case and level scaling") {
  CHECK(level_to_n(1) == 4);
  CHECK(level_to_n(3) == 16);
  CHECK(level_to_seeds(1) == 64);
  CHECK(level_to_seeds(2) == 256);
  CHECK(level_to_seeds(3) == 1024);

  CaseDefinition ex1 = make_case("ex1-iso");
  CaseDefinition five = make_case("fivespot-permeable");

  SECTION("vertical-fracture case gets fitted grids") {
    PolygonalMesh r = make_mesh(ex1, MeshKind::rect, 1, 0.001, 7);
    CHECK(r.cells.size() == 16);
    CHECK(r.fracture_chain.size() == 5);
    CHECK(r.fracture_edges().size() == 4);
    PolygonalMesh t = make_mesh(ex1, MeshKind::tri, 1, 0.001, 7);
    CHECK(t.cells.size() == 32);
  }

  SECTION("diagonal fracture splits the background grid") {
    PolygonalMesh m = make_mesh(five, MeshKind::rect, 1, 0.001, 7);
    // The diagonal passes corner-to-corner through 4 of the 16 cells.
    CHECK(m.cells.size() == 20);
    CHECK(m.fracture_edges().size() == 4);
    StaggeredMesh sm = build_staggered(m);
    CHECK(sm.gamma_length == Catch::Approx(std::numbers::sqrt2).epsilon(1e-13));
    // Neumann tags land on the x = 0 and y = 0 sides only.
    int n_neu = 0, n_dir = 0;
    for (const auto& [key, tag] : m.boundary)
      (tag == BoundaryTag::neumann ? n_neu : n_dir)++;
    CHECK(n_neu == 8);
    CHECK(n_dir == 8);
  }

  SECTION("perturbed and mapped kinds require the vertical fracture") {
    CHECK_THROWS_AS(make_mesh(five, MeshKind::perturbed, 1, 0.25, 7), std::invalid_argument);
    CHECK_THROWS_AS(make_mesh(five, MeshKind::mapped_rect, 1, 0.001, 7), std::invalid_argument);
    PolygonalMesh p = make_mesh(ex1, MeshKind::perturbed, 1, 0.25, 7);
    std::size_t biggest = 0;
    for (const auto& cell : p.cells) biggest = std::max(biggest, cell.size());
    CHECK(biggest == 5);
  }

  SECTION("mapped rectangles keep the unit domain and the fracture line") {
    PolygonalMesh m = make_mesh(ex1, MeshKind::mapped_rect, 1, 0.001, 7);
    CHECK(m.total_area() == Catch::Approx(1.0).epsilon(1e-13));
    bool found = false;
    for (const Vec2& v : m.vertices)
      if (std::abs(v.x() - 0.25) < 1e-14 && std::abs(v.y() - std::sin(pi / 8.0)) < 1e-13) found = true;
    CHECK(found);  // image of (1/4, 1/4) under y -> sin(pi y / 2)
    StaggeredMesh sm = build_staggered(m);
    CHECK(sm.gamma_length == Catch::Approx(1.0).epsilon(1e-13));
  }

  SECTION("unfitted kind splits a fracture-free Voronoi background") {
    PolygonalMesh m = make_mesh(ex1, MeshKind::unfitted, 1, 0.001, 7);
    REQUIRE(m.fracture_chain.size() >= 2);
    for (int v : m.fracture_chain) CHECK(std::abs(m.vertices[v].x() - 0.5) < 1e-9);
    CHECK(m.total_area() == Catch::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("golden regression: ex1-iso on the 8x8 fitted grid at k = 1") {
  CaseDefinition c = make_case("ex1-iso");
  StudyOptions opt;
  opt.mesh = MeshKind::rect;
  RunRecord r = run_record(c, opt, 1, 2);
  REQUIRE(r.ok);
  CHECK(r.h == Catch::Approx(0.125).epsilon(1e-14));
  std::printf("golden ex1-iso rect L2 k1: err_u=%.17g err_p=%.17g err_pG=%.17g super_p=%.17g super_pG=%.17g\n",
              r.err.err_u, r.err.err_p, r.err.err_pG, r.err.super_p, r.err.super_pG);
  // Reference values from this solver at the stated configuration; guards
  // against silent regressions anywhere in the mesh -> solve -> error chain.
  CHECK(r.err.err_u == Catch::Approx(0.020986756431830431).epsilon(1e-8));
  CHECK(r.err.err_p == Catch::Approx(0.0038101686123289216).epsilon(1e-8));
  CHECK(r.err.err_pG == Catch::Approx(0.0034633452912162539).epsilon(1e-8));
  CHECK(r.err.super_p == Catch::Approx(0.024920073843528717).epsilon(1e-8));
  CHECK(r.err.super_pG == Catch::Approx(0.0017276659594966512).epsilon(1e-8));
}

TEST_CASE("study driver writes deterministic CSV and convergence data") {
  StudyOptions opt;
  opt.case_name = "ex1-iso";
  opt.mesh = MeshKind::rect;
  opt.ks = {1};
  opt.levels = 2;
  opt.threads = 1;

  auto run_into = [&](const std::string& dir) {
    StudyOptions o = opt;
    o.out_dir = dir;
    fs::remove_all(dir);
    std::ostringstream log;
    REQUIRE(run_study(o, log) == 0);
    CHECK(log.str().find("least-squares slopes") != std::string::npos);
    return read_file(dir + "/ex1-iso_rect.csv");
  };

  std::string a = run_into("cases_tmp_a");
  std::string b = run_into("cases_tmp_b");
  CHECK(a == b);  // byte-identical across repeated runs

  std::istringstream in(a);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "case,mesh_kind,k,level,h,ndof_u,ndof_p,ndof_pG,err_u,err_p,err_pG,super_p,super_pG,"
        "rate_u,rate_p,rate_pG");
  CHECK(count_lines(a) == 3);  // header + one row per level
  // The level-2 row carries pairwise rates; level 1 has none.
  std::string row1, row2;
  std::getline(in, row1);
  std::getline(in, row2);
  CHECK(row1.substr(row1.size() - 3) == ",,,");
  CHECK(row2.find(",,,") == std::string::npos);
  CHECK(fs::exists("cases_tmp_a/ex1-iso_rect_k1_convergence.dat"));
  fs::remove_all("cases_tmp_a");
  fs::remove_all("cases_tmp_b");
}

TEST_CASE("five-spot smoke run: extrema, symmetry, profiles") {
  CaseDefinition cp = make_case("fivespot-permeable");
  RunBundle bp = run_single(cp, make_mesh(cp, MeshKind::rect, 2, 0.001, 7), 1);
  FiveSpotReport fr = fivespot_report(bp);
  CHECK(fr.pmax > fr.pmin);
  // Injection drives the maximum toward (0,0) and the minimum toward (1,1).
  CHECK(fr.argmax.norm() < (fr.argmax - Vec2(1.0, 1.0)).norm());
  CHECK((fr.argmin - Vec2(1.0, 1.0)).norm() < fr.argmin.norm());

  // The continuous problem is invariant under (x, y) -> (y, x).  The discrete
  // solution is not bit-for-bit symmetric (triangle orientations place the
  // quadrature nodes asymmetrically), but the asymmetry is discretization
  // error and vanishes under refinement (2.5e-5 / 1.3e-5 / 1.7e-6 at levels
  // 2/3/4 against a pressure range of 0.9).  Gate well below the O(1) signal
  // a swapped boundary tag or source would produce.
  double p1 = sample_pressure(bp, Vec2(0.28, 0.67));
  double p2 = sample_pressure(bp, Vec2(0.67, 0.28));
  CHECK(std::abs(p1 - p2) <= 1e-3);

  // A blocking fracture shows a larger pressure jump at the midpoint.
  CaseDefinition ci = make_case("fivespot-impermeable");
  RunBundle bi = run_single(ci, make_mesh(ci, MeshKind::rect, 2, 0.001, 7), 1);
  FiveSpotReport fi = fivespot_report(bi);
  CHECK(fi.midpoint_jump > fr.midpoint_jump);

  write_diagonal_profile(bp, "cases_tmp_diag.dat", 64);
  write_gamma_profile(bp, "cases_tmp_gamma.dat", 64);
  CHECK(count_lines(read_file("cases_tmp_diag.dat")) == 65);
  CHECK(count_lines(read_file("cases_tmp_gamma.dat")) == 65);
  fs::remove("cases_tmp_diag.dat");
  fs::remove("cases_tmp_gamma.dat");
}
