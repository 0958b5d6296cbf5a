// Mesh layer: uniform generators, small-edge perturbation, anisotropic map,
// unfitted splitting, centroidal Voronoi meshes, JSON round-trip, and the
// staggered simplicial submesh with its edge classification.

#include <catch2/catch_amalgamated.hpp>
#include <cstdio>

#include "fracdg/meshgen.hpp"
#include "fracdg/staggered.hpp"
#include "fracdg/voronoi.hpp"

using namespace fracdg;

TEST_CASE("uniform rectangular mesh with vertical fracture") {
  PolygonalMesh m = generate_uniform(GridKind::rectangular, 2, 0.5);
  m.validate();
  CHECK(m.vertices.size() == 9);
  CHECK(m.cells.size() == 4);
  CHECK(m.fracture_chain.size() == 3);
  CHECK(m.fracture_edges().size() == 2);
  CHECK(m.total_area() == Catch::Approx(1.0).margin(1e-14));

  // Side 1 is the side the fracture normal points away from: here x < 1/2.
  for (std::size_t c = 0; c < m.cells.size(); ++c) {
    Vec2 ctr = polygon_centroid(m.cell_points(static_cast<int>(c)));
    CHECK(m.subdomain[c] == (ctr.x() < 0.5 ? 1 : 2));
  }

  // Edge census: 12 edges, 8 boundary.
  auto ec = m.edge_cells();
  CHECK(ec.size() == 12);
  CHECK(m.boundary.size() == 8);

  CHECK_THROWS_AS(generate_uniform(GridKind::rectangular, 2, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(generate_uniform(GridKind::rectangular, 2, 1.0), std::invalid_argument);
}

TEST_CASE("uniform triangular mesh") {
  PolygonalMesh m = generate_uniform(GridKind::triangular, 2, 0.5);
  m.validate();
  CHECK(m.cells.size() == 8);
  CHECK(m.fracture_edges().size() == 2);
  CHECK(m.total_area() == Catch::Approx(1.0).margin(1e-14));
  StaggeredMesh sm = build_staggered(m);
  CHECK(sm.tris.size() == 24);
}

TEST_CASE("staggered submesh of the 2x2 rectangular mesh") {
  StaggeredMesh sm = build_staggered(generate_uniform(GridKind::rectangular, 2, 0.5));
  CHECK(sm.tris.size() == 16);
  CHECK(sm.dual.size() == 16);
  CHECK(sm.primal_interior.size() == 2);
  CHECK(sm.primal_boundary.size() == 8);
  CHECK(sm.fracture.size() == 2);
  CHECK(sm.h == Catch::Approx(0.5));

  double area = 0.0;
  for (const auto& t : sm.tris) area += t.area;
  CHECK(area == Catch::Approx(1.0).margin(1e-14));

  // Fracture chain runs bottom to top with the normal pointing into side 2.
  CHECK(sm.gamma_length == Catch::Approx(1.0));
  CHECK(sm.t_gamma.x() == Catch::Approx(0.0).margin(1e-15));
  CHECK(sm.t_gamma.y() == Catch::Approx(1.0));
  CHECK(sm.n_gamma().x() == Catch::Approx(1.0));
  Vec2 gp = sm.gamma_point(0.25);
  CHECK(gp.x() == Catch::Approx(0.5));
  CHECK(gp.y() == Catch::Approx(0.25));
  REQUIRE(sm.fracture_s0.size() == 2);
  CHECK(sm.fracture_s0[0] == Catch::Approx(0.0).margin(1e-15));
  CHECK(sm.fracture_s0[1] == Catch::Approx(0.5));
  for (int e : sm.fracture) {
    const StagEdge& ed = sm.edges[e];
    CHECK(sm.tris[ed.t1].subdomain == 1);
    CHECK(sm.tris[ed.t2].subdomain == 2);
    CHECK(ed.n.dot(sm.n_gamma()) == Catch::Approx(1.0));
  }

  // Boundary normals point outward.
  for (int e : sm.primal_boundary) {
    const StagEdge& ed = sm.edges[e];
    Vec2 mid = 0.5 * (sm.pts[ed.a] + sm.pts[ed.b]);
    const auto& v = sm.tris[ed.t1].v;
    Vec2 ctr = (sm.pts[v[0]] + sm.pts[v[1]] + sm.pts[v[2]]) / 3.0;
    CHECK(ed.n.dot(mid - ctr) > 0.0);
  }

  // Dual edges stay inside one cell and each triangle sees its own base.
  for (const auto& t : sm.tris) {
    CHECK((sm.edges[t.base].cls == EdgeClass::fracture ||
           sm.edges[t.base].cls == EdgeClass::primal_interior ||
           sm.edges[t.base].cls == EdgeClass::primal_boundary));
    for (int j : {0, 1}) CHECK(sm.edges[t.dual[j]].cell == t.cell);
  }
}

TEST_CASE("json round-trip preserves the mesh") {
  PolygonalMesh m = generate_uniform(GridKind::rectangular, 4, 0.5);
  retag_boundary(m, [](const Vec2& x) {
    return (x.x() < 1e-9 || x.y() < 1e-9) ? BoundaryTag::neumann : BoundaryTag::dirichlet;
  });
  std::string path = "roundtrip_mesh.json";
  m.save(path);
  PolygonalMesh r = PolygonalMesh::load(path);
  std::remove(path.c_str());

  REQUIRE(r.vertices.size() == m.vertices.size());
  for (std::size_t v = 0; v < m.vertices.size(); ++v) CHECK((r.vertices[v] - m.vertices[v]).norm() == 0.0);
  CHECK(r.cells == m.cells);
  CHECK(r.fracture_chain == m.fracture_chain);
  CHECK(r.subdomain == m.subdomain);
  REQUIRE(r.boundary.size() == m.boundary.size());
  for (const auto& [key, tag] : m.boundary) {
    REQUIRE(r.boundary.count(key) == 1);
    CHECK(r.boundary.at(key) == tag);
  }
}

TEST_CASE("small-edge perturbation replaces block vertices by short diagonals") {
  PolygonalMesh base = generate_uniform(GridKind::rectangular, 4, 0.5);
  double d_ratio = 0.25;
  PolygonalMesh p = perturb_small_edges(base, d_ratio);
  p.validate();
  CHECK(p.cells.size() == 16);
  CHECK(p.total_area() == Catch::Approx(1.0).margin(1e-13));
  // Four interior block vertices off the fracture, each adds one vertex.
  CHECK(p.vertices.size() == base.vertices.size() + 4);

  int pentagons = 0, quads = 0;
  for (const auto& loop : p.cells) {
    if (loop.size() == 5) ++pentagons;
    if (loop.size() == 4) ++quads;
  }
  CHECK(pentagons == 8);
  CHECK(quads == 8);

  // The short diagonal has length sqrt(2) * d_ratio * h.
  double target = std::sqrt(2.0) * d_ratio * 0.25;
  int short_edges = 0;
  for (const auto& [key, adj] : p.edge_cells()) {
    (void)adj;
    double len = (p.vertices[key.first] - p.vertices[key.second]).norm();
    if (std::abs(len - target) < 1e-12) ++short_edges;
  }
  CHECK(short_edges == 4);

  // Fracture is untouched and the staggered build still works.
  CHECK(p.fracture_edges() == base.fracture_edges());
  StaggeredMesh sm = build_staggered(p);
  CHECK(sm.fracture.size() == 4);

  // Tiny d_ratio (the robustness regime) also builds cleanly.
  StaggeredMesh tiny = build_staggered(perturb_small_edges(base, 0.001));
  CHECK(tiny.poly.cells.size() == 16);

  // Block vertices on the fracture are skipped: for n = 2 the only block
  // vertex sits on the fracture, so nothing changes.
  PolygonalMesh m2 = perturb_small_edges(generate_uniform(GridKind::rectangular, 2, 0.5), 0.25);
  CHECK(m2.vertices.size() == 9);

  CHECK_THROWS_AS(perturb_small_edges(base, 0.6), std::invalid_argument);
  CHECK_THROWS_AS(perturb_small_edges(generate_uniform(GridKind::triangular, 4, 0.5), 0.25),
                  std::invalid_argument);
}

TEST_CASE("anisotropic map grades toward y = 1 and keeps the fracture vertical") {
  PolygonalMesh m = map_anisotropic(generate_uniform(GridKind::rectangular, 4, 0.5));
  m.validate();
  for (const auto& v : m.vertices) {
    CHECK(v.y() >= -1e-15);
    CHECK(v.y() <= 1.0 + 1e-15);
  }
  // Spot value: y = 1/2 maps to sin(pi/4).
  bool found = false;
  for (const auto& v : m.vertices)
    if (std::abs(v.x() - 0.25) < 1e-14 && std::abs(v.y() - std::sqrt(0.5)) < 1e-14) found = true;
  CHECK(found);
  for (int v : m.fracture_chain) CHECK(m.vertices[v].x() == Catch::Approx(0.5).margin(1e-15));
  StaggeredMesh sm = build_staggered(m);
  CHECK(sm.gamma_length == Catch::Approx(1.0));
  // Cells shrink toward y = 1: the top row is thinner than the bottom row.
  CHECK(1.0 - std::sin(0.375 * M_PI) < std::sin(0.125 * M_PI));
}

TEST_CASE("splitting along an existing grid line reproduces the fitted mesh") {
  PolygonalMesh bg = generate_uniform_background(GridKind::rectangular, 2);
  PolygonalMesh m = split_unfitted(bg, Vec2(0.5, 0.0), Vec2(0.5, 1.0));
  m.validate();
  CHECK(m.cells.size() == 4);
  CHECK(m.fracture_edges().size() == 2);
  CHECK(m.total_area() == Catch::Approx(1.0).margin(1e-14));
  StaggeredMesh sm = build_staggered(m);
  CHECK(sm.gamma_length == Catch::Approx(1.0));
}

TEST_CASE("splitting along the anti-diagonal cuts cells into triangles") {
  PolygonalMesh bg = generate_uniform_background(GridKind::rectangular, 2);
  PolygonalMesh m = split_unfitted(bg, Vec2(1.0, 0.0), Vec2(0.0, 1.0));
  m.validate();
  CHECK(m.cells.size() == 6);  // two cells cut in half, two untouched
  CHECK(m.fracture_chain.size() == 3);
  CHECK(m.total_area() == Catch::Approx(1.0).margin(1e-13));

  StaggeredMesh sm = build_staggered(m);
  CHECK(sm.gamma_length == Catch::Approx(std::sqrt(2.0)));
  CHECK(sm.fracture.size() == 2);
  // Side 1 is the origin side for this orientation.
  for (int e : sm.fracture) {
    int c1 = sm.tris[sm.edges[e].t1].cell;
    Vec2 ctr = polygon_centroid(m.cell_points(c1));
    CHECK(ctr.x() + ctr.y() < 1.0);
  }
}

TEST_CASE("splitting along a generic vertical line cuts cells into quads") {
  PolygonalMesh bg = generate_uniform_background(GridKind::rectangular, 2);
  PolygonalMesh m = split_unfitted(bg, Vec2(0.3, 0.0), Vec2(0.3, 1.0));
  m.validate();
  CHECK(m.cells.size() == 6);
  CHECK(m.vertices.size() == 12);
  CHECK(m.fracture_edges().size() == 2);
  CHECK(m.total_area() == Catch::Approx(1.0).margin(1e-13));
  // Pieces on the left of the line form subdomain 1 with total area 0.3.
  double a1 = 0.0;
  for (std::size_t c = 0; c < m.cells.size(); ++c)
    if (m.subdomain[c] == 1) a1 += polygon_area(m.cell_points(static_cast<int>(c)));
  CHECK(a1 == Catch::Approx(0.3).margin(1e-13));
  CHECK_THROWS_AS(split_unfitted(m, Vec2(0.3, 0.0), Vec2(0.3, 1.0)), std::invalid_argument);
}

TEST_CASE("centroidal voronoi mesh with aligned fracture") {
  VoronoiConfig cfg;
  cfg.n_seeds = 64;
  cfg.lloyd_iters = 100;
  cfg.seed = 7;
  PolygonalMesh m = generate_cvt(cfg);
  m.validate();
  CHECK(m.cells.size() == 64);
  CHECK(m.total_area() == Catch::Approx(1.0).margin(1e-10));
  CHECK(m.fracture_chain.size() >= 2);
  for (int v : m.fracture_chain) CHECK(m.vertices[v].x() == 0.5);

  StaggeredMesh sm = build_staggered(m);
  CHECK(sm.gamma_length == Catch::Approx(1.0).margin(1e-12));

  MeshQuality q = mesh_quality(sm);
  CHECK(q.min_rho_S > 0.05);
  CHECK(q.min_rho_E > 0.0);
  CHECK(q.max_angle < M_PI);

  // Determinism: identical config gives a bitwise identical mesh.
  PolygonalMesh m2 = generate_cvt(cfg);
  REQUIRE(m2.vertices.size() == m.vertices.size());
  for (std::size_t v = 0; v < m.vertices.size(); ++v) {
    CHECK(m2.vertices[v].x() == m.vertices[v].x());
    CHECK(m2.vertices[v].y() == m.vertices[v].y());
  }
  CHECK(m2.cells == m.cells);

  // A different seed gives a different interior.
  cfg.seed = 8;
  PolygonalMesh m3 = generate_cvt(cfg);
  bool same = m3.vertices.size() == m.vertices.size();
  if (same)
    for (std::size_t v = 0; v < m.vertices.size(); ++v)
      same = same && (m3.vertices[v] - m.vertices[v]).norm() < 1e-15;
  CHECK_FALSE(same);
}

TEST_CASE("fracture-free voronoi background splits cleanly") {
  VoronoiConfig cfg;
  cfg.n_seeds = 64;
  cfg.with_fracture = false;
  PolygonalMesh bg = generate_cvt(cfg);
  CHECK(bg.fracture_chain.empty());
  PolygonalMesh m = split_unfitted(bg, Vec2(0.5, 0.0), Vec2(0.5, 1.0));
  m.validate();
  CHECK(m.fracture_chain.size() >= 2);
  CHECK(m.total_area() == Catch::Approx(1.0).margin(1e-10));
  StaggeredMesh sm = build_staggered(m);
  CHECK(sm.gamma_length == Catch::Approx(1.0).margin(1e-12));
  CHECK(sm.fracture.size() == m.fracture_chain.size() - 1);
}

TEST_CASE("mesh quality of a single square cell") {
  PolygonalMesh m;
  m.vertices = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
  m.cells = {{0, 1, 2, 3}};
  m.subdomain = {1};
  for (auto key : {edge_key(0, 1), edge_key(1, 2), edge_key(2, 3), edge_key(3, 0)})
    m.boundary[key] = BoundaryTag::dirichlet;
  m.validate();
  MeshQuality q = mesh_quality(m);
  // Frozen oracle: inscribed radius 1/2 over diameter sqrt 2.
  CHECK(q.min_rho_S == Catch::Approx(1.0 / (2.0 * std::sqrt(2.0))).margin(1e-12));
  CHECK(q.min_rho_E == Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-12));
  StaggeredMesh sm = build_staggered(m);
  CHECK(sm.tris.size() == 4);
  CHECK(sm.fracture.empty());
}

TEST_CASE("boundary retagging by classifier") {
  PolygonalMesh m = generate_uniform(GridKind::rectangular, 2, 0.5);
  retag_boundary(m, [](const Vec2& x) {
    return (x.x() < 1e-9 || x.y() < 1e-9) ? BoundaryTag::neumann : BoundaryTag::dirichlet;
  });
  StaggeredMesh sm = build_staggered(m);
  int neumann = 0, dirichlet = 0;
  for (int e : sm.primal_boundary)
    (sm.edges[e].tag == BoundaryTag::neumann ? neumann : dirichlet)++;
  CHECK(neumann == 4);
  CHECK(dirichlet == 4);
}

TEST_CASE("validation rejects broken meshes") {
  PolygonalMesh m = generate_uniform(GridKind::rectangular, 2, 0.5);
  PolygonalMesh bad = m;
  std::reverse(bad.cells[0].begin(), bad.cells[0].end());  // clockwise cell
  CHECK_THROWS(bad.validate());

  bad = m;
  bad.subdomain[0] = 2;  // subdomain jump across a non-fracture edge
  CHECK_THROWS(bad.validate());

  bad = m;
  bad.boundary.erase(bad.boundary.begin());  // untagged boundary edge
  CHECK_THROWS(bad.validate());
}
