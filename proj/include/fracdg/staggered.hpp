// Staggered simplicial submesh of a polygonal mesh: every cell is fanned into
// triangles from an interior point (centroid, or Chebyshev center of the cell
// kernel when the centroid fails the star test).  Each triangle has exactly
// one base edge (a primal mesh edge or a fracture edge) and two dual edges
// shared with neighbor triangles of the same cell.  Edge classes:
//   primal_interior  interior mesh edges (pressure continuity edges)
//   primal_boundary  boundary mesh edges (carry Dirichlet/Neumann tags)
//   fracture         edges on the fracture, two one-sided neighbor triangles
//   dual             interior fan edges (flux continuity edges)
// Normal conventions: interior and dual edges point from the lower to the
// higher triangle id, fracture edges point from subdomain 1 to subdomain 2,
// boundary edges point outward.

#pragma once

#include "fracdg/polymesh.hpp"

namespace fracdg {

enum class EdgeClass { primal_interior, primal_boundary, fracture, dual };

struct StagEdge {
  EdgeClass cls;
  int a, b;            // endpoint ids, a < b; moment functionals parameterized from a to b
  int t1 = -1, t2 = -1;
  Vec2 n = Vec2::Zero();
  double len = 0.0;
  BoundaryTag tag = BoundaryTag::dirichlet;  // primal_boundary only
  int cell = -1;       // dual only
};

struct StagTri {
  std::array<int, 3> v;          // v[0], v[1] = base edge CCW in the cell, v[2] = interior point
  int cell = 0;
  int subdomain = 1;
  int base = -1;                 // edge id (primal or fracture)
  std::array<int, 2> dual = {-1, -1};  // dual[j] contains vertex v[j]
  double area = 0.0, diam = 0.0;
};

struct StaggeredMesh {
  PolygonalMesh poly;
  std::vector<Vec2> pts;          // polygon vertices then interior points
  std::vector<int> cell_center;   // per cell, point id of the interior point
  std::vector<StagTri> tris;
  std::vector<StagEdge> edges;
  std::vector<int> primal_interior, primal_boundary, fracture, dual;  // edge ids by class
  std::vector<int> cell_tri_begin;  // tris of cell c are [begin[c], begin[c+1])
  double h = 0.0;                 // max triangle diameter

  // Fracture chain bookkeeping for the 1D space: edge ids in chain order,
  // arclength of each edge start, unit tangent, total length.
  std::vector<int> fracture_chain_edges;
  std::vector<double> fracture_s0;
  Vec2 t_gamma = Vec2::Zero();
  Vec2 gamma_origin = Vec2::Zero();
  double gamma_length = 0.0;

  const Vec2& point(int id) const { return pts[id]; }
  Vec2 gamma_point(double s) const { return gamma_origin + s * t_gamma; }
  Vec2 n_gamma() const { return Vec2(t_gamma.y(), -t_gamma.x()); }

  /// Triangles of the dual region D(e); fracture edges report one triangle
  /// per side (side = 0 or 1).
  std::vector<int> dual_region(int e, int side = 0) const {
    const StagEdge& ed = edges[e];
    switch (ed.cls) {
      case EdgeClass::primal_interior:
      case EdgeClass::dual: return {ed.t1, ed.t2};
      case EdgeClass::primal_boundary: return {ed.t1};
      case EdgeClass::fracture: return {side == 0 ? ed.t1 : ed.t2};
    }
    return {};
  }

  void validate() const;
};

namespace detail {

/// Interior point for the fan: centroid if the fan triangles are uniformly
/// positive, else the Chebyshev center of the cell kernel.
inline Vec2 interior_point(const std::vector<Vec2>& poly, int cell_id) {
  auto star_ok = [&](const Vec2& nu) {
    double amin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Vec2& a = poly[i];
      const Vec2& b = poly[(i + 1) % poly.size()];
      amin = std::min(amin, cross2(b - a, nu - a));
    }
    return amin > 1e-14 * polygon_diameter(poly) * polygon_diameter(poly);
  };
  Vec2 c = polygon_centroid(poly);
  if (star_ok(c)) return c;
  auto [x, r] = chebyshev_center(polygon_halfplanes(poly));
  if (r <= 0.0 || !star_ok(x))
    throw std::runtime_error("build_staggered: cell " + std::to_string(cell_id) + " has no usable interior point");
  return x;
}

}  // namespace detail

inline StaggeredMesh build_staggered(const PolygonalMesh& pm) {
  pm.validate();
  StaggeredMesh sm;
  sm.poly = pm;
  sm.pts = pm.vertices;

  const auto frac_set = pm.fracture_edges();
  std::map<EdgeKey, int> edge_of;
  auto get_edge = [&](int a, int b, EdgeClass cls) {
    EdgeKey key = edge_key(a, b);
    auto it = edge_of.find(key);
    if (it != edge_of.end()) return it->second;
    StagEdge e;
    e.cls = cls;
    e.a = key.first;
    e.b = key.second;
    e.len = (sm.pts[e.a] - sm.pts[e.b]).norm();
    int id = static_cast<int>(sm.edges.size());
    sm.edges.push_back(e);
    edge_of[key] = id;
    return id;
  };

  // Fan each cell into triangles and create dual edges.
  sm.cell_tri_begin.assign(pm.cells.size() + 1, 0);
  for (std::size_t c = 0; c < pm.cells.size(); ++c) {
    const auto& loop = pm.cells[c];
    std::vector<Vec2> pts = pm.cell_points(static_cast<int>(c));
    Vec2 nu = detail::interior_point(pts, static_cast<int>(c));
    int nu_id = static_cast<int>(sm.pts.size());
    sm.pts.push_back(nu);
    sm.cell_center.push_back(nu_id);

    const int nl = static_cast<int>(loop.size());
    int t0 = static_cast<int>(sm.tris.size());
    for (int i = 0; i < nl; ++i) {
      StagTri t;
      t.v = {loop[i], loop[(i + 1) % nl], nu_id};
      t.cell = static_cast<int>(c);
      t.subdomain = pm.subdomain[c];
      t.area = 0.5 * cross2(sm.pts[t.v[1]] - sm.pts[t.v[0]], sm.pts[t.v[2]] - sm.pts[t.v[0]]);
      if (t.area <= 0.0)
        throw std::runtime_error("build_staggered: non-positive triangle in cell " + std::to_string(c));
      t.diam = std::max({(sm.pts[t.v[0]] - sm.pts[t.v[1]]).norm(), (sm.pts[t.v[1]] - sm.pts[t.v[2]]).norm(),
                         (sm.pts[t.v[2]] - sm.pts[t.v[0]]).norm()});
      bool on_frac = frac_set.count(edge_key(loop[i], loop[(i + 1) % nl])) > 0;
      t.base = get_edge(loop[i], loop[(i + 1) % nl], on_frac ? EdgeClass::fracture : EdgeClass::primal_interior);
      t.dual[0] = get_edge(loop[i], nu_id, EdgeClass::dual);
      t.dual[1] = get_edge(loop[(i + 1) % nl], nu_id, EdgeClass::dual);
      sm.edges[t.dual[0]].cell = static_cast<int>(c);
      sm.edges[t.dual[1]].cell = static_cast<int>(c);
      sm.tris.push_back(t);
      sm.h = std::max(sm.h, t.diam);
    }
    sm.cell_tri_begin[c] = t0;
  }
  sm.cell_tri_begin[pm.cells.size()] = static_cast<int>(sm.tris.size());

  // Attach triangles to edges.
  for (std::size_t t = 0; t < sm.tris.size(); ++t)
    for (int e : {sm.tris[t].base, sm.tris[t].dual[0], sm.tris[t].dual[1]}) {
      StagEdge& ed = sm.edges[e];
      if (ed.t1 < 0)
        ed.t1 = static_cast<int>(t);
      else if (ed.t2 < 0)
        ed.t2 = static_cast<int>(t);
      else
        throw std::runtime_error("build_staggered: edge with more than two triangles");
    }

  // Classify, orient and index the edges.
  for (std::size_t e = 0; e < sm.edges.size(); ++e) {
    StagEdge& ed = sm.edges[e];
    Vec2 d = sm.pts[ed.b] - sm.pts[ed.a];
    ed.n = Vec2(d.y(), -d.x()) / ed.len;
    if (ed.cls != EdgeClass::dual && ed.t2 < 0) {
      ed.cls = EdgeClass::primal_boundary;
      auto it = pm.boundary.find({ed.a, ed.b});
      if (it == pm.boundary.end()) throw std::runtime_error("build_staggered: boundary edge without tag");
      ed.tag = it->second;
    }
    auto centroid = [&](int t) {
      const auto& v = sm.tris[t].v;
      return Vec2((sm.pts[v[0]] + sm.pts[v[1]] + sm.pts[v[2]]) / 3.0);
    };
    switch (ed.cls) {
      case EdgeClass::primal_boundary:
        if (ed.n.dot(centroid(ed.t1) - 0.5 * (sm.pts[ed.a] + sm.pts[ed.b])) > 0.0) ed.n = -ed.n;
        sm.primal_boundary.push_back(static_cast<int>(e));
        break;
      case EdgeClass::fracture: {
        if (sm.tris[ed.t1].subdomain != 1) std::swap(ed.t1, ed.t2);
        if (sm.tris[ed.t1].subdomain != 1 || sm.tris[ed.t2].subdomain != 2)
          throw std::runtime_error("build_staggered: fracture edge sides are inconsistent");
        if (ed.n.dot(centroid(ed.t2) - centroid(ed.t1)) < 0.0) ed.n = -ed.n;
        sm.fracture.push_back(static_cast<int>(e));
        break;
      }
      case EdgeClass::primal_interior:
      case EdgeClass::dual:
        if (ed.t1 > ed.t2) std::swap(ed.t1, ed.t2);
        if (ed.n.dot(centroid(ed.t2) - centroid(ed.t1)) < 0.0) ed.n = -ed.n;
        (ed.cls == EdgeClass::dual ? sm.dual : sm.primal_interior).push_back(static_cast<int>(e));
        break;
    }
  }

  // Fracture chain order and arclength offsets.
  if (pm.fracture_chain.size() >= 2) {
    LineRef line = pm.fracture_line();
    sm.t_gamma = line.t;
    sm.gamma_origin = pm.vertices[pm.fracture_chain.front()];
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < pm.fracture_chain.size(); ++i) {
      int a = pm.fracture_chain[i], b = pm.fracture_chain[i + 1];
      auto it = edge_of.find(edge_key(a, b));
      if (it == edge_of.end()) throw std::runtime_error("build_staggered: fracture chain edge missing");
      sm.fracture_chain_edges.push_back(it->second);
      sm.fracture_s0.push_back(s);
      s += sm.edges[it->second].len;
    }
    sm.gamma_length = s;
  }

  sm.validate();
  return sm;
}

inline void StaggeredMesh::validate() const {
  double tri_area = 0.0;
  for (const auto& t : tris) tri_area += t.area;
  double cell_area = poly.total_area();
  if (std::abs(tri_area - cell_area) > 1e-12 * cell_area)
    throw std::runtime_error("StaggeredMesh: triangles do not partition the cells");

  std::size_t n_base = 0;
  for (const auto& t : tris) {
    const StagEdge& b = edges[t.base];
    if (b.cls != EdgeClass::primal_interior && b.cls != EdgeClass::primal_boundary && b.cls != EdgeClass::fracture)
      throw std::runtime_error("StaggeredMesh: triangle base is not a primal or fracture edge");
    for (int j : {0, 1}) {
      const StagEdge& d = edges[t.dual[j]];
      if (d.cls != EdgeClass::dual) throw std::runtime_error("StaggeredMesh: triangle dual edge misclassified");
      if (d.cell != t.cell) throw std::runtime_error("StaggeredMesh: dual edge crosses a cell boundary");
    }
    ++n_base;
  }
  (void)n_base;

  for (std::size_t e = 0; e < edges.size(); ++e) {
    const StagEdge& ed = edges[e];
    switch (ed.cls) {
      case EdgeClass::dual:
        if (ed.t1 < 0 || ed.t2 < 0) throw std::runtime_error("StaggeredMesh: dual edge with one triangle");
        if (tris[ed.t1].cell != tris[ed.t2].cell)
          throw std::runtime_error("StaggeredMesh: dual edge between different cells");
        if (ed.t1 > ed.t2) throw std::runtime_error("StaggeredMesh: dual edge orientation broken");
        break;
      case EdgeClass::primal_interior:
        if (ed.t1 < 0 || ed.t2 < 0) throw std::runtime_error("StaggeredMesh: interior edge with one triangle");
        if (tris[ed.t1].cell == tris[ed.t2].cell)
          throw std::runtime_error("StaggeredMesh: primal edge inside a cell");
        if (tris[ed.t1].subdomain != tris[ed.t2].subdomain)
          throw std::runtime_error("StaggeredMesh: subdomain jump across a primal edge");
        break;
      case EdgeClass::fracture:
        if (tris[ed.t1].subdomain != 1 || tris[ed.t2].subdomain != 2)
          throw std::runtime_error("StaggeredMesh: fracture edge sides misordered");
        break;
      case EdgeClass::primal_boundary:
        if (ed.t2 >= 0) throw std::runtime_error("StaggeredMesh: boundary edge with two triangles");
        break;
    }
  }
  if (primal_interior.size() + primal_boundary.size() + fracture.size() + dual.size() != edges.size())
    throw std::runtime_error("StaggeredMesh: edge class partition broken");
}

/// Shape diagnostics: rho_S = kernel Chebyshev radius / cell diameter,
/// rho_E = shortest edge / cell diameter, plus the largest triangle angle.
struct MeshQuality {
  std::vector<double> rho_S, rho_E;  // per cell
  double min_rho_S = 0.0, min_rho_E = 0.0, max_angle = 0.0;
};

inline MeshQuality mesh_quality(const PolygonalMesh& pm) {
  MeshQuality q;
  q.min_rho_S = q.min_rho_E = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < pm.cells.size(); ++c) {
    auto pts = pm.cell_points(static_cast<int>(c));
    double diam = polygon_diameter(pts);
    auto [x, r] = chebyshev_center(polygon_halfplanes(pts));
    (void)x;
    double emin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i)
      emin = std::min(emin, (pts[(i + 1) % pts.size()] - pts[i]).norm());
    q.rho_S.push_back(std::max(r, 0.0) / diam);
    q.rho_E.push_back(emin / diam);
    q.min_rho_S = std::min(q.min_rho_S, q.rho_S.back());
    q.min_rho_E = std::min(q.min_rho_E, q.rho_E.back());
  }
  return q;
}

inline MeshQuality mesh_quality(const StaggeredMesh& sm) {
  MeshQuality q = mesh_quality(sm.poly);
  for (const auto& t : sm.tris) {
    std::array<double, 3> l = {(sm.pts[t.v[1]] - sm.pts[t.v[2]]).norm(), (sm.pts[t.v[2]] - sm.pts[t.v[0]]).norm(),
                               (sm.pts[t.v[0]] - sm.pts[t.v[1]]).norm()};
    for (int i = 0; i < 3; ++i) {
      double c = (l[(i + 1) % 3] * l[(i + 1) % 3] + l[(i + 2) % 3] * l[(i + 2) % 3] - l[i] * l[i]) /
                 (2.0 * l[(i + 1) % 3] * l[(i + 2) % 3]);
      q.max_angle = std::max(q.max_angle, std::acos(std::clamp(c, -1.0, 1.0)));
    }
  }
  return q;
}

}  // namespace fracdg
