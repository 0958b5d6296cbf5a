// Mesh generators on the unit square: uniform rectangular / triangular grids
// with an aligned vertical fracture, the small-edge perturbation that replaces
// interior 2x2-block vertices by short diagonal edges, the anisotropic
// y -> sin(pi y / 2) vertex map, and splitting of an unfitted mesh along a
// straight fracture line (with a conformity pass so facing cells agree on the
// subdivision of fracture edges).

#pragma once

#include <functional>

#include "fracdg/polymesh.hpp"

namespace fracdg {

enum class GridKind { rectangular, triangular };

namespace detail {

inline void tag_all_boundary_dirichlet(PolygonalMesh& m) {
  m.boundary.clear();
  for (const auto& [key, adj] : m.edge_cells())
    if (adj.size() == 1) m.boundary[key] = BoundaryTag::dirichlet;
}

inline void label_subdomains_from_line(PolygonalMesh& m, const LineRef& line) {
  m.subdomain.assign(m.cells.size(), 1);
  for (std::size_t c = 0; c < m.cells.size(); ++c)
    m.subdomain[c] = line.signed_dist(polygon_centroid(m.cell_points(static_cast<int>(c)))) > 0.0 ? 1 : 2;
}

}  // namespace detail

/// Uniform n x n mesh of (0,1)^2 without a fracture; triangular grids split
/// each square along its lower-left to upper-right diagonal.
inline PolygonalMesh generate_uniform_background(GridKind kind, int n) {
  if (n < 1) throw std::invalid_argument("generate_uniform: n < 1");
  PolygonalMesh m;
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) m.vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (kind == GridKind::rectangular) {
        m.cells.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
      } else {
        m.cells.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
        m.cells.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
      }
    }
  m.subdomain.assign(m.cells.size(), 1);
  detail::tag_all_boundary_dirichlet(m);
  return m;
}

/// Uniform mesh with the vertical fracture x = fracture_x, which must lie on
/// an interior grid line.
inline PolygonalMesh generate_uniform(GridKind kind, int n, double fracture_x) {
  double fi = fracture_x * n;
  int i0 = static_cast<int>(std::lround(fi));
  if (std::abs(fi - i0) > 1e-12 * n || i0 <= 0 || i0 >= n)
    throw std::invalid_argument("generate_uniform: fracture_x is not an interior grid line");
  PolygonalMesh m = generate_uniform_background(kind, n);
  for (int j = 0; j <= n; ++j) m.fracture_chain.push_back(j * (n + 1) + i0);
  detail::label_subdomains_from_line(m, m.fracture_line());
  m.validate();
  return m;
}

/// Replace each interior 2x2-block vertex of a uniform rectangular mesh (even
/// n) by a diagonal edge of length sqrt(2) * d, d = d_ratio * h_e.  The two
/// cells on the diagonal become pentagons, the other two stay quadrilaterals.
/// Block vertices lying on the fracture are left untouched to preserve
/// fracture alignment.
inline PolygonalMesh perturb_small_edges(const PolygonalMesh& mesh, double d_ratio) {
  if (d_ratio <= 0.0 || d_ratio >= 0.5)
    throw std::invalid_argument("perturb_small_edges: d_ratio must lie in (0, 0.5)");
  for (const auto& loop : mesh.cells)
    if (loop.size() != 4) throw std::invalid_argument("perturb_small_edges: mesh is not rectangular");
  int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(mesh.cells.size()))));
  if (n * n != static_cast<int>(mesh.cells.size()) || n % 2 != 0)
    throw std::invalid_argument("perturb_small_edges: need a uniform n x n mesh with even n");

  PolygonalMesh m = mesh;
  const double h = 1.0 / n;
  const double d = d_ratio * h;
  const double tol = 1e-9 * h;
  double fx = m.fracture_chain.size() >= 2 ? m.vertices[m.fracture_chain.front()].x() : -1.0;

  // Locate vertices by coordinates (the generator's numbering is not assumed).
  std::map<std::pair<int, int>, int> grid;
  for (std::size_t v = 0; v < m.vertices.size(); ++v) {
    int i = static_cast<int>(std::lround(m.vertices[v].x() * n));
    int j = static_cast<int>(std::lround(m.vertices[v].y() * n));
    if ((m.vertices[v] - Vec2(static_cast<double>(i) / n, static_cast<double>(j) / n)).norm() > tol)
      throw std::invalid_argument("perturb_small_edges: mesh is not the uniform grid");
    grid[{i, j}] = static_cast<int>(v);
  }

  for (int bj = 1; bj < n; bj += 2)
    for (int bi = 1; bi < n; bi += 2) {
      Vec2 center(static_cast<double>(bi) / n, static_cast<double>(bj) / n);
      if (fx >= 0.0 && std::abs(center.x() - fx) <= tol) continue;
      int v0 = grid.at({bi, bj});
      int vminus = v0;  // reuse the slot for the lower-left endpoint
      int vplus = static_cast<int>(m.vertices.size());
      m.vertices.push_back(center + Vec2(d / 2, d / 2));
      m.vertices[vminus] = center - Vec2(d / 2, d / 2);
      for (auto& loop : m.cells) {
        auto it = std::find(loop.begin(), loop.end(), v0);
        if (it == loop.end()) continue;
        Vec2 ctr = Vec2::Zero();
        for (int v : loop) ctr += (v == v0 ? center : m.vertices[v]);
        ctr /= static_cast<double>(loop.size());
        bool east = ctr.x() > center.x(), north = ctr.y() > center.y();
        if (east && north) {
          *it = vplus;
        } else if (!east && !north) {
          *it = vminus;
        } else if (east && !north) {
          *it = vplus;
          loop.insert(std::next(it), vminus);
        } else {
          *it = vminus;
          loop.insert(std::next(it), vplus);
        }
      }
    }
  m.validate();
  return m;
}

/// Map all vertices by y -> sin(pi y / 2); grades the mesh toward y = 1 while
/// keeping vertical fractures vertical.
inline PolygonalMesh map_anisotropic(const PolygonalMesh& mesh) {
  PolygonalMesh m = mesh;
  for (auto& v : m.vertices) v.y() = std::sin(0.5 * M_PI * v.y());
  m.validate();
  return m;
}

/// Split a fracture-free mesh along a straight line spanning the domain.  Cut
/// cells (convex) are divided in two; vertices within tolerance of the line
/// are snapped onto it; edges collinear with the line become fracture edges.
/// A conformity pass subdivides every on-line edge by all on-line vertices it
/// contains, so the two sides share identical fracture edges.
inline PolygonalMesh split_unfitted(const PolygonalMesh& mesh, const Vec2& line_a, const Vec2& line_b) {
  if (!mesh.fracture_chain.empty())
    throw std::invalid_argument("split_unfitted: mesh already has a fracture");
  LineRef line(line_a, line_b);
  PolygonalMesh m;
  m.vertices = mesh.vertices;
  const double tol = 1e-10 * polygon_diameter(mesh.vertices);

  std::vector<double> dist(m.vertices.size());
  std::vector<char> online(m.vertices.size(), 0);
  for (std::size_t v = 0; v < m.vertices.size(); ++v) {
    double d = line.signed_dist(m.vertices[v]);
    if (std::abs(d) <= tol) {
      m.vertices[v] = line.project(m.vertices[v]);
      d = 0.0;
      online[v] = 1;
    }
    dist[v] = d;
  }

  PointMerger merger(tol);
  for (const auto& v : m.vertices) merger.insert(v);  // seed with existing vertices
  auto cut_point = [&](int u, int w) {
    double t = dist[u] / (dist[u] - dist[w]);
    Vec2 x = line.project(m.vertices[u] + t * (m.vertices[w] - m.vertices[u]));
    int id = merger.insert(x);
    if (id >= static_cast<int>(m.vertices.size())) {
      m.vertices.push_back(x);
      dist.push_back(0.0);
      online.push_back(1);
    }
    return id;
  };

  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const auto& loop = mesh.cells[c];
    bool pos = false, neg = false;
    for (int v : loop) {
      pos = pos || dist[v] > 0.0;
      neg = neg || dist[v] < 0.0;
    }
    if (!pos || !neg) {
      m.cells.push_back(loop);
      continue;
    }
    std::vector<int> plus, minus;
    const std::size_t nl = loop.size();
    for (std::size_t i = 0; i < nl; ++i) {
      int u = loop[i], w = loop[(i + 1) % nl];
      if (dist[u] >= 0.0) plus.push_back(u);
      if (dist[u] <= 0.0) minus.push_back(u);
      if ((dist[u] > 0.0 && dist[w] < 0.0) || (dist[u] < 0.0 && dist[w] > 0.0)) {
        int id = cut_point(u, w);
        plus.push_back(id);
        minus.push_back(id);
      }
    }
    for (auto* part : {&plus, &minus}) {
      auto& p = *part;
      p.erase(std::unique(p.begin(), p.end()), p.end());
      if (!p.empty() && p.front() == p.back()) p.pop_back();
      if (p.size() < 3) throw std::runtime_error("split_unfitted: degenerate cut of cell " + std::to_string(c));
      std::vector<Vec2> pts;
      for (int v : p) pts.push_back(m.vertices[v]);
      if (polygon_area(pts) <= tol * tol)
        throw std::runtime_error("split_unfitted: zero-area piece of cell " + std::to_string(c));
      m.cells.push_back(p);
    }
  }

  // Conformity pass: subdivide every on-line edge by the on-line vertices in
  // its interior, so both sides of the fracture see the same edges.
  std::vector<std::pair<double, int>> chain;
  for (std::size_t v = 0; v < m.vertices.size(); ++v)
    if (online[v]) chain.emplace_back(line.arclength(m.vertices[v]), static_cast<int>(v));
  std::sort(chain.begin(), chain.end());
  std::map<int, int> chain_pos;
  for (std::size_t i = 0; i < chain.size(); ++i) chain_pos[chain[i].second] = static_cast<int>(i);
  for (auto& loop : m.cells) {
    std::vector<int> out;
    const std::size_t nl = loop.size();
    for (std::size_t i = 0; i < nl; ++i) {
      int u = loop[i], w = loop[(i + 1) % nl];
      out.push_back(u);
      if (online[u] && online[w]) {
        int pu = chain_pos.at(u), pw = chain_pos.at(w);
        int step = pu < pw ? 1 : -1;
        for (int p = pu + step; p != pw; p += step) out.push_back(chain[p].second);
      }
    }
    loop = out;
  }

  // Fracture chain: on-line vertices in arclength order, restricted to the
  // stretch actually covered by separating edges.
  for (const auto& [s, v] : chain) {
    (void)s;
    m.fracture_chain.push_back(v);
  }
  detail::label_subdomains_from_line(m, line);

  // Boundary tags inherited from the parent edge containing each new edge.
  std::vector<std::pair<std::array<Vec2, 2>, BoundaryTag>> parent;
  for (const auto& [key, tag] : mesh.boundary)
    parent.push_back({{mesh.vertices[key.first], mesh.vertices[key.second]}, tag});
  auto inherit = [&](const Vec2& mid) -> BoundaryTag {
    for (const auto& [seg, tag] : parent) {
      Vec2 t = seg[1] - seg[0];
      double len2 = t.squaredNorm();
      double u = t.dot(mid - seg[0]) / len2;
      if (u > -1e-9 && u < 1.0 + 1e-9 && std::abs(cross2(t, mid - seg[0])) <= tol * std::sqrt(len2) * 10.0)
        return tag;
    }
    throw std::runtime_error("split_unfitted: cannot inherit boundary tag");
  };
  for (const auto& [key, adj] : m.edge_cells())
    if (adj.size() == 1)
      m.boundary[key] = inherit(0.5 * (m.vertices[key.first] + m.vertices[key.second]));

  m.validate();
  return m;
}

/// Retag boundary edges using a classifier evaluated at edge midpoints.
inline void retag_boundary(PolygonalMesh& m, const std::function<BoundaryTag(const Vec2&)>& classifier) {
  for (auto& [key, tag] : m.boundary)
    tag = classifier(0.5 * (m.vertices[key.first] + m.vertices[key.second]));
}

}  // namespace fracdg
