// Planar geometry helpers shared by the mesh generators and the solver:
// polygon measures, half-plane clipping, kernel / Chebyshev center of a
// star-shaped cell, and segment-line intersection used when splitting
// unfitted meshes along a fracture line.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fracdg {

using Vec2 = Eigen::Vector2d;

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Signed area of a polygon given as a vertex loop (positive if CCW).
inline double polygon_area(const std::vector<Vec2>& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += cross2(p[i], p[(i + 1) % p.size()]);
  return 0.5 * s;
}

/// Area centroid of a simple polygon.
inline Vec2 polygon_centroid(const std::vector<Vec2>& p) {
  double a = 0.0;
  Vec2 c = Vec2::Zero();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec2& u = p[i];
    const Vec2& v = p[(i + 1) % p.size()];
    double w = cross2(u, v);
    a += w;
    c += w * (u + v);
  }
  if (std::abs(a) < 1e-300) throw std::runtime_error("polygon_centroid: degenerate polygon");
  return c / (3.0 * a);
}

/// Max pairwise vertex distance.
inline double polygon_diameter(const std::vector<Vec2>& p) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) d = std::max(d, (p[i] - p[j]).norm());
  return d;
}

/// Half-plane {x : n.x <= c}.
struct HalfPlane {
  Vec2 n;
  double c;
};

/// Inward half-planes supported by the edges of a CCW polygon; the kernel of
/// the polygon is their intersection.
inline std::vector<HalfPlane> polygon_halfplanes(const std::vector<Vec2>& p) {
  std::vector<HalfPlane> hp;
  hp.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec2& a = p[i];
    const Vec2& b = p[(i + 1) % p.size()];
    Vec2 t = b - a;
    double len = t.norm();
    if (len < 1e-300) continue;
    Vec2 n(t.y() / len, -t.x() / len);  // outward for CCW loops
    hp.push_back({n, n.dot(a)});
  }
  return hp;
}

/// Clip a polygon against {x : n.x <= c} (Sutherland-Hodgman step).
inline std::vector<Vec2> clip_halfplane(const std::vector<Vec2>& poly, const Vec2& n, double c) {
  std::vector<Vec2> out;
  out.reserve(poly.size() + 2);
  const std::size_t m = poly.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % m];
    double da = n.dot(a) - c;
    double db = n.dot(b) - c;
    if (da <= 0.0) out.push_back(a);
    if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0)) {
      double t = da / (da - db);
      out.push_back(a + t * (b - a));
    }
  }
  return out;
}

/// Chebyshev center (center and radius of the largest inscribed ball) of the
/// intersection of half-planes.  Solved by enumerating constraint triples;
/// the sets here come from polygon cells with at most ~20 edges.  Returns
/// radius <= 0 if the intersection has empty interior.
inline std::pair<Vec2, double> chebyshev_center(const std::vector<HalfPlane>& hp) {
  const std::size_t m = hp.size();
  Vec2 best_x = Vec2::Zero();
  double best_r = -std::numeric_limits<double>::infinity();
  auto feasible = [&](const Vec2& x, double r) {
    for (const auto& h : hp)
      if (h.n.dot(x) + r > h.c + 1e-12 * (1.0 + std::abs(h.c))) return false;
    return true;
  };
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      for (std::size_t k = j + 1; k < m; ++k) {
        Eigen::Matrix3d A;
        A << hp[i].n.x(), hp[i].n.y(), 1.0,
             hp[j].n.x(), hp[j].n.y(), 1.0,
             hp[k].n.x(), hp[k].n.y(), 1.0;
        Eigen::Vector3d b(hp[i].c, hp[j].c, hp[k].c);
        Eigen::FullPivLU<Eigen::Matrix3d> lu(A);
        if (!lu.isInvertible()) continue;
        Eigen::Vector3d s = lu.solve(b);
        Vec2 x(s[0], s[1]);
        double r = s[2];
        if (r > best_r && feasible(x, r)) {
          best_r = r;
          best_x = x;
        }
      }
  return {best_x, best_r};
}

/// Oriented line through `a` with unit tangent `t`; signed_dist > 0 on the
/// left of the tangent direction.
struct LineRef {
  Vec2 a;
  Vec2 t;
  LineRef(const Vec2& a_, const Vec2& b_) : a(a_), t((b_ - a_).normalized()) {}
  double signed_dist(const Vec2& p) const { return cross2(t, p - a); }
  double arclength(const Vec2& p) const { return t.dot(p - a); }
  Vec2 project(const Vec2& p) const { return a + arclength(p) * t; }
};

/// Barycentric point-in-triangle test with absolute slack `tol`.
inline bool point_in_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c,
                              double tol = 1e-12) {
  double s0 = cross2(b - a, p - a);
  double s1 = cross2(c - b, p - b);
  double s2 = cross2(a - c, p - c);
  return s0 >= -tol && s1 >= -tol && s2 >= -tol;
}

/// Spatial hash used to merge nearly coincident vertices deterministically.
class PointMerger {
public:
  explicit PointMerger(double tol) : tol_(tol), cell_(std::max(tol, 1e-300) * 4.0) {}

  /// Index of the stored point within `tol` of `p`, inserting p if absent.
  int insert(const Vec2& p) {
    long ix = static_cast<long>(std::floor(p.x() / cell_));
    long iy = static_cast<long>(std::floor(p.y() / cell_));
    for (long dx = -1; dx <= 1; ++dx)
      for (long dy = -1; dy <= 1; ++dy) {
        auto it = grid_.find(key(ix + dx, iy + dy));
        if (it == grid_.end()) continue;
        for (int id : it->second)
          if ((pts_[id] - p).norm() <= tol_) return id;
      }
    int id = static_cast<int>(pts_.size());
    pts_.push_back(p);
    grid_[key(ix, iy)].push_back(id);
    return id;
  }

  const std::vector<Vec2>& points() const { return pts_; }

private:
  static long long key(long ix, long iy) { return (static_cast<long long>(ix) << 28) ^ (iy & ((1LL << 28) - 1)); }
  double tol_, cell_;
  std::vector<Vec2> pts_;
  std::unordered_map<long long, std::vector<int>> grid_;
};

}  // namespace fracdg
