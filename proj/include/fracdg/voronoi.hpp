// Centroidal Voronoi mesh generator on the unit square with optional
// fracture alignment: mirrored seed pairs straddling the fracture line are
// kept frozen during Lloyd iterations so the shared Voronoi edges lie exactly
// on the line, while the remaining seeds relax freely outside a shielding
// strip.  Cells are computed by half-plane clipping against distance-sorted
// neighbor seeds with a security-radius stop, which yields the exact clipped
// Voronoi diagram.

#pragma once

#include <cstdint>
#include <random>

#include "fracdg/meshgen.hpp"

namespace fracdg {

struct VoronoiConfig {
  int n_seeds = 64;
  int lloyd_iters = 100;
  std::uint64_t seed = 7;
  double fracture_x = 0.5;      // ignored when with_fracture is false
  bool with_fracture = true;
};

namespace detail {

class SeedGrid {
public:
  explicit SeedGrid(const std::vector<Vec2>& s) : seeds_(s) {
    nb_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(s.size()))));
    buckets_.resize(static_cast<std::size_t>(nb_) * nb_);
    for (std::size_t i = 0; i < s.size(); ++i) buckets_[bucket(s[i])].push_back(static_cast<int>(i));
  }

  /// Seed ids != i sorted by distance to seed i (expanding ring search).
  const std::vector<int>& neighbors_sorted(int i) {
    scratch_.clear();
    const Vec2 p = seeds_[i];
    int bx = clampi(static_cast<int>(p.x() * nb_)), by = clampi(static_cast<int>(p.y() * nb_));
    for (int ring = 0; ring < nb_; ++ring) {
      bool any = false;
      for (int dx = -ring; dx <= ring; ++dx)
        for (int dy = -ring; dy <= ring; ++dy) {
          if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
          int x = bx + dx, y = by + dy;
          if (x < 0 || y < 0 || x >= nb_ || y >= nb_) continue;
          any = true;
          for (int j : buckets_[static_cast<std::size_t>(y) * nb_ + x])
            if (j != i) scratch_.push_back(j);
        }
      // Enough rings when the closest unexplored ring cannot contain a seed
      // nearer than the ones already found (handled by the caller's security
      // radius); gather a generous margin of rings instead of being clever.
      if (!any && ring > 0 && !scratch_.empty()) break;
      if (ring >= 3 && scratch_.size() >= 24) break;
    }
    if (scratch_.empty())
      for (std::size_t j = 0; j < seeds_.size(); ++j)
        if (static_cast<int>(j) != i) scratch_.push_back(static_cast<int>(j));
    std::sort(scratch_.begin(), scratch_.end(), [&](int a, int b) {
      double da = (seeds_[a] - p).squaredNorm(), db = (seeds_[b] - p).squaredNorm();
      return da != db ? da < db : a < b;
    });
    return scratch_;
  }

  const std::vector<Vec2>& seeds() const { return seeds_; }

private:
  int clampi(int v) const { return std::min(std::max(v, 0), nb_ - 1); }
  std::size_t bucket(const Vec2& p) const {
    int bx = clampi(static_cast<int>(p.x() * nb_)), by = clampi(static_cast<int>(p.y() * nb_));
    return static_cast<std::size_t>(by) * nb_ + bx;
  }
  std::vector<Vec2> seeds_;
  int nb_;
  std::vector<std::vector<int>> buckets_;
  std::vector<int> scratch_;
};

/// Voronoi cell of seed i clipped to the unit square.  Clips against
/// neighbors in distance order and stops once the cell is provably final
/// (every remaining seed is farther than twice the cell's reach).
inline std::vector<Vec2> voronoi_cell(SeedGrid& grid, int i) {
  const std::vector<Vec2>& s = grid.seeds();
  std::vector<Vec2> poly = {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
  const auto& nbs = grid.neighbors_sorted(i);
  bool complete = false;
  for (std::size_t t = 0; t < nbs.size(); ++t) {
    int j = nbs[t];
    double dij = (s[j] - s[i]).norm();
    double reach = 0.0;
    for (const auto& v : poly) reach = std::max(reach, (v - s[i]).norm());
    if (dij > 2.0 * reach) {
      complete = true;
      break;
    }
    Vec2 n = (s[j] - s[i]).normalized();
    double c = n.dot(0.5 * (s[i] + s[j]));
    poly = clip_halfplane(poly, n, c);
    if (poly.empty()) throw std::runtime_error("voronoi_cell: empty cell (duplicate seeds?)");
  }
  if (!complete) {
    // Fallback: the sorted candidate list was exhausted before the security
    // radius closed; clip against all remaining seeds.
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (static_cast<int>(j) == i) continue;
      Vec2 n = (s[j] - s[i]).normalized();
      poly = clip_halfplane(poly, n, n.dot(0.5 * (s[i] + s[j])));
    }
  }
  return poly;
}

}  // namespace detail

/// Centroidal Voronoi mesh.  With a fracture: round(sqrt(n_seeds)) mirrored
/// frozen pairs straddle x = fracture_x and own all fracture edges; free
/// seeds are kept outside a strip of half-width 0.75 / n_frac, which strictly
/// shields the line.  Fully deterministic for a given config.
inline PolygonalMesh generate_cvt(const VoronoiConfig& cfg) {
  if (cfg.n_seeds < 4) throw std::invalid_argument("generate_cvt: need at least 4 seeds");
  const double fx = cfg.fracture_x;
  if (cfg.with_fracture && (fx <= 0.0 || fx >= 1.0))
    throw std::invalid_argument("generate_cvt: fracture_x outside the domain");

  int n_frozen = 0;
  double strip = 0.0;
  std::vector<Vec2> seeds;
  if (cfg.with_fracture) {
    int n_frac = std::max(2, static_cast<int>(std::lround(std::sqrt(static_cast<double>(cfg.n_seeds)))));
    double hf = 1.0 / n_frac;
    strip = 0.75 * hf;
    for (int j = 0; j < n_frac; ++j) {
      double y = (j + 0.5) * hf;
      seeds.emplace_back(fx - 0.5 * hf, y);
      seeds.emplace_back(fx + 0.5 * hf, y);
    }
    n_frozen = 2 * n_frac;
    if (n_frozen > cfg.n_seeds) throw std::invalid_argument("generate_cvt: too few seeds for the fracture wall");
  }

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  while (static_cast<int>(seeds.size()) < cfg.n_seeds) {
    Vec2 p(uni(rng), uni(rng));
    if (cfg.with_fracture && std::abs(p.x() - fx) < strip) continue;
    seeds.push_back(p);
  }

  auto clamp_out_of_strip = [&](Vec2& p) {
    if (!cfg.with_fracture) return;
    if (std::abs(p.x() - fx) < strip) p.x() = p.x() < fx ? fx - strip : fx + strip;
  };

  for (int it = 0; it < cfg.lloyd_iters; ++it) {
    detail::SeedGrid grid(seeds);
    for (int i = n_frozen; i < cfg.n_seeds; ++i) {
      Vec2 c = polygon_centroid(detail::voronoi_cell(grid, i));
      clamp_out_of_strip(c);
      seeds[i] = c;
    }
  }

  // Assemble the mesh from the final diagram.
  const double tol = 1e-10 * std::sqrt(2.0);
  PointMerger merger(tol);
  PolygonalMesh m;
  detail::SeedGrid grid(seeds);
  for (int i = 0; i < cfg.n_seeds; ++i) {
    std::vector<Vec2> poly = detail::voronoi_cell(grid, i);
    std::vector<int> loop;
    for (const auto& p : poly) {
      Vec2 q = p;
      if (cfg.with_fracture && std::abs(q.x() - fx) <= tol) q.x() = fx;
      int id = merger.insert(q);
      if (loop.empty() || loop.back() != id) loop.push_back(id);
    }
    while (loop.size() > 1 && loop.front() == loop.back()) loop.pop_back();
    if (loop.size() < 3) throw std::runtime_error("generate_cvt: degenerate cell");
    m.cells.push_back(loop);
  }
  m.vertices = merger.points();

  if (cfg.with_fracture) {
    std::vector<std::pair<double, int>> chain;
    for (std::size_t v = 0; v < m.vertices.size(); ++v)
      if (m.vertices[v].x() == fx) chain.emplace_back(m.vertices[v].y(), static_cast<int>(v));
    std::sort(chain.begin(), chain.end());
    for (const auto& [y, v] : chain) {
      (void)y;
      m.fracture_chain.push_back(v);
    }
    if (m.fracture_chain.size() < 2) throw std::runtime_error("generate_cvt: fracture chain not formed");
    detail::label_subdomains_from_line(m, m.fracture_line());
  } else {
    m.subdomain.assign(m.cells.size(), 1);
  }
  detail::tag_all_boundary_dirichlet(m);
  m.validate();
  return m;
}

}  // namespace fracdg
