// Polygonal mesh aligned with a single straight fracture: vertex coordinates,
// CCW cell loops, the fracture as an ordered vertex chain, boundary edge tags
// and a per-cell subdomain label (1 = the side the fracture normal points away
// from).  Includes structural validation and JSON round-trip with the schema
// {"vertices": [[x,y],...], "cells": [[i,...],...], "fracture": [v,...],
//  "boundary": {"dirichlet": [[a,b],...], "neumann": [[a,b],...]}}.

#pragma once

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fracdg/geometry.hpp"

namespace fracdg {

enum class BoundaryTag { dirichlet, neumann };

using EdgeKey = std::pair<int, int>;

inline EdgeKey edge_key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

struct PolygonalMesh {
  std::vector<Vec2> vertices;
  std::vector<std::vector<int>> cells;
  std::vector<int> fracture_chain;              // ordered vertex ids along the fracture (may be empty pre-split)
  std::map<EdgeKey, BoundaryTag> boundary;      // tags for edges with a single adjacent cell
  std::vector<int> subdomain;                   // per cell, 1 or 2 (all 1 when no fracture)

  std::vector<Vec2> cell_points(int c) const {
    std::vector<Vec2> p;
    p.reserve(cells[c].size());
    for (int v : cells[c]) p.push_back(vertices[v]);
    return p;
  }

  std::set<EdgeKey> fracture_edges() const {
    std::set<EdgeKey> s;
    for (std::size_t i = 0; i + 1 < fracture_chain.size(); ++i)
      s.insert(edge_key(fracture_chain[i], fracture_chain[i + 1]));
    return s;
  }

  /// Canonical edge -> adjacent cell ids.
  std::map<EdgeKey, std::vector<int>> edge_cells() const {
    std::map<EdgeKey, std::vector<int>> m;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto& loop = cells[c];
      for (std::size_t i = 0; i < loop.size(); ++i)
        m[edge_key(loop[i], loop[(i + 1) % loop.size()])].push_back(static_cast<int>(c));
    }
    return m;
  }

  double total_area() const {
    double a = 0.0;
    for (std::size_t c = 0; c < cells.size(); ++c) a += polygon_area(cell_points(static_cast<int>(c)));
    return a;
  }

  /// Oriented fracture line through the chain endpoints; requires a fracture.
  LineRef fracture_line() const {
    if (fracture_chain.size() < 2) throw std::runtime_error("fracture_line: no fracture chain");
    return LineRef(vertices[fracture_chain.front()], vertices[fracture_chain.back()]);
  }

  void validate() const;
  nlohmann::json to_json() const;
  static PolygonalMesh from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static PolygonalMesh load(const std::string& path);
};

inline void PolygonalMesh::validate() const {
  const int nv = static_cast<int>(vertices.size());
  if (subdomain.size() != cells.size()) throw std::runtime_error("validate: subdomain size mismatch");
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& loop = cells[c];
    if (loop.size() < 3) throw std::runtime_error("validate: cell " + std::to_string(c) + " has < 3 vertices");
    for (std::size_t i = 0; i < loop.size(); ++i) {
      if (loop[i] < 0 || loop[i] >= nv) throw std::runtime_error("validate: vertex index out of range");
      if (loop[i] == loop[(i + 1) % loop.size()])
        throw std::runtime_error("validate: repeated consecutive vertex in cell " + std::to_string(c));
    }
    if (polygon_area(cell_points(static_cast<int>(c))) <= 0.0)
      throw std::runtime_error("validate: cell " + std::to_string(c) + " is not CCW with positive area");
    if (subdomain[c] != 1 && subdomain[c] != 2)
      throw std::runtime_error("validate: bad subdomain label on cell " + std::to_string(c));
  }

  auto ec = edge_cells();
  auto frac = fracture_edges();
  for (const auto& [key, adj] : ec) {
    bool is_frac = frac.count(key) > 0;
    if (adj.size() > 2) throw std::runtime_error("validate: edge shared by more than two cells");
    if (adj.size() == 1) {
      if (is_frac) throw std::runtime_error("validate: fracture edge on the domain boundary");
      if (!boundary.count(key)) throw std::runtime_error("validate: untagged boundary edge");
    } else {
      if (boundary.count(key)) throw std::runtime_error("validate: interior edge carries a boundary tag");
      if (is_frac) {
        if (subdomain[adj[0]] == subdomain[adj[1]])
          throw std::runtime_error("validate: fracture edge does not separate the subdomains");
      } else {
        if (subdomain[adj[0]] != subdomain[adj[1]])
          throw std::runtime_error("validate: subdomain changes across a non-fracture edge");
      }
    }
  }
  for (const auto& [key, tag] : boundary) {
    (void)tag;
    auto it = ec.find(key);
    if (it == ec.end() || it->second.size() != 1)
      throw std::runtime_error("validate: boundary tag on a non-boundary edge");
  }

  if (fracture_chain.size() >= 2) {
    LineRef line = fracture_line();
    double tol = 1e-9 * polygon_diameter(vertices);
    for (int v : fracture_chain)
      if (std::abs(line.signed_dist(vertices[v])) > tol)
        throw std::runtime_error("validate: fracture chain vertex off the fracture line");
    for (std::size_t i = 0; i + 1 < fracture_chain.size(); ++i)
      if (line.arclength(vertices[fracture_chain[i + 1]]) <= line.arclength(vertices[fracture_chain[i]]))
        throw std::runtime_error("validate: fracture chain not monotone along the line");
    // No cell may straddle the fracture line.
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double lo = 0.0, hi = 0.0;
      for (int v : cells[c]) {
        double d = line.signed_dist(vertices[v]);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
      if (lo < -tol && hi > tol)
        throw std::runtime_error("validate: cell " + std::to_string(c) + " is cut by the fracture line");
    }
  }
}

inline nlohmann::json PolygonalMesh::to_json() const {
  nlohmann::json j;
  j["vertices"] = nlohmann::json::array();
  for (const auto& v : vertices) j["vertices"].push_back({v.x(), v.y()});
  j["cells"] = cells;
  j["fracture"] = fracture_chain;
  nlohmann::json bd = nlohmann::json::array(), bn = nlohmann::json::array();
  for (const auto& [key, tag] : boundary) {
    if (tag == BoundaryTag::dirichlet)
      bd.push_back({key.first, key.second});
    else
      bn.push_back({key.first, key.second});
  }
  j["boundary"] = {{"dirichlet", bd}, {"neumann", bn}};
  return j;
}

inline PolygonalMesh PolygonalMesh::from_json(const nlohmann::json& j) {
  PolygonalMesh m;
  for (const auto& v : j.at("vertices")) m.vertices.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
  m.cells = j.at("cells").get<std::vector<std::vector<int>>>();
  m.fracture_chain = j.at("fracture").get<std::vector<int>>();
  for (const auto& e : j.at("boundary").at("dirichlet"))
    m.boundary[edge_key(e.at(0).get<int>(), e.at(1).get<int>())] = BoundaryTag::dirichlet;
  for (const auto& e : j.at("boundary").at("neumann"))
    m.boundary[edge_key(e.at(0).get<int>(), e.at(1).get<int>())] = BoundaryTag::neumann;

  // Subdomain labels are not serialized; recover them from the fracture
  // geometry (side 1 is the side the fracture normal points away from).
  m.subdomain.assign(m.cells.size(), 1);
  if (m.fracture_chain.size() >= 2) {
    LineRef line = m.fracture_line();
    for (std::size_t c = 0; c < m.cells.size(); ++c) {
      Vec2 ctr = polygon_centroid(m.cell_points(static_cast<int>(c)));
      m.subdomain[c] = line.signed_dist(ctr) > 0.0 ? 1 : 2;
    }
  }
  m.validate();
  return m;
}

inline void PolygonalMesh::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save: cannot open " + path);
  f << to_json().dump(2) << "\n";
}

inline PolygonalMesh PolygonalMesh::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load: cannot open " + path);
  nlohmann::json j;
  f >> j;
  return from_json(j);
}

}  // namespace fracdg
