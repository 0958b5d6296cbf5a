// Experiment harness: mesh-family construction per refinement level, a
// single configure-assemble-solve-measure run, and multi-run studies with
// CSV and plot-data output.

#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <thread>

#include "fracdg/cases.hpp"
#include "fracdg/voronoi.hpp"

namespace fracdg {

enum class MeshKind { rect, tri, cvt, perturbed, mapped_rect, mapped_cvt, unfitted };

inline std::string to_string(MeshKind m) {
  switch (m) {
    case MeshKind::rect: return "rect";
    case MeshKind::tri: return "tri";
    case MeshKind::cvt: return "cvt";
    case MeshKind::perturbed: return "perturbed";
    case MeshKind::mapped_rect: return "mapped-rect";
    case MeshKind::mapped_cvt: return "mapped-cvt";
    case MeshKind::unfitted: return "unfitted";
  }
  return "?";
}

inline MeshKind mesh_kind_from_string(const std::string& s) {
  for (MeshKind m : {MeshKind::rect, MeshKind::tri, MeshKind::cvt, MeshKind::perturbed, MeshKind::mapped_rect,
                     MeshKind::mapped_cvt, MeshKind::unfitted})
    if (to_string(m) == s) return m;
  throw std::invalid_argument("unknown mesh kind '" + s +
                              "' (known: rect, tri, cvt, perturbed, mapped-rect, mapped-cvt, unfitted)");
}

/// Refinement ladders: grid meshes use n = 4, 8, 16, ... divisions per side
/// (h = 1/n at level 1 = 1/4); Voronoi meshes use 64, 256, 1024, ... seeds.
inline int level_to_n(int level) { return 4 << (level - 1); }
inline int level_to_seeds(int level) { return 64 << (2 * (level - 1)); }

/// Build the polygonal mesh for a case at a refinement level.  Cases whose
/// fracture is the vertical line x = 1/2 get fracture-fitted grid/Voronoi
/// meshes; any other fracture line (the five-spot diagonal) is handled by
/// splitting a fracture-free background mesh.  The `unfitted` kind always
/// splits a fracture-free Voronoi background.
inline PolygonalMesh make_mesh(const CaseDefinition& c, MeshKind kind, int level, double d_ratio,
                               std::uint64_t seed) {
  const int n = level_to_n(level);
  const bool vertical_half = std::abs(c.frac_a.x() - 0.5) < 1e-14 && std::abs(c.frac_b.x() - 0.5) < 1e-14;
  VoronoiConfig vc;
  vc.n_seeds = level_to_seeds(level);
  vc.seed = seed;
  vc.fracture_x = 0.5;

  PolygonalMesh m;
  switch (kind) {
    case MeshKind::rect:
    case MeshKind::tri: {
      GridKind g = kind == MeshKind::rect ? GridKind::rectangular : GridKind::triangular;
      if (vertical_half)
        m = generate_uniform(g, n, 0.5);
      else
        m = split_unfitted(generate_uniform_background(g, n), c.frac_a, c.frac_b);
      break;
    }
    case MeshKind::cvt: {
      if (vertical_half) {
        vc.with_fracture = true;
        m = generate_cvt(vc);
      } else {
        vc.with_fracture = false;
        m = split_unfitted(generate_cvt(vc), c.frac_a, c.frac_b);
      }
      break;
    }
    case MeshKind::perturbed: {
      if (!vertical_half) throw std::invalid_argument("perturbed meshes need the vertical fracture at x = 1/2");
      m = perturb_small_edges(generate_uniform(GridKind::rectangular, n, 0.5), d_ratio);
      break;
    }
    case MeshKind::mapped_rect: {
      if (!vertical_half) throw std::invalid_argument("mapped meshes need the vertical fracture at x = 1/2");
      m = map_anisotropic(generate_uniform(GridKind::rectangular, n, 0.5));
      break;
    }
    case MeshKind::mapped_cvt: {
      if (!vertical_half) throw std::invalid_argument("mapped meshes need the vertical fracture at x = 1/2");
      vc.with_fracture = true;
      m = map_anisotropic(generate_cvt(vc));
      break;
    }
    case MeshKind::unfitted: {
      vc.with_fracture = false;
      m = split_unfitted(generate_cvt(vc), c.frac_a, c.frac_b);
      break;
    }
  }
  retag_boundary(m, c.btag);
  return m;
}

struct RunBundle {
  std::unique_ptr<StaggeredMesh> sm;
  std::unique_ptr<DofLayout> layout;
  Solution sol;
  double assemble_seconds = 0.0;
  double solve_seconds = 0.0;
  double adjoint_rel = 0.0;
};

/// Mesh -> staggered mesh -> layout -> assemble -> boundary data -> solve.
/// A nonempty dump prefix exports every assembled block in coordinate text
/// format before boundary conditions are applied.
inline RunBundle run_single(const CaseDefinition& c, PolygonalMesh mesh, int k,
                            const std::string& dump_prefix = "") {
  using clock = std::chrono::steady_clock;
  RunBundle b;
  b.sm = std::make_unique<StaggeredMesh>(build_staggered(std::move(mesh)));
  b.layout = std::make_unique<DofLayout>(build_layout(*b.sm, k));
  auto t0 = clock::now();
  AssembledBlocks bl = assemble(*b.layout, c.co, c.sources);
  b.adjoint_rel = adjoint_gap(bl);
  if (!dump_prefix.empty()) {
    export_matrix(bl.M, dump_prefix + "_M.txt");
    export_matrix(bl.B, dump_prefix + "_B.txt");
    export_matrix(bl.Bstar, dump_prefix + "_Bstar.txt");
    export_matrix(bl.C_avg, dump_prefix + "_Cavg.txt");
    export_matrix(bl.C_jump, dump_prefix + "_Cjump.txt");
    export_matrix(bl.D, dump_prefix + "_D.txt");
    export_matrix(bl.A_G, dump_prefix + "_AG.txt");
    export_matrix(bl.C_G, dump_prefix + "_CG.txt");
  }
  apply_boundary(bl, *b.layout, c.bdata);
  auto t1 = clock::now();
  b.sol = solve(*b.layout, bl);
  auto t2 = clock::now();
  b.assemble_seconds = std::chrono::duration<double>(t1 - t0).count();
  b.solve_seconds = std::chrono::duration<double>(t2 - t1).count();
  return b;
}

struct RunRecord {
  std::string case_name, mesh_kind;
  int k = 0, level = 0;
  bool ok = false;
  std::string message;
  double h = 0.0;
  int ndof_u = 0, ndof_p = 0, ndof_pG = 0;
  ErrorReport err;  // meaningful only for cases with an exact solution
  double assemble_seconds = 0.0, solve_seconds = 0.0;
  double adjoint_rel = 0.0, residual = 0.0;
  double cond_v_max = 0.0;  // worst local flux dof-system conditioning
};

struct StudyOptions {
  std::string case_name = "ex1-iso";
  MeshKind mesh = MeshKind::rect;
  std::vector<int> ks = {1, 2, 3};
  int levels = 4;
  double d_ratio = 0.001;
  std::uint64_t seed = 7;
  std::string out_dir = "out";
  int threads = 0;  // 0: use FRACDG_THREADS, else hardware count
  bool dump_matrices = false;
};

inline int study_thread_count(int requested) {
  if (requested > 0) return requested;
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("FRACDG_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

/// Execute one (mesh kind, k, level) run and condense it into a record; the
/// full bundle can be kept for later field sampling.
inline RunRecord run_record(const CaseDefinition& c, const StudyOptions& opt, int k, int level,
                            std::unique_ptr<RunBundle>* keep = nullptr) {
  RunRecord r;
  r.case_name = c.name;
  r.mesh_kind = to_string(opt.mesh);
  r.k = k;
  r.level = level;
  try {
    std::string dump;
    if (opt.dump_matrices)
      dump = opt.out_dir + "/" + c.name + "_" + to_string(opt.mesh) + "_k" + std::to_string(k) + "_L" +
             std::to_string(level);
    RunBundle b = run_single(c, make_mesh(c, opt.mesh, level, opt.d_ratio, opt.seed), k, dump);
    r.h = b.sm->h;
    r.ndof_u = b.layout->nv;
    r.ndof_p = b.layout->np;
    r.ndof_pG = b.layout->ng;
    r.assemble_seconds = b.assemble_seconds;
    r.solve_seconds = b.solve_seconds;
    r.adjoint_rel = b.adjoint_rel;
    r.residual = b.sol.residual;
    for (const LocalBasis& lb : b.layout->basis) r.cond_v_max = std::max(r.cond_v_max, lb.cond_v);
    if (c.has_exact) r.err = compute_errors(*b.layout, c.co, b.sol.u, b.sol.p, b.sol.pG, c.exact);
    r.err.h = r.h;
    r.err.ndof = r.ndof_u + r.ndof_p + r.ndof_pG;
    r.ok = true;
    if (keep) *keep = std::make_unique<RunBundle>(std::move(b));
  } catch (const std::exception& e) {
    r.ok = false;
    r.message = e.what();
  }
  return r;
}

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

inline std::string fmt_rate(double v) {
  if (!std::isfinite(v)) return "exact";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace detail

/// Write the study CSV: one row per run, pairwise rates against the previous
/// level of the same k.
inline void write_csv(const std::vector<RunRecord>& records, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_csv: cannot open " + path);
  f << "case,mesh_kind,k,level,h,ndof_u,ndof_p,ndof_pG,err_u,err_p,err_pG,super_p,super_pG,"
       "rate_u,rate_p,rate_pG\n";
  for (const RunRecord& r : records) {
    const RunRecord* prev = nullptr;
    for (const RunRecord& q : records)
      if (q.k == r.k && q.level == r.level - 1 && q.ok) prev = &q;
    std::string ru, rp, rg;
    if (prev && r.ok) {
      ru = detail::fmt_rate(rate(prev->err.err_u, r.err.err_u, prev->h, r.h));
      rp = detail::fmt_rate(rate(prev->err.err_p, r.err.err_p, prev->h, r.h));
      rg = detail::fmt_rate(rate(prev->err.err_pG, r.err.err_pG, prev->h, r.h));
    }
    f << r.case_name << ',' << r.mesh_kind << ',' << r.k << ',' << r.level << ',' << detail::fmt(r.h) << ','
      << r.ndof_u << ',' << r.ndof_p << ',' << r.ndof_pG << ',' << detail::fmt(r.err.err_u) << ','
      << detail::fmt(r.err.err_p) << ',' << detail::fmt(r.err.err_pG) << ',' << detail::fmt(r.err.super_p)
      << ',' << detail::fmt(r.err.super_pG) << ',' << ru << ',' << rp << ',' << rg << '\n';
  }
}

/// Least-squares slope of log(err) against log(h) for one k series.
inline double ls_slope(const std::vector<RunRecord>& records, int k,
                       const std::function<double(const ErrorReport&)>& get) {
  std::vector<double> lh, le;
  for (const RunRecord& r : records)
    if (r.k == k && r.ok && get(r.err) > 0.0) {
      lh.push_back(std::log(r.h));
      le.push_back(std::log(get(r.err)));
    }
  if (lh.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double n = static_cast<double>(lh.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lh.size(); ++i) {
    sx += lh[i];
    sy += le[i];
    sxx += lh[i] * lh[i];
    sxy += lh[i] * le[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Five-spot observables: pressure extrema over all triangle corners and
/// centroids, and the one-sided pressure jump at the fracture midpoint.
struct FiveSpotReport {
  Vec2 argmax = Vec2::Zero(), argmin = Vec2::Zero();
  double pmax = -std::numeric_limits<double>::infinity();
  double pmin = std::numeric_limits<double>::infinity();
  double midpoint_jump = 0.0;
  double h = 0.0;
};

inline FiveSpotReport fivespot_report(const RunBundle& b) {
  const StaggeredMesh& sm = *b.sm;
  FiveSpotReport r;
  r.h = sm.h;
  for (std::size_t t = 0; t < sm.tris.size(); ++t) {
    const StagTri& tr = sm.tris[t];
    Vec2 cen = (sm.pts[tr.v[0]] + sm.pts[tr.v[1]] + sm.pts[tr.v[2]]) / 3.0;
    for (const Vec2& x : {sm.pts[tr.v[0]], sm.pts[tr.v[1]], sm.pts[tr.v[2]], cen}) {
      double v = b.sol.p.pressure_value(static_cast<int>(t), x);
      if (v > r.pmax) {
        r.pmax = v;
        r.argmax = x;
      }
      if (v < r.pmin) {
        r.pmin = v;
        r.argmin = x;
      }
    }
  }
  double smid = 0.5 * sm.gamma_length;
  auto [elem, sl, len] = b.sol.pG.locate_gamma(smid);
  const StagEdge& ed = sm.edges[sm.fracture_chain_edges[elem]];
  Vec2 x = sm.gamma_point(smid);
  r.midpoint_jump = std::abs(b.sol.p.pressure_value(ed.t1, x) - b.sol.p.pressure_value(ed.t2, x));
  (void)sl;
  (void)len;
  return r;
}

/// Sampled pressure along the main diagonal (for five-spot profiles): pairs
/// (s, p) with s the arclength from (0,0); near the fracture the two
/// one-sided values appear as consecutive samples.
inline void write_diagonal_profile(const RunBundle& b, const std::string& path, int n_samples = 256) {
  const StaggeredMesh& sm = *b.sm;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_diagonal_profile: cannot open " + path);
  for (int i = 0; i <= n_samples; ++i) {
    double t = static_cast<double>(i) / n_samples;
    Vec2 x(t, t);
    // locate the containing triangle (linear scan; profiles are small)
    for (std::size_t tr = 0; tr < sm.tris.size(); ++tr) {
      const StagTri& T = sm.tris[tr];
      if (point_in_triangle(x, sm.pts[T.v[0]], sm.pts[T.v[1]], sm.pts[T.v[2]], 1e-12)) {
        f << detail::fmt(t * std::numbers::sqrt2) << ' ' << detail::fmt(b.sol.p.pressure_value(static_cast<int>(tr), x))
          << '\n';
        break;
      }
    }
  }
}

inline void write_gamma_profile(const RunBundle& b, const std::string& path, int n_samples = 256) {
  const StaggeredMesh& sm = *b.sm;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_gamma_profile: cannot open " + path);
  for (int i = 0; i <= n_samples; ++i) {
    double s = sm.gamma_length * i / n_samples;
    f << detail::fmt(s) << ' ' << detail::fmt(b.sol.pG.gamma_value(s)) << '\n';
  }
}

/// Run the full (k, level) grid of a study, write CSV and per-k plot data,
/// and log a summary.  Failed runs are recorded and skipped in the outputs;
/// the return value is 0 only if every run succeeded.
inline int run_study(const StudyOptions& opt, std::ostream& log) {
  CaseDefinition c = make_case(opt.case_name);
  std::filesystem::create_directories(opt.out_dir);

  struct Job {
    int k, level;
  };
  std::vector<Job> jobs;
  for (int k : opt.ks)
    for (int level = 1; level <= opt.levels; ++level) jobs.push_back({k, level});
  std::vector<RunRecord> records(jobs.size());
  std::vector<std::unique_ptr<RunBundle>> bundles(jobs.size());

  int nthreads = std::min<int>(study_thread_count(opt.threads), static_cast<int>(jobs.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
      bool keep = !c.has_exact && jobs[i].level == opt.levels;
      records[i] = run_record(c, opt, jobs[i].k, jobs[i].level, keep ? &bundles[i] : nullptr);
    }
  };
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::string stem = opt.out_dir + "/" + c.name + "_" + to_string(opt.mesh);
  write_csv(records, stem + ".csv");

  bool all_ok = true;
  for (const RunRecord& r : records) {
    if (!r.ok) {
      all_ok = false;
      log << "FAILED " << r.case_name << " " << r.mesh_kind << " k=" << r.k << " L" << r.level << ": "
          << r.message << "\n";
      continue;
    }
    char line[256];
    std::snprintf(line, sizeof line,
                  "%s %s k=%d L%d h=%.4e ndof=%d err_u=%.4e err_p=%.4e err_pG=%.4e t=%.2fs",
                  r.case_name.c_str(), r.mesh_kind.c_str(), r.k, r.level, r.h,
                  r.ndof_u + r.ndof_p + r.ndof_pG, r.err.err_u, r.err.err_p, r.err.err_pG,
                  r.assemble_seconds + r.solve_seconds);
    log << line << "\n";
  }

  if (c.has_exact) {
    for (int k : opt.ks) {
      std::string path = stem + "_k" + std::to_string(k) + "_convergence.dat";
      std::ofstream f(path);
      f << "# ndof err_u err_p err_pG super_p super_pG\n";
      for (const RunRecord& r : records)
        if (r.k == k && r.ok)
          f << r.err.ndof << ' ' << detail::fmt(r.err.err_u) << ' ' << detail::fmt(r.err.err_p) << ' '
            << detail::fmt(r.err.err_pG) << ' ' << detail::fmt(r.err.super_p) << ' '
            << detail::fmt(r.err.super_pG) << '\n';
      char msg[160];
      std::snprintf(msg, sizeof msg, "k=%d least-squares slopes: u %.3f  p %.3f  pG %.3f", k,
                    ls_slope(records, k, [](const ErrorReport& e) { return e.err_u; }),
                    ls_slope(records, k, [](const ErrorReport& e) { return e.err_p; }),
                    ls_slope(records, k, [](const ErrorReport& e) { return e.err_pG; }));
      log << msg << "\n";
    }
  } else {
    // Five-spot style reporting from the kept finest-level solutions:
    // diagonal and fracture profiles plus pressure extrema.
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      if (!bundles[i]) continue;
      const RunBundle& b = *bundles[i];
      FiveSpotReport fr = fivespot_report(b);
      std::string kk = "_k" + std::to_string(jobs[i].k);
      write_diagonal_profile(b, stem + kk + "_diagonal.dat");
      write_gamma_profile(b, stem + kk + "_gamma.dat");
      char msg[220];
      std::snprintf(msg, sizeof msg,
                    "k=%d max p=%.5f at (%.4f,%.4f)  min p=%.5f at (%.4f,%.4f)  midpoint jump=%.6e",
                    jobs[i].k, fr.pmax, fr.argmax.x(), fr.argmax.y(), fr.pmin, fr.argmin.x(),
                    fr.argmin.y(), fr.midpoint_jump);
      log << msg << "\n";
    }
  }
  return all_ok ? 0 : 1;
}

}  // namespace fracdg
