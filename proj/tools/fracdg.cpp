// Command-line driver: convergence/robustness studies, mesh generation, and
// the built-in consistency check suite.

#include <iostream>

#include "CLI11.hpp"
#include "fracdg/study.hpp"

namespace {

int cmd_run(const fracdg::StudyOptions& opt) {
  try {
    return fracdg::run_study(opt, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_mesh(const std::string& case_name, const std::string& kind, int level, double d_ratio,
             std::uint64_t seed, const std::string& out) {
  try {
    fracdg::CaseDefinition c = fracdg::make_case(case_name);
    fracdg::PolygonalMesh m =
        fracdg::make_mesh(c, fracdg::mesh_kind_from_string(kind), level, d_ratio, seed);
    m.save(out);
    fracdg::StaggeredMesh sm = fracdg::build_staggered(m);
    fracdg::MeshQuality q = fracdg::mesh_quality(sm);
    std::cout << "wrote " << out << ": " << m.cells.size() << " cells, " << m.vertices.size()
              << " vertices, h = " << sm.h << "\n";
    std::cout << "quality: min rho_S = " << q.min_rho_S << ", min edge/diam = " << q.min_rho_E
              << ", max angle = " << q.max_angle << " rad\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_check() {
  using namespace fracdg;
  int failures = 0;
  auto gate = [&](const std::string& name, double value, double tol) {
    bool ok = value <= tol;
    std::printf("%-58s %12.3e  (tol %.1e)  %s\n", name.c_str(), value, tol, ok ? "ok" : "FAIL");
    if (!ok) ++failures;
  };

  for (int d = 2; d <= 10; ++d)
    gate("quadrature exactness, degree " + std::to_string(d), quadrature_check(d), 1e-13);

  for (const char* name : {"ex1-iso", "ex1-aniso", "ex3"}) {
    CaseCheck cc = check_case(make_case(name));
    gate(std::string(name) + ": interface jump condition", cc.interface_eta, 1e-12);
    gate(std::string(name) + ": interface average condition", cc.interface_alpha, 1e-12);
    gate(std::string(name) + ": gradient vs finite differences", cc.grad_fd, 1e-6);
    gate(std::string(name) + ": divergence vs finite differences", cc.div_fd, 1e-6);
    gate(std::string(name) + ": fracture derivative vs finite differences", cc.gamma_fd, 1e-6);
  }

  // Small structural check: adjoint identity, witness identity, zero data.
  CaseDefinition c = make_case("ex1-iso");
  StaggeredMesh sm = build_staggered(generate_uniform(GridKind::rectangular, 4, 0.5));
  for (int k : {1, 2}) {
    DofLayout L = build_layout(sm, k);
    AssembledBlocks bl = assemble(L, c.co, c.sources);
    gate("structure k=" + std::to_string(k) + ": flux/pressure adjoint gap", adjoint_gap(bl), 1e-12);

    DiscreteFunction q(L, Field::pressure);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int i = 0; i < L.np; ++i) q.x[i] = U(rng);
    InfSupWitness w = infsup_witness(L, bl, q);
    gate("structure k=" + std::to_string(k) + ": stability witness identity",
         std::abs(w.bvalue - w.qZ * w.qZ) / (w.qZ * w.qZ), 1e-11);

    AssembledBlocks zb = bl;
    zb.rhs_f.setZero();
    zb.rhs_g.setZero();
    Solution z = solve(L, zb);
    double zmax = std::max({z.u.x.cwiseAbs().maxCoeff(), z.p.x.cwiseAbs().maxCoeff(),
                            z.pG.x.cwiseAbs().maxCoeff()});
    gate("structure k=" + std::to_string(k) + ": zero data gives zero solution", zmax, 1e-12);
  }

  std::printf("%s\n", failures == 0 ? "all checks passed" : "CHECK FAILURES PRESENT");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Staggered DG solver for Darcy flow in fractured porous media on polygonal meshes"};
  app.require_subcommand(1);
  app.set_config("--config")->transform(CLI::ExistingFile);

  fracdg::StudyOptions opt;
  std::string mesh_kind = "rect";
  CLI::App* run = app.add_subcommand("run", "run a convergence/robustness study");
  run->add_option("--case", opt.case_name, "case name (ex1-iso, ex1-aniso, ex3, fivespot-*)")
      ->capture_default_str();
  run->add_option("--mesh", mesh_kind, "mesh kind (rect, tri, cvt, perturbed, mapped-rect, mapped-cvt, unfitted)")
      ->capture_default_str();
  run->add_option("--k", opt.ks, "polynomial degrees")->delimiter(',')->capture_default_str();
  run->add_option("--levels", opt.levels, "refinement levels")->capture_default_str();
  run->add_option("--d-ratio", opt.d_ratio, "small-edge ratio for perturbed meshes")->capture_default_str();
  run->add_option("--seed", opt.seed, "random seed for Voronoi meshes")->capture_default_str();
  run->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
  run->add_option("--threads", opt.threads, "worker threads (0: FRACDG_THREADS or hardware)")
      ->capture_default_str();
  run->add_flag("--dump-matrices", opt.dump_matrices, "export assembled blocks in coordinate text format");

  std::string mcase = "ex1-iso", mkind = "rect", mout = "mesh.json";
  int mlevel = 1;
  double md_ratio = 0.001;
  std::uint64_t mseed = 7;
  CLI::App* mesh = app.add_subcommand("mesh", "generate a mesh and write it as JSON");
  mesh->add_option("--gen", mkind, "mesh kind")->capture_default_str();
  mesh->add_option("--case", mcase, "case supplying fracture geometry and boundary tags")
      ->capture_default_str();
  mesh->add_option("--level", mlevel, "refinement level")->capture_default_str();
  mesh->add_option("--d-ratio", md_ratio, "small-edge ratio for perturbed meshes")->capture_default_str();
  mesh->add_option("--seed", mseed, "random seed for Voronoi meshes")->capture_default_str();
  mesh->add_option("--out", mout, "output file")->capture_default_str();

  CLI::App* check = app.add_subcommand("check", "run the built-in consistency checks");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    try {
      opt.mesh = fracdg::mesh_kind_from_string(mesh_kind);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
    return cmd_run(opt);
  }
  if (mesh->parsed()) return cmd_mesh(mcase, mkind, mlevel, md_ratio, mseed, mout);
  if (check->parsed()) return cmd_check();
  return 0;
}
