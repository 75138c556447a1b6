#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hypmin/bundles.hpp"
#include "hypmin/error.hpp"
#include "hypmin/hypmesh.hpp"
#include "hypmin/mesh_io.hpp"
#include "hypmin/moduli.hpp"
#include "hypmin/pipeline.hpp"

namespace {

using namespace hypmin;

// Flags mirroring RunConfig; unset flags leave the config file value alone.
struct RunFlags {
  std::string config_file;
  std::optional<int> genus, resolution, l, index, index1, max_iter;
  std::optional<std::string> target, data, data1, path, path1, output_dir;
  std::optional<double> amplitude, amplitude1, u_star, tol, identity_scale, class_tol;
  std::optional<std::uint64_t> seed;
  bool no_fields = false;
};

void add_run_flags(CLI::App* app, RunFlags& f) {
  app->add_option("--config", f.config_file, "JSON config file; flags override its values");
  app->add_option("--genus", f.genus, "surface genus (>= 2)");
  app->add_option("--resolution", f.resolution, "refinement level (>= 1)");
  app->add_option("--target", f.target, "rh3 or rh4");
  app->add_option("--l", f.l, "degree of L, |l| < 2(g-1)");
  app->add_option("--data", f.data, "zero | basis_element | random | file | manufactured");
  app->add_option("--data1", f.data1, "kind of theta1 data; defaults to --data");
  app->add_option("--index", f.index, "basis index of q or theta2");
  app->add_option("--amplitude", f.amplitude, "amplitude of q or theta2");
  app->add_option("--index1", f.index1, "basis index of theta1");
  app->add_option("--amplitude1", f.amplitude1, "amplitude of theta1");
  app->add_option("--path", f.path, "section file for q or theta2");
  app->add_option("--path1", f.path1, "section file for theta1");
  app->add_option("--u-star", f.u_star, "manufactured solution amplitude");
  app->add_option("--tol", f.tol, "Newton residual tolerance");
  app->add_option("--max-iter", f.max_iter, "Newton iteration limit");
  app->add_option("--identity-scale", f.identity_scale, "constant C of the identity tolerance C h^2 (1 + |II|^4)");
  app->add_option("--class-tol", f.class_tol, "relative harmonic norm below which a class is trivial");
  app->add_option("--seed", f.seed, "seed of the mt19937_64 generator");
  app->add_option("--output-dir", f.output_dir, "directory for report.json and fields.csv");
  app->add_flag("--no-fields", f.no_fields, "skip the vertex field CSV");
}

pipeline::RunConfig make_config(const RunFlags& f) {
  pipeline::RunConfig c;
  if (!f.config_file.empty()) {
    std::ifstream in(f.config_file);
    if (!in) {
      throw Error(ErrorKind::Format, "cli", "parse_config", "cannot open config file", {{"path", f.config_file}});
    }
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Format, "cli", "parse_config", e.what(), {{"path", f.config_file}});
    }
    c = pipeline::RunConfig::from_json(j, c);
  }
  if (f.genus) c.genus = *f.genus;
  if (f.resolution) c.resolution = *f.resolution;
  if (f.target) c.target = pipeline::parse_target(*f.target);
  if (f.l) c.l = *f.l;
  if (f.data) c.data.kind = pipeline::parse_data_kind(*f.data);
  if (f.data1) c.data.kind1 = pipeline::parse_data_kind(*f.data1);
  if (f.index) c.data.index = *f.index;
  if (f.amplitude) c.data.amplitude = *f.amplitude;
  if (f.index1) c.data.index1 = *f.index1;
  if (f.amplitude1) c.data.amplitude1 = *f.amplitude1;
  if (f.path) c.data.path = *f.path;
  if (f.path1) c.data.path1 = *f.path1;
  if (f.u_star) c.data.u_star = *f.u_star;
  if (f.tol) c.solver.tol = *f.tol;
  if (f.max_iter) c.solver.max_iter = *f.max_iter;
  if (f.identity_scale) c.tolerances.identity_scale = *f.identity_scale;
  if (f.class_tol) c.tolerances.class_tol = *f.class_tol;
  if (f.seed) c.seed = *f.seed;
  if (f.output_dir) c.output_dir = *f.output_dir;
  if (f.no_fields) c.write_fields = false;
  return c;
}

int emit_run(const pipeline::RunConfig& c, pipeline::Stage stage) {
  const pipeline::RunResult r = pipeline::run(c, stage);
  std::cout << r.report.dump(2) << '\n';
  if (r.report.contains("failed_at")) return 2;
  return r.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equivariant minimal surfaces in RH^3 and RH^4 from germ data"};
  app.require_subcommand(1);

  auto* mesh_cmd = app.add_subcommand("mesh-info", "build the quotient mesh and print its summary");
  int mesh_genus = 2, mesh_res = 3;
  std::string mesh_save;
  mesh_cmd->add_option("--genus", mesh_genus, "surface genus (>= 2)");
  mesh_cmd->add_option("--resolution", mesh_res, "refinement level (>= 1)");
  mesh_cmd->add_option("--save", mesh_save, "write the mesh to this file");

  auto* basis_cmd = app.add_subcommand("basis", "numerical holomorphic sections of K^m L^n");
  int b_genus = 2, b_res = 4, b_m = 2, b_n = 0, b_l = 0;
  std::optional<int> b_expected;
  std::string b_save;
  basis_cmd->add_option("--genus", b_genus, "surface genus (>= 2)");
  basis_cmd->add_option("--resolution", b_res, "refinement level (>= 1)");
  basis_cmd->add_option("--m", b_m, "power of K");
  basis_cmd->add_option("--n", b_n, "power of L");
  basis_cmd->add_option("--l", b_l, "degree of L");
  basis_cmd->add_option("--expected", b_expected, "expected dimension");
  basis_cmd->add_option("--save-dir", b_save, "write each basis section to this directory");

  RunFlags solve_f, inv_f, verify_f, sweep_f;
  auto* solve_cmd = app.add_subcommand("solve", "solve the Gauss(-Ricci) equations");
  add_run_flags(solve_cmd, solve_f);
  auto* inv_cmd = app.add_subcommand("invariants", "solve and evaluate curvature invariants and identities");
  add_run_flags(inv_cmd, inv_f);
  auto* verify_cmd = app.add_subcommand("verify", "full pipeline with every check; exit 0 iff all pass");
  add_run_flags(verify_cmd, verify_f);

  auto* sweep_cmd = app.add_subcommand("sweep", "run the pipeline over a parameter axis");
  add_run_flags(sweep_cmd, sweep_f);
  std::string axis = "amplitude";
  std::vector<double> values;
  sweep_cmd->add_option("--axis", axis, "resolution | amplitude | l | basis_index");
  sweep_cmd->add_option("--values", values, "axis values")->required()->delimiter(',');

  auto* classify_cmd = app.add_subcommand("classify", "stability verdict and moduli dimensions");
  int c_genus = 2, c_n = 4, c_l = 1;
  bool c_beta = false, c_beta1 = false, c_beta2 = false, c_prop = false, c_supermin = false;
  double c_margin = std::numeric_limits<double>::infinity();
  classify_cmd->add_option("--genus", c_genus, "surface genus (>= 2)");
  classify_cmd->add_option("--n", c_n, "3 or 4");
  classify_cmd->add_option("--l", c_l, "Euler number of the normal bundle");
  classify_cmd->add_flag("--beta", c_beta, "[beta] nonzero (n = 3)");
  classify_cmd->add_flag("--beta1", c_beta1, "[beta1] nonzero");
  classify_cmd->add_flag("--beta2", c_beta2, "[beta2] nonzero");
  classify_cmd->add_flag("--proportional", c_prop, "harmonic parts proportional with L trivial");
  classify_cmd->add_flag("--superminimal", c_supermin, "U4 vanishes");
  classify_cmd->add_option("--margin", c_margin, "class norm over class tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*mesh_cmd) {
      const mesh::SurfaceMesh m = mesh::build_surface(mesh_genus, mesh_res);
      if (!mesh_save.empty()) mesh::save_mesh(mesh_save, m);
      nlohmann::json j{{"genus", m.genus},
                       {"resolution", m.resolution},
                       {"vertices", m.num_vertices()},
                       {"edges", m.num_edges()},
                       {"faces", m.num_faces()},
                       {"euler_characteristic", m.euler_characteristic()},
                       {"area", m.total_area},
                       {"max_edge_length", m.max_edge_length},
                       {"min_angle_deg", m.min_angle_deg},
                       {"circumradius", m.domain.circumradius},
                       {"inradius", m.domain.inradius},
                       {"hash", m.hash()}};
      std::cout << j.dump(2) << '\n';
      return 0;
    }
    if (*basis_cmd) {
      const mesh::SurfaceMesh m = mesh::build_surface(b_genus, b_res);
      const bundles::LineBundle L = bundles::make_line_bundle(m, b_l);
      const bundles::HolomorphicBasis B =
          bundles::holomorphic_basis(bundles::dbar_operator(m, L, b_m, b_n), b_expected);
      nlohmann::json j{{"m", b_m},
                       {"n", b_n},
                       {"l", b_l},
                       {"dimension", B.dimension},
                       {"gap_ratio", B.gap_ratio},
                       {"singular_values", B.singular_values}};
      if (B.warning) j["warning"] = *B.warning;
      if (!b_save.empty()) {
        std::filesystem::create_directories(b_save);
        for (int i = 0; i < B.dimension; ++i) {
          std::ofstream out(std::filesystem::path(b_save) / ("section_" + std::to_string(i) + ".txt"));
          bundles::write_section(out, B.sections[i]);
        }
      }
      std::cout << j.dump(2) << '\n';
      return 0;
    }
    if (*solve_cmd) return emit_run(make_config(solve_f), pipeline::Stage::Solve);
    if (*inv_cmd) return emit_run(make_config(inv_f), pipeline::Stage::Invariants);
    if (*verify_cmd) return emit_run(make_config(verify_f), pipeline::Stage::Full);
    if (*sweep_cmd) {
      const pipeline::RunConfig c = make_config(sweep_f);
      const pipeline::SweepResult s = pipeline::sweep(c, pipeline::parse_axis(axis), values);
      std::cout << s.csv();
      const bool all_ok = std::all_of(s.rows.begin(), s.rows.end(), [](const auto& r) { return r.ok; });
      return all_ok ? 0 : 1;
    }
    if (*classify_cmd) {
      moduli::ClassFlags flags;
      flags.beta = c_beta;
      flags.beta1 = c_beta1;
      flags.beta2 = c_beta2;
      flags.proportional = c_prop;
      flags.margin = c_margin;
      const moduli::ModuliDescriptor d = moduli::classify(c_genus, c_n, c_l, flags, c_supermin);
      nlohmann::json j = d.to_json();
      if (c_n == 4 && c_l >= 1 && c_l < 2 * (c_genus - 1)) {
        j["secant"] = moduli::secant_genericity(c_genus, c_l).to_json();
      }
      std::cout << j.dump(2) << '\n';
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << e.to_json().dump(2) << '\n';
    return 2;
  }
  return 0;
}
