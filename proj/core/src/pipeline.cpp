#include "hypmin/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "hypmin/bundles.hpp"
#include "hypmin/error.hpp"
#include "hypmin/higgs.hpp"
#include "hypmin/moduli.hpp"

namespace hypmin::pipeline {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kPinnedVertices = 8;

nlohmann::json vec_json(const std::vector<double>& v) { return nlohmann::json(v); }

bundles::DiscreteSection zero_section(const mesh::SurfaceMesh& mesh, int m, int n, int degree) {
  bundles::DiscreteSection s;
  s.m = m;
  s.n = n;
  s.degree = degree;
  s.mesh_hash = mesh.hash();
  s.values = Eigen::VectorXcd::Zero(mesh.num_vertices());
  return s;
}

struct BasisEntry {
  std::string name;
  int expected = 0;
  bundles::HolomorphicBasis basis;
};

nlohmann::json basis_json(const BasisEntry& b) {
  nlohmann::json j{{"dimension", b.basis.dimension},
                   {"expected", b.expected},
                   {"gap_ratio", b.basis.gap_ratio},
                   {"singular_values", vec_json(b.basis.singular_values)}};
  if (b.basis.warning) j["warning"] = *b.basis.warning;
  return j;
}

BasisEntry compute_basis(const mesh::SurfaceMesh& mesh, const bundles::LineBundle& L, int n, int expected,
                         std::uint64_t seed) {
  BasisEntry e;
  e.name = n == 0 ? "K2" : (n > 0 ? "K2L" : "K2L^-1");
  e.expected = expected;
  bundles::KernelOptions opt;
  opt.seed = seed;
  e.basis = bundles::holomorphic_basis(bundles::dbar_operator(mesh, L, 2, n), expected, opt);
  return e;
}

double section_norm(const mesh::SurfaceMesh& mesh, const bundles::DiscreteSection& s) {
  return std::sqrt(mesh.vertex_areas.dot(s.values.cwiseAbs2()));
}

bundles::DiscreteSection pick(const mesh::SurfaceMesh& mesh, const BasisEntry& b, DataKind kind, int index,
                              double amplitude, std::mt19937_64& rng, int m, int n, int degree) {
  if (amplitude == 0.0 || kind == DataKind::Zero) return zero_section(mesh, m, n, degree);
  if (kind == DataKind::BasisElement) {
    if (index < 0 || index >= b.basis.dimension) {
      throw Error(ErrorKind::InvalidParameter, "cli", "run", "basis index out of range",
                  {{"bundle", b.name}, {"index", index}, {"dimension", b.basis.dimension}});
    }
    bundles::DiscreteSection s = b.basis.sections[index];
    s.values *= amplitude;
    return s;
  }
  std::normal_distribution<double> normal;
  std::vector<int> vertices(kPinnedVertices);
  Eigen::VectorXcd values(kPinnedVertices);
  for (int i = 0; i < kPinnedVertices; ++i) {
    vertices[i] = i;
    const double re = normal(rng);
    values[i] = cplx(re, normal(rng));
  }
  bundles::DiscreteSection s = bundles::section_with_values(b.basis, vertices, values);
  s.values *= amplitude / section_norm(mesh, s);
  return s;
}

bundles::DiscreteSection load_section(const std::string& path, const mesh::SurfaceMesh& mesh, int m, int n) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Format, "cli", "run", "cannot open section file", {{"path", path}});
  bundles::DiscreteSection s = bundles::read_section(in);
  if (s.mesh_hash != mesh.hash() || s.values.size() != mesh.num_vertices()) {
    throw Error(ErrorKind::Shape, "cli", "run", "section file was written for a different mesh", {{"path", path}});
  }
  if (s.m != m || s.n != n) {
    throw Error(ErrorKind::InvalidParameter, "cli", "run", "section file holds the wrong bundle",
                {{"path", path}, {"m", s.m}, {"n", s.n}});
  }
  return s;
}

nlohmann::json mesh_json(const mesh::SurfaceMesh& m) {
  return {{"genus", m.genus},
          {"resolution", m.resolution},
          {"vertices", m.num_vertices()},
          {"edges", m.num_edges()},
          {"faces", m.num_faces()},
          {"euler_characteristic", m.euler_characteristic()},
          {"area", m.total_area},
          {"max_edge_length", m.max_edge_length},
          {"min_angle_deg", m.min_angle_deg},
          {"hash", m.hash()}};
}

std::vector<std::string> identity_keys(int n) {
  std::vector<std::string> keys = {"gauss_identity", "gauss_frame", "kappaperp_identity"};
  if (n == 4) {
    keys.push_back("ricci_frame");
    keys.push_back("supermin_identity");
  }
  return keys;
}

void write_fields_csv(const RunResult& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Format, "cli", "write_outputs", "cannot write fields", {{"path", path}});
  out.precision(12);
  const auto& inv = *r.invariants;
  const auto& sol = *r.solution;
  out << "vertex,x,y,u,w,kappa_gamma,kappa_perp,ii_norm_sq,u4_norm_sq\n";
  for (int i = 0; i < r.mesh->num_vertices(); ++i) {
    out << i << ',' << r.mesh->vertices[i].real() << ',' << r.mesh->vertices[i].imag() << ',' << sol.u[i] << ','
        << (sol.w ? (*sol.w)[i] : 0.0) << ',' << inv.kappa_gamma[i] << ',' << inv.kappa_perp[i] << ','
        << inv.ii_norm_sq[i] << ',' << inv.u4_norm_sq[i] << '\n';
  }
}

}  // namespace

const char* to_string(Target t) { return t == Target::RH3 ? "rh3" : "rh4"; }

const char* to_string(DataKind k) {
  switch (k) {
    case DataKind::Zero: return "zero";
    case DataKind::BasisElement: return "basis_element";
    case DataKind::Random: return "random";
    case DataKind::File: return "file";
    case DataKind::Manufactured: return "manufactured";
  }
  return "unknown";
}

Target parse_target(const std::string& s) {
  if (s == "rh3") return Target::RH3;
  if (s == "rh4") return Target::RH4;
  throw Error(ErrorKind::InvalidParameter, "cli", "parse_config", "target must be rh3 or rh4", {{"target", s}});
}

DataKind parse_data_kind(const std::string& s) {
  for (DataKind k : {DataKind::Zero, DataKind::BasisElement, DataKind::Random, DataKind::File,
                     DataKind::Manufactured}) {
    if (s == to_string(k)) return k;
  }
  throw Error(ErrorKind::InvalidParameter, "cli", "parse_config", "unknown data kind", {{"data", s}});
}

const char* to_string(Axis a) {
  switch (a) {
    case Axis::Resolution: return "resolution";
    case Axis::Amplitude: return "amplitude";
    case Axis::L: return "l";
    case Axis::BasisIndex: return "basis_index";
  }
  return "unknown";
}

Axis parse_axis(const std::string& s) {
  for (Axis a : {Axis::Resolution, Axis::Amplitude, Axis::L, Axis::BasisIndex}) {
    if (s == to_string(a)) return a;
  }
  throw Error(ErrorKind::InvalidParameter, "cli", "sweep", "unknown sweep axis", {{"axis", s}});
}

nlohmann::json RunConfig::to_json() const {
  return {{"genus", genus},
          {"resolution", resolution},
          {"target", to_string(target)},
          {"l", l},
          {"data",
           {{"kind", to_string(data.kind)},
            {"kind1", to_string(data.kind1.value_or(data.kind))},
            {"index", data.index},
            {"amplitude", data.amplitude},
            {"index1", data.index1},
            {"amplitude1", data.amplitude1},
            {"path", data.path},
            {"path1", data.path1},
            {"u_star", data.u_star}}},
          {"solver", {{"tol", solver.tol}, {"max_iter", solver.max_iter}}},
          {"tolerances",
           {{"identity_scale", tolerances.identity_scale},
            {"class_tol", tolerances.class_tol},
            {"superminimal_tol", tolerances.superminimal_tol},
            {"quadrature_tol", tolerances.quadrature_tol}}},
          {"seed", seed},
          {"rng", "mt19937_64"},
          {"output_dir", output_dir},
          {"write_fields", write_fields}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j, const RunConfig& base) {
  RunConfig c = base;
  try {
    if (j.contains("genus")) c.genus = j.at("genus").get<int>();
    if (j.contains("resolution")) c.resolution = j.at("resolution").get<int>();
    if (j.contains("target")) c.target = parse_target(j.at("target").get<std::string>());
    if (j.contains("l")) c.l = j.at("l").get<int>();
    if (j.contains("data")) {
      const auto& d = j.at("data");
      if (d.contains("kind")) c.data.kind = parse_data_kind(d.at("kind").get<std::string>());
      if (d.contains("kind1")) c.data.kind1 = parse_data_kind(d.at("kind1").get<std::string>());
      if (d.contains("index")) c.data.index = d.at("index").get<int>();
      if (d.contains("amplitude")) c.data.amplitude = d.at("amplitude").get<double>();
      if (d.contains("index1")) c.data.index1 = d.at("index1").get<int>();
      if (d.contains("amplitude1")) c.data.amplitude1 = d.at("amplitude1").get<double>();
      if (d.contains("path")) c.data.path = d.at("path").get<std::string>();
      if (d.contains("path1")) c.data.path1 = d.at("path1").get<std::string>();
      if (d.contains("u_star")) c.data.u_star = d.at("u_star").get<double>();
    }
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      if (s.contains("tol")) c.solver.tol = s.at("tol").get<double>();
      if (s.contains("max_iter")) c.solver.max_iter = s.at("max_iter").get<int>();
    }
    if (j.contains("tolerances")) {
      const auto& t = j.at("tolerances");
      if (t.contains("identity_scale")) c.tolerances.identity_scale = t.at("identity_scale").get<double>();
      if (t.contains("class_tol")) c.tolerances.class_tol = t.at("class_tol").get<double>();
      if (t.contains("superminimal_tol")) c.tolerances.superminimal_tol = t.at("superminimal_tol").get<double>();
      if (t.contains("quadrature_tol")) c.tolerances.quadrature_tol = t.at("quadrature_tol").get<double>();
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("write_fields")) c.write_fields = j.at("write_fields").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, "cli", "parse_config", e.what());
  }
  return c;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) { return from_json(j, RunConfig{}); }

void RunConfig::validate() const {
  auto bad = [](const std::string& msg, nlohmann::json payload) {
    throw Error(ErrorKind::InvalidParameter, "cli", "validate", msg, std::move(payload));
  };
  if (genus < 2) bad("genus must be at least 2", {{"genus", genus}});
  if (resolution < 1) bad("resolution must be at least 1", {{"resolution", resolution}});
  if (target == Target::RH4 && !moduli::admissible(genus, l)) {
    bad("degree of L outside the window |l| < 2(g-1)", {{"l", l}, {"genus", genus}});
  }
  if (target == Target::RH3 && l != 0) bad("rh3 has no normal line bundle; l must be 0", {{"l", l}});
  if (data.kind == DataKind::Manufactured && target != Target::RH3) {
    bad("manufactured data is defined for rh3", {{"target", to_string(target)}});
  }
  if (data.kind == DataKind::Manufactured && !(data.u_star > 0.0 && data.u_star <= 1.0)) {
    bad("u_star must lie in (0, 1]", {{"u_star", data.u_star}});
  }
  if (!(data.amplitude >= 0.0) || !(data.amplitude1 >= 0.0)) {
    bad("amplitudes must be non-negative", {{"amplitude", data.amplitude}, {"amplitude1", data.amplitude1}});
  }
  if (data.index < 0 || data.index1 < 0) bad("basis indices must be non-negative", {});
  if (data.kind == DataKind::File && data.path.empty()) bad("file data needs a path", {});
  if (data.kind1 == DataKind::Manufactured) bad("manufactured data has no theta1", {});
  if (!(solver.tol > 0.0) || solver.max_iter < 1) {
    bad("solver tolerance and iteration limit must be positive", {{"tol", solver.tol}, {"max_iter", solver.max_iter}});
  }
  if (!(tolerances.identity_scale > 0.0)) bad("identity_scale must be positive", {});
  if (!(tolerances.class_tol > 0.0 && tolerances.class_tol < 1.0)) {
    bad("class_tol must lie in (0, 1)", {{"class_tol", tolerances.class_tol}});
  }
  if (!(tolerances.superminimal_tol > 0.0) || !(tolerances.quadrature_tol >= 0.0)) {
    bad("superminimal and quadrature tolerances must be positive", {});
  }
}

Manufactured manufactured_solution(const mesh::SurfaceMesh& mesh, double amplitude) {
  const double radius = 0.95 * mesh.domain.inradius;
  const double r2 = radius * radius;
  const double eps = amplitude / 20.0;
  const int n = mesh.num_vertices();
  Manufactured out{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    const double rho = 2.0 * std::atanh(std::abs(mesh.vertices[i]));
    const double s = rho / radius;
    double b = 0.0;
    double lap_b = 0.0;
    if (s < 1.0) {
      const double q = 1.0 - s * s;
      b = std::pow(q, 4);
      const double db = -8.0 * s * std::pow(q, 3) / radius;
      const double d2b = -8.0 * std::pow(q, 3) / r2 + 48.0 * s * s * q * q / r2;
      // Radial hyperbolic Laplacian b'' + coth ρ b', with limit 2b''(0) at the centre.
      lap_b = rho < 1e-8 ? -16.0 / r2 : d2b + db / std::tanh(rho);
    }
    const double u = -amplitude + eps * b;
    const double e2u = std::exp(2.0 * u);
    out.u_star[i] = u;
    out.forcing[i] = e2u * (eps * lap_b - e2u + 1.0);
  }
  return out;
}

RunResult run(const RunConfig& config, Stage stage) {
  RunResult r;
  nlohmann::json& rep = r.report;
  rep["config_echo"] = config.to_json();
  std::string step = "validate";
  try {
    config.validate();
    const int g = config.genus;
    const bool rh4 = config.target == Target::RH4;
    const int l = rh4 ? config.l : 0;

    step = "mesh";
    r.mesh = std::make_shared<const mesh::SurfaceMesh>(mesh::build_surface(g, config.resolution));
    const mesh::SurfaceMesh& m = *r.mesh;
    rep["mesh"] = mesh_json(m);

    step = "bundles";
    const bundles::LineBundle L = bundles::make_line_bundle(m, l);
    std::mt19937_64 rng(config.seed);
    const DataSpec& ds = config.data;
    auto sampled = [](DataKind k) { return k == DataKind::BasisElement || k == DataKind::Random; };
    std::vector<BasisEntry> bases;
    if (rh4) {
      const bool need2 = sampled(ds.kind) && ds.amplitude != 0.0;
      const bool need1 = sampled(ds.kind1.value_or(ds.kind)) && ds.amplitude1 != 0.0;
      if (need2 || need1) {
        bases.push_back(compute_basis(m, L, 1, 3 * (g - 1) + l, config.seed));
        bases.push_back(compute_basis(m, L, -1, 3 * (g - 1) - l, config.seed));
      }
    } else if (sampled(ds.kind) && ds.amplitude != 0.0) {
      bases.push_back(compute_basis(m, L, 0, 3 * (g - 1), config.seed));
    }
    const BasisEntry none{};
    auto basis_at = [&](std::size_t i) -> const BasisEntry& { return i < bases.size() ? bases[i] : none; };
    rep["bundle_dims"] = nlohmann::json::object();
    for (const auto& b : bases) rep["bundle_dims"][b.name] = basis_json(b);

    step = "data";
    std::optional<Manufactured> mms;
    if (ds.kind == DataKind::Manufactured) {
      mms = manufactured_solution(m, ds.u_star);
      r.data = germ::make_forced_germ3(r.mesh, mms->forcing);
    } else if (!rh4) {
      bundles::DiscreteSection q = zero_section(m, 2, 0, 0);
      if (ds.kind == DataKind::File) {
        q = load_section(ds.path, m, 2, 0);
      } else if (ds.kind != DataKind::Zero) {
        q = pick(m, basis_at(0), ds.kind, ds.index, ds.amplitude, rng, 2, 0, 0);
      }
      r.data = germ::make_germ3(r.mesh, q);
    } else {
      const DataKind kind1 = ds.kind1.value_or(ds.kind);
      const bundles::DiscreteSection th2 = ds.kind == DataKind::File
                                               ? load_section(ds.path, m, 2, 1)
                                               : pick(m, basis_at(0), ds.kind, ds.index, ds.amplitude, rng, 2, 1, l);
      const bundles::DiscreteSection th1 =
          kind1 == DataKind::File ? (ds.path1.empty() ? zero_section(m, 2, -1, l) : load_section(ds.path1, m, 2, -1))
                                  : pick(m, basis_at(1), kind1, ds.index1, ds.amplitude1, rng, 2, -1, l);
      r.data = germ::make_germ4(r.mesh, L, th1, th2);
    }
    rep["data"] = {{"rng", "mt19937_64"}, {"seed", config.seed}};

    step = "solve";
    r.solution = std::visit(
        [&](const auto& d) {
          if constexpr (std::is_same_v<std::decay_t<decltype(d)>, germ::GermData3>) {
            return germ::solve_gauss3(d, config.solver);
          } else {
            return germ::solve_gauss_ricci4(d, config.solver);
          }
        },
        *r.data);
    const germ::GermSolution& sol = *r.solution;
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& s : sol.trace) trace.push_back({s.iteration, s.residual, s.step});
    rep["solution"] = {{"converged", sol.converged},
                       {"iterations", sol.iterations()},
                       {"residual", sol.residual},
                       {"u_max", sol.u.cwiseAbs().maxCoeff()},
                       {"u_range", {sol.u.minCoeff(), sol.u.maxCoeff()}},
                       {"trace", trace}};
    if (sol.w) rep["solution"]["w_range"] = {sol.w->minCoeff(), sol.w->maxCoeff()};
    r.checks["converged"] = sol.converged;
    const double h = m.max_edge_length;
    if (mms) {
      const Eigen::VectorXd err = sol.u - mms->u_star;
      const double l2 = std::sqrt(m.vertex_areas.dot(err.cwiseAbs2()));
      rep["mms_error"] = {{"l2", l2}, {"max", err.cwiseAbs().maxCoeff()}, {"mesh_size", h}};
      r.checks["mms_error"] = l2 <= config.tolerances.identity_scale * h * h * ds.u_star;
    }
    if (stage == Stage::Solve) {
      r.passed = std::all_of(r.checks.begin(), r.checks.end(), [](const auto& c) { return c.second; });
      rep["checks"] = r.checks;
      rep["passed"] = r.passed;
      if (!config.output_dir.empty()) write_outputs(r, config.output_dir);
      return r;
    }

    step = "invariants";
    r.invariants = invariants::compute_invariants(*r.data, sol);
    const invariants::InvariantReport& inv = *r.invariants;
    const double id_tol = invariants::identity_tolerance(inv, config.tolerances.identity_scale);
    rep["invariants"] = inv.to_json();
    rep["invariants"]["identity_tolerance"] = id_tol;
    double max_id = 0.0;
    for (const std::string& k : identity_keys(sol.n)) {
      max_id = std::max(max_id, inv.residuals.at(k));
      r.checks[k] = inv.residuals.at(k) <= id_tol;
    }
    rep["invariants"]["max_identity_residual"] = max_id;
    r.checks["area_identity"] = inv.residuals.at("area_identity") <= 10.0 * config.solver.tol;
    r.checks["gauss_bonnet"] = inv.residuals.at("gauss_bonnet") <= 1e-8;
    const double bound = 2.0 * kPi * (2.0 * (g - 1) - std::abs(l));
    rep["invariants"]["area_bound"] = bound;
    r.checks["area_bound"] = inv.area <= bound + config.tolerances.quadrature_tol;
    if (rh4) {
      r.checks["chi_integral"] = inv.residuals.at("chi_integral") <= 0.02 * std::max(1, std::abs(l));
    }
    if (!mms) r.checks["codazzi_frame"] = inv.residuals.at("codazzi_frame") <= config.tolerances.identity_scale * h * h;
    const invariants::Superminimal sm = invariants::superminimal_test(inv, config.tolerances.superminimal_tol);
    rep["invariants"]["superminimal"] = invariants::to_string(sm);

    if (stage == Stage::Invariants || mms) {
      r.passed = std::all_of(r.checks.begin(), r.checks.end(), [](const auto& c) { return c.second; });
      rep["checks"] = r.checks;
      rep["passed"] = r.passed;
      if (!config.output_dir.empty()) write_outputs(r, config.output_dir);
      return r;
    }

    step = "higgs";
    const higgs::HiggsAssembly H = higgs::build_from_germ(*r.data, sol);
    const higgs::StructureCheck st = higgs::check_structure(H);
    nlohmann::json hc;
    hc["manifest"] = H.manifest();
    hc["upper_triangular"] = st.upper_triangular;
    hc["q_v_holomorphic"] = st.q_v_holomorphic;
    hc["isotropic_phi"] = st.isotropic_phi;
    r.checks["higgs_structure"] = st.ok();
    const cplx lambda(2.0, 1.0);
    const higgs::HiggsAssembly scaled = higgs::gauge_scale(H, lambda);
    const double roundtrip = higgs::block_distance(higgs::gauge_scale(scaled, 1.0 / lambda), H);
    hc["gauge_roundtrip"] = roundtrip;
    r.checks["gauge_roundtrip"] = roundtrip <= 1e-12;
    if (rh4) {
      const cplx a(0.0, 2.0);
      const higgs::HiggsAssembly lifted = higgs::lift_cstar(H, a);
      const auto bl = lifted.betas();
      const auto b0 = H.betas();
      const bool exact = (bl[0] == (b0[0] * a)) && (bl[1] == (b0[1] * (1.0 / a)));
      const double defect = higgs::q_v_defect(H, {1.0, a, 1.0 / a, 1.0});
      hc["cstar_lift_exact"] = exact;
      hc["cstar_q_v_defect"] = defect;
      r.checks["cstar_lift"] = exact && defect == 0.0;
    }

    step = "classes";
    bundles::ClassOptions copt;
    copt.tol = config.tolerances.class_tol;
    moduli::ClassFlags flags;
    std::vector<bundles::ClassTest> tests;
    nlohmann::json cj = nlohmann::json::array();
    for (const bundles::FaceForm& b : H.beta_blocks) {
      const std::optional<Eigen::VectorXd> w = rh4 ? sol.w : std::nullopt;
      tests.push_back(bundles::class_is_trivial(m, *H.L, b, sol.u, w, copt));
      cj.push_back({{"n", b.n}, {"relative_norm", tests.back().norm}, {"trivial", tests.back().trivial}});
      if (!tests.back().trivial) flags.margin = std::min(flags.margin, tests.back().norm / copt.tol);
    }
    hc["classes"] = cj;
    if (rh4) {
      flags.beta1 = !tests[0].trivial;
      flags.beta2 = !tests[1].trivial;
      if (flags.beta1 && flags.beta2 && l == 0) {
        const moduli::OrbitNormalForm nf =
            moduli::orbit_normal_form(tests[0].harmonic, tests[1].harmonic, tests[0].weight, tests[1].weight);
        const double angle = moduli::angular_distance(nf.beta1, nf.beta2, tests[0].weight);
        flags.proportional = angle < moduli::kProportionalAngle;
        hc["orbit_scale"] = nf.scale;
        hc["class_angle"] = angle;
      }
      const bool hodge = higgs::hodge_flag(H, config.tolerances.superminimal_tol);
      hc["hodge"] = hodge;
      r.checks["hodge_consistent"] = hodge == (sm != invariants::Superminimal::No);
    } else {
      flags.beta = !tests[0].trivial;
    }
    rep["higgs_checks"] = hc;

    step = "moduli";
    const moduli::ModuliDescriptor md =
        moduli::classify(g, rh4 ? 4 : 3, l, flags, sm != invariants::Superminimal::No && rh4);
    rep["moduli"] = md.to_json();
    if (rh4 && l != 0) rep["moduli"]["secant"] = moduli::secant_genericity(g, std::abs(l)).to_json();
  } catch (const Error& e) {
    rep["failed_at"] = e.to_json();
    rep["failed_at"]["stage"] = step;
    r.checks["completed"] = false;
  }
  r.passed = !rep.contains("failed_at") &&
             std::all_of(r.checks.begin(), r.checks.end(), [](const auto& c) { return c.second; });
  rep["checks"] = r.checks;
  rep["passed"] = r.passed;
  if (!config.output_dir.empty()) write_outputs(r, config.output_dir);
  return r;
}

void write_outputs(const RunResult& result, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string path = (std::filesystem::path(dir) / "report.json").string();
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Format, "cli", "write_outputs", "cannot write report", {{"path", path}});
  out << result.report.dump(2) << '\n';
  const bool fields = result.report.at("config_echo").value("write_fields", true);
  if (fields && result.invariants && result.solution) {
    write_fields_csv(result, (std::filesystem::path(dir) / "fields.csv").string());
  }
}

std::string SweepResult::csv() const {
  std::ostringstream out;
  out.precision(12);
  out << "value,status,area,euler_integral,max_identity_residual,verdict,mesh_size,mms_error,error\n";
  for (const SweepRow& r : rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    out << r.value << ',' << (r.ok ? "ok" : "failed") << ',' << r.area << ',' << r.euler_integral << ','
        << r.max_identity_residual << ',' << r.verdict << ',' << r.mesh_size << ',' << r.mms_error << ',' << err
        << '\n';
  }
  return out.str();
}

SweepResult sweep(const RunConfig& base, Axis axis, const std::vector<double>& values) {
  SweepResult out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    RunConfig c = base;
    switch (axis) {
      case Axis::Resolution: c.resolution = static_cast<int>(std::lround(v)); break;
      case Axis::Amplitude:
        c.data.amplitude = base.data.amplitude * v;
        c.data.amplitude1 = base.data.amplitude1 * v;
        break;
      case Axis::L: c.l = static_cast<int>(std::lround(v)); break;
      case Axis::BasisIndex: c.data.index = static_cast<int>(std::lround(v)); break;
    }
    if (!base.output_dir.empty()) {
      c.output_dir = (std::filesystem::path(base.output_dir) / (std::string(to_string(axis)) + "_" +
                                                                std::to_string(i)))
                         .string();
    }
    SweepRow row;
    row.value = v;
    const RunResult r = run(c);
    const auto& rep = r.report;
    row.ok = r.passed;
    if (rep.contains("failed_at")) row.error = rep["failed_at"].value("message", "failed");
    if (rep.contains("invariants")) {
      row.area = rep["invariants"]["area"];
      row.euler_integral = rep["invariants"]["euler_integral"];
      row.max_identity_residual = rep["invariants"]["max_identity_residual"];
    }
    if (rep.contains("moduli")) row.verdict = rep["moduli"]["verdict"];
    if (rep.contains("mesh")) row.mesh_size = rep["mesh"]["max_edge_length"];
    if (rep.contains("mms_error")) row.mms_error = rep["mms_error"]["l2"];
    out.rows.push_back(row);
  }
  if (!base.output_dir.empty()) {
    std::filesystem::create_directories(base.output_dir);
    std::ofstream f(std::filesystem::path(base.output_dir) / "sweep.csv");
    f << out.csv();
  }
  return out;
}

}  // namespace hypmin::pipeline
