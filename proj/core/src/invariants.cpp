#include "hypmin/invariants.hpp"

#include <cmath>
#include <numbers>

#include "hypmin/error.hpp"

namespace hypmin::invariants {

namespace {

constexpr double kPi = std::numbers::pi;

const mesh::SurfaceMesh& mesh_of(const GermData& data) {
  return std::visit([](const auto& d) -> const mesh::SurfaceMesh& { return *d.mesh; }, data);
}

void check_solution(const GermData& data, const GermSolution& sol, const char* op) {
  const mesh::SurfaceMesh& mesh = mesh_of(data);
  if (!sol.converged) {
    throw Error(ErrorKind::StaleSolution, "invariants", op, "solution did not converge");
  }
  const int n = std::holds_alternative<GermData3>(data) ? 3 : 4;
  if (sol.n != n || sol.mesh_hash != mesh.hash() || sol.u.size() != mesh.num_vertices() ||
      (n == 4 && !sol.w)) {
    throw Error(ErrorKind::StaleSolution, "invariants", op,
                "solution does not belong to this data", {{"n", n}, {"solution_n", sol.n}});
  }
}

double max_abs(const Eigen::ArrayXd& a) { return a.size() ? a.abs().maxCoeff() : 0.0; }

double relative_dbar_residual(const mesh::SurfaceMesh& mesh, const bundles::LineBundle& L,
                              const bundles::DiscreteSection& s) {
  const double norm = std::sqrt(mesh.vertex_areas.dot(s.values.cwiseAbs2()));
  if (norm == 0.0) return 0.0;
  const auto d = bundles::dbar_operator(mesh, L, s.m, s.n);
  bundles::DiscreteSection copy = s;
  return d.residual_norm(copy) / norm;
}

}  // namespace

double frame_scale_sq(double u, cplx z) {
  const double lam = mesh::conformal_factor(z);
  return std::exp(2.0 * u) * lam * lam / 2.0;
}

std::pair<cplx, cplx> frame_coefficients(cplx c1, cplx c2, double w, cplx z) {
  const double lam = mesh::conformal_factor(z);
  const double k = lam * lam / (2.0 * std::sqrt(2.0));
  return {c1 * k * std::exp(-w), c2 * k * std::exp(w)};
}

Eigen::VectorXd gauss_frame_residual(const mesh::SurfaceMesh& mesh, const Eigen::VectorXd& u,
                                     const Eigen::VectorXd& ii_norm_sq) {
  const mesh::Laplacian lap = mesh::laplacian(mesh);
  const Eigen::VectorXd lap_u = lap.apply(u);
  Eigen::VectorXd out(mesh.num_vertices());
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    const cplx z = mesh.vertices[i];
    const double lam2 = std::pow(mesh::conformal_factor(z), 2);
    // ZZ̄ log s² = 2 ZZ̄ u + ZZ̄ log λ², with ZZ̄ = λ²Δ/4 and ZZ̄ log λ² = λ²/2.
    const double zzbar = 0.5 * lam2 * lap_u[i] + 0.5 * lam2;
    out[i] = -zzbar / frame_scale_sq(u[i], z) + ii_norm_sq[i] + 1.0;
  }
  return out;
}

InvariantReport compute_invariants(const GermData& data, const GermSolution& sol) {
  check_solution(data, sol, "compute_invariants");
  const mesh::SurfaceMesh& mesh = mesh_of(data);
  const mesh::Laplacian lap = mesh::laplacian(mesh);
  const int nv = mesh.num_vertices();
  const Eigen::ArrayXd u = sol.u.array();
  const Eigen::ArrayXd e2u = (2.0 * u).exp();

  InvariantReport rep;
  rep.n = sol.n;
  rep.mesh_size = mesh.max_edge_length;
  rep.kappa_gamma = ((-1.0 - lap.apply(sol.u).array()) / e2u).matrix();
  rep.kappa_gamma_defect = mesh::angle_defect_curvature(mesh, sol.u);
  rep.area = mesh.vertex_areas.dot(e2u.matrix());
  const double genus_area = 4.0 * kPi * (mesh.genus - 1);
  double degree = 0.0;

  if (const auto* d3 = std::get_if<GermData3>(&data)) {
    rep.ii_norm_sq = (d3->t.array() / (e2u * e2u)).matrix();
    // U₄ = ⟨II^{2,0}, II^{2,0}⟩ = q² ⊗ ν·ν, so ‖U₄‖ = ‖II‖² in codimension one.
    rep.u4_norm_sq = rep.ii_norm_sq.cwiseAbs2();
    rep.kappa_perp = Eigen::VectorXd::Zero(nv);
    rep.euler_integral = 0.0;
  } else {
    const auto& d4 = std::get<GermData4>(data);
    const Eigen::ArrayXd w = sol.w->array();
    const Eigen::ArrayXd pos = (2.0 * w).exp() * d4.t2.array() / (e2u * e2u);
    const Eigen::ArrayXd neg = (-2.0 * w).exp() * d4.t1.array() / (e2u * e2u);
    rep.ii_norm_sq = (pos + neg).matrix();
    rep.u4_norm_sq = (4.0 * d4.t1.array() * d4.t2.array() / (e2u * e2u * e2u * e2u)).matrix();
    rep.kappa_perp = ((d4.L.curvature_density - lap.apply(*sol.w).array()) / e2u).matrix();
    rep.euler_integral = mesh.vertex_areas.dot((e2u * rep.kappa_perp.array()).matrix()) / (2.0 * kPi);
    degree = d4.L.degree;
  }

  const Eigen::ArrayXd ii = rep.ii_norm_sq.array();
  const Eigen::ArrayXd kg = rep.kappa_gamma_defect.array();
  const Eigen::ArrayXd kp = rep.kappa_perp.array();
  auto& r = rep.residuals;
  r["gauss_identity"] = max_abs(rep.kappa_gamma.array() + 1.0 + ii);
  r["gauss_bonnet"] = std::abs(mesh.vertex_areas.dot((e2u * rep.kappa_gamma.array()).matrix()) / (2.0 * kPi) -
                               mesh.euler_characteristic());
  r["area_identity"] =
      std::abs(rep.area - genus_area + mesh.vertex_areas.dot((e2u * ii).matrix()));
  // (κ⊥)² = ‖II‖⁴ − ‖U₄‖² with ‖II‖² = −(1 + κ_γ) taken from the angle-defect curvature.
  r["kappaperp_identity"] = max_abs(kp * kp - (1.0 + kg) * (1.0 + kg) + rep.u4_norm_sq.array());
  r["chi_integral"] = std::abs(rep.euler_integral - degree);
  const auto frame = frame_equation_residuals(data, sol);
  r["ricci_frame"] = frame.at("ricci_frame");
  r["codazzi_frame"] = frame.at("codazzi_frame");
  r["gauss_frame"] = frame.at("gauss_frame");
  // Superminimal branch chosen by the data: κ⊥ = ±(−1 − κ_γ).
  if (rep.n == 4) {
    const auto& d4 = std::get<GermData4>(data);
    const bool plus = d4.t1.isZero(0.0);
    const bool minus = d4.t2.isZero(0.0);
    if (plus || minus) {
      const double sign = plus ? 1.0 : -1.0;
      r["supermin_identity"] = max_abs(kp - sign * (-1.0 - kg));
    } else {
      r["supermin_identity"] = 0.0;
    }
  } else {
    r["supermin_identity"] = 0.0;
  }
  return rep;
}

std::map<std::string, double> frame_equation_residuals(const GermData& data, const GermSolution& sol) {
  check_solution(data, sol, "frame_equation_residuals");
  const mesh::SurfaceMesh& mesh = mesh_of(data);
  const int nv = mesh.num_vertices();
  const mesh::Laplacian lap = mesh::laplacian(mesh);
  std::map<std::string, double> out;
  Eigen::VectorXd ii(nv);
  if (const auto* d3 = std::get_if<GermData3>(&data)) {
    for (int i = 0; i < nv; ++i) {
      // II(Z,Z) = q_z ν with q_z = c λ²/2 the chart coefficient of q.
      const cplx z = mesh.vertices[i];
      const double lam = mesh::conformal_factor(z);
      const double qz2 = d3->t[i] * std::pow(lam * lam / 2.0, 2);
      ii[i] = qz2 / std::pow(frame_scale_sq(sol.u[i], z), 2);
    }
    out["ricci_frame"] = 0.0;
    if (d3->q) {
      const auto L0 = bundles::make_line_bundle(mesh, 0);
      out["codazzi_frame"] = relative_dbar_residual(mesh, L0, *d3->q);
    } else {
      out["codazzi_frame"] = 0.0;
    }
  } else {
    const auto& d4 = std::get<GermData4>(data);
    const Eigen::VectorXd& w = *sol.w;
    const Eigen::VectorXd lap_w = lap.apply(w);
    Eigen::ArrayXd ricci(nv);
    for (int i = 0; i < nv; ++i) {
      const cplx z = mesh.vertices[i];
      const auto [a, b] = frame_coefficients(d4.theta1.values[i], d4.theta2.values[i], w[i], z);
      const double s4 = std::pow(frame_scale_sq(sol.u[i], z), 2);
      // A₁ = a + b, A₂ = i(a − b): ‖II(Z,Z)‖² = |A₁|² + |A₂|², and
      // A₁Ā₂ − Ā₁A₂ = 2i(|b|² − |a|²) gives κ⊥ = 2 s⁻⁴ (|b|² − |a|²).
      const cplx a1 = a + b;
      const cplx a2 = cplx(0.0, 1.0) * (a - b);
      ii[i] = (std::norm(a1) + std::norm(a2)) / s4;
      const cplx cross = a1 * std::conj(a2) - std::conj(a1) * a2;
      const double kperp_frame = cross.imag() / s4;
      const double kperp = std::exp(-2.0 * sol.u[i]) * (d4.L.curvature_density - lap_w[i]);
      ricci[i] = kperp - kperp_frame;
    }
    out["ricci_frame"] = max_abs(ricci);
    out["codazzi_frame"] = std::max(relative_dbar_residual(mesh, d4.L, d4.theta1),
                                    relative_dbar_residual(mesh, d4.L, d4.theta2));
  }
  out["gauss_frame"] = max_abs(gauss_frame_residual(mesh, sol.u, ii).array());
  return out;
}

double identity_tolerance(const InvariantReport& report, double identity_scale) {
  const double ii_max = report.ii_norm_sq.size() ? report.ii_norm_sq.maxCoeff() : 0.0;
  return identity_scale * report.mesh_size * report.mesh_size * (1.0 + ii_max * ii_max);
}

const char* to_string(Superminimal s) {
  switch (s) {
    case Superminimal::Plus: return "superminimal-plus";
    case Superminimal::Minus: return "superminimal-minus";
    case Superminimal::No: return "not-superminimal";
  }
  return "unknown";
}

Superminimal superminimal_test(const InvariantReport& report, double tol) {
  const double u4 = report.u4_norm_sq.size() ? std::sqrt(report.u4_norm_sq.maxCoeff()) : 0.0;
  if (u4 >= tol) return Superminimal::No;
  return report.kappa_perp.sum() >= 0.0 ? Superminimal::Plus : Superminimal::Minus;
}

nlohmann::json InvariantReport::to_json(bool with_fields) const {
  nlohmann::json j;
  j["n"] = n;
  j["area"] = area;
  j["euler_integral"] = euler_integral;
  j["mesh_size"] = mesh_size;
  j["kappa_gamma_range"] = {kappa_gamma.minCoeff(), kappa_gamma.maxCoeff()};
  j["kappa_perp_range"] = {kappa_perp.minCoeff(), kappa_perp.maxCoeff()};
  j["ii_norm_sq_max"] = ii_norm_sq.maxCoeff();
  j["u4_norm_sq_max"] = u4_norm_sq.maxCoeff();
  j["residuals"] = residuals;
  if (with_fields) {
    auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    j["fields"] = {{"kappa_gamma", vec(kappa_gamma)},
                   {"kappa_perp", vec(kappa_perp)},
                   {"ii_norm_sq", vec(ii_norm_sq)},
                   {"u4_norm_sq", vec(u4_norm_sq)}};
  }
  return j;
}

}  // namespace hypmin::invariants
