#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "hypmin/germsolve.hpp"

namespace hypmin::invariants {

using germ::GermData3;
using germ::GermData4;
using germ::GermSolution;

using GermData = std::variant<GermData3, GermData4>;

struct InvariantReport {
  int n = 3;
  Eigen::VectorXd kappa_gamma;          // e^{−2u}(−1 − Δu)
  Eigen::VectorXd kappa_gamma_defect;   // angle defect of the e^{u}-scaled edge lengths
  Eigen::VectorXd kappa_perp;           // e^{−2u}(ρ₀ − Δw), zero for ℝH³
  Eigen::VectorXd ii_norm_sq;           // ‖II^{2,0}‖²_γ
  Eigen::VectorXd u4_norm_sq;           // ‖U₄‖²_γ
  double area = 0.0;
  double euler_integral = 0.0;
  double mesh_size = 0.0;               // longest edge
  std::map<std::string, double> residuals;

  nlohmann::json to_json(bool with_fields = false) const;
};

/// Identity tolerance C·h²·(1 + max‖II‖⁴): the identities are exact in the
/// continuum and their discrete slack scales with the curvature squared.
double identity_tolerance(const InvariantReport& report, double identity_scale);

InvariantReport compute_invariants(const GermData& data, const GermSolution& sol);

/// The Gauss, Codazzi and Ricci frame equations in the adapted frame with
/// γ = 2s²|dz|², evaluated as an independent check on the conformal solve.
std::map<std::string, double> frame_equation_residuals(const GermData& data, const GermSolution& sol);

/// Pointwise residual of −s⁻²ZZ̄ log s² + s⁻⁴‖II(Z,Z)‖² + 1 in the canonical
/// chart of each vertex; ii_norm_sq is s⁻⁴‖II(Z,Z)‖² from the frame components.
Eigen::VectorXd gauss_frame_residual(const mesh::SurfaceMesh& mesh, const Eigen::VectorXd& u,
                                     const Eigen::VectorXd& ii_norm_sq);

/// s² = e^{2u} λ² / 2 at a point of the canonical chart: the one place where
/// γ = e^{2u}h meets γ = 2s²|dz|².
double frame_scale_sq(double u, cplx z);

/// Components a, b of θ₁ = a(ν₁+iν₂)dz², θ₂ = b(ν₁−iν₂)dz² in the chart,
/// given unitary components c₁, c₂ and the solved u, w.
std::pair<cplx, cplx> frame_coefficients(cplx c1, cplx c2, double w, cplx z);

enum class Superminimal { Plus, Minus, No };
const char* to_string(Superminimal s);

Superminimal superminimal_test(const InvariantReport& report, double tol);

}  // namespace hypmin::invariants
