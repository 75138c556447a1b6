#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hypmin/bundles.hpp"
#include "hypmin/hypmesh.hpp"

namespace hypmin::germ {

using bundles::DiscreteSection;
using bundles::LineBundle;
using mesh::SurfaceMesh;

/// Pointwise squared h-norm of a section given in unitary components.
Eigen::VectorXd norm_density(const DiscreteSection& s);

/// Hopf-differential data for a minimal surface in ℝH³. `t` is the h-norm
/// density of q; manufactured problems may supply any non-negative forcing.
struct GermData3 {
  std::shared_ptr<const SurfaceMesh> mesh;
  std::optional<DiscreteSection> q;
  Eigen::VectorXd t;
};

GermData3 make_germ3(std::shared_ptr<const SurfaceMesh> mesh, const DiscreteSection& q);
GermData3 make_forced_germ3(std::shared_ptr<const SurfaceMesh> mesh, const Eigen::VectorXd& t);

/// Data for ℝH⁴: θ₁ ∈ H⁰(K²L⁻¹), θ₂ ∈ H⁰(K²L) with densities t₁, t₂.
struct GermData4 {
  std::shared_ptr<const SurfaceMesh> mesh;
  LineBundle L;
  DiscreteSection theta1;
  DiscreteSection theta2;
  Eigen::VectorXd t1;
  Eigen::VectorXd t2;
};

GermData4 make_germ4(std::shared_ptr<const SurfaceMesh> mesh, const LineBundle& L,
                     const DiscreteSection& theta1, const DiscreteSection& theta2);

struct NewtonStep {
  int iteration = 0;
  double residual = 0.0;
  double step = 0.0;
};

struct GermSolution {
  int n = 3;
  Eigen::VectorXd u;                // γ = e^{2u} h
  std::optional<Eigen::VectorXd> w;  // L carries e^{2w} h_L
  std::vector<NewtonStep> trace;
  bool converged = false;
  double residual = 0.0;
  std::uint64_t mesh_hash = 0;

  int iterations() const { return trace.empty() ? 0 : trace.back().iteration; }
};

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 30;
  double min_step = 1e-8;
};

/// Residual of Δu = e^{2u} − 1 + e^{−2u} t, pointwise.
Eigen::VectorXd gauss3_residual(const mesh::Laplacian& lap, const Eigen::VectorXd& t,
                                const Eigen::VectorXd& u);

/// Residuals of Δu = e^{2u} − 1 + e^{−2u}(e^{2w}t₂ + e^{−2w}t₁) and
/// Δw = ρ₀ − e^{−2u}(e^{2w}t₂ − e^{−2w}t₁), stacked [R₁; R₂].
Eigen::VectorXd gauss_ricci4_residual(const mesh::Laplacian& lap, const GermData4& data,
                                      const Eigen::VectorXd& u, const Eigen::VectorXd& w);

/// Area-weighted L² norm of a pointwise residual (stacked fields allowed).
double residual_norm(const Eigen::VectorXd& mass, const Eigen::VectorXd& r);

GermSolution solve_gauss3(const GermData3& data, const SolverOptions& options = {});
GermSolution solve_gauss_ricci4(const GermData4& data, const SolverOptions& options = {});

}  // namespace hypmin::germ
