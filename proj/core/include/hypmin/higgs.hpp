#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "hypmin/bundles.hpp"
#include "hypmin/invariants.hpp"

namespace hypmin::higgs {

using bundles::DbarOperator;
using bundles::FaceForm;
using invariants::GermData;
using invariants::GermSolution;

/// Smooth summand K^m L^n of V = K⁻¹ ⊕ W ⊕ K.
struct Component {
  std::string name;
  int m = 0;
  int n = 0;
};

enum class BlockKind { Zero, Dbar, Form };
const char* to_string(BlockKind k);

/// Entry (row, col) of ∂̄_V: maps sections of component col to (0,1)-forms
/// with values in component row. Zero blocks are structural; a Form block is
/// coeff · beta_blocks[form].
struct Block {
  BlockKind kind = BlockKind::Zero;
  cplx coeff = 0.0;
  int form = -1;
  std::shared_ptr<const DbarOperator> dbar;
};

struct HiggsAssembly {
  int n = 3;
  int degree = 0;
  std::uint64_t mesh_hash = 0;
  std::shared_ptr<const mesh::SurfaceMesh> mesh;
  std::shared_ptr<const bundles::LineBundle> L;
  std::vector<Component> components;
  std::vector<std::vector<Block>> blocks;  // [row][col]
  Eigen::MatrixXi q_v;                     // constant pairing on the components
  std::vector<int> q_w_partner;            // component index paired by Q_V
  std::vector<FaceForm> beta_blocks;       // β (n=3) or β₁, β₂ (n=4), K⁻¹L^n valued
  Eigen::VectorXcd phi;                    // image of the unit of K⁻¹ under φ

  int size() const { return static_cast<int>(components.size()); }
  /// Effective values of a Form block.
  Eigen::VectorXcd block_values(int row, int col) const;
  /// Effective β blocks (coefficient of the column K entries).
  std::vector<Eigen::VectorXcd> betas() const;

  /// ∂̄_V applied to stacked vertex values (component-major); returns stacked
  /// face values.
  Eigen::VectorXcd apply(const Eigen::VectorXcd& sections) const;

  /// Block-wise manifest naming each block's bundle type.
  nlohmann::json manifest() const;
};

/// Builds (∂̄_V, Q_V, φ) from converged germ data with β(Z̄): dz ↦ II(Z̄,Z̄)/‖Z̄‖²_γ.
HiggsAssembly build_from_germ(const GermData& data, const GermSolution& sol);

/// Builds the assembly for prescribed β blocks (vertex values in the unitary
/// frame of K⁻¹K̄L^n) on a fixed mesh and L.
HiggsAssembly build_from_beta(std::shared_ptr<const mesh::SurfaceMesh> mesh,
                              std::shared_ptr<const bundles::LineBundle> L, int n,
                              const std::vector<FaceForm>& betas);

/// Conjugation of ∂̄_V by the constant diagonal gauge d (with explicit inverse
/// dinv): block (i,j) picks up d_i · dinv_j.
HiggsAssembly conjugate(const HiggsAssembly& asm_, const std::vector<cplx>& d,
                        const std::vector<cplx>& dinv);

/// ∂̄_V ↦ g_λ⁻¹ ∂̄_V g_λ and Φ ↦ g_λ Φ g_λ⁻¹ = λΦ with g_λ = diag(λ, 1_W, λ⁻¹):
/// β blocks scale by λ⁻¹ and φ by λ.
HiggsAssembly gauge_scale(const HiggsAssembly& asm_, cplx lambda);

/// The SO(Q_W) ≅ ℂ× element a acting as diag(1, a, a⁻¹, 1) (n = 4).
HiggsAssembly lift_cstar(const HiggsAssembly& asm_, cplx a);

/// Largest deviation of gᵗ Q_V g from Q_V for the diagonal gauge d.
double q_v_defect(const HiggsAssembly& asm_, const std::vector<cplx>& d);

/// True iff β₁ or β₂ vanishes in sup norm below tol (n = 4).
bool hodge_flag(const HiggsAssembly& asm_, double tol);

struct StructureCheck {
  bool upper_triangular = false;
  bool q_v_holomorphic = false;  // α₁ = −α₃ᵗ and α₂ = 0
  bool isotropic_phi = false;    // φᵗ∘φ = 0
  bool ok() const { return upper_triangular && q_v_holomorphic && isotropic_phi; }
};

/// Exact structural checks; comparisons are bitwise.
StructureCheck check_structure(const HiggsAssembly& asm_);

/// Largest relative deviation between the Form blocks of two assemblies.
double block_distance(const HiggsAssembly& a, const HiggsAssembly& b);

}  // namespace hypmin::higgs
