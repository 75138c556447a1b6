#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "hypmin/hypmesh.hpp"

namespace hypmin::bundles {

using mesh::SurfaceMesh;
using SparseC = Eigen::SparseMatrix<cplx>;

/// Hermitian line bundle L of degree l realised by a U(1) transport on the
/// quotient edges whose curvature is the constant density 2πl / area.
struct LineBundle {
  int degree = 0;
  double curvature_density = 0.0;       // per unit hyperbolic area
  std::vector<double> edge_phase;       // transport e^{iθ} along edge from -> to
  std::vector<double> face_curvature;   // curvature 2-form integrated over the face
  std::uint64_t mesh_hash = 0;

  cplx transport(int edge, int sign = 1) const;
  /// Transport along side j (corner j -> corner j+1) of a face.
  cplx along(const mesh::Face& face, int j) const;
  /// Transport of the fibre at corner j into the fibre at corner 0.
  cplx to_corner0(const mesh::Face& face, int j) const;
  double total_curvature() const;
};

LineBundle make_line_bundle(const SurfaceMesh& mesh, int l);

/// Section of K^m L^n. Values are components in the h-unitary frame
/// (λ dz / √2)^m ⊗ e_L^n at the canonical position of each quotient vertex.
struct DiscreteSection {
  int m = 0;
  int n = 0;
  int degree = 0;
  std::uint64_t mesh_hash = 0;
  Eigen::VectorXcd values;
  std::optional<Eigen::VectorXcd> dbar_residual;
};

/// (0,1)-form with values in K^m L^n, one value per face: the component in
/// the unitary frame of K^m ⊗ K̄ ⊗ L^n at the face centroid, expressed in the
/// chart of the face and the L-fibre of its corner 0.
struct FaceForm {
  int m = 0;
  int n = 0;
  Eigen::VectorXcd values;
};

/// Component change for a tensor of spin s = m − m̄ moved from the canonical
/// chart into the chart of a face corner with frame ρ.
cplx chart_factor(cplx frame, int spin);

/// Value of a vertex field of K^m K̄^mbar L^n at a face corner, in the face
/// chart and the L-fibre of corner 0.
cplx corner_value(const SurfaceMesh& mesh, const LineBundle& L, int face, int j, cplx value, int m,
                  int mbar, int n);

/// Averages a vertex-sampled (0,1)-form of K^m L^n onto faces.
FaceForm vertex_form_to_faces(const SurfaceMesh& mesh, const LineBundle& L, int m, int n,
                              const Eigen::VectorXcd& values);

enum class DbarStencil {
  Linear,     // P1 gradient per face, first order
  Quadratic,  // P2 on the parent triangle of each face, second order
};

struct DbarOperator {
  DbarStencil stencil = DbarStencil::Quadratic;
  int m = 0;
  int n = 0;
  int degree = 0;
  std::uint64_t mesh_hash = 0;
  SparseC matrix;             // faces x vertices
  Eigen::VectorXd face_mass;  // hyperbolic face areas
  Eigen::VectorXd vertex_mass;

  FaceForm apply(const Eigen::VectorXcd& values) const;
  /// Area-weighted L² norm of ∂̄ applied to the section; also fills its residual.
  double residual_norm(DiscreteSection& section) const;
};

/// Face-based Cauchy–Riemann stencil for sections of K^m L^n. The quadratic
/// stencil interpolates over the parent triangle (the face of the previous
/// refinement level) in the radial gauge of L about its first corner.
DbarOperator dbar_operator(const SurfaceMesh& mesh, const LineBundle& L, int m, int n,
                           DbarStencil stencil = DbarStencil::Quadratic);

struct HolomorphicBasis {
  std::vector<DiscreteSection> sections;  // orthonormal for the lumped h-metric
  std::vector<double> singular_values;    // smallest computed, ascending
  double gap_ratio = 0.0;
  int dimension = 0;
  std::optional<std::string> warning;
};

struct KernelOptions {
  int block_size = 12;
  int max_iterations = 400;
  double gap_ratio = 10.0;
  std::uint64_t seed = 0x5eed;
};

/// Numerical kernel from the smallest generalised singular values of ∂̄.
HolomorphicBasis holomorphic_basis(const DbarOperator& dbar, std::optional<int> expected_dim = {},
                                   const KernelOptions& options = {});

/// The element of span(basis) taking the prescribed values at the given
/// vertices (least squares when overdetermined).
DiscreteSection section_with_values(const HolomorphicBasis& basis, const std::vector<int>& vertices,
                                    const Eigen::VectorXcd& values);

struct ClassTest {
  bool trivial = true;
  double norm = 0.0;  // harmonic part relative to the full form
  double absolute_norm = 0.0;
  Eigen::VectorXcd harmonic;  // per face, same frame as the input form
  Eigen::VectorXd weight;     // face areas in the metric used
};

struct ClassOptions {
  double tol = 0.05;
  bool background_metric = false;
};

/// Harmonic projection of a (0,1)-form with values in K⁻¹L^n against the
/// metric e^{2u}h on Σ and e^{2nw}h_L on L; the class vanishes iff the
/// harmonic part does.
ClassTest class_is_trivial(const SurfaceMesh& mesh, const LineBundle& L, const FaceForm& beta,
                           const Eigen::VectorXd& u, const std::optional<Eigen::VectorXd>& w = {},
                           const ClassOptions& options = {});

/// Text serialisation: header "section m n l hash count" followed by one
/// complex pair per vertex.
void write_section(std::ostream& out, const DiscreteSection& s);
DiscreteSection read_section(std::istream& in);

}  // namespace hypmin::bundles
