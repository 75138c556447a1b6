#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace hypmin {

using cplx = std::complex<double>;

namespace mesh {

/// Poincaré-disk helpers. The background metric is h = λ(z)²|dz|² with
/// λ(z) = 2 / (1 − |z|²), curvature −1.
double conformal_factor(cplx z);
double hyperbolic_distance(cplx z, cplx w);
cplx geodesic_midpoint(cplx z, cplx w);

/// Möbius map z ↦ (az + b) / (cz + d), normalised to ad − bc = 1.
struct Mobius {
  cplx a{1.0}, b{0.0}, c{0.0}, d{1.0};

  cplx operator()(cplx z) const { return (a * z + b) / (c * z + d); }
  cplx derivative(cplx z) const {
    const cplx den = c * z + d;
    return 1.0 / (den * den);
  }
  Mobius inverse() const { return {d, -b, -c, a}; }
  Mobius operator*(const Mobius& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }

  /// Hyperbolic translation by `distance` along the diameter in direction e^{iφ}.
  static Mobius translation(double direction, double distance);

  /// Distance of the coefficients from the disk-automorphism form
  /// [[α, β], [β̄, ᾱ]] with |α|² − |β|² = 1.
  double isometry_defect() const;
};

/// Regular hyperbolic 4g-gon centred at the origin with all interior angles
/// π/(2g). Side k joins vertex k to vertex k+1; pairing k maps side k+2g onto
/// side k (opposite-side translations, for g = 2 the Bolza surface).
struct FundamentalDomain {
  int genus = 0;
  double circumradius = 0.0;  // hyperbolic
  double inradius = 0.0;      // hyperbolic distance from centre to side midpoints
  std::vector<cplx> polygon_vertices;
  std::vector<Mobius> side_pairings;

  int sides() const { return 4 * genus; }
  double interior_angle() const;
};

/// Circumradius by bisection on the interior-angle condition, tolerance 1e-14.
FundamentalDomain build_fundamental_domain(int genus);

struct Face {
  std::array<int, 3> v{};        // quotient vertex ids, counter-clockwise
  std::array<cplx, 3> z{};       // corner positions in the domain chart
  std::array<cplx, 3> frame{};   // unit derivative of the deck map canonical chart -> this corner
  std::array<int, 3> edge{};     // quotient edge of side corner j -> corner j+1
  std::array<int, 3> edge_sign{};
};

struct Edge {
  int from = 0;
  int to = 0;
};

/// A domain-vertex copy of a quotient vertex that does not sit in the
/// canonical chart, together with the deck map taking the canonical position
/// to this copy.
struct Identification {
  int vertex = 0;
  cplx canonical{};
  cplx copy{};
  Mobius deck{};
};

struct MeshOptions {
  std::size_t max_vertices = 2'000'000;
  double min_angle_deg = 10.0;
};

/// Closed genus-g hyperbolic surface: the refined 4g-gon with its boundary
/// glued by the side pairings. Immutable after construction.
struct SurfaceMesh {
  int genus = 0;
  int resolution = 0;
  FundamentalDomain domain;

  std::vector<cplx> vertices;  // canonical chart position per quotient vertex
  std::vector<Face> faces;
  std::vector<Edge> edges;
  std::vector<Identification> identifications;

  // Geometry derived from hyperbolic edge lengths.
  std::vector<double> face_areas;                 // hyperbolic triangle areas
  std::vector<std::array<double, 3>> edge_lengths;  // per face, side j -> j+1
  std::vector<std::array<double, 3>> cotangents;    // per face corner
  std::vector<std::array<double, 3>> angles;        // Euclidean angles from lengths
  Eigen::VectorXd vertex_areas;                    // lumped (one third of incident faces)
  double total_area = 0.0;
  double max_edge_length = 0.0;
  double min_angle_deg = 0.0;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_faces() const { return static_cast<int>(faces.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int euler_characteristic() const { return num_vertices() - num_edges() + num_faces(); }

  std::uint64_t hash() const;
};

SurfaceMesh build_surface(int genus, int resolution, const MeshOptions& options = {});

/// Recomputes lengths, areas, cotangents and lumped masses from the face
/// corner positions. Used by the builder and by the importer.
void finalize_geometry(SurfaceMesh& mesh, const MeshOptions& options = {});

/// Cotangent discretisation of Δ_h with lumped mass: Δu ≈ −M⁻¹ S u.
struct Laplacian {
  Eigen::SparseMatrix<double> stiffness;  // symmetric PSD, annihilates constants
  Eigen::VectorXd mass;

  Eigen::VectorXd apply(const Eigen::VectorXd& u) const;  // pointwise Δ_h u
  int size() const { return static_cast<int>(mass.size()); }
};

Laplacian laplacian(const SurfaceMesh& mesh);

/// Lumped quadrature of `field` against v_h, or against e^{2u} v_h.
double integrate(const SurfaceMesh& mesh, const Eigen::VectorXd& field,
                 const std::optional<Eigen::VectorXd>& conformal_factor = std::nullopt);

/// Angle-defect curvature per vertex of the piecewise flat metric with edge
/// lengths scaled by e^{(u_i+u_j)/2}, divided by the dual cell area e^{2u_i} A_i.
Eigen::VectorXd angle_defect_curvature(const SurfaceMesh& mesh,
                                       const std::optional<Eigen::VectorXd>& u = std::nullopt);

}  // namespace mesh
}  // namespace hypmin
