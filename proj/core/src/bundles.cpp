#include "hypmin/bundles.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>

#include <Eigen/SparseCholesky>

#include "hypmin/error.hpp"

namespace hypmin::bundles {

namespace {

constexpr double kPi = std::numbers::pi;

cplx ipow(cplx z, int k) {
  cplx r = 1.0;
  const cplx b = k >= 0 ? z : 1.0 / z;
  for (int i = 0; i < std::abs(k); ++i) r *= b;
  return r;
}

double ipow(double x, int k) { return std::pow(x, k); }

void check_mesh(const SurfaceMesh& mesh, std::uint64_t hash, const char* op) {
  if (hash != 0 && hash != mesh.hash()) {
    throw Error(ErrorKind::Shape, "bundles", op, "object was built on a different mesh");
  }
}

}  // namespace

cplx LineBundle::transport(int edge, int sign) const {
  const double t = edge_phase[edge];
  return std::polar(1.0, sign > 0 ? t : -t);
}

cplx LineBundle::along(const mesh::Face& face, int j) const {
  return transport(face.edge[j], face.edge_sign[j]);
}

cplx LineBundle::to_corner0(const mesh::Face& face, int j) const {
  if (j == 0) return 1.0;
  if (j == 1) return std::conj(along(face, 0));
  return along(face, 2);
}

double LineBundle::total_curvature() const {
  double s = 0.0;
  for (double f : face_curvature) s += f;
  return s;
}

LineBundle make_line_bundle(const SurfaceMesh& mesh, int l) {
  LineBundle L;
  L.degree = l;
  L.mesh_hash = mesh.hash();
  L.curvature_density = 2.0 * kPi * l / mesh.total_area;
  const int nf = mesh.num_faces();
  const int ne = mesh.num_edges();
  L.face_curvature.resize(nf);
  for (int f = 0; f < nf; ++f) L.face_curvature[f] = L.curvature_density * mesh.face_areas[f];
  L.edge_phase.assign(ne, 0.0);
  if (l == 0) return L;

  // Phases θ with dθ = F − 2πn on faces, n = l on face 0; the minimum-norm
  // solution θ = dᵀy solves the dual-graph Laplacian d dᵀ y = F − 2πn.
  std::vector<Eigen::Triplet<double>> trip;
  for (int f = 0; f < nf; ++f) {
    for (int j = 0; j < 3; ++j) trip.emplace_back(f, mesh.faces[f].edge[j], mesh.faces[f].edge_sign[j]);
  }
  Eigen::SparseMatrix<double> d(nf, ne);
  d.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd rhs(nf);
  for (int f = 0; f < nf; ++f) rhs[f] = L.face_curvature[f];
  rhs[0] -= 2.0 * kPi * l;

  Eigen::SparseMatrix<double> lap = d * d.transpose();
  // Pin y on the last face.
  Eigen::SparseMatrix<double> red = lap.topLeftCorner(nf - 1, nf - 1);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(red);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::LinearSolve, "bundles", "make_line_bundle",
                "dual-graph Laplacian factorisation failed");
  }
  Eigen::VectorXd y = Eigen::VectorXd::Zero(nf);
  y.head(nf - 1) = solver.solve(rhs.head(nf - 1));
  const Eigen::VectorXd theta = d.transpose() * y;
  const double defect = (d * theta - rhs).cwiseAbs().maxCoeff();
  if (defect > 1e-9) {
    throw Error(ErrorKind::LinearSolve, "bundles", "make_line_bundle",
                "transport does not reproduce the prescribed curvature", {{"residual", defect}});
  }
  for (int e = 0; e < ne; ++e) L.edge_phase[e] = theta[e];
  return L;
}

cplx chart_factor(cplx frame, int spin) { return ipow(frame, -spin); }

cplx corner_value(const SurfaceMesh& mesh, const LineBundle& L, int face, int j, cplx value, int m,
                  int mbar, int n) {
  const mesh::Face& f = mesh.faces[face];
  return value * chart_factor(f.frame[j], m - mbar) * ipow(L.to_corner0(f, j), n);
}

FaceForm vertex_form_to_faces(const SurfaceMesh& mesh, const LineBundle& L, int m, int n,
                              const Eigen::VectorXcd& values) {
  if (values.size() != mesh.num_vertices()) {
    throw Error(ErrorKind::Shape, "bundles", "vertex_form_to_faces",
                "vertex field length does not match mesh");
  }
  FaceForm out{m, n, Eigen::VectorXcd(mesh.num_faces())};
  for (int f = 0; f < mesh.num_faces(); ++f) {
    cplx s = 0.0;
    for (int j = 0; j < 3; ++j) s += corner_value(mesh, L, f, j, values[mesh.faces[f].v[j]], m, 1, n);
    out.values[f] = s / 3.0;
  }
  return out;
}

namespace {

void linear_rows(const SurfaceMesh& mesh, const LineBundle& L, int m, int n,
                 std::vector<Eigen::Triplet<cplx>>& trip) {
  const cplx I(0.0, 1.0);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const mesh::Face& face = mesh.faces[f];
    const auto& z = face.z;
    const double area = 0.5 * std::imag(std::conj(z[1] - z[0]) * (z[2] - z[0]));
    const cplx centroid = (z[0] + z[1] + z[2]) / 3.0;
    const double lc = mesh::conformal_factor(centroid);
    // (λ/√2)^{-m} for K^m and √2/λ for the dz̄ factor; the constant √2^m of
    // the input frame cancels against it.
    const double scale = ipow(lc, -m) * std::sqrt(2.0) / lc;
    for (int j = 0; j < 3; ++j) {
      const cplx e = z[(j + 2) % 3] - z[(j + 1) % 3];
      const cplx stencil = I * e / (4.0 * area);
      const cplx conv = chart_factor(face.frame[j], m) * ipow(L.to_corner0(face, j), n);
      const double lj = ipow(mesh::conformal_factor(z[j]), m);
      trip.emplace_back(f, face.v[j], scale * stencil * lj * conv);
    }
  }
}

// Nodes of a parent triangle in the order c0, c1, c2, m01, m12, m20 together
// with the transport of each node's fibre into the fibre at c0 along straight
// chart segments.
struct ParentPatch {
  std::array<int, 6> vertex{};
  std::array<cplx, 6> z{};
  std::array<cplx, 6> frame{};
  std::array<cplx, 6> tau{};
};

ParentPatch parent_patch(const SurfaceMesh& mesh, const LineBundle& L, int p) {
  const mesh::Face& a = mesh.faces[4 * p];      // c0, m01, m20
  const mesh::Face& b = mesh.faces[4 * p + 1];  // m01, c1, m12
  const mesh::Face& c = mesh.faces[4 * p + 2];  // m20, m12, c2
  ParentPatch pp;
  const std::array<std::pair<const mesh::Face*, int>, 6> src = {
      std::pair{&a, 0}, {&b, 1}, {&c, 2}, {&a, 1}, {&b, 2}, {&a, 2}};
  for (int k = 0; k < 6; ++k) {
    pp.vertex[k] = src[k].first->v[src[k].second];
    pp.z[k] = src[k].first->z[src[k].second];
    pp.frame[k] = src[k].first->frame[src[k].second];
  }
  pp.tau[0] = 1.0;
  pp.tau[3] = L.to_corner0(a, 1);
  pp.tau[5] = L.to_corner0(a, 2);
  pp.tau[1] = L.to_corner0(b, 1) * pp.tau[3];
  pp.tau[2] = L.to_corner0(c, 2) * pp.tau[5];
  // The two edge paths to m12 enclose triangles of equal area on either
  // side of the straight segment; their mean phase is the straight transport.
  const cplx via01 = L.to_corner0(b, 2) * pp.tau[3];
  const cplx via20 = L.to_corner0(c, 1) * pp.tau[5];
  pp.tau[4] = (via01 + via20) / std::abs(via01 + via20);
  return pp;
}

void quadratic_rows(const SurfaceMesh& mesh, const LineBundle& L, int m, int n,
                    std::vector<Eigen::Triplet<cplx>>& trip) {
  const int parents = mesh.num_faces() / 4;
  for (int p = 0; p < parents; ++p) {
    const ParentPatch pp = parent_patch(mesh, L, p);
    const cplx base = pp.z[0];
    const double h = std::max({std::abs(pp.z[1] - base), std::abs(pp.z[2] - base),
                               std::abs(pp.z[2] - pp.z[1])});
    // Lagrange basis on the six nodes in scaled local coordinates.
    Eigen::Matrix<double, 6, 6> vand;
    for (int k = 0; k < 6; ++k) {
      const cplx q = (pp.z[k] - base) / h;
      const double x = q.real(), y = q.imag();
      vand.row(k) << 1.0, x, y, x * x, x * y, y * y;
    }
    const Eigen::Matrix<double, 6, 6> coef = vand.inverse();  // column k: basis function k
    std::array<cplx, 6> node{};
    for (int k = 0; k < 6; ++k) {
      node[k] = ipow(mesh::conformal_factor(pp.z[k]), m) * chart_factor(pp.frame[k], m) *
                ipow(pp.tau[k], n);
    }
    for (int child = 0; child < 4; ++child) {
      const int f = 4 * p + child;
      const mesh::Face& face = mesh.faces[f];
      const cplx centroid = (face.z[0] + face.z[1] + face.z[2]) / 3.0;
      const double lc = mesh::conformal_factor(centroid);
      const double scale = ipow(lc, -m) * std::sqrt(2.0) / lc;
      const cplx q = (centroid - base) / h;
      const double x = q.real(), y = q.imag();
      // Curvature of L^n in the radial gauge about the base node:
      // Ã_z̄ = n B (z − b) / 4 with B the chart density of the curvature.
      const double density = L.curvature_density * lc * lc;
      const cplx gauge = n * density * (centroid - base) / 4.0;
      // Child faces 1..3 report in the fibre of their own first corner.
      const cplx out = child == 0 ? cplx(1.0) : std::conj(child == 2 ? pp.tau[5] : pp.tau[3]);
      for (int k = 0; k < 6; ++k) {
        const auto c = coef.col(k);
        const double dx = (c[1] + 2.0 * c[3] * x + c[4] * y) / h;
        const double dy = (c[2] + c[4] * x + 2.0 * c[5] * y) / h;
        const double val = c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y;
        const cplx dbar = 0.5 * cplx(dx, dy) + gauge * val;
        trip.emplace_back(f, pp.vertex[k], out * scale * dbar * node[k]);
      }
    }
  }
}

}  // namespace

DbarOperator dbar_operator(const SurfaceMesh& mesh, const LineBundle& L, int m, int n,
                           DbarStencil stencil) {
  check_mesh(mesh, L.mesh_hash, "dbar_operator");
  DbarOperator op;
  op.stencil = stencil;
  op.m = m;
  op.n = n;
  op.degree = L.degree;
  op.mesh_hash = mesh.hash();
  op.vertex_mass = mesh.vertex_areas;
  op.face_mass = Eigen::Map<const Eigen::VectorXd>(mesh.face_areas.data(), mesh.num_faces());

  std::vector<Eigen::Triplet<cplx>> trip;
  if (stencil == DbarStencil::Linear) {
    trip.reserve(mesh.faces.size() * 3);
    linear_rows(mesh, L, m, n, trip);
  } else {
    trip.reserve(mesh.faces.size() * 6);
    quadratic_rows(mesh, L, m, n, trip);
  }
  op.matrix.resize(mesh.num_faces(), mesh.num_vertices());
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  return op;
}

FaceForm DbarOperator::apply(const Eigen::VectorXcd& values) const {
  if (values.size() != matrix.cols()) {
    throw Error(ErrorKind::Shape, "bundles", "dbar_operator", "section length does not match mesh");
  }
  return {m, n, matrix * values};
}

double DbarOperator::residual_norm(DiscreteSection& section) const {
  Eigen::VectorXcd r = apply(section.values).values;
  const double norm = std::sqrt(face_mass.dot(r.cwiseAbs2()));
  section.dbar_residual = std::move(r);
  return norm;
}

HolomorphicBasis holomorphic_basis(const DbarOperator& dbar, std::optional<int> expected_dim,
                                   const KernelOptions& options) {
  const int nv = static_cast<int>(dbar.matrix.cols());
  const SparseC a = SparseC(dbar.matrix.adjoint()) * dbar.face_mass.cast<cplx>().asDiagonal() * dbar.matrix;
  const Eigen::VectorXcd mass = dbar.vertex_mass.cast<cplx>();

  int p = options.block_size;
  if (expected_dim) p = std::max(p, *expected_dim + 6);
  p = std::min(p, nv);

  // Shift-invert with a tiny positive shift so exact kernels stay factorizable.
  const double scale = a.diagonal().real().mean() / dbar.vertex_mass.mean();
  const double shift = 1e-10 * scale;
  SparseC shifted = a;
  for (int i = 0; i < nv; ++i) shifted.coeffRef(i, i) += shift * mass[i];
  Eigen::SimplicialLDLT<SparseC> solver(shifted);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::LinearSolve, "bundles", "holomorphic_basis",
                "factorisation of the shifted normal operator failed");
  }

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXcd x(nv, p);
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < nv; ++i) x(i, j) = cplx(gauss(rng), gauss(rng));
  }

  const Eigen::VectorXd sqrt_mass = dbar.vertex_mass.cwiseSqrt();
  const Eigen::VectorXd inv_sqrt_mass = sqrt_mass.cwiseInverse();
  const int watched = std::max(1, p - 3);
  Eigen::VectorXd ritz = Eigen::VectorXd::Constant(p, -1.0);
  Eigen::VectorXd prev;
  for (int it = 0; it < options.max_iterations; ++it) {
    Eigen::MatrixXcd y = solver.solve(mass.asDiagonal() * x);
    // M-orthonormalise through a QR of M^{1/2} Y, then Rayleigh–Ritz.
    Eigen::MatrixXcd z = sqrt_mass.asDiagonal() * y;
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
    y = inv_sqrt_mass.asDiagonal() * (qr.householderQ() * Eigen::MatrixXcd::Identity(nv, p));
    Eigen::MatrixXcd ay = a * y;
    Eigen::MatrixXcd small = y.adjoint() * ay;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(0.5 * (small + small.adjoint()));
    x = y * eig.eigenvectors();
    prev = ritz;
    ritz = eig.eigenvalues();
    double change = 0.0;
    for (int k = 0; k < watched; ++k) {
      const double ref = std::max(std::abs(ritz[k]), 1e-14 * scale);
      change = std::max(change, std::abs(ritz[k] - prev[k]) / ref);
    }
    if (it > 2 && change < 1e-9) break;
  }

  HolomorphicBasis out;
  for (int k = 0; k < p; ++k) out.singular_values.push_back(std::sqrt(std::max(ritz[k], 0.0)));
  // Largest ratio between consecutive singular values over the converged part.
  int dim = 0;
  double best = 0.0;
  for (int k = 1; k < std::max(2, p - 2) && k < p; ++k) {
    const double lo = std::max(out.singular_values[k - 1], 1e-15 * out.singular_values.back());
    const double ratio = out.singular_values[k] / lo;
    if (ratio > best) {
      best = ratio;
      dim = k;
    }
  }
  out.gap_ratio = best;
  if (best < options.gap_ratio) {
    throw Error(ErrorKind::IndeterminateKernel, "bundles", "holomorphic_basis",
                "no spectral gap in the smallest singular values",
                {{"singular_values", out.singular_values}, {"gap_ratio", best},
                 {"m", dbar.m}, {"n", dbar.n}, {"degree", dbar.degree}});
  }
  out.dimension = dim;
  if (expected_dim && *expected_dim != dim) {
    out.warning = "detected kernel dimension " + std::to_string(dim) + " differs from expected " +
                  std::to_string(*expected_dim);
  }
  for (int k = 0; k < dim; ++k) {
    DiscreteSection s;
    s.m = dbar.m;
    s.n = dbar.n;
    s.degree = dbar.degree;
    s.mesh_hash = dbar.mesh_hash;
    s.values = x.col(k);
    // Fix the phase so the largest component is real positive.
    Eigen::Index imax;
    s.values.cwiseAbs().maxCoeff(&imax);
    s.values *= std::conj(s.values[imax]) / std::abs(s.values[imax]);
    out.sections.push_back(std::move(s));
  }
  return out;
}

DiscreteSection section_with_values(const HolomorphicBasis& basis, const std::vector<int>& vertices,
                                    const Eigen::VectorXcd& values) {
  if (basis.sections.empty()) {
    throw Error(ErrorKind::InvalidParameter, "bundles", "section_with_values", "empty basis");
  }
  if (static_cast<Eigen::Index>(vertices.size()) != values.size()) {
    throw Error(ErrorKind::Shape, "bundles", "section_with_values",
                "vertex list and value list differ in length");
  }
  const int k = static_cast<int>(basis.sections.size());
  Eigen::MatrixXcd a(vertices.size(), k);
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (int j = 0; j < k; ++j) a(i, j) = basis.sections[j].values[vertices[i]];
  }
  const Eigen::VectorXcd coef = a.completeOrthogonalDecomposition().solve(values);
  DiscreteSection s = basis.sections.front();
  s.dbar_residual.reset();
  s.values.setZero();
  for (int j = 0; j < k; ++j) s.values += coef[j] * basis.sections[j].values;
  return s;
}

ClassTest class_is_trivial(const SurfaceMesh& mesh, const LineBundle& L, const FaceForm& beta,
                           const Eigen::VectorXd& u, const std::optional<Eigen::VectorXd>& w,
                           const ClassOptions& options) {
  const int nf = mesh.num_faces();
  if (beta.values.size() != nf || u.size() != mesh.num_vertices() ||
      (w && w->size() != mesh.num_vertices())) {
    throw Error(ErrorKind::Shape, "bundles", "class_is_trivial", "field length does not match mesh");
  }
  if (beta.m != -1) {
    throw Error(ErrorKind::InvalidParameter, "bundles", "class_is_trivial",
                "form must take values in K^-1 L^n", {{"m", beta.m}});
  }
  Eigen::VectorXd weight(nf);
  for (int f = 0; f < nf; ++f) {
    double e = 0.0;
    if (!options.background_metric) {
      for (int v : mesh.faces[f].v) {
        e += 2.0 * u[v] / 3.0;
        if (w) e += 2.0 * beta.n * (*w)[v] / 3.0;
      }
    }
    weight[f] = mesh.face_areas[f] * std::exp(e);
  }
  const double total = std::sqrt(weight.dot(beta.values.cwiseAbs2()));
  if (total == 0.0) return {true, 0.0, 0.0, Eigen::VectorXcd::Zero(nf), weight};

  const DbarOperator d = dbar_operator(mesh, L, -1, beta.n);
  const SparseC dw = SparseC(d.matrix.adjoint()) * weight.cast<cplx>().asDiagonal();
  const SparseC normal = dw * d.matrix;
  const Eigen::VectorXcd rhs = dw * beta.values;
  Eigen::SimplicialLDLT<SparseC> solver(normal);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::LinearSolve, "bundles", "class_is_trivial", "factorisation failed");
  }
  const Eigen::VectorXcd psi = solver.solve(rhs);
  const double solve_res = (normal * psi - rhs).norm() / std::max(rhs.norm(), 1e-300);
  if (!psi.allFinite() || solve_res > 1e-8) {
    throw Error(ErrorKind::LinearSolve, "bundles", "class_is_trivial",
                "harmonic projection did not converge", {{"residual", solve_res}});
  }
  const Eigen::VectorXcd harmonic = beta.values - d.matrix * psi;
  const double hn = std::sqrt(weight.dot(harmonic.cwiseAbs2()));
  ClassTest out;
  out.absolute_norm = hn;
  out.norm = hn / total;
  out.trivial = out.norm < options.tol;
  out.harmonic = harmonic;
  out.weight = weight;
  return out;
}

void write_section(std::ostream& out, const DiscreteSection& s) {
  const auto prec = out.precision();
  out << std::setprecision(17);
  out << "section " << s.m << ' ' << s.n << ' ' << s.degree << ' ' << s.mesh_hash << ' '
      << s.values.size() << '\n';
  for (Eigen::Index i = 0; i < s.values.size(); ++i) {
    out << s.values[i].real() << ' ' << s.values[i].imag() << '\n';
  }
  out.precision(prec);
}

DiscreteSection read_section(std::istream& in) {
  std::string tag;
  DiscreteSection s;
  Eigen::Index count = 0;
  if (!(in >> tag) || tag != "section" || !(in >> s.m >> s.n >> s.degree >> s.mesh_hash >> count) ||
      count < 0) {
    throw Error(ErrorKind::Format, "bundles", "read_section", "malformed section header");
  }
  s.values.resize(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    double re = 0.0, im = 0.0;
    if (!(in >> re >> im)) {
      throw Error(ErrorKind::Format, "bundles", "read_section", "truncated section data",
                  {{"expected", count}, {"read", i}});
    }
    s.values[i] = {re, im};
  }
  return s;
}

}  // namespace hypmin::bundles
