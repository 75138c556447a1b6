#include "hypmin/germsolve.hpp"

#include <cmath>
#include <functional>

#include <Eigen/SparseLU>

#include "hypmin/error.hpp"

namespace hypmin::germ {

namespace {

nlohmann::json trace_json(const std::vector<NewtonStep>& trace) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : trace) out.push_back({s.iteration, s.residual, s.step});
  return out;
}

void require_section(const DiscreteSection& s, const SurfaceMesh& mesh, int m, int n,
                     const char* name, const char* op) {
  if (s.values.size() != mesh.num_vertices()) {
    throw Error(ErrorKind::Shape, "germsolve", op, std::string(name) + " length does not match mesh");
  }
  if (s.m != m || s.n != n) {
    throw Error(ErrorKind::InvalidParameter, "germsolve", op,
                std::string(name) + " lives in the wrong bundle",
                {{"expected", {m, n}}, {"got", {s.m, s.n}}});
  }
}

using Sparse = Eigen::SparseMatrix<double>;

// Damped Newton on F(x) = 0 with a symmetric mass-scaled Jacobian.
struct NewtonProblem {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residual;
  std::function<Sparse(const Eigen::VectorXd&)> jacobian;  // M·∂F
  Eigen::VectorXd mass;                                    // stacked lumped masses
  const char* operation;
};

std::pair<Eigen::VectorXd, std::vector<NewtonStep>> newton(const NewtonProblem& p, Eigen::VectorXd x,
                                                           const SolverOptions& opt, bool& converged,
                                                           double& final_residual) {
  std::vector<NewtonStep> trace;
  Eigen::VectorXd r = p.residual(x);
  double rn = residual_norm(p.mass, r);
  trace.push_back({0, rn, 0.0});
  converged = rn <= opt.tol;
  for (int it = 1; !converged && it <= opt.max_iter; ++it) {
    const Sparse jac = p.jacobian(x);
    Eigen::SparseLU<Sparse> lu;
    lu.analyzePattern(jac);
    lu.factorize(jac);
    if (lu.info() != Eigen::Success) {
      throw Error(ErrorKind::IndefiniteLinearization, "germsolve", p.operation,
                  "singular Newton linearization; refine the mesh or reduce the data size",
                  {{"iteration", it}, {"trace", trace_json(trace)}});
    }
    const Eigen::VectorXd rhs = -(p.mass.asDiagonal() * r);
    const Eigen::VectorXd dx = lu.solve(rhs);
    if (!dx.allFinite()) {
      throw Error(ErrorKind::IndefiniteLinearization, "germsolve", p.operation,
                  "Newton step is not finite; refine the mesh or reduce the data size",
                  {{"iteration", it}, {"trace", trace_json(trace)}});
    }
    double alpha = 1.0;
    while (true) {
      const Eigen::VectorXd trial = x + alpha * dx;
      const Eigen::VectorXd rt = p.residual(trial);
      const double tn = residual_norm(p.mass, rt);
      if (std::isfinite(tn) && tn < rn) {
        x = trial;
        r = rt;
        rn = tn;
        break;
      }
      alpha *= 0.5;
      if (alpha < opt.min_step) {
        throw Error(ErrorKind::Stagnation, "germsolve", p.operation,
                    "line search could not reduce the residual",
                    {{"iteration", it}, {"residual", rn}, {"trace", trace_json(trace)}});
      }
    }
    trace.push_back({it, rn, alpha});
    converged = rn <= opt.tol;
  }
  final_residual = rn;
  if (!converged) {
    throw Error(ErrorKind::NonConvergence, "germsolve", p.operation,
                "Newton iteration did not reach the tolerance",
                {{"max_iter", opt.max_iter}, {"tol", opt.tol}, {"trace", trace_json(trace)}});
  }
  return {std::move(x), std::move(trace)};
}

void check_options(const SolverOptions& opt, const char* op) {
  if (!(opt.tol > 0.0) || opt.max_iter < 1) {
    throw Error(ErrorKind::InvalidParameter, "germsolve", op, "tolerance and iteration limit must be positive",
                {{"tol", opt.tol}, {"max_iter", opt.max_iter}});
  }
}

}  // namespace

Eigen::VectorXd norm_density(const DiscreteSection& s) { return s.values.cwiseAbs2(); }

GermData3 make_germ3(std::shared_ptr<const SurfaceMesh> mesh, const DiscreteSection& q) {
  require_section(q, *mesh, 2, 0, "q", "solve_gauss3");
  GermData3 d;
  d.t = norm_density(q);
  d.q = q;
  d.mesh = std::move(mesh);
  return d;
}

GermData3 make_forced_germ3(std::shared_ptr<const SurfaceMesh> mesh, const Eigen::VectorXd& t) {
  if (t.size() != mesh->num_vertices()) {
    throw Error(ErrorKind::Shape, "germsolve", "solve_gauss3", "forcing length does not match mesh");
  }
  if (t.minCoeff() < 0.0) {
    throw Error(ErrorKind::InvalidParameter, "germsolve", "solve_gauss3", "forcing must be non-negative");
  }
  GermData3 d;
  d.t = t;
  d.mesh = std::move(mesh);
  return d;
}

GermData4 make_germ4(std::shared_ptr<const SurfaceMesh> mesh, const LineBundle& L,
                     const DiscreteSection& theta1, const DiscreteSection& theta2) {
  const int g = mesh->genus;
  if (std::abs(L.degree) >= 2 * (g - 1)) {
    throw Error(ErrorKind::InvalidParameter, "germsolve", "solve_gauss_ricci4",
                "degree of L outside the window |l| < 2(g-1)", {{"l", L.degree}, {"genus", g}});
  }
  if (L.mesh_hash != mesh->hash()) {
    throw Error(ErrorKind::Shape, "germsolve", "solve_gauss_ricci4", "L was built on a different mesh");
  }
  require_section(theta1, *mesh, 2, -1, "theta1", "solve_gauss_ricci4");
  require_section(theta2, *mesh, 2, 1, "theta2", "solve_gauss_ricci4");
  GermData4 d;
  d.L = L;
  d.theta1 = theta1;
  d.theta2 = theta2;
  d.t1 = norm_density(theta1);
  d.t2 = norm_density(theta2);
  d.mesh = std::move(mesh);
  return d;
}

double residual_norm(const Eigen::VectorXd& mass, const Eigen::VectorXd& r) {
  const Eigen::Index n = mass.size();
  if (n == 0 || r.size() % n != 0) {
    throw Error(ErrorKind::Shape, "germsolve", "residual_norm", "residual length is not a multiple of the mass",
                {{"mass", n}, {"residual", r.size()}});
  }
  double acc = 0.0;
  for (Eigen::Index k = 0; k < r.size() / n; ++k) acc += mass.dot(r.segment(k * n, n).cwiseAbs2());
  return std::sqrt(acc);
}

Eigen::VectorXd gauss3_residual(const mesh::Laplacian& lap, const Eigen::VectorXd& t,
                                const Eigen::VectorXd& u) {
  const Eigen::ArrayXd e2u = (2.0 * u.array()).exp();
  return (lap.apply(u).array() - e2u + 1.0 - t.array() / e2u).matrix();
}

Eigen::VectorXd gauss_ricci4_residual(const mesh::Laplacian& lap, const GermData4& data,
                                      const Eigen::VectorXd& u, const Eigen::VectorXd& w) {
  const int n = lap.size();
  const Eigen::ArrayXd e2u = (2.0 * u.array()).exp();
  const Eigen::ArrayXd pos = (-2.0 * u.array() + 2.0 * w.array()).exp() * data.t2.array();
  const Eigen::ArrayXd neg = (-2.0 * u.array() - 2.0 * w.array()).exp() * data.t1.array();
  Eigen::VectorXd r(2 * n);
  r.head(n) = (lap.apply(u).array() - e2u + 1.0 - pos - neg).matrix();
  r.tail(n) = (lap.apply(w).array() - data.L.curvature_density + pos - neg).matrix();
  return r;
}

GermSolution solve_gauss3(const GermData3& data, const SolverOptions& options) {
  check_options(options, "solve_gauss3");
  const SurfaceMesh& mesh = *data.mesh;
  const mesh::Laplacian lap = mesh::laplacian(mesh);
  const int n = lap.size();
  if (data.t.size() != n) {
    throw Error(ErrorKind::Shape, "germsolve", "solve_gauss3", "forcing length does not match mesh");
  }
  NewtonProblem p;
  p.operation = "solve_gauss3";
  p.mass = lap.mass;
  p.residual = [&](const Eigen::VectorXd& u) { return gauss3_residual(lap, data.t, u); };
  p.jacobian = [&](const Eigen::VectorXd& u) {
    const Eigen::ArrayXd e2u = (2.0 * u.array()).exp();
    const Eigen::VectorXd diag = (lap.mass.array() * (2.0 * e2u - 2.0 * data.t.array() / e2u)).matrix();
    Sparse jac = -lap.stiffness;
    for (int i = 0; i < n; ++i) jac.coeffRef(i, i) -= diag[i];
    return jac;
  };
  GermSolution sol;
  sol.n = 3;
  sol.mesh_hash = mesh.hash();
  auto [u, trace] = newton(p, Eigen::VectorXd::Zero(n), options, sol.converged, sol.residual);
  sol.u = std::move(u);
  sol.trace = std::move(trace);
  return sol;
}

GermSolution solve_gauss_ricci4(const GermData4& data, const SolverOptions& options) {
  check_options(options, "solve_gauss_ricci4");
  const SurfaceMesh& mesh = *data.mesh;
  const mesh::Laplacian lap = mesh::laplacian(mesh);
  const int n = lap.size();
  NewtonProblem p;
  p.operation = "solve_gauss_ricci4";
  p.mass.resize(2 * n);
  p.mass << lap.mass, lap.mass;
  p.residual = [&](const Eigen::VectorXd& x) {
    return gauss_ricci4_residual(lap, data, x.head(n), x.tail(n));
  };
  p.jacobian = [&](const Eigen::VectorXd& x) {
    const Eigen::ArrayXd u = x.head(n).array();
    const Eigen::ArrayXd w = x.tail(n).array();
    const Eigen::ArrayXd e2u = (2.0 * u).exp();
    const Eigen::ArrayXd pos = (-2.0 * u + 2.0 * w).exp() * data.t2.array();
    const Eigen::ArrayXd neg = (-2.0 * u - 2.0 * w).exp() * data.t1.array();
    const Eigen::ArrayXd m = lap.mass.array();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(2 * lap.stiffness.nonZeros() + 4 * n);
    for (int k = 0; k < lap.stiffness.outerSize(); ++k) {
      for (Sparse::InnerIterator it(lap.stiffness, k); it; ++it) {
        trip.emplace_back(it.row(), it.col(), -it.value());
        trip.emplace_back(n + it.row(), n + it.col(), -it.value());
      }
    }
    for (int i = 0; i < n; ++i) {
      const double s = pos[i] + neg[i];
      const double d = pos[i] - neg[i];
      trip.emplace_back(i, i, m[i] * (-2.0 * e2u[i] + 2.0 * s));
      trip.emplace_back(i, n + i, -2.0 * m[i] * d);
      trip.emplace_back(n + i, i, -2.0 * m[i] * d);
      trip.emplace_back(n + i, n + i, 2.0 * m[i] * s);
    }
    Sparse jac(2 * n, 2 * n);
    jac.setFromTriplets(trip.begin(), trip.end());
    return jac;
  };
  GermSolution sol;
  sol.n = 4;
  sol.mesh_hash = mesh.hash();
  auto [x, trace] = newton(p, Eigen::VectorXd::Zero(2 * n), options, sol.converged, sol.residual);
  sol.u = x.head(n);
  sol.w = x.tail(n);
  sol.trace = std::move(trace);
  return sol;
}

}  // namespace hypmin::germ
