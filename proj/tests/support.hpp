#pragma once

#include <map>
#include <memory>
#include <utility>

#include "hypmin/bundles.hpp"
#include "hypmin/germsolve.hpp"
#include "hypmin/hypmesh.hpp"

namespace hypmin::test {

inline constexpr double kPi = 3.14159265358979323846;

// Meshes are immutable, so one copy per (genus, resolution) serves every test.
inline std::shared_ptr<const mesh::SurfaceMesh> surface(int genus, int resolution) {
  static std::map<std::pair<int, int>, std::shared_ptr<const mesh::SurfaceMesh>> cache;
  auto& slot = cache[{genus, resolution}];
  if (!slot) slot = std::make_shared<const mesh::SurfaceMesh>(mesh::build_surface(genus, resolution));
  return slot;
}

inline bundles::HolomorphicBasis basis(const mesh::SurfaceMesh& m, const bundles::LineBundle& L, int km, int ln,
                                       int expected) {
  return bundles::holomorphic_basis(bundles::dbar_operator(m, L, km, ln), expected);
}

inline bundles::DiscreteSection scaled(bundles::DiscreteSection s, double a) {
  s.values *= a;
  s.dbar_residual.reset();
  return s;
}

inline bundles::DiscreteSection zero_like(const mesh::SurfaceMesh& m, int km, int ln, int degree) {
  bundles::DiscreteSection s;
  s.m = km;
  s.n = ln;
  s.degree = degree;
  s.mesh_hash = m.hash();
  s.values = Eigen::VectorXcd::Zero(m.num_vertices());
  return s;
}

}  // namespace hypmin::test
