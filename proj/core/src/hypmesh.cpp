#include "hypmin/hypmesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <queue>
#include <string>

#include "hypmin/error.hpp"

namespace hypmin::mesh {

namespace {

constexpr double kPi = std::numbers::pi;

// Disk automorphism moving p to the origin, and its inverse.
cplx to_origin(cplx p, cplx z) { return (z - p) / (1.0 - std::conj(p) * z); }
cplx from_origin(cplx p, cplx z) { return (z + p) / (1.0 + std::conj(p) * z); }

double interior_angle_for_radius(int sides, double radius) {
  // cosh R = cot(π/n) cot(α/2)
  return 2.0 * std::atan(1.0 / (std::cosh(radius) * std::tan(kPi / sides)));
}

// Euclidean triangle angles from side lengths; angle k is opposite side
// (k+1, k+2), i.e. opposite the edge not touching corner k.
std::array<double, 3> euclidean_angles(const std::array<double, 3>& len) {
  // len[j] is the side from corner j to corner j+1; corner k is opposite len[(k+1)%3].
  std::array<double, 3> out{};
  for (int k = 0; k < 3; ++k) {
    const double a = len[(k + 1) % 3];
    const double b = len[k];
    const double c = len[(k + 2) % 3];
    const double cosv = std::clamp((b * b + c * c - a * a) / (2.0 * b * c), -1.0, 1.0);
    out[k] = std::acos(cosv);
  }
  return out;
}

double heron_area(std::array<double, 3> s) {
  std::sort(s.begin(), s.end(), std::greater<>());
  const double a = s[0], b = s[1], c = s[2];
  const double p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
  return 0.25 * std::sqrt(std::max(p, 0.0));
}

// Hyperbolic L'Huilier: tan(E/4)² = Π tanh(·/2) over s, s−a, s−b, s−c.
double hyperbolic_area(const std::array<double, 3>& len) {
  const double s = 0.5 * (len[0] + len[1] + len[2]);
  const double p = std::tanh(0.5 * s) * std::tanh(0.5 * (s - len[0])) *
                   std::tanh(0.5 * (s - len[1])) * std::tanh(0.5 * (s - len[2]));
  return 4.0 * std::atan(std::sqrt(std::max(p, 0.0)));
}

struct DomainMesh {
  std::vector<cplx> z;
  std::vector<std::array<int, 3>> faces;
  // boundary edge (min,max) -> side index
  std::map<std::pair<int, int>, int> boundary;
  std::vector<int> side_of;  // -1 interior, side index for side vertices, -2 corners
};

std::pair<int, int> key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

DomainMesh coarse_domain(const FundamentalDomain& dom) {
  DomainMesh dm;
  const int n = dom.sides();
  dm.z.push_back(0.0);
  dm.side_of.push_back(-1);
  for (int j = 0; j < n; ++j) {
    dm.z.push_back(dom.polygon_vertices[j]);
    dm.side_of.push_back(-2);
  }
  for (int j = 0; j < n; ++j) {
    const int a = 1 + j;
    const int b = 1 + (j + 1) % n;
    dm.faces.push_back({0, a, b});
    dm.boundary[key(a, b)] = j;
  }
  return dm;
}

DomainMesh refine(const DomainMesh& in) {
  DomainMesh out;
  out.z = in.z;
  out.side_of = in.side_of;
  std::map<std::pair<int, int>, int> mid;
  auto midpoint = [&](int a, int b) {
    const auto k = key(a, b);
    if (auto it = mid.find(k); it != mid.end()) return it->second;
    const int id = static_cast<int>(out.z.size());
    out.z.push_back(geodesic_midpoint(in.z[k.first], in.z[k.second]));
    int side = -1;
    if (auto bt = in.boundary.find(k); bt != in.boundary.end()) {
      side = bt->second;
      out.boundary[key(k.first, id)] = side;
      out.boundary[key(id, k.second)] = side;
    }
    out.side_of.push_back(side);
    mid.emplace(k, id);
    return id;
  };
  for (const auto& f : in.faces) {
    const int m01 = midpoint(f[0], f[1]);
    const int m12 = midpoint(f[1], f[2]);
    const int m20 = midpoint(f[2], f[0]);
    out.faces.push_back({f[0], m01, m20});
    out.faces.push_back({m01, f[1], m12});
    out.faces.push_back({m20, m12, f[2]});
    out.faces.push_back({m01, m12, m20});
  }
  return out;
}

}  // namespace

double conformal_factor(cplx z) { return 2.0 / (1.0 - std::norm(z)); }

double hyperbolic_distance(cplx z, cplx w) {
  const double r = std::abs(to_origin(z, w));
  return 2.0 * std::atanh(r);
}

cplx geodesic_midpoint(cplx z, cplx w) {
  const cplx moved = to_origin(z, w);
  const double r = std::abs(moved);
  if (r == 0.0) return z;
  const double half = std::tanh(0.5 * std::atanh(r));
  return from_origin(z, moved / r * half);
}

Mobius Mobius::translation(double direction, double distance) {
  const cplx rot = std::polar(1.0, direction);
  const double ch = std::cosh(0.5 * distance);
  const double sh = std::sinh(0.5 * distance);
  return {ch, rot * sh, std::conj(rot) * sh, ch};
}

double Mobius::isometry_defect() const {
  const double det = std::abs(a * d - b * c - 1.0);
  const double form = std::abs(c - std::conj(b)) + std::abs(d - std::conj(a));
  const double norm = std::abs(std::norm(a) - std::norm(b) - 1.0);
  return std::max({det, form, norm});
}

double FundamentalDomain::interior_angle() const {
  return interior_angle_for_radius(sides(), circumradius);
}

FundamentalDomain build_fundamental_domain(int genus) {
  if (genus < 2) {
    throw Error(ErrorKind::InvalidParameter, "hypmesh", "build_surface",
                "genus must be at least 2", {{"genus", genus}});
  }
  FundamentalDomain dom;
  dom.genus = genus;
  const int n = dom.sides();
  const double target = kPi / (2.0 * genus);

  // interior angle decreases monotonically from π(n−2)/n towards 0 as R grows.
  double lo = 0.0, hi = 1.0;
  while (interior_angle_for_radius(n, hi) > target) hi *= 2.0;
  while (hi - lo > 1e-14 * std::max(1.0, hi)) {
    const double m = 0.5 * (lo + hi);
    if (interior_angle_for_radius(n, m) > target) lo = m; else hi = m;
  }
  dom.circumradius = 0.5 * (lo + hi);
  // Right triangle centre / side-midpoint / corner: tanh(d) = tanh(R) cos(π/n).
  dom.inradius = std::atanh(std::tanh(dom.circumradius) * std::cos(kPi / n));

  const double r = std::tanh(0.5 * dom.circumradius);
  for (int j = 0; j < n; ++j) dom.polygon_vertices.push_back(std::polar(r, 2.0 * kPi * j / n));
  for (int k = 0; k < 2 * genus; ++k) {
    const double phi = 2.0 * kPi * (k + 0.5) / n;
    dom.side_pairings.push_back(Mobius::translation(phi, 2.0 * dom.inradius));
  }
  return dom;
}

SurfaceMesh build_surface(int genus, int resolution, const MeshOptions& options) {
  if (resolution < 1) {
    throw Error(ErrorKind::InvalidParameter, "hypmesh", "build_surface",
                "resolution must be at least 1", {{"resolution", resolution}});
  }
  FundamentalDomain dom = build_fundamental_domain(genus);
  const double faces = 4.0 * genus * std::pow(4.0, resolution);
  if (faces / 2.0 > static_cast<double>(options.max_vertices)) {
    throw Error(ErrorKind::Resource, "hypmesh", "build_surface",
                "mesh exceeds the configured vertex budget",
                {{"estimated_vertices", faces / 2.0}, {"max_vertices", options.max_vertices}});
  }

  DomainMesh dm = coarse_domain(dom);
  for (int i = 0; i < resolution; ++i) dm = refine(dm);

  const int n = dom.sides();
  const int half = 2 * genus;
  const int nd = static_cast<int>(dm.z.size());

  // Vertices per side (corners belong to two sides).
  std::vector<std::vector<int>> on_side(n);
  for (int v = 0; v < nd; ++v) {
    if (dm.side_of[v] >= 0) on_side[dm.side_of[v]].push_back(v);
  }
  for (int j = 0; j < n; ++j) {
    on_side[j].push_back(1 + j);
    on_side[(j + n - 1) % n].push_back(1 + j);
  }

  auto nearest_on_side = [&](int side, cplx w) {
    int best = -1;
    double bd = 1e300;
    for (int v : on_side[side]) {
      const double d = std::abs(dm.z[v] - w);
      if (d < bd) { bd = d; best = v; }
    }
    if (bd > 1e-9) {
      throw Error(ErrorKind::MeshQuality, "hypmesh", "build_surface",
                  "side pairing does not map boundary vertices onto each other",
                  {{"side", side}, {"distance", bd}});
    }
    return best;
  };

  // partner[v] for a vertex on side s >= 2g: its image under pairing s−2g.
  // Corners are handled separately as they sit on two sides.
  std::vector<int> canonical(nd, -1);
  std::vector<Mobius> deck(nd);  // canonical -> copy
  for (int v = 0; v < nd; ++v) {
    if (dm.side_of[v] == -1 || (dm.side_of[v] >= 0 && dm.side_of[v] < half)) canonical[v] = v;
  }
  for (int v = 0; v < nd; ++v) {
    const int s = dm.side_of[v];
    if (s < half) continue;
    const Mobius& t = dom.side_pairings[s - half];
    const int c = nearest_on_side(s - half, t(dm.z[v]));
    canonical[v] = c;
    deck[v] = t.inverse();
  }
  // Corner cycle: BFS from corner 0 through the pairings.
  {
    const int c0 = 1;
    canonical[c0] = c0;
    std::vector<bool> seen(n, false);
    seen[0] = true;
    std::queue<int> q;
    q.push(0);
    while (!q.empty()) {
      const int j = q.front();
      q.pop();
      const int vj = 1 + j;
      for (int k = 0; k < half; ++k) {
        for (int dir = 0; dir < 2; ++dir) {
          const Mobius t = dir == 0 ? dom.side_pairings[k] : dom.side_pairings[k].inverse();
          const cplx w = t(dm.z[vj]);
          for (int i = 0; i < n; ++i) {
            if (seen[i] || std::abs(dom.polygon_vertices[i] - w) > 1e-9) continue;
            seen[i] = true;
            canonical[1 + i] = c0;
            deck[1 + i] = t * deck[vj];
            q.push(i);
          }
        }
      }
    }
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
      throw Error(ErrorKind::MeshQuality, "hypmesh", "build_surface",
                  "polygon corners do not form a single vertex cycle");
    }
  }

  SurfaceMesh mesh;
  mesh.genus = genus;
  mesh.resolution = resolution;

  std::vector<int> qid(nd, -1);
  for (int v = 0; v < nd; ++v) {
    const int c = canonical[v];
    if (qid[c] < 0) {
      qid[c] = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back(dm.z[c]);
    }
    qid[v] = qid[c];
  }
  // Snap non-canonical copies onto the exact deck image of the canonical position.
  for (int v = 0; v < nd; ++v) {
    if (canonical[v] == v) continue;
    dm.z[v] = deck[v](dm.z[canonical[v]]);
    mesh.identifications.push_back({qid[v], dm.z[canonical[v]], dm.z[v], deck[v]});
  }

  // Edge identity: a boundary edge on side s >= 2g is the same edge as its
  // image on side s−2g.
  auto side_partner = [&](int v, int s) {
    if (s < half) return v;
    const Mobius& t = dom.side_pairings[s - half];
    return nearest_on_side(s - half, t(dm.z[v]));
  };
  std::map<std::pair<int, int>, int> edge_id;
  for (const auto& f : dm.faces) {
    Face face;
    for (int j = 0; j < 3; ++j) {
      const int v = f[j];
      face.v[j] = qid[v];
      face.z[j] = dm.z[v];
      if (canonical[v] == v) {
        face.frame[j] = 1.0;
      } else {
        const cplx der = deck[v].derivative(dm.z[canonical[v]]);
        face.frame[j] = der / std::abs(der);
      }
    }
    for (int j = 0; j < 3; ++j) {
      int a = f[j], b = f[(j + 1) % 3];
      if (auto bt = dm.boundary.find(key(a, b)); bt != dm.boundary.end()) {
        a = side_partner(a, bt->second);
        b = side_partner(b, bt->second);
      }
      const auto k = key(a, b);
      auto [it, inserted] = edge_id.emplace(k, static_cast<int>(mesh.edges.size()));
      if (inserted) mesh.edges.push_back({qid[k.first], qid[k.second]});
      face.edge[j] = it->second;
      face.edge_sign[j] = a < b ? 1 : -1;
    }
    mesh.faces.push_back(face);
  }

  mesh.domain = std::move(dom);
  finalize_geometry(mesh, options);
  return mesh;
}

void finalize_geometry(SurfaceMesh& mesh, const MeshOptions& options) {
  const int nf = mesh.num_faces();
  mesh.face_areas.assign(nf, 0.0);
  mesh.edge_lengths.assign(nf, {});
  mesh.cotangents.assign(nf, {});
  mesh.angles.assign(nf, {});
  mesh.vertex_areas = Eigen::VectorXd::Zero(mesh.num_vertices());
  mesh.max_edge_length = 0.0;
  mesh.min_angle_deg = 180.0;
  for (int f = 0; f < nf; ++f) {
    const Face& face = mesh.faces[f];
    std::array<double, 3> len{};
    for (int j = 0; j < 3; ++j) {
      len[j] = hyperbolic_distance(face.z[j], face.z[(j + 1) % 3]);
      mesh.max_edge_length = std::max(mesh.max_edge_length, len[j]);
    }
    const double eu_area = heron_area(len);
    if (eu_area < 1e-14) {
      throw Error(ErrorKind::MeshQuality, "hypmesh", "laplacian", "degenerate triangle",
                  {{"face", f}, {"area", eu_area}});
    }
    const auto ang = euclidean_angles(len);
    for (int k = 0; k < 3; ++k) {
      const double a = len[(k + 1) % 3];
      const double b = len[k];
      const double c = len[(k + 2) % 3];
      mesh.cotangents[f][k] = (b * b + c * c - a * a) / (4.0 * eu_area);
      mesh.min_angle_deg = std::min(mesh.min_angle_deg, ang[k] * 180.0 / kPi);
    }
    mesh.angles[f] = ang;
    mesh.edge_lengths[f] = len;
    mesh.face_areas[f] = hyperbolic_area(len);
    for (int j = 0; j < 3; ++j) mesh.vertex_areas[face.v[j]] += mesh.face_areas[f] / 3.0;
  }
  if (mesh.min_angle_deg < options.min_angle_deg) {
    throw Error(ErrorKind::MeshQuality, "hypmesh", "build_surface",
                "minimum triangle angle below the quality floor",
                {{"min_angle_deg", mesh.min_angle_deg}, {"floor_deg", options.min_angle_deg},
                 {"genus", mesh.genus}});
  }
  mesh.total_area = mesh.vertex_areas.sum();
}

std::uint64_t SurfaceMesh::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  mix(&genus, sizeof genus);
  mix(&resolution, sizeof resolution);
  for (const cplx& z : vertices) {
    const double xy[2] = {z.real(), z.imag()};
    mix(xy, sizeof xy);
  }
  for (const Face& f : faces) mix(f.v.data(), sizeof(int) * 3);
  return h;
}

Eigen::VectorXd Laplacian::apply(const Eigen::VectorXd& u) const {
  return -(stiffness * u).cwiseQuotient(mass);
}

Laplacian laplacian(const SurfaceMesh& mesh) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.faces.size() * 12);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.faces[f];
    for (int k = 0; k < 3; ++k) {
      const int a = face.v[(k + 1) % 3];
      const int b = face.v[(k + 2) % 3];
      if (a == b) continue;
      const double w = 0.5 * mesh.cotangents[f][k];
      trip.emplace_back(a, a, w);
      trip.emplace_back(b, b, w);
      trip.emplace_back(a, b, -w);
      trip.emplace_back(b, a, -w);
    }
  }
  Laplacian lap;
  lap.stiffness.resize(mesh.num_vertices(), mesh.num_vertices());
  lap.stiffness.setFromTriplets(trip.begin(), trip.end());
  lap.mass = mesh.vertex_areas;
  return lap;
}

double integrate(const SurfaceMesh& mesh, const Eigen::VectorXd& field,
                 const std::optional<Eigen::VectorXd>& conformal_factor) {
  if (field.size() != mesh.num_vertices()) {
    throw Error(ErrorKind::Shape, "hypmesh", "integrate", "field length does not match mesh",
                {{"field", field.size()}, {"vertices", mesh.num_vertices()}});
  }
  if (!conformal_factor) return mesh.vertex_areas.dot(field);
  if (conformal_factor->size() != mesh.num_vertices()) {
    throw Error(ErrorKind::Shape, "hypmesh", "integrate",
                "conformal factor length does not match mesh",
                {{"u", conformal_factor->size()}, {"vertices", mesh.num_vertices()}});
  }
  const Eigen::VectorXd w = (2.0 * conformal_factor->array()).exp();
  return mesh.vertex_areas.cwiseProduct(w).dot(field);
}

Eigen::VectorXd angle_defect_curvature(const SurfaceMesh& mesh,
                                       const std::optional<Eigen::VectorXd>& u) {
  const int nv = mesh.num_vertices();
  Eigen::VectorXd angle_sum = Eigen::VectorXd::Zero(nv);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.faces[f];
    std::array<double, 3> len = mesh.edge_lengths[f];
    if (u) {
      for (int j = 0; j < 3; ++j) {
        len[j] *= std::exp(0.5 * ((*u)[face.v[j]] + (*u)[face.v[(j + 1) % 3]]));
      }
    }
    const auto ang = euclidean_angles(len);
    for (int k = 0; k < 3; ++k) angle_sum[face.v[k]] += ang[k];
  }
  Eigen::ArrayXd area = mesh.vertex_areas.array();
  if (u) area *= (2.0 * u->array()).exp();
  return (2.0 * kPi - angle_sum.array()) / area;
}

}  // namespace hypmin::mesh
