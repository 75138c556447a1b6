#include "hypmin/mesh_io.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>

#include "hypmin/error.hpp"

namespace hypmin::mesh {

namespace {

void put(std::ostream& out, cplx z) { out << ' ' << z.real() << ' ' << z.imag(); }

void put(std::ostream& out, const Mobius& m) {
  put(out, m.a);
  put(out, m.b);
  put(out, m.c);
  put(out, m.d);
}

[[noreturn]] void format_error(const std::string& what) {
  throw Error(ErrorKind::Format, "hypmesh", "import", what);
}

template <class T>
T take(std::istream& in, const char* what) {
  T value{};
  if (!(in >> value)) format_error(std::string("could not read ") + what);
  return value;
}

cplx take_cplx(std::istream& in, const char* what) {
  const double re = take<double>(in, what);
  const double im = take<double>(in, what);
  return {re, im};
}

Mobius take_mobius(std::istream& in) {
  Mobius m;
  m.a = take_cplx(in, "pairing");
  m.b = take_cplx(in, "pairing");
  m.c = take_cplx(in, "pairing");
  m.d = take_cplx(in, "pairing");
  return m;
}

std::size_t section(std::istream& in, const std::string& name) {
  const auto tag = take<std::string>(in, "section tag");
  if (tag != name) format_error("expected section '" + name + "', found '" + tag + "'");
  return take<std::size_t>(in, "section size");
}

}  // namespace

void write_mesh(std::ostream& out, const SurfaceMesh& mesh) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(17);
  out << "hypmesh 1\n";
  out << "genus " << mesh.genus << '\n';
  out << "resolution " << mesh.resolution << '\n';
  out << "pairings " << mesh.domain.side_pairings.size() << '\n';
  for (const Mobius& m : mesh.domain.side_pairings) {
    put(out, m);
    out << '\n';
  }
  out << "vertices " << mesh.vertices.size() << '\n';
  for (cplx z : mesh.vertices) {
    put(out, z);
    out << '\n';
  }
  out << "faces " << mesh.faces.size() << '\n';
  for (const Face& f : mesh.faces) {
    out << f.v[0] << ' ' << f.v[1] << ' ' << f.v[2];
    for (cplx z : f.z) put(out, z);
    for (cplx r : f.frame) put(out, r);
    for (int e : f.edge) out << ' ' << e;
    for (int s : f.edge_sign) out << ' ' << s;
    out << '\n';
  }
  out << "identifications " << mesh.identifications.size() << '\n';
  for (const Identification& id : mesh.identifications) {
    out << id.vertex;
    put(out, id.canonical);
    put(out, id.copy);
    put(out, id.deck);
    out << '\n';
  }
  out << "edges " << mesh.edges.size() << '\n';
  for (const Edge& e : mesh.edges) out << e.from << ' ' << e.to << '\n';
  out.flags(flags);
  out.precision(prec);
}

SurfaceMesh read_mesh(std::istream& in, const MeshOptions& options) {
  if (take<std::string>(in, "magic") != "hypmesh" || take<int>(in, "version") != 1) {
    format_error("not a hypmesh version 1 file");
  }
  SurfaceMesh mesh;
  if (take<std::string>(in, "genus tag") != "genus") format_error("expected genus");
  mesh.genus = take<int>(in, "genus");
  if (take<std::string>(in, "resolution tag") != "resolution") format_error("expected resolution");
  mesh.resolution = take<int>(in, "resolution");
  mesh.domain = build_fundamental_domain(mesh.genus);

  const std::size_t np = section(in, "pairings");
  if (np != static_cast<std::size_t>(2 * mesh.genus)) format_error("pairing count does not match genus");
  for (std::size_t i = 0; i < np; ++i) mesh.domain.side_pairings[i] = take_mobius(in);

  const std::size_t nv = section(in, "vertices");
  mesh.vertices.resize(nv);
  for (auto& z : mesh.vertices) z = take_cplx(in, "vertex");

  const std::size_t nf = section(in, "faces");
  mesh.faces.resize(nf);
  for (Face& f : mesh.faces) {
    for (int& v : f.v) {
      v = take<int>(in, "face vertex");
      if (v < 0 || static_cast<std::size_t>(v) >= nv) format_error("face vertex out of range");
    }
    for (cplx& z : f.z) z = take_cplx(in, "corner position");
    for (cplx& r : f.frame) r = take_cplx(in, "corner frame");
    for (int& e : f.edge) e = take<int>(in, "face edge");
    for (int& s : f.edge_sign) s = take<int>(in, "edge sign");
  }

  const std::size_t ni = section(in, "identifications");
  mesh.identifications.resize(ni);
  for (Identification& id : mesh.identifications) {
    id.vertex = take<int>(in, "identified vertex");
    id.canonical = take_cplx(in, "canonical position");
    id.copy = take_cplx(in, "copy position");
    id.deck = take_mobius(in);
  }

  const std::size_t ne = section(in, "edges");
  mesh.edges.resize(ne);
  for (Edge& e : mesh.edges) {
    e.from = take<int>(in, "edge");
    e.to = take<int>(in, "edge");
  }
  for (const Face& f : mesh.faces) {
    for (int e : f.edge) {
      if (e < 0 || static_cast<std::size_t>(e) >= ne) format_error("face edge out of range");
    }
  }
  finalize_geometry(mesh, options);
  return mesh;
}

void save_mesh(const std::string& path, const SurfaceMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Format, "hypmesh", "export", "cannot open " + path);
  write_mesh(out, mesh);
}

SurfaceMesh load_mesh(const std::string& path, const MeshOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Format, "hypmesh", "import", "cannot open " + path);
  return read_mesh(in, options);
}

}  // namespace hypmin::mesh
