#pragma once

#include <iosfwd>
#include <string>

#include "hypmin/hypmesh.hpp"

namespace hypmin::mesh {

/// Line-oriented text format. Floats carry 17 significant digits so that a
/// round trip reproduces the mesh bit for bit.
///
///   hypmesh 1
///   genus <g>
///   resolution <r>
///   pairings <2g>       then a.re a.im b.re b.im c.re c.im d.re d.im per line
///   vertices <V>        then x y per line
///   faces <F>           then v0 v1 v2, three corner positions, three corner
///                       frames, edge0 edge1 edge2, s0 s1 s2 per line
///   identifications <N> then vertex canonical.re canonical.im copy.re copy.im
///                       deck coefficients per line
///   edges <E>           then from to per line
void write_mesh(std::ostream& out, const SurfaceMesh& mesh);
SurfaceMesh read_mesh(std::istream& in, const MeshOptions& options = {});

void save_mesh(const std::string& path, const SurfaceMesh& mesh);
SurfaceMesh load_mesh(const std::string& path, const MeshOptions& options = {});

}  // namespace hypmin::mesh
