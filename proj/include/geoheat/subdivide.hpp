#pragma once

#include "geoheat/mesh.hpp"

#include <array>
#include <vector>

namespace geoheat {

/// Midpoint 1-to-4 subdivision. Original vertices keep their indices as a
/// prefix; one new vertex per edge at the exact midpoint, in edge order.
/// The operation does not alter the surface metric, so distances at original
/// vertices are preserved across levels.
inline TriMesh midpoint_subdivide_once(const TriMesh& mesh) {
  std::vector<Vec3> positions = mesh.positions;
  positions.reserve(positions.size() + mesh.edge_count());
  const Index base = mesh.vertex_count();
  for (Index e = 0; e < mesh.edge_count(); ++e)
    positions.push_back(0.5 * (mesh.positions[mesh.edge_vertices[e][0]] +
                               mesh.positions[mesh.edge_vertices[e][1]]));

  std::vector<std::array<Index, 3>> faces;
  faces.reserve(4 * mesh.faces.size());
  for (Index f = 0; f < mesh.face_count(); ++f) {
    const auto& tri = mesh.faces[f];
    // midpoint of the edge opposite corner k+2, i.e. edge (v_k, v_{k+1})
    const Index m01 = base + mesh.halfedge_edge[3 * f + 0];
    const Index m12 = base + mesh.halfedge_edge[3 * f + 1];
    const Index m20 = base + mesh.halfedge_edge[3 * f + 2];
    faces.push_back({tri[0], m01, m20});
    faces.push_back({m01, tri[1], m12});
    faces.push_back({m20, m12, tri[2]});
    faces.push_back({m01, m12, m20});
  }
  return build_mesh(std::move(positions), std::move(faces));
}

inline TriMesh midpoint_subdivide(const TriMesh& mesh, int levels) {
  if (levels <= 0) return mesh;
  TriMesh out = midpoint_subdivide_once(mesh);
  for (int i = 1; i < levels; ++i) out = midpoint_subdivide_once(out);
  return out;
}

}  // namespace geoheat
