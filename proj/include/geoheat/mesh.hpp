#pragma once

#include "geoheat/common.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace geoheat {

/// Indexed triangle mesh with halfedge connectivity and precomputed geometry.
///
/// Halfedge 3*f + k runs from faces[f][k] to faces[f][(k+1)%3]. Each edge
/// stores its endpoints as (vmin, vmax); the orientation halfedge runs
/// vmin -> vmax, so the edge vector is positions[vmax] - positions[vmin].
/// Immutable after construction and safe to share across threads.
struct TriMesh {
  std::vector<Vec3> positions;
  std::vector<std::array<Index, 3>> faces;  // counter-clockwise triples

  std::vector<Index> halfedge_twin;  // -1 on boundary
  std::vector<Index> halfedge_edge;

  std::vector<std::array<Index, 2>> edge_vertices;   // (vmin, vmax)
  std::vector<std::array<Index, 2>> edge_halfedges;  // {vmin->vmax, vmax->vmin}, -1 if absent
  std::vector<Index> interior_edges;
  std::vector<Index> interior_edge_index;  // edge -> position in interior_edges, -1 on boundary
  std::vector<std::uint8_t> vertex_on_boundary;

  std::vector<double> face_area;
  std::vector<Vec3> face_normal;          // unit
  std::vector<double> vertex_area;        // one third of incident face areas
  std::vector<double> halfedge_cot;       // cot of the angle opposite the halfedge
  std::vector<double> edge_weight;        // theta = 1/2 * sum of opposite cotangents
  std::vector<double> vertex_weight_sum;  // sum_k theta_{j,k}

  // CSR vertex adjacency, neighbors sorted ascending
  std::vector<Index> vv_offset;
  std::vector<Index> vv_index;
  std::vector<Index> vv_edge;
  std::vector<double> vv_weight;

  // CSR vertex -> incident face corners (3*f + k with faces[f][k] == v)
  std::vector<Index> vc_offset;
  std::vector<Index> vc_corner;

  Index vertex_count() const { return static_cast<Index>(positions.size()); }
  Index face_count() const { return static_cast<Index>(faces.size()); }
  Index edge_count() const { return static_cast<Index>(edge_vertices.size()); }
  Index halfedge_count() const { return static_cast<Index>(3 * faces.size()); }
  Index interior_edge_count() const { return static_cast<Index>(interior_edges.size()); }

  Index halfedge_face(Index h) const { return h / 3; }
  Index halfedge_tail(Index h) const { return faces[h / 3][h % 3]; }
  Index halfedge_head(Index h) const { return faces[h / 3][(h % 3 + 1) % 3]; }

  bool edge_is_interior(Index e) const {
    return edge_halfedges[e][0] >= 0 && edge_halfedges[e][1] >= 0;
  }

  /// Face on the given side of an edge: side 0 faces the orientation
  /// halfedge, side 1 its twin. -1 when that side is open.
  Index edge_face(Index e, int side) const {
    Index h = edge_halfedges[e][side];
    return h >= 0 ? h / 3 : kInvalidIndex;
  }

  /// Vector of the orientation halfedge, head minus tail.
  Vec3 edge_vector(Index e) const {
    return positions[edge_vertices[e][1]] - positions[edge_vertices[e][0]];
  }

  double edge_length(Index e) const { return edge_vector(e).norm(); }

  /// Sign of face f's traversal of the edge under corner h = 3*f + k:
  /// +1 when the face's halfedge coincides with the orientation halfedge.
  double corner_edge_sign(Index h) const {
    return halfedge_tail(h) == edge_vertices[halfedge_edge[h]][0] ? 1.0 : -1.0;
  }

  /// Edge joining a and b, or -1. Neighbors are sorted so this is a binary
  /// search in a's adjacency row.
  Index edge_between(Index a, Index b) const {
    auto first = vv_index.begin() + vv_offset[a];
    auto last = vv_index.begin() + vv_offset[a + 1];
    auto it = std::lower_bound(first, last, b);
    if (it == last || *it != b) return kInvalidIndex;
    return vv_edge[it - vv_index.begin()];
  }
};

namespace detail {

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

inline double cot_at(const Vec3& apex, const Vec3& p, const Vec3& q) {
  Vec3 u = p - apex;
  Vec3 v = q - apex;
  return u.dot(v) / u.cross(v).norm();
}

}  // namespace detail

/// Assemble connectivity and geometry from raw positions and CCW triangles.
/// Throws MeshError on out-of-range indices, degenerate faces, non-manifold
/// edges, or inconsistent winding.
inline TriMesh build_mesh(std::vector<Vec3> positions, std::vector<std::array<Index, 3>> face_list) {
  TriMesh mesh;
  mesh.positions = std::move(positions);
  mesh.faces = std::move(face_list);
  const Index nv = mesh.vertex_count();
  const Index nf = mesh.face_count();

  Vec3 lo = Vec3::Constant(kInfinity), hi = Vec3::Constant(-kInfinity);
  for (const Vec3& p : mesh.positions) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double bbox_diag2 = nv > 0 ? (hi - lo).squaredNorm() : 0.0;
  const double degenerate_area = 1e-14 * bbox_diag2;

  mesh.face_area.resize(nf);
  mesh.face_normal.resize(nf);
  for (Index f = 0; f < nf; ++f) {
    const auto& tri = mesh.faces[f];
    for (int k = 0; k < 3; ++k) {
      if (tri[k] < 0 || tri[k] >= nv)
        throw MeshError("face " + std::to_string(f) + ": vertex index out of range");
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw MeshError("face " + std::to_string(f) + ": repeated vertex (degenerate face)");
    Vec3 n = (mesh.positions[tri[1]] - mesh.positions[tri[0]])
                 .cross(mesh.positions[tri[2]] - mesh.positions[tri[0]]);
    double area = 0.5 * n.norm();
    if (!(area > degenerate_area))
      throw MeshError("face " + std::to_string(f) + ": degenerate (area " + std::to_string(area) + ")");
    mesh.face_area[f] = area;
    mesh.face_normal[f] = n / (2.0 * area);
  }

  // Group halfedges by unordered endpoint pair to form edges.
  struct HalfedgeKey {
    Index vmin, vmax, halfedge;
  };
  std::vector<HalfedgeKey> keys;
  keys.reserve(3 * static_cast<std::size_t>(nf));
  for (Index h = 0; h < 3 * nf; ++h) {
    Index a = mesh.halfedge_tail(h);
    Index b = mesh.halfedge_head(h);
    keys.push_back({std::min(a, b), std::max(a, b), h});
  }
  std::sort(keys.begin(), keys.end(), [](const HalfedgeKey& x, const HalfedgeKey& y) {
    if (x.vmin != y.vmin) return x.vmin < y.vmin;
    if (x.vmax != y.vmax) return x.vmax < y.vmax;
    return x.halfedge < y.halfedge;
  });

  mesh.halfedge_twin.assign(3 * nf, kInvalidIndex);
  mesh.halfedge_edge.assign(3 * nf, kInvalidIndex);
  for (std::size_t i = 0; i < keys.size();) {
    std::size_t j = i;
    while (j < keys.size() && keys[j].vmin == keys[i].vmin && keys[j].vmax == keys[i].vmax) ++j;
    const std::size_t incident = j - i;
    if (incident > 2)
      throw MeshError("non-manifold edge (" + std::to_string(keys[i].vmin) + "," +
                      std::to_string(keys[i].vmax) + "): " + std::to_string(incident) +
                      " incident faces");
    const Index e = static_cast<Index>(mesh.edge_vertices.size());
    mesh.edge_vertices.push_back({keys[i].vmin, keys[i].vmax});
    std::array<Index, 2> halves = {kInvalidIndex, kInvalidIndex};
    for (std::size_t k = i; k < j; ++k) {
      Index h = keys[k].halfedge;
      mesh.halfedge_edge[h] = e;
      int side = mesh.halfedge_tail(h) == keys[i].vmin ? 0 : 1;
      if (halves[side] >= 0)
        throw MeshError("inconsistent winding across edge (" + std::to_string(keys[i].vmin) +
                        "," + std::to_string(keys[i].vmax) + ")");
      halves[side] = h;
    }
    if (incident == 2) {
      mesh.halfedge_twin[halves[0]] = halves[1];
      mesh.halfedge_twin[halves[1]] = halves[0];
    }
    mesh.edge_halfedges.push_back(halves);
    i = j;
  }

  const Index ne = mesh.edge_count();
  mesh.interior_edge_index.assign(ne, kInvalidIndex);
  for (Index e = 0; e < ne; ++e) {
    if (mesh.edge_is_interior(e)) {
      mesh.interior_edge_index[e] = static_cast<Index>(mesh.interior_edges.size());
      mesh.interior_edges.push_back(e);
    }
  }

  mesh.halfedge_cot.resize(3 * nf);
  for (Index f = 0; f < nf; ++f) {
    const auto& tri = mesh.faces[f];
    const Vec3& p0 = mesh.positions[tri[0]];
    const Vec3& p1 = mesh.positions[tri[1]];
    const Vec3& p2 = mesh.positions[tri[2]];
    // halfedge k runs v_k -> v_{k+1}; the opposite angle sits at v_{k+2}
    mesh.halfedge_cot[3 * f + 0] = detail::cot_at(p2, p0, p1);
    mesh.halfedge_cot[3 * f + 1] = detail::cot_at(p0, p1, p2);
    mesh.halfedge_cot[3 * f + 2] = detail::cot_at(p1, p2, p0);
  }
  mesh.edge_weight.assign(ne, 0.0);
  for (Index e = 0; e < ne; ++e) {
    double sum = 0.0;
    for (Index h : mesh.edge_halfedges[e])
      if (h >= 0) sum += mesh.halfedge_cot[h];
    mesh.edge_weight[e] = 0.5 * sum;
  }

  mesh.vertex_area.assign(nv, 0.0);
  for (Index f = 0; f < nf; ++f)
    for (Index v : mesh.faces[f]) mesh.vertex_area[v] += mesh.face_area[f] / 3.0;

  mesh.vertex_on_boundary.assign(nv, 0);
  for (Index e = 0; e < ne; ++e) {
    if (!mesh.edge_is_interior(e)) {
      mesh.vertex_on_boundary[mesh.edge_vertices[e][0]] = 1;
      mesh.vertex_on_boundary[mesh.edge_vertices[e][1]] = 1;
    }
  }

  // Vertex adjacency rows, sorted by neighbor index.
  std::vector<Index> degree(nv, 0);
  for (Index e = 0; e < ne; ++e) {
    ++degree[mesh.edge_vertices[e][0]];
    ++degree[mesh.edge_vertices[e][1]];
  }
  mesh.vv_offset.assign(nv + 1, 0);
  for (Index v = 0; v < nv; ++v) mesh.vv_offset[v + 1] = mesh.vv_offset[v] + degree[v];
  mesh.vv_index.resize(mesh.vv_offset[nv]);
  mesh.vv_edge.resize(mesh.vv_offset[nv]);
  mesh.vv_weight.resize(mesh.vv_offset[nv]);
  {
    std::vector<Index> cursor(mesh.vv_offset.begin(), mesh.vv_offset.end() - 1);
    for (Index e = 0; e < ne; ++e) {
      Index a = mesh.edge_vertices[e][0], b = mesh.edge_vertices[e][1];
      mesh.vv_index[cursor[a]] = b;
      mesh.vv_edge[cursor[a]++] = e;
      mesh.vv_index[cursor[b]] = a;
      mesh.vv_edge[cursor[b]++] = e;
    }
  }
  for (Index v = 0; v < nv; ++v) {
    Index begin = mesh.vv_offset[v], end = mesh.vv_offset[v + 1];
    std::vector<std::pair<Index, Index>> row;
    row.reserve(end - begin);
    for (Index i = begin; i < end; ++i) row.emplace_back(mesh.vv_index[i], mesh.vv_edge[i]);
    std::sort(row.begin(), row.end());
    for (Index i = begin; i < end; ++i) {
      mesh.vv_index[i] = row[i - begin].first;
      mesh.vv_edge[i] = row[i - begin].second;
      mesh.vv_weight[i] = mesh.edge_weight[row[i - begin].second];
    }
  }
  mesh.vertex_weight_sum.assign(nv, 0.0);
  for (Index v = 0; v < nv; ++v)
    for (Index i = mesh.vv_offset[v]; i < mesh.vv_offset[v + 1]; ++i)
      mesh.vertex_weight_sum[v] += mesh.vv_weight[i];

  // Vertex -> incident face corners.
  std::vector<Index> corner_count(nv, 0);
  for (Index f = 0; f < nf; ++f)
    for (Index v : mesh.faces[f]) ++corner_count[v];
  mesh.vc_offset.assign(nv + 1, 0);
  for (Index v = 0; v < nv; ++v) mesh.vc_offset[v + 1] = mesh.vc_offset[v] + corner_count[v];
  mesh.vc_corner.resize(mesh.vc_offset[nv]);
  {
    std::vector<Index> cursor(mesh.vc_offset.begin(), mesh.vc_offset.end() - 1);
    for (Index f = 0; f < nf; ++f)
      for (int k = 0; k < 3; ++k) mesh.vc_corner[cursor[mesh.faces[f][k]]++] = 3 * f + k;
  }

  return mesh;
}

/// Arithmetic mean of edge lengths.
inline double average_edge_length(const TriMesh& mesh) {
  double sum = 0.0;
  for (Index e = 0; e < mesh.edge_count(); ++e) sum += mesh.edge_length(e);
  return sum / static_cast<double>(mesh.edge_count());
}

/// Mean of 2*sqrt(3)*inradius/longest-edge over all faces; 1 for an
/// equilateral triangulation, smaller for worse quality.
inline double triangulation_quality(const TriMesh& mesh) {
  double sum = 0.0;
  for (Index f = 0; f < mesh.face_count(); ++f) {
    const auto& tri = mesh.faces[f];
    double a = (mesh.positions[tri[1]] - mesh.positions[tri[2]]).norm();
    double b = (mesh.positions[tri[2]] - mesh.positions[tri[0]]).norm();
    double c = (mesh.positions[tri[0]] - mesh.positions[tri[1]]).norm();
    double s = 0.5 * (a + b + c);
    double inradius = mesh.face_area[f] / s;
    double longest = std::max({a, b, c});
    sum += 2.0 * std::sqrt(3.0) * inradius / longest;
  }
  return sum / static_cast<double>(mesh.face_count());
}

/// Per-face gradient of a vertex scalar via linear interpolation:
/// grad u = 1/(2A) * sum_k u_k * (n x e_k) with e_k the edge opposite v_k.
inline FaceField face_gradient(const TriMesh& mesh, const VertexScalarField& u) {
  FaceField grad(mesh.face_count());
  for (Index f = 0; f < mesh.face_count(); ++f) {
    const auto& tri = mesh.faces[f];
    const Vec3& n = mesh.face_normal[f];
    Vec3 g = Vec3::Zero();
    for (int k = 0; k < 3; ++k) {
      Vec3 opposite_edge = mesh.positions[tri[(k + 2) % 3]] - mesh.positions[tri[(k + 1) % 3]];
      g += u[tri[k]] * n.cross(opposite_edge);
    }
    grad[f] = g / (2.0 * mesh.face_area[f]);
  }
  return grad;
}

}  // namespace geoheat
