#pragma once

#include "geoheat/bfs.hpp"
#include "geoheat/mesh.hpp"
#include "geoheat/parallel.hpp"

#include <cassert>
#include <vector>

namespace geoheat {

/// Recover a vertex scalar from a face gradient field in breadth-first
/// order: d(v) = d(parent) + mean over faces containing the parent edge of
/// g . (p_v - p_parent). Sources get 0, unreachable vertices +inf.
namespace integrate_detail {

/// Level-by-level traversal with one parallel region, levels as barriers.
template <class Step>
void run_levels(const BfsLevels& levels, VertexScalarField& d, Step&& step) {
  for (Index s : levels.levels.front()) d[s] = 0.0;
#ifdef _OPENMP
  const int threads = thread_count();
  if (threads > 1) {
#pragma omp parallel num_threads(threads)
    for (Index li = 1; li < levels.level_count(); ++li) {
      const std::vector<Index>& ring = levels.levels[li];
      const Index n = static_cast<Index>(ring.size());
#pragma omp for schedule(static)
      for (Index i = 0; i < n; ++i) step(ring[i]);
    }
    return;
  }
#endif
  for (Index li = 1; li < levels.level_count(); ++li)
    for (Index v : levels.levels[li]) step(v);
}

}  // namespace integrate_detail

inline VertexScalarField integrate_face_gradients(const TriMesh& mesh, const BfsLevels& levels,
                                                  const FaceField& gradients) {
  VertexScalarField d(mesh.vertex_count(), kInfinity);
  integrate_detail::run_levels(levels, d, [&](Index v) {
    const Index parent = levels.parent_of_vertex[v];
    const Index e = mesh.edge_between(parent, v);
    assert(e >= 0);
    const Vec3 step = mesh.positions[v] - mesh.positions[parent];
    double sum = 0.0;
    int count = 0;
    for (Index h : mesh.edge_halfedges[e]) {
      if (h < 0) continue;
      sum += gradients[h / 3].dot(step);
      ++count;
    }
    assert(count > 0);
    d[v] = d[parent] + sum / static_cast<double>(count);
  });
  return d;
}

/// Recover a vertex scalar from per-edge differences: d(v) = d(parent)
/// +- x_e, positive when the edge's orientation halfedge points
/// parent -> v.
inline VertexScalarField integrate_edge_differences(const TriMesh& mesh, const BfsLevels& levels,
                                                    const EdgeDiffField& differences) {
  VertexScalarField d(mesh.vertex_count(), kInfinity);
  integrate_detail::run_levels(levels, d, [&](Index v) {
    const Index parent = levels.parent_of_vertex[v];
    const Index e = mesh.edge_between(parent, v);
    assert(e >= 0);
    const double sigma = mesh.edge_vertices[e][0] == parent ? 1.0 : -1.0;
    d[v] = d[parent] + sigma * differences[e];
  });
  return d;
}

}  // namespace geoheat
