#pragma once

#include "geoheat/mesh.hpp"

#include <algorithm>
#include <span>
#include <stdexcept>
#include <vector>

namespace geoheat {

/// Breadth-first partition of the vertices into rings D_0, D_1, ... around
/// the source set, with one parent per non-source reachable vertex.
/// Immutable after construction; shared by diffusion and integration.
struct BfsLevels {
  std::vector<Index> level_of_vertex;            // -1 = unreachable
  std::vector<std::vector<Index>> levels;        // each sorted ascending
  std::vector<Index> parent_of_vertex;           // -1 for sources and unreachable
  Index unreachable_count = 0;

  Index level_count() const { return static_cast<Index>(levels.size()); }
};

/// Levels grow by one-ring neighborhoods; parent(v) is the smallest-index
/// neighbor in the previous level, which makes integration deterministic.
inline BfsLevels bfs_levels(const TriMesh& mesh, std::span<const Index> sources) {
  const Index nv = mesh.vertex_count();
  if (sources.empty()) throw std::invalid_argument("bfs_levels: empty source set");
  for (Index s : sources)
    if (s < 0 || s >= nv) throw std::invalid_argument("bfs_levels: source index out of range");

  BfsLevels out;
  out.level_of_vertex.assign(nv, kInvalidIndex);
  out.parent_of_vertex.assign(nv, kInvalidIndex);

  std::vector<Index> front(sources.begin(), sources.end());
  std::sort(front.begin(), front.end());
  front.erase(std::unique(front.begin(), front.end()), front.end());
  for (Index s : front) out.level_of_vertex[s] = 0;
  out.levels.push_back(front);

  while (true) {
    const std::vector<Index>& prev = out.levels.back();
    const Index depth = static_cast<Index>(out.levels.size());
    std::vector<Index> next;
    for (Index v : prev) {
      for (Index i = mesh.vv_offset[v]; i < mesh.vv_offset[v + 1]; ++i) {
        Index w = mesh.vv_index[i];
        if (out.level_of_vertex[w] < 0) {
          out.level_of_vertex[w] = depth;
          next.push_back(w);
        }
      }
    }
    if (next.empty()) break;
    std::sort(next.begin(), next.end());
    for (Index v : next) {
      for (Index i = mesh.vv_offset[v]; i < mesh.vv_offset[v + 1]; ++i) {
        Index w = mesh.vv_index[i];  // ascending, so the first hit is the smallest
        if (out.level_of_vertex[w] == depth - 1) {
          out.parent_of_vertex[v] = w;
          break;
        }
      }
    }
    out.levels.push_back(std::move(next));
  }

  for (Index v = 0; v < nv; ++v)
    if (out.level_of_vertex[v] < 0) ++out.unreachable_count;
  return out;
}

}  // namespace geoheat
