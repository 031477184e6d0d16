#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace geoheat {

using Vec3 = Eigen::Vector3d;
using Index = std::int32_t;

/// One 3-vector per face, tangent to that face.
using FaceField = std::vector<Vec3>;

/// One scalar per edge: the change of the underlying function along the
/// edge's orientation halfedge (tail = smaller vertex index).
using EdgeDiffField = std::vector<double>;

/// One scalar per vertex (heat value u or distance d).
using VertexScalarField = std::vector<double>;

inline constexpr Index kInvalidIndex = -1;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Mesh construction / file parsing failure.
class MeshError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failure inside a solver (breakdown, non-finite values).
class SolverError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace geoheat
