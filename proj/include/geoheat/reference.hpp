#pragma once

#include "geoheat/diffusion.hpp"
#include "geoheat/mesh.hpp"
#include "geoheat/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <span>
#include <string>
#include <vector>

namespace geoheat {

struct CgResult {
  std::vector<double> x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
  bool breakdown = false;  // zero curvature direction or non-finite values
  std::vector<double> residual_history;
};

namespace cg_detail {
inline double dot(const std::vector<double>& a, const std::vector<double>& b,
                  std::vector<double>& scratch) {
  parallel_for(0, static_cast<Index>(a.size()), [&](Index i) { scratch[i] = a[i] * b[i]; });
  return deterministic_sum(scratch);
}
}  // namespace cg_detail

/// Jacobi-preconditioned conjugate gradient on a matrix-free SPD operator.
/// Op must provide size(), apply(in, out) and diagonal(out).
template <class Op>
CgResult cg_solve(const Op& op, std::span<const double> rhs, double tol, int max_iters) {
  const Index n = op.size();
  CgResult out;
  out.x.assign(n, 0.0);
  std::vector<double> r(rhs.begin(), rhs.end());
  std::vector<double> diag(n), z(n), p(n), q(n), scratch(n);
  op.diagonal(diag.data());
  parallel_for(0, n, [&](Index i) { z[i] = r[i] / diag[i]; });
  p = z;
  double rz = cg_detail::dot(r, z, scratch);
  const double rhs_norm = std::sqrt(cg_detail::dot(r, r, scratch));
  if (rhs_norm == 0.0) {
    out.converged = true;
    return out;
  }
  double rnorm = rhs_norm;
  for (int it = 0; it < max_iters; ++it) {
    op.apply(p.data(), q.data());
    const double curvature = cg_detail::dot(p, q, scratch);
    if (!(curvature > 0.0) || !std::isfinite(curvature)) {
      out.breakdown = true;
      break;
    }
    const double alpha = rz / curvature;
    parallel_for(0, n, [&](Index i) {
      out.x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    });
    rnorm = std::sqrt(cg_detail::dot(r, r, scratch));
    out.iterations = it + 1;
    out.residual_history.push_back(rnorm);
    if (!std::isfinite(rnorm)) {
      out.breakdown = true;
      break;
    }
    if (rnorm <= tol * rhs_norm) {
      out.converged = true;
      break;
    }
    parallel_for(0, n, [&](Index i) { z[i] = r[i] / diag[i]; });
    const double rz_next = cg_detail::dot(r, z, scratch);
    const double beta = rz_next / rz;
    rz = rz_next;
    parallel_for(0, n, [&](Index i) { p[i] = z[i] + beta * p[i]; });
  }
  out.relative_residual = rnorm / rhs_norm;
  return out;
}

/// (A - t*Lc) x, SPD for t > 0.
struct HeatOperator {
  const TriMesh* mesh;
  double t;

  Index size() const { return mesh->vertex_count(); }
  void apply(const double* x, double* y) const {
    parallel_for(0, size(), [&](Index j) {
      double lap = 0.0;
      for (Index i = mesh->vv_offset[j]; i < mesh->vv_offset[j + 1]; ++i)
        lap += mesh->vv_weight[i] * (x[mesh->vv_index[i]] - x[j]);
      y[j] = mesh->vertex_area[j] * x[j] - t * lap;
    });
  }
  void diagonal(double* d) const {
    parallel_for(0, size(), [&](Index j) { d[j] = mesh->vertex_area[j] + t * mesh->vertex_weight_sum[j]; });
  }
};

/// -Lc restricted to a vertex subset, with the complement held at zero.
/// Positive definite whenever every connected component of the subset
/// touches an eliminated vertex.
struct ReducedPoissonOperator {
  const TriMesh* mesh;
  std::vector<Index> subset;       // reduced index -> vertex
  std::vector<Index> reduced_of;   // vertex -> reduced index or -1

  ReducedPoissonOperator(const TriMesh& m, const std::vector<std::uint8_t>& keep) : mesh(&m) {
    reduced_of.assign(m.vertex_count(), kInvalidIndex);
    for (Index v = 0; v < m.vertex_count(); ++v) {
      if (keep[v]) {
        reduced_of[v] = static_cast<Index>(subset.size());
        subset.push_back(v);
      }
    }
  }

  Index size() const { return static_cast<Index>(subset.size()); }
  void apply(const double* x, double* y) const {
    parallel_for(0, size(), [&](Index row) {
      const Index j = subset[row];
      double sum = 0.0;
      for (Index i = mesh->vv_offset[j]; i < mesh->vv_offset[j + 1]; ++i) {
        const Index k = mesh->vv_index[i];
        const Index rk = reduced_of[k];
        sum += mesh->vv_weight[i] * (x[row] - (rk >= 0 ? x[rk] : 0.0));
      }
      y[row] = sum;
    });
  }
  void diagonal(double* d) const {
    parallel_for(0, size(), [&](Index row) { d[row] = mesh->vertex_weight_sum[subset[row]]; });
  }
};

/// Integrated divergence of a face field at the vertices:
/// b_i = 1/2 sum over incident corners of cot(theta1)(e1.X) + cot(theta2)(e2.X).
inline VertexScalarField integrated_divergence(const TriMesh& mesh, const FaceField& field) {
  VertexScalarField b(mesh.vertex_count(), 0.0);
  parallel_for(0, mesh.vertex_count(), [&](Index v) {
    double sum = 0.0;
    for (Index ci = mesh.vc_offset[v]; ci < mesh.vc_offset[v + 1]; ++ci) {
      const Index h = mesh.vc_corner[ci];
      const Index f = h / 3;
      const int k = h % 3;
      const auto& tri = mesh.faces[f];
      const Vec3& p = mesh.positions[tri[k]];
      const Vec3 e1 = mesh.positions[tri[(k + 1) % 3]] - p;
      const Vec3 e2 = mesh.positions[tri[(k + 2) % 3]] - p;
      // halfedge k opposes the angle at v_{k+2}; halfedge k+2 the one at v_{k+1}
      sum += mesh.halfedge_cot[3 * f + k] * e1.dot(field[f]) +
             mesh.halfedge_cot[3 * f + (k + 2) % 3] * e2.dot(field[f]);
    }
    b[v] = 0.5 * sum;
  });
  return b;
}

struct PoissonReport {
  int heat_iterations = 0;
  int poisson_iterations = 0;
  double heat_residual = 0.0;
  double poisson_residual = 0.0;
  double heat_seconds = 0.0;
  double poisson_seconds = 0.0;
};

/// The original heat-method pipeline on a CG backend: solve the heat system,
/// normalize gradients, then solve the reduced Poisson system with the
/// source rows and columns eliminated (source values fixed to zero).
inline VertexScalarField poisson_heat_method(const TriMesh& mesh, std::span<const Index> sources,
                                             double t, double cg_tol, PoissonReport* report = nullptr) {
  const Index nv = mesh.vertex_count();
  BfsLevels levels = bfs_levels(mesh, sources);

  StageTimer timer;
  std::vector<double> u0(nv, 0.0);
  for (Index s : levels.levels.front()) u0[s] = 1.0;
  HeatOperator heat{&mesh, t};
  CgResult heat_solution = cg_solve(heat, u0, cg_tol, 20 * nv + 100);
  if (heat_solution.breakdown)
    throw SolverError("poisson_heat_method: CG breakdown in the heat solve");
  if (report) {
    report->heat_iterations = heat_solution.iterations;
    report->heat_residual = heat_solution.relative_residual;
    report->heat_seconds = timer.seconds();
  }

  timer.restart();
  FaceField h = normalized_target_gradients(mesh, heat_solution.x).field;
  VertexScalarField b = integrated_divergence(mesh, h);

  std::vector<std::uint8_t> keep(nv, 0);
  for (Index v = 0; v < nv; ++v)
    if (levels.level_of_vertex[v] > 0) keep[v] = 1;  // reachable non-source
  ReducedPoissonOperator poisson(mesh, keep);
  std::vector<double> rhs(poisson.size());
  for (Index row = 0; row < poisson.size(); ++row) rhs[row] = -b[poisson.subset[row]];
  CgResult d_solution = cg_solve(poisson, rhs, cg_tol, 40 * nv + 100);
  if (d_solution.breakdown)
    throw SolverError("poisson_heat_method: CG breakdown in the Poisson solve");
  if (report) {
    report->poisson_iterations = d_solution.iterations;
    report->poisson_residual = d_solution.relative_residual;
    report->poisson_seconds = timer.seconds();
  }

  VertexScalarField d(nv, kInfinity);
  for (Index s : levels.levels.front()) d[s] = 0.0;
  for (Index row = 0; row < poisson.size(); ++row) d[poisson.subset[row]] = d_solution.x[row];
  return d;
}

/// Shortest path over the edge graph with Euclidean lengths; an upper bound
/// on the true geodesic distance.
inline VertexScalarField dijkstra_edge_distance(const TriMesh& mesh, std::span<const Index> sources) {
  const Index nv = mesh.vertex_count();
  VertexScalarField d(nv, kInfinity);
  using Entry = std::pair<double, Index>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> queue;
  for (Index s : sources) {
    if (d[s] > 0.0) {
      d[s] = 0.0;
      queue.push({0.0, s});
    }
  }
  while (!queue.empty()) {
    auto [dist, v] = queue.top();
    queue.pop();
    if (dist > d[v]) continue;
    for (Index i = mesh.vv_offset[v]; i < mesh.vv_offset[v + 1]; ++i) {
      const Index w = mesh.vv_index[i];
      const double candidate = dist + (mesh.positions[w] - mesh.positions[v]).norm();
      if (candidate < d[w]) {
        d[w] = candidate;
        queue.push({candidate, w});
      }
    }
  }
  return d;
}

/// Mean of |d - d*|/|d*| over non-source vertices, normalized by |V|.
/// Vertices with d* = 0 outside the source set (or non-finite pairs) are
/// excluded and counted.
inline double mean_relative_error(const VertexScalarField& d, const VertexScalarField& d_ref,
                                  std::span<const Index> sources, Index* excluded = nullptr) {
  std::vector<std::uint8_t> is_source(d.size(), 0);
  for (Index s : sources) is_source[s] = 1;
  double sum = 0.0;
  Index skipped = 0;
  for (std::size_t v = 0; v < d.size(); ++v) {
    if (is_source[v]) continue;
    if (d_ref[v] == 0.0 || !std::isfinite(d_ref[v]) || !std::isfinite(d[v])) {
      ++skipped;
      continue;
    }
    sum += std::abs(d[v] - d_ref[v]) / std::abs(d_ref[v]);
  }
  if (excluded) *excluded = skipped;
  return sum / static_cast<double>(d.size());
}

/// E2 = |d - d*|_2 / n.
inline double recovery_error(const VertexScalarField& d, const VertexScalarField& d_ref) {
  double sum = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double diff = d[i] - d_ref[i];
    sum += diff * diff;
  }
  return std::sqrt(sum) / static_cast<double>(d.size());
}

enum class AnalyticSurface { PlaneEuclidean, SphereGreatCircle };

/// Exact distances on meshes sampled from a plane or a common sphere;
/// multiple sources take the pointwise minimum. Throws when vertices sit off
/// the surface by more than 1e-6 relative.
inline VertexScalarField analytic_oracle(AnalyticSurface kind, const TriMesh& mesh,
                                         std::span<const Index> sources) {
  const Index nv = mesh.vertex_count();
  VertexScalarField d(nv, kInfinity);
  if (kind == AnalyticSurface::PlaneEuclidean) {
    Vec3 lo = Vec3::Constant(kInfinity), hi = Vec3::Constant(-kInfinity);
    for (const Vec3& p : mesh.positions) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const double scale = (hi - lo).norm();
    const double z0 = mesh.positions.empty() ? 0.0 : mesh.positions[0].z();
    for (const Vec3& p : mesh.positions)
      if (std::abs(p.z() - z0) > 1e-6 * scale)
        throw std::invalid_argument("analytic_oracle: mesh is not planar (z = const)");
    for (Index v = 0; v < nv; ++v)
      for (Index s : sources)
        d[v] = std::min(d[v], (mesh.positions[v] - mesh.positions[s]).norm());
  } else {
    Vec3 center = Vec3::Zero();
    for (const Vec3& p : mesh.positions) center += p;
    center /= static_cast<double>(nv);
    double radius = 0.0;
    for (const Vec3& p : mesh.positions) radius += (p - center).norm();
    radius /= static_cast<double>(nv);
    for (const Vec3& p : mesh.positions)
      if (std::abs((p - center).norm() - radius) > 1e-6 * radius)
        throw std::invalid_argument("analytic_oracle: mesh vertices are not on a common sphere");
    for (Index v = 0; v < nv; ++v) {
      const Vec3 pv = (mesh.positions[v] - center).normalized();
      for (Index s : sources) {
        const Vec3 ps = (mesh.positions[s] - center).normalized();
        const double cosine = std::clamp(pv.dot(ps), -1.0, 1.0);
        d[v] = std::min(d[v], radius * std::acos(cosine));
      }
    }
  }
  return d;
}

}  // namespace geoheat
