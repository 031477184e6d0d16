#pragma once

#include "geoheat/bfs.hpp"
#include "geoheat/mesh.hpp"
#include "geoheat/parallel.hpp"
#include "geoheat/report.hpp"

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace geoheat {

struct DiffusionConfig {
  double m = 1.0;   // smoothing factor, t = m * h^2
  int sweeps = 1000;
  std::optional<double> residual_tolerance;  // stop early when E1 drops below

  void validate() const {
    if (!(m > 0.0)) throw std::invalid_argument("DiffusionConfig: m must be positive");
    if (sweeps < 0) throw std::invalid_argument("DiffusionConfig: sweeps must be >= 0");
  }
};

/// t = m * h^2 with h the average edge length.
inline double diffusion_time(const TriMesh& mesh, double m) {
  if (!(m > 0.0)) throw std::invalid_argument("diffusion_time: m must be positive");
  double h = average_edge_length(mesh);
  return m * h * h;
}

/// l2 residual of (A - t*Lc) u = u0 without forming the matrix.
inline double diffusion_residual(const TriMesh& mesh, const VertexScalarField& u, double t,
                                 std::span<const Index> sources) {
  const Index nv = mesh.vertex_count();
  std::vector<double> u0(nv, 0.0);
  for (Index s : sources) u0[s] = 1.0;
  std::vector<double> sq(nv);
  parallel_for(0, nv, [&](Index j) {
    double lap = 0.0;
    for (Index i = mesh.vv_offset[j]; i < mesh.vv_offset[j + 1]; ++i)
      lap += mesh.vv_weight[i] * (u[mesh.vv_index[i]] - u[j]);
    double r = mesh.vertex_area[j] * u[j] - t * lap - u0[j];
    sq[j] = r * r;
  });
  return std::sqrt(deterministic_sum(sq));
}

/// Breadth-first Gauss-Seidel heat diffusion. Each outer sweep visits the
/// levels D_0, D_1, ... in order; vertices within a level are updated
/// simultaneously from the committed values of the previous level pass
/// (Jacobi within a level, Gauss-Seidel across levels). This makes the
/// result bitwise independent of the thread count. `initial` warm-starts
/// the iteration (default: u = u0).
inline VertexScalarField gs_diffuse(const TriMesh& mesh, const BfsLevels& levels, double t,
                                    const DiffusionConfig& config, SolverReport* report = nullptr,
                                    const VertexScalarField* initial = nullptr) {
  config.validate();
  if (!(t > 0.0)) throw std::invalid_argument("gs_diffuse: t must be positive");
  StageTimer timer;

  const Index nv = mesh.vertex_count();
  VertexScalarField u(nv, 0.0);
  std::vector<double> u0(nv, 0.0);
  for (Index s : levels.levels.front()) {
    u0[s] = 1.0;
    u[s] = 1.0;
  }
  if (initial) u = *initial;

  std::vector<double> level_prev(nv, 0.0);
  const auto update_vertex = [&](Index li, Index j) {
    double num = 0.0;
    for (Index a = mesh.vv_offset[j]; a < mesh.vv_offset[j + 1]; ++a) {
      const Index k = mesh.vv_index[a];
      const double value = levels.level_of_vertex[k] == li ? level_prev[k] : u[k];
      num += mesh.vv_weight[a] * value;
    }
    const double den = mesh.vertex_area[j] + t * mesh.vertex_weight_sum[j];
    u[j] = (u0[j] + t * num) / den;
  };

  int sweeps_done = 0;
  for (int sweep = 0; sweep < config.sweeps; ++sweep) {
#ifdef _OPENMP
    const int threads = thread_count();
    if (threads > 1) {
      // one parallel region per sweep; levels are barriers
#pragma omp parallel num_threads(threads)
      for (Index li = 0; li < levels.level_count(); ++li) {
        const std::vector<Index>& ring = levels.levels[li];
        const Index n = static_cast<Index>(ring.size());
#pragma omp for schedule(static)
        for (Index i = 0; i < n; ++i) level_prev[ring[i]] = u[ring[i]];
#pragma omp for schedule(static)
        for (Index i = 0; i < n; ++i) update_vertex(li, ring[i]);
      }
    } else
#endif
    {
      for (Index li = 0; li < levels.level_count(); ++li) {
        const std::vector<Index>& ring = levels.levels[li];
        for (Index j : ring) level_prev[j] = u[j];
        for (Index j : ring) update_vertex(li, j);
      }
    }
    ++sweeps_done;
    if (config.residual_tolerance) {
      double e1 = diffusion_residual(mesh, u, t, levels.levels.front());
      if (report) report->residual_history.push_back(e1);
      if (e1 <= *config.residual_tolerance) {
        if (report) report->converged = true;
        break;
      }
    }
  }
  if (report) {
    report->iterations = sweeps_done;
    report->wall_seconds = timer.seconds();
  }
  return u;
}

struct NormalizedGradients {
  FaceField field;
  Index zero_count = 0;  // faces whose heat gradient underflowed to zero
};

/// H = -grad u / |grad u| per face; zero-gradient faces get the zero vector.
inline NormalizedGradients normalized_target_gradients(const TriMesh& mesh, const VertexScalarField& u) {
  NormalizedGradients out;
  out.field = face_gradient(mesh, u);
  for (Index f = 0; f < mesh.face_count(); ++f) {
    double norm = out.field[f].norm();
    if (norm >= 1e-20) {
      out.field[f] = -out.field[f] / norm;
    } else {
      out.field[f].setZero();
      ++out.zero_count;
    }
  }
  return out;
}

/// Area-weighted field distance sqrt(sum_i A_i |h_i - h*_i|^2) with the
/// areas normalized by the total surface area.
inline double gradient_field_error(const TriMesh& mesh, const FaceField& h, const FaceField& h_ref) {
  double total_area = 0.0;
  for (Index f = 0; f < mesh.face_count(); ++f) total_area += mesh.face_area[f];
  double sum = 0.0;
  for (Index f = 0; f < mesh.face_count(); ++f)
    sum += mesh.face_area[f] / total_area * (h[f] - h_ref[f]).squaredNorm();
  return std::sqrt(sum);
}

}  // namespace geoheat
