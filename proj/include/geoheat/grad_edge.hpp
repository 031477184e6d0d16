#pragma once

#include "geoheat/grad_face.hpp"  // AdmmConfig, OptimizerKind, solver_state_bytes
#include "geoheat/mesh.hpp"
#include "geoheat/parallel.hpp"
#include "geoheat/report.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace geoheat {

/// Per-face target triples h_e = H_f . e, one per face edge in corner order,
/// with e the vector of the edge's orientation halfedge.
inline std::vector<std::array<double, 3>> target_edge_differences(const TriMesh& mesh,
                                                                  const FaceField& targets) {
  std::vector<std::array<double, 3>> z(mesh.face_count());
  for (Index f = 0; f < mesh.face_count(); ++f)
    for (int k = 0; k < 3; ++k)
      z[f][k] = targets[f].dot(mesh.edge_vector(mesh.halfedge_edge[3 * f + k]));
  return z;
}

/// Closed-form solution of the per-face auxiliary subproblem: project
/// x_f - lambda_f/mu onto the plane q_f . w = 0 (q_f the +-1 sign triple).
inline std::array<double, 3> w_update_face(const std::array<double, 3>& x_f,
                                           const std::array<double, 3>& lambda_f,
                                           const std::array<double, 3>& signs, double mu) {
  std::array<double, 3> v;
  double dot = 0.0;
  for (int k = 0; k < 3; ++k) {
    v[k] = x_f[k] - lambda_f[k] / mu;
    dot += signs[k] * v[k];
  }
  const double shift = dot / 3.0;
  for (int k = 0; k < 3; ++k) v[k] -= shift * signs[k];
  return v;
}

/// Closed-form solution of the per-edge subproblem:
/// x_e = sum(h_e + lambda + mu*w) / (|H_e| * (1 + mu)).
inline double x_update_edge(std::span<const double> targets, std::span<const double> duals,
                            std::span<const double> auxiliaries, double mu) {
  double sum = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) sum += targets[i] + duals[i] + mu * auxiliaries[i];
  return sum / (static_cast<double>(targets.size()) * (1.0 + mu));
}

/// Edge-based ADMM state: one scalar x_e per edge plus three auxiliary
/// scalars, three duals and three sign flags per face. Targets are folded
/// into a per-edge cached sum so the persistent state matches the storage
/// accounting of solver_state_bytes.
struct EdgeAdmmSolver {
  const TriMesh* mesh = nullptr;
  AdmmConfig config;

  EdgeDiffField x;                       // |E|
  std::vector<double> target_sum;        // |E|, sum of h_e over incident faces
  std::vector<double> w;                 // 3|F|, slot 3f+k
  std::vector<double> lambda;            // 3|F|
  std::vector<std::int8_t> sign;         // 3|F|, +1 iff the face traverses the edge vmin->vmax
  double constraint_scale = 0.0;         // ||R||_F = sqrt(3|F|)

  std::vector<double> x_prev;
  std::vector<double> scratch_faces;
  std::vector<double> scratch_edges;

  EdgeAdmmSolver(const TriMesh& m, const FaceField& targets, const AdmmConfig& cfg)
      : mesh(&m), config(cfg) {
    config.validate();
    const Index nf = m.face_count();
    const Index ne = m.edge_count();
    w.resize(3 * static_cast<std::size_t>(nf));
    lambda.assign(3 * static_cast<std::size_t>(nf), 0.0);
    sign.resize(3 * static_cast<std::size_t>(nf));
    target_sum.assign(ne, 0.0);
    x.resize(ne);
    constraint_scale = std::sqrt(3.0 * static_cast<double>(nf));

    auto z = target_edge_differences(m, targets);
    for (Index f = 0; f < nf; ++f) {
      for (int k = 0; k < 3; ++k) {
        const Index h = 3 * f + k;
        w[h] = z[f][k];
        sign[h] = static_cast<std::int8_t>(m.corner_edge_sign(h));
        target_sum[m.halfedge_edge[h]] += z[f][k];
      }
    }
    for (Index e = 0; e < ne; ++e) x[e] = target_sum[e] / static_cast<double>(edge_degree(e));

    x_prev.resize(ne);
    scratch_faces.resize(nf);
    scratch_edges.resize(ne);
  }

  int edge_degree(Index e) const { return mesh->edge_is_interior(e) ? 2 : 1; }

  /// ||W - RX|| over the current state.
  double primal_residual() {
    const Index nf = mesh->face_count();
    parallel_for(0, nf, [&](Index f) {
      double sum = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double r = w[3 * f + k] - x[mesh->halfedge_edge[3 * f + k]];
        sum += r * r;
      }
      scratch_faces[f] = sum;
    });
    return std::sqrt(deterministic_sum(scratch_faces));
  }

  /// mu * ||R dX||; each edge appears once per incident face.
  double dual_residual(const std::vector<double>& delta_x) {
    const Index ne = mesh->edge_count();
    parallel_for(0, ne, [&](Index e) {
      scratch_edges[e] = static_cast<double>(edge_degree(e)) * delta_x[e] * delta_x[e];
    });
    return config.mu * std::sqrt(deterministic_sum(scratch_edges));
  }

  /// One W -> X -> lambda pass; returns (primal, dual) residual norms.
  std::pair<double, double> iterate() {
    const Index nf = mesh->face_count();
    const Index ne = mesh->edge_count();
    const double mu = config.mu;

    parallel_for(0, nf, [&](Index f) {
      double dot = 0.0;
      double v[3];
      for (int k = 0; k < 3; ++k) {
        const Index h = 3 * f + k;
        v[k] = x[mesh->halfedge_edge[h]] - lambda[h] / mu;
        dot += sign[h] * v[k];
      }
      const double shift = dot / 3.0;
      for (int k = 0; k < 3; ++k) w[3 * f + k] = v[k] - shift * sign[3 * f + k];
    });

    parallel_for(0, ne, [&](Index e) {
      x_prev[e] = x[e];
      double sum = target_sum[e];
      for (Index h : mesh->edge_halfedges[e])
        if (h >= 0) sum += lambda[h] + mu * w[h];
      x[e] = sum / (static_cast<double>(edge_degree(e)) * (1.0 + mu));
    });

    parallel_for(0, nf, [&](Index f) {
      double sum = 0.0;
      for (int k = 0; k < 3; ++k) {
        const Index h = 3 * f + k;
        const double r = w[h] - x[mesh->halfedge_edge[h]];
        lambda[h] += mu * r;
        sum += r * r;
      }
      scratch_faces[f] = sum;
    });
    const double primal = std::sqrt(deterministic_sum(scratch_faces));

    parallel_for(0, ne, [&](Index e) { x_prev[e] = x[e] - x_prev[e]; });
    const double dual = dual_residual(x_prev);
    return {primal, dual};
  }

  bool thresholds_met(double primal, double dual) const {
    return primal <= constraint_scale * config.eps1 && dual <= constraint_scale * config.eps2;
  }

  void run(SolverReport* report) {
    StageTimer timer;
    for (int it = 0; it < config.max_iterations; ++it) {
      auto [primal, dual] = iterate();
      if (report) {
        report->primal_history.push_back(primal);
        report->dual_history.push_back(dual);
        report->final_primal = primal;
        report->final_dual = dual;
        report->iterations = it + 1;
      }
      if (thresholds_met(primal, dual)) {
        if (report) report->converged = true;
        break;
      }
    }
    if (report) {
      report->wall_seconds = timer.seconds();
      report->state_bytes_allocated = allocated_bytes();
    }
  }

  std::uint64_t allocated_bytes() const {
    return (x.capacity() + target_sum.capacity() + w.capacity() + lambda.capacity()) * sizeof(double) +
           sign.capacity();
  }
};

struct EdgeAdmmResult {
  EdgeDiffField differences;
  SolverReport report;
};

/// Optimize per-edge distance differences subject to per-face integrability;
/// about half the solver state of the face-based method.
inline EdgeAdmmResult admm_edge_optimize(const TriMesh& mesh, const FaceField& targets,
                                         const AdmmConfig& config) {
  EdgeAdmmResult out;
  out.report.state_bytes_formula = solver_state_bytes(mesh, OptimizerKind::Edge);
  EdgeAdmmSolver solver(mesh, targets, config);
  solver.run(&out.report);
  out.report.state_bytes_allocated = solver.allocated_bytes();
  out.differences = std::move(solver.x);
  return out;
}

}  // namespace geoheat
