#pragma once

// Independent numerical oracles used by the tests. Nothing here shares code
// with the solvers under include/: dense assemblies go through Eigen, and
// subproblem minimizers use finite differences, so agreement is meaningful.

#include "geoheat/mesh.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <vector>

namespace geoheat::testing {

/// Dense cotan Laplacian with the convention (Lc u)_j = sum_k theta_jk (u_k - u_j).
inline Eigen::MatrixXd dense_cotan_laplacian(const TriMesh& mesh) {
  const Index n = mesh.vertex_count();
  Eigen::MatrixXd laplacian = Eigen::MatrixXd::Zero(n, n);
  for (Index e = 0; e < mesh.edge_count(); ++e) {
    const Index a = mesh.edge_vertices[e][0];
    const Index b = mesh.edge_vertices[e][1];
    const double w = mesh.edge_weight[e];
    laplacian(a, b) += w;
    laplacian(b, a) += w;
    laplacian(a, a) -= w;
    laplacian(b, b) -= w;
  }
  return laplacian;
}

/// Dense heat matrix A - t*Lc.
inline Eigen::MatrixXd dense_heat_matrix(const TriMesh& mesh, double t) {
  Eigen::MatrixXd m = -t * dense_cotan_laplacian(mesh);
  for (Index v = 0; v < mesh.vertex_count(); ++v) m(v, v) += mesh.vertex_area[v];
  return m;
}

/// Exact solution of (A - t*Lc) u = u0 by dense LDLT.
inline VertexScalarField dense_heat_solve(const TriMesh& mesh, std::span<const Index> sources, double t) {
  const Index n = mesh.vertex_count();
  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(n);
  for (Index s : sources) u0[s] = 1.0;
  Eigen::VectorXd u = dense_heat_matrix(mesh, t).ldlt().solve(u0);
  return VertexScalarField(u.data(), u.data() + n);
}

/// minimize 1/2 x^T Q x - c^T x  subject to  A x = b, by the KKT system.
inline Eigen::VectorXd solve_equality_qp(const Eigen::MatrixXd& quadratic, const Eigen::VectorXd& linear,
                                         const Eigen::MatrixXd& constraints, const Eigen::VectorXd& rhs) {
  const Eigen::Index n = quadratic.rows();
  const Eigen::Index m = constraints.rows();
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m, n + m);
  kkt.topLeftCorner(n, n) = quadratic;
  kkt.topRightCorner(n, m) = constraints.transpose();
  kkt.bottomLeftCorner(m, n) = constraints;
  Eigen::VectorXd full_rhs(n + m);
  full_rhs.head(n) = linear;
  full_rhs.tail(m) = rhs;
  Eigen::VectorXd solution = kkt.fullPivLu().solve(full_rhs);
  return solution.head(n);
}

/// Minimize a black-box quadratic with optional linear equality constraints.
/// Gradient and Hessian come from central differences at the origin (exact
/// for quadratics up to roundoff), followed by one Newton/KKT step.
inline Eigen::VectorXd fd_minimize(const std::function<double(const Eigen::VectorXd&)>& objective,
                                   int dimension,
                                   const Eigen::MatrixXd& constraints = Eigen::MatrixXd(),
                                   const Eigen::VectorXd& rhs = Eigen::VectorXd()) {
  const double h = 1e-3;
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(dimension);
  Eigen::VectorXd gradient(dimension);
  Eigen::MatrixXd hessian(dimension, dimension);
  for (int i = 0; i < dimension; ++i) {
    Eigen::VectorXd ei = Eigen::VectorXd::Unit(dimension, i) * h;
    gradient[i] = (objective(x0 + ei) - objective(x0 - ei)) / (2.0 * h);
  }
  for (int i = 0; i < dimension; ++i) {
    for (int j = i; j < dimension; ++j) {
      Eigen::VectorXd ei = Eigen::VectorXd::Unit(dimension, i) * h;
      Eigen::VectorXd ej = Eigen::VectorXd::Unit(dimension, j) * h;
      double value = (objective(x0 + ei + ej) - objective(x0 + ei - ej) -
                      objective(x0 - ei + ej) + objective(x0 - ei - ej)) /
                     (4.0 * h * h);
      hessian(i, j) = value;
      hessian(j, i) = value;
    }
  }
  if (constraints.rows() == 0) return hessian.fullPivLu().solve(-gradient);
  return solve_equality_qp(hessian, -gradient, constraints, rhs);
}

/// Incircle of a triangle by the side-length weighted vertex combination;
/// cross-checked against R = area/semiperimeter by construction.
inline double incircle_radius(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double la = (b - c).norm();  // side opposite a
  const double lb = (c - a).norm();
  const double lc = (a - b).norm();
  const Vec3 center = (la * a + lb * b + lc * c) / (la + lb + lc);
  // distance from the center to side ab
  const Vec3 dir = (b - a).normalized();
  const Vec3 rel = center - a;
  return (rel - rel.dot(dir) * dir).norm();
}

}  // namespace geoheat::testing
