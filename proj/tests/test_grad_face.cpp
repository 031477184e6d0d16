#include "geoheat/grad_face.hpp"

#include "geoheat/diffusion.hpp"
#include "geoheat/integrate.hpp"
#include "geoheat/reference.hpp"

#include "oracles.hpp"
#include "test_meshes.hpp"

#include <catch2/catch.hpp>

#include <random>

using namespace geoheat;
using namespace geoheat::testing;

namespace {

Vec3 random_vec(std::mt19937& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> c(-scale, scale);
  return Vec3(c(rng), c(rng), c(rng));
}

}  // namespace

TEST_CASE("y_update_edge closed form") {
  SECTION("already compatible input is a fixed point") {
    Vec3 q(0.3, -0.2, 0.1);
    auto [y1, y2] = y_update_edge(q, q, 0.5, 1.5, Vec3(0, 0, 1));
    CHECK((y1 - q).norm() == 0.0);
    CHECK((y2 - q).norm() == 0.0);
  }
  SECTION("equal areas split the mismatch evenly") {
    auto [y1, y2] = y_update_edge(Vec3(0, 0, 0), Vec3(1, 0, 0), 2.0, 2.0, Vec3(1, 0, 0));
    CHECK((y1 - Vec3(0.5, 0, 0)).norm() < 1e-15);
    CHECK((y2 - Vec3(0.5, 0, 0)).norm() < 1e-15);
  }
  SECTION("mismatch orthogonal to the edge leaves inputs unchanged") {
    Vec3 q1(0.2, 0.5, 0.0), q2(1.2, 0.5, 0.0);
    auto [y1, y2] = y_update_edge(q1, q2, 1.0, 3.0, Vec3(0, 1, 0));
    CHECK((y1 - q1).norm() == 0.0);
    CHECK((y2 - q2).norm() == 0.0);
  }
  SECTION("compatibility holds after every update") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> area(0.1, 2.0);
    for (int i = 0; i < 50; ++i) {
      Vec3 e = random_vec(rng).normalized();
      auto [y1, y2] = y_update_edge(random_vec(rng), random_vec(rng), area(rng), area(rng), e);
      REQUIRE(std::abs(e.dot(y1 - y2)) <= 1e-12);
    }
  }
  SECTION("matches the constrained least-squares oracle") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> area(0.1, 2.0);
    for (int i = 0; i < 25; ++i) {
      Vec3 q1 = random_vec(rng), q2 = random_vec(rng);
      double a1 = area(rng), a2 = area(rng);
      Vec3 e = random_vec(rng).normalized();
      auto [y1, y2] = y_update_edge(q1, q2, a1, a2, e);
      auto objective = [&](const Eigen::VectorXd& x) {
        Vec3 v1(x[0], x[1], x[2]), v2(x[3], x[4], x[5]);
        return a1 * (v1 - q1).squaredNorm() + a2 * (v2 - q2).squaredNorm();
      };
      Eigen::MatrixXd constraint(1, 6);
      constraint << e[0], e[1], e[2], -e[0], -e[1], -e[2];
      Eigen::VectorXd best = fd_minimize(objective, 6, constraint, Eigen::VectorXd::Zero(1));
      for (int k = 0; k < 3; ++k) {
        REQUIRE(y1[k] == Approx(best[k]).margin(1e-7));
        REQUIRE(y2[k] == Approx(best[3 + k]).margin(1e-7));
      }
    }
  }
}

TEST_CASE("g_update_face closed form") {
  SECTION("consistent auxiliaries are a fixed point") {
    Vec3 h(0.2, 0.7, 0.0);
    std::vector<Vec3> y = {h, h, h};
    std::vector<Vec3> lambda(3, Vec3::Zero());
    CHECK((g_update_face(h, y, lambda, 0.7, 100.0) - h).norm() < 1e-15);
  }
  SECTION("no interior edges returns the target") {
    Vec3 h(1, 2, 0);
    CHECK((g_update_face(h, {}, {}, 1.0, 100.0) - h).norm() == 0.0);
  }
  SECTION("hand-worked arithmetic case") {
    Vec3 h(1, 0, 0);
    std::vector<Vec3> y = {Vec3::Zero()};
    std::vector<Vec3> lambda = {Vec3::Zero()};
    Vec3 g = g_update_face(h, y, lambda, 1.0, 100.0);
    CHECK(g[0] == Approx(2.0 / 102.0));
    CHECK(g[1] == 0.0);
  }
  SECTION("matches the numerical minimizer of the subproblem") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> area(0.1, 2.0);
    std::uniform_int_distribution<int> slots(0, 3);
    for (int i = 0; i < 25; ++i) {
      Vec3 h = random_vec(rng);
      double a = area(rng);
      double alpha = std::sqrt(a);
      double mu = 100.0;
      int n = slots(rng);
      std::vector<Vec3> y, lambda;
      for (int k = 0; k < n; ++k) {
        y.push_back(random_vec(rng));
        lambda.push_back(random_vec(rng));
      }
      Vec3 g = g_update_face(h, y, lambda, alpha, mu);
      auto objective = [&](const Eigen::VectorXd& x) {
        Vec3 v(x[0], x[1], x[2]);
        double value = a * (v - h).squaredNorm();
        for (int k = 0; k < n; ++k)
          value += 0.5 * mu * (alpha * (y[k] - v) + lambda[k] / mu).squaredNorm();
        return value;
      };
      Eigen::VectorXd best = fd_minimize(objective, 3);
      for (int k = 0; k < 3; ++k) REQUIRE(g[k] == Approx(best[k]).margin(1e-7));
    }
  }
}

TEST_CASE("face residual norms match an explicit matrix evaluation") {
  TriMesh mesh = unit_square_mesh();
  FaceField h = {Vec3(1, 0, 0), Vec3(0, 1, 0)};
  AdmmConfig config;
  FaceAdmmSolver solver(mesh, h, config);

  std::mt19937 rng(29);
  solver.g[0] = random_vec(rng);
  solver.g[1] = random_vec(rng);
  solver.y1[0] = random_vec(rng);
  solver.y2[0] = random_vec(rng);

  // explicit M (sqrt of slot areas) and S (slot -> face selection)
  Index e = mesh.interior_edges[0];
  Index fa = mesh.edge_face(e, 0), fb = mesh.edge_face(e, 1);
  Eigen::MatrixXd y_mat(2, 3), g_mat(2, 3);
  y_mat.row(0) = Eigen::Vector3d(solver.y1[0]).transpose();
  y_mat.row(1) = Eigen::Vector3d(solver.y2[0]).transpose();
  Eigen::MatrixXd selection = Eigen::MatrixXd::Zero(2, 2);
  selection(0, fa) = 1.0;
  selection(1, fb) = 1.0;
  Eigen::MatrixXd faces(2, 3);
  faces.row(0) = Eigen::Vector3d(solver.g[0]).transpose();
  faces.row(1) = Eigen::Vector3d(solver.g[1]).transpose();
  Eigen::MatrixXd m_diag = Eigen::MatrixXd::Zero(2, 2);
  m_diag(0, 0) = std::sqrt(mesh.face_area[fa]);
  m_diag(1, 1) = std::sqrt(mesh.face_area[fb]);
  double expected_primal = (m_diag * (y_mat - selection * faces)).norm();
  CHECK(solver.primal_residual() == Approx(expected_primal).epsilon(1e-12));

  SECTION("Y = SG zeroes the primal residual") {
    solver.y1[0] = solver.g[fa];
    solver.y2[0] = solver.g[fb];
    CHECK(solver.primal_residual() <= 1e-15);
  }
  SECTION("zero delta zeroes the dual residual") {
    FaceField delta(2, Vec3::Zero());
    CHECK(solver.dual_residual(delta) == 0.0);
  }
  SECTION("dual residual matches the slot-weighted formula") {
    FaceField delta = {random_vec(rng), random_vec(rng)};
    double expected = config.mu * std::sqrt(mesh.face_area[fa] * delta[fa].squaredNorm() +
                                            mesh.face_area[fb] * delta[fb].squaredNorm());
    CHECK(solver.dual_residual(delta) == Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("admm_face_optimize keeps an integrable input") {
  TriMesh mesh = grid_mesh(6, 6);
  VertexScalarField phi;
  for (const Vec3& p : mesh.positions) phi.push_back(0.4 * p.x() - 1.1 * p.y());
  FaceField h = face_gradient(mesh, phi);
  AdmmConfig config;
  FaceAdmmResult result = admm_face_optimize(mesh, h, config);
  CHECK(result.report.converged);
  for (Index f = 0; f < mesh.face_count(); ++f)
    REQUIRE((result.gradients[f] - h[f]).norm() < 1e-9);
}

TEST_CASE("admm_face_optimize matches the KKT solve on the 2-face mesh") {
  TriMesh mesh = unit_square_mesh();
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  for (int trial = 0; trial < 4; ++trial) {
    FaceField h = {Vec3(c(rng), c(rng), 0), Vec3(c(rng), c(rng), 0)};
    AdmmConfig tight;
    tight.max_iterations = 200000;
    tight.eps1 = tight.eps2 = 1e-11;
    FaceAdmmResult result = admm_face_optimize(mesh, h, tight);
    REQUIRE(result.report.converged);

    Index e = mesh.interior_edges[0];
    Vec3 dir = mesh.edge_vector(e).normalized();
    Index fa = mesh.edge_face(e, 0), fb = mesh.edge_face(e, 1);
    Eigen::MatrixXd quadratic = Eigen::MatrixXd::Zero(6, 6);
    Eigen::VectorXd linear(6);
    for (int i = 0; i < 3; ++i) {
      quadratic(i, i) = 2.0 * mesh.face_area[fa];
      quadratic(3 + i, 3 + i) = 2.0 * mesh.face_area[fb];
      linear(i) = 2.0 * mesh.face_area[fa] * h[fa][i];
      linear(3 + i) = 2.0 * mesh.face_area[fb] * h[fb][i];
    }
    Eigen::MatrixXd constraint(1, 6);
    constraint << dir[0], dir[1], dir[2], -dir[0], -dir[1], -dir[2];
    Eigen::VectorXd expected = solve_equality_qp(quadratic, linear, constraint, Eigen::VectorXd::Zero(1));
    for (int i = 0; i < 3; ++i) {
      REQUIRE(result.gradients[fa][i] == Approx(expected(i)).margin(1e-6));
      REQUIRE(result.gradients[fb][i] == Approx(expected(3 + i)).margin(1e-6));
    }
  }
}

TEST_CASE("admm_face_optimize invariants on a curved mesh") {
  TriMesh mesh = icosphere_mesh(2);
  std::vector<Index> sources{0};
  BfsLevels levels = bfs_levels(mesh, sources);
  double t = diffusion_time(mesh, 1.0);
  DiffusionConfig dc;
  dc.sweeps = 1000;
  VertexScalarField u = gs_diffuse(mesh, levels, t, dc);
  FaceField h = normalized_target_gradients(mesh, u).field;

  AdmmConfig config;
  FaceAdmmSolver solver(mesh, h, config);
  // objective plus penalty; at initialization both vanish (G = H, Y = SG), so
  // the trend is measured from the first iteration onward
  auto merit = [&](double primal) {
    double sum = 0.0;
    for (Index f = 0; f < mesh.face_count(); ++f)
      sum += mesh.face_area[f] * (solver.g[f] - h[f]).squaredNorm();
    return sum + 0.5 * config.mu * primal * primal;
  };
  double first = 0.0, last = 0.0;
  for (int it = 0; it < 10; ++it) {
    auto [primal, dual] = solver.iterate();
    last = merit(primal);
    if (it == 0) first = last;
    // exact projection: every auxiliary pair is edge-compatible
    for (Index i = 0; i < mesh.interior_edge_count(); ++i)
      REQUIRE(std::abs(solver.edge_dir[i].dot(solver.y1[i] - solver.y2[i])) <= 1e-12);
  }
  CHECK(last <= first);
  // gradients stay tangent to their faces
  for (Index f = 0; f < mesh.face_count(); ++f)
    REQUIRE(std::abs(solver.g[f].dot(mesh.face_normal[f])) <= 1e-9 * solver.g[f].norm() + 1e-18);
}

TEST_CASE("doubling mu shifts the converged optimum only slightly") {
  TriMesh mesh = hex_disk_mesh(8);
  std::vector<Index> sources{0};
  BfsLevels levels = bfs_levels(mesh, sources);
  double t = diffusion_time(mesh, 1.0);
  DiffusionConfig dc;
  dc.sweeps = 1500;
  FaceField h = normalized_target_gradients(mesh, gs_diffuse(mesh, levels, t, dc)).field;

  AdmmConfig a, b;
  a.max_iterations = b.max_iterations = 100000;
  a.eps1 = a.eps2 = b.eps1 = b.eps2 = 1e-9;
  a.mu = 100.0;
  b.mu = 200.0;
  FaceField ga = admm_face_optimize(mesh, h, a).gradients;
  FaceField gb = admm_face_optimize(mesh, h, b).gradients;
  double diff = 0.0, scale = 0.0;
  for (Index f = 0; f < mesh.face_count(); ++f) {
    diff += (ga[f] - gb[f]).squaredNorm();
    scale += ga[f].squaredNorm();
  }
  CHECK(std::sqrt(diff / scale) < 1e-3);
}

TEST_CASE("zero ADMM iterations return the target field") {
  TriMesh mesh = unit_square_mesh();
  FaceField h = {Vec3(1, 0, 0), Vec3(0, 1, 0)};
  AdmmConfig none;
  none.max_iterations = 0;
  FaceAdmmResult result = admm_face_optimize(mesh, h, none);
  CHECK(result.report.iterations == 0);
  CHECK(result.gradients == h);
}

TEST_CASE("solver state accounting") {
  SECTION("unit square") {
    TriMesh mesh = unit_square_mesh();
    CHECK(solver_state_bytes(mesh, OptimizerKind::Face) == 216);
    CHECK(solver_state_bytes(mesh, OptimizerKind::Edge) == 182);
  }
  SECTION("empty mesh") {
    TriMesh empty = build_mesh({}, {});
    CHECK(solver_state_bytes(empty, OptimizerKind::Face) == 0);
    CHECK(solver_state_bytes(empty, OptimizerKind::Edge) == 0);
  }
  SECTION("closed mesh ratio is about one third") {
    TriMesh sphere = icosphere_mesh(2);
    auto face = solver_state_bytes(sphere, OptimizerKind::Face);
    auto edge = solver_state_bytes(sphere, OptimizerKind::Edge);
    CHECK(face == 228ull * sphere.face_count());
    CHECK(edge == 75ull * sphere.face_count());
    CHECK(static_cast<double>(edge) / face == Approx(75.0 / 228.0));
  }
}
