// Copyright (c) gncg contributors
#include <doctest.h>

#include "gncg/nnls.hpp"
#include "gncg/rng.hpp"

using namespace gncg;

namespace {

Eigen::MatrixXd random_spd(Rng& rng, int n) {
  Eigen::MatrixXd B(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) B(i, j) = rng.normal();
  }
  return B * B.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

TEST_CASE("interior solution matches the linear solve") {
  Eigen::MatrixXd A(2, 2);
  A << 2.0, 0.5, 0.5, 1.0;
  const Eigen::Vector2d b(-3.0, -2.0);  // unconstrained minimizer is positive
  const NnlsResult res = solve_nonneg_qp(A, b);
  const Eigen::Vector2d expect = -A.ldlt().solve(b);
  CHECK((res.z - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(res.kkt_residual < 1e-10);
}

TEST_CASE("fully bound solution") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::Vector3d b(1.0, 2.0, 0.5);  // gradient positive at zero
  const NnlsResult res = solve_nonneg_qp(A, b);
  CHECK(res.z.isZero(0.0));
}

TEST_CASE("empty problem") {
  const NnlsResult res = solve_nonneg_qp(Eigen::MatrixXd(0, 0), Eigen::VectorXd(0));
  CHECK(res.z.size() == 0);
}

TEST_CASE("shape mismatch rejected") {
  CHECK_THROWS_AS(solve_nonneg_qp(Eigen::MatrixXd::Identity(2, 2), Eigen::Vector3d::Zero()),
                  std::invalid_argument);
}

TEST_CASE("random problems satisfy the first-order conditions") {
  Rng rng(123);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(6));
    const Eigen::MatrixXd A = random_spd(rng, n);
    const Eigen::VectorXd b = 3.0 * rng.normal_vector(n);
    const NnlsResult res = solve_nonneg_qp(A, b);
    REQUIRE((res.z.array() >= 0.0).all());
    const Eigen::VectorXd grad = A * res.z + b;
    const double tol = 1e-9 * std::max(1.0, b.cwiseAbs().maxCoeff());
    for (int i = 0; i < n; ++i) {
      if (res.z[i] > 0.0) {
        CHECK(std::abs(grad[i]) < tol);
      } else {
        CHECK(grad[i] > -tol);
      }
    }
  }
}

TEST_CASE("random problems beat every projected perturbation") {
  Rng rng(77);
  const auto objective = [](const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                            const Eigen::VectorXd& z) {
    return 0.5 * z.dot(A * z) + b.dot(z);
  };
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(4));
    const Eigen::MatrixXd A = random_spd(rng, n);
    const Eigen::VectorXd b = 3.0 * rng.normal_vector(n);
    const NnlsResult res = solve_nonneg_qp(A, b);
    const double best = objective(A, b, res.z);
    for (int probe = 0; probe < 50; ++probe) {
      const Eigen::VectorXd cand =
          (res.z + 0.3 * rng.normal_vector(n)).cwiseMax(0.0);
      CHECK(objective(A, b, cand) >= best - 1e-9 * (1.0 + std::abs(best)));
    }
  }
}
