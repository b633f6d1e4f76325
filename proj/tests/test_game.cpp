// Copyright (c) gncg contributors
#include <doctest.h>

#include <Eigen/SVD>

#include "gncg/game.hpp"
#include "gncg/rng.hpp"
#include "oracles.hpp"

using namespace gncg;

namespace {

Signal u_desk() { return make_cournot_signal(100.0, -1.0, 5.0); }

}  // namespace

TEST_CASE("cournot constructor sizes") {
  const ParametricGame g3 = cournot_game(3, 100.0);
  CHECK(g3.strategy_dim() == 3);
  CHECK(g3.param_dim() == 3);
  CHECK(g3.theta_domain.lo.isZero());
  CHECK(g3.theta_domain.hi.isApproxToConstant(100.0));

  const ParametricGame g1 = cournot_game(1, 50.0);
  CHECK(g1.strategy_dim() == 1);
  CHECK(g1.param_dim() == 1);

  CHECK_THROWS_AS(cournot_game(0, 100.0), std::invalid_argument);
  CHECK_THROWS_AS(cournot_game(3, -1.0), std::invalid_argument);

  const Eigen::Vector3d theta_true(10.0, 7.5, 6.0);
  CHECK(cournot_game(3, 100.0).theta_domain.contains(theta_true));
}

TEST_CASE("cournot signal validation") {
  CHECK_NOTHROW(make_cournot_signal(100.0, -1.0, 5.0));
  CHECK_THROWS_AS(make_cournot_signal(-1.0, -1.0, 5.0), std::invalid_argument);
  CHECK_THROWS_AS(make_cournot_signal(100.0, 1.0, 5.0), std::invalid_argument);
  CHECK_THROWS_AS(make_cournot_signal(100.0, -1.0, -5.0), std::invalid_argument);
  // price at the demand floor must stay positive
  CHECK_THROWS_AS(make_cournot_signal(10.0, -3.0, 5.0), std::invalid_argument);
}

TEST_CASE("pseudo gradient at the known equilibrium") {
  const ParametricGame game = cournot_game(3, 100.0);
  const Eigen::Vector3d theta(10.0, 7.5, 6.0);
  const Eigen::Vector3d x(20.875, 23.375, 24.875);
  const Eigen::VectorXd f = game.pseudo_gradient(x, u_desk(), theta);
  CHECK(f.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pseudo gradient with zero parameters is the offset") {
  const ParametricGame game = cournot_game(3, 100.0);
  const Signal u = u_desk();
  Rng rng(11);
  const Eigen::VectorXd x = 10.0 * rng.normal_vector(3);
  const Eigen::VectorXd f0 = game.pseudo_gradient(x, u, Eigen::Vector3d::Zero());
  const BasisMatrices bm = game.basis_matrices(x, u);
  CHECK((f0 - bm.c).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pseudo gradient at the origin is theta - a per company") {
  const ParametricGame game = cournot_game(3, 100.0);
  const Eigen::Vector3d theta(4.0, 9.0, 2.5);
  const Eigen::VectorXd f = game.pseudo_gradient(Eigen::Vector3d::Zero(), u_desk(), theta);
  for (int v = 0; v < 3; ++v) CHECK(f[v] == doctest::Approx(theta[v] - 100.0).epsilon(1e-15));
}

TEST_CASE("basis matrices: identity basis and hand-derived offset") {
  const ParametricGame game = cournot_game(3, 100.0);
  const Signal u = u_desk();
  Rng rng(5);
  const Eigen::VectorXd x = 20.0 * rng.normal_vector(3);
  const BasisMatrices bm = game.basis_matrices(x, u);
  CHECK(bm.M.isIdentity(0.0));
  const double a = 100.0, b = -1.0;
  for (int v = 0; v < 3; ++v) {
    CHECK(bm.c[v] == doctest::Approx(-a - b * x.sum() - b * x[v]).epsilon(1e-14));
  }

  // single company: c = -a - 2 b x
  const ParametricGame g1 = cournot_game(1, 100.0);
  const Eigen::VectorXd x1 = Eigen::VectorXd::Constant(1, 7.0);
  const BasisMatrices bm1 = g1.basis_matrices(x1, u);
  CHECK(bm1.M(0, 0) == 1.0);
  CHECK(bm1.c[0] == doctest::Approx(-100.0 + 2.0 * 7.0).epsilon(1e-14));
}

TEST_CASE("pseudo gradient is affine in theta") {
  const ParametricGame game = cournot_game(3, 100.0);
  const Signal u = u_desk();
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd x = 30.0 * rng.normal_vector(3);
    const Eigen::VectorXd t1 = 50.0 * rng.normal_vector(3);
    const Eigen::VectorXd t2 = 50.0 * rng.normal_vector(3);
    const double alpha = rng.uniform();
    const Eigen::VectorXd lhs = game.pseudo_gradient(x, u, alpha * t1 + (1 - alpha) * t2);
    const Eigen::VectorXd rhs = alpha * game.pseudo_gradient(x, u, t1) +
                                (1 - alpha) * game.pseudo_gradient(x, u, t2);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);

    // basis consistency: F(theta) - F(0) = M^T theta
    const BasisMatrices bm = game.basis_matrices(x, u);
    const Eigen::VectorXd diff = game.pseudo_gradient(x, u, t1) -
                                 game.pseudo_gradient(x, u, Eigen::VectorXd::Zero(3));
    CHECK((diff - bm.M.transpose() * t1).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("constraint evaluation at the desk instance") {
  const ParametricGame game = cournot_game(3, 100.0);
  const Signal u = u_desk();
  const Eigen::Vector3d x(20.875, 23.375, 24.875);
  const ConstraintEval ce = game.constraint_eval(x, u);
  REQUIRE(ce.h.size() == 1);
  REQUIRE(ce.g.size() == 0);
  CHECK(ce.h[0] == doctest::Approx(-64.125).epsilon(1e-14));
  CHECK(ce.grad_h.col(0).isApproxToConstant(-1.0, 0.0));
  CHECK(ce.grad_g.cols() == 0);

  // active boundary: any x with total output q has h = 0
  const Eigen::Vector3d xb(1.0, 1.5, 2.5);
  CHECK(game.constraint_eval(xb, u).h[0] == doctest::Approx(0.0));

  // evaluation is defined at infeasible points too
  CHECK(game.constraint_eval(Eigen::Vector3d::Zero(), u).h[0] == doctest::Approx(5.0));
}

TEST_CASE("analytic gradients match central finite differences") {
  const ParametricGame game = cournot_game(3, 100.0);
  const Signal u = u_desk();
  Rng rng(23);
  const Eigen::VectorXd theta = testing::random_in_box(rng, game.theta_domain);
  const double h_step = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(3, 10.0) + 5.0 * rng.normal_vector(3);
    // Pseudo-gradient block v is the derivative of company v's cost; compare
    // against a finite difference of the cost written out by hand.
    const auto cost = [&](int v, const Eigen::VectorXd& y) {
      return theta[v] * y[v] - (100.0 - y.sum()) * y[v];
    };
    const Eigen::VectorXd f = game.pseudo_gradient(x, u, theta);
    for (int v = 0; v < 3; ++v) {
      Eigen::VectorXd xp = x, xm = x;
      xp[v] += h_step;
      xm[v] -= h_step;
      const double fd = (cost(v, xp) - cost(v, xm)) / (2.0 * h_step);
      CHECK(f[v] == doctest::Approx(fd).epsilon(1e-5));
    }
    const ConstraintEval ce = game.constraint_eval(x, u);
    for (int i = 0; i < 3; ++i) {
      Eigen::VectorXd xp = x, xm = x;
      xp[i] += h_step;
      xm[i] -= h_step;
      const double fd = (game.constraint_eval(xp, u).h[0] - game.constraint_eval(xm, u).h[0]) /
                        (2.0 * h_step);
      CHECK(ce.grad_h(i, 0) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("constraint gradient stack has full column rank") {
  const ParametricGame game = cournot_game(3, 100.0);
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Signal u = make_cournot_signal(rng.uniform(600.0, 1800.0), -rng.uniform(1.0, 20.0),
                                         rng.uniform(5.0, 30.0));
    const Eigen::VectorXd x = 30.0 * rng.normal_vector(3);
    const ConstraintEval ce = game.constraint_eval(x, u);
    Eigen::MatrixXd J(3, ce.h.size() + ce.g.size());
    J << ce.grad_h, ce.grad_g;
    CHECK(J.cols() == 1);
    CHECK(J.jacobiSvd().singularValues()[0] > 1e-10);
  }
}

TEST_CASE("dimension mismatches are rejected") {
  const ParametricGame game = cournot_game(3, 100.0);
  const Signal u = u_desk();
  CHECK_THROWS_AS(game.pseudo_gradient(Eigen::Vector2d::Zero(), u, Eigen::Vector3d::Zero()),
                  std::invalid_argument);
  CHECK_THROWS_AS(game.pseudo_gradient(Eigen::Vector3d::Zero(), u, Eigen::Vector2d::Zero()),
                  std::invalid_argument);
  Signal bad;
  bad.values = Eigen::Vector2d(1.0, 2.0);
  CHECK_THROWS_AS(game.constraint_eval(Eigen::Vector3d::Zero(), bad), std::invalid_argument);
  CHECK_THROWS_AS(make_game("unknown", 3, 100.0), std::invalid_argument);
  CHECK(make_game("cournot", 2, 10.0).strategy_dim() == 2);
}

TEST_CASE("theta box helpers") {
  ThetaBox box;
  box.lo = Eigen::Vector3d::Zero();
  box.hi = Eigen::Vector3d::Constant(100.0);
  CHECK(box.midpoint().isApproxToConstant(50.0));
  CHECK(box.corner_norm() == doctest::Approx(std::sqrt(3.0) * 100.0));
  CHECK(box.contains(Eigen::Vector3d(0.0, 50.0, 100.0)));
  CHECK_FALSE(box.contains(Eigen::Vector3d(-1e-9, 50.0, 100.0)));
  const Eigen::Vector3d clamped = box.clamp(Eigen::Vector3d(-1.0, 50.0, 200.0));
  CHECK(clamped == Eigen::Vector3d(0.0, 50.0, 100.0));
}
