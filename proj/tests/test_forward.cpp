// Copyright (c) gncg contributors
#include <doctest.h>

#include <cmath>

#include "gncg/forward.hpp"
#include "oracles.hpp"

using namespace gncg;

namespace {

const Eigen::Vector3d kThetaTrue(10.0, 7.5, 6.0);

}  // namespace

TEST_CASE("closed form: inactive demand floor") {
  const Signal u = make_cournot_signal(100.0, -1.0, 5.0);
  const EquilibriumResult eq = cournot_closed_form(u, kThetaTrue);
  CHECK(eq.x[0] == doctest::Approx(20.875).epsilon(1e-14));
  CHECK(eq.x[1] == doctest::Approx(23.375).epsilon(1e-14));
  CHECK(eq.x[2] == doctest::Approx(24.875).epsilon(1e-14));
  CHECK(eq.lambda[0] == 0.0);
  CHECK(eq.x.sum() == doctest::Approx(69.125));
  CHECK(eq.kkt_residual < 1e-12);
  CHECK(testing::cournot_best_response_gap(u, eq.x, kThetaTrue) < 1e-4);
}

TEST_CASE("closed form: active demand floor") {
  const Signal u = make_cournot_signal(100.0, -1.0, 80.0);
  const EquilibriumResult eq = cournot_closed_form(u, kThetaTrue);
  CHECK(eq.lambda[0] == doctest::Approx(14.5).epsilon(1e-14));
  CHECK(eq.x[0] == doctest::Approx(24.5).epsilon(1e-14));
  CHECK(eq.x[1] == doctest::Approx(27.0).epsilon(1e-14));
  CHECK(eq.x[2] == doctest::Approx(28.5).epsilon(1e-14));
  CHECK(eq.x.sum() == doctest::Approx(80.0));
  CHECK(eq.kkt_residual < 1e-10);
  CHECK(testing::cournot_best_response_gap(u, eq.x, kThetaTrue) < 1e-4);
}

TEST_CASE("closed form: boundary demand has both branches coincide") {
  const Signal u = make_cournot_signal(100.0, -1.0, 69.125);
  const EquilibriumResult eq = cournot_closed_form(u, kThetaTrue);
  CHECK(eq.lambda[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(eq.x.sum() == doctest::Approx(69.125).epsilon(1e-12));
}

TEST_CASE("closed form rejects degenerate slopes") {
  Signal u;
  u.values = Eigen::Vector3d(100.0, 0.0, 5.0);
  CHECK_THROWS_AS(cournot_closed_form(u, kThetaTrue), std::invalid_argument);
  u.values = Eigen::Vector3d(100.0, 1.0, 5.0);
  CHECK_THROWS_AS(cournot_closed_form(u, kThetaTrue), std::invalid_argument);
}

TEST_CASE("generic solver matches the closed form on both regimes") {
  const ParametricGame game = cournot_game(3, 100.0);
  for (double q : {5.0, 80.0}) {
    const Signal u = make_cournot_signal(100.0, -1.0, q);
    const EquilibriumResult ref = cournot_closed_form(u, kThetaTrue);
    const EquilibriumResult eq = solve_ve(game, u, kThetaTrue);
    CHECK((eq.x - ref.x).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((eq.lambda - ref.lambda).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(eq.lambda[0] >= 0.0);
    CHECK(std::abs(eq.lambda[0] * (q - eq.x.sum())) < 1e-6);
  }
}

TEST_CASE("solver agreement over random desk-scale signals") {
  const ParametricGame game = cournot_game(3, 100.0);
  Rng rng(91);
  int active = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const double a = rng.uniform(50.0, 400.0);
    const double b = -rng.uniform(0.5, 4.0);
    const double q = rng.uniform(5.0, std::min(0.95 * a / -b, 200.0));
    const Signal u = make_cournot_signal(a, b, q);
    const Eigen::VectorXd theta = testing::random_in_box(rng, game.theta_domain);
    const EquilibriumResult ref = cournot_closed_form(u, theta);
    const EquilibriumResult eq = solve_ve(game, u, theta);
    active += ref.lambda[0] > 0.0;
    const double scale = 1.0 + ref.x.cwiseAbs().maxCoeff();
    CHECK((eq.x - ref.x).cwiseAbs().maxCoeff() / scale < 1e-6);
    CHECK((eq.lambda - ref.lambda).cwiseAbs().maxCoeff() / (1.0 + ref.lambda[0]) < 1e-6);
  }
  CHECK(active > 5);  // both regimes exercised
}

TEST_CASE("raising a company's cost lowers its output while the floor is slack") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = rng.uniform(100.0, 800.0);
    const double b = -rng.uniform(0.5, 5.0);
    const Signal u = make_cournot_signal(a, b, 5.0);
    Eigen::Vector3d theta(rng.uniform(0.0, 20.0), rng.uniform(0.0, 20.0),
                          rng.uniform(0.0, 20.0));
    const EquilibriumResult lo = cournot_closed_form(u, theta);
    if (lo.lambda[0] > 0.0) continue;
    Eigen::Vector3d bumped = theta;
    bumped[1] += 5.0;
    const EquilibriumResult hi = cournot_closed_form(u, bumped);
    if (hi.lambda[0] > 0.0) continue;
    CHECK(hi.x[1] < lo.x[1]);
  }
}

TEST_CASE("solver requires a registered projection") {
  ParametricGame game = cournot_game(3, 100.0);
  game.project_feasible = nullptr;
  const Signal u = make_cournot_signal(100.0, -1.0, 5.0);
  CHECK_THROWS_AS(solve_ve(game, u, kThetaTrue), std::invalid_argument);
}

TEST_CASE("observe: zero noise reproduces the equilibrium bit-exactly") {
  const Signal u = make_cournot_signal(100.0, -1.0, 5.0);
  const EquilibriumResult eq = cournot_closed_form(u, kThetaTrue);
  Rng rng(1);
  const Observation obs = observe(eq, u, 7, rng, 0.0);
  CHECK(obs.round == 7);
  CHECK(obs.y == eq.x);
}

TEST_CASE("observe: seeded draws are reproducible") {
  const Signal u = make_cournot_signal(100.0, -1.0, 5.0);
  const EquilibriumResult eq = cournot_closed_form(u, kThetaTrue);
  Rng rng1(42), rng2(42);
  const Observation a = observe(eq, u, 1, rng1, 1.0);
  const Observation b = observe(eq, u, 1, rng2, 1.0);
  CHECK(a.y == b.y);
  const Observation c = observe(eq, u, 2, rng1, 1.0);
  CHECK((a.y - c.y).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("observe: sample moments of the noise") {
  const Signal u = make_cournot_signal(100.0, -1.0, 5.0);
  const EquilibriumResult eq = cournot_closed_form(u, kThetaTrue);
  Rng rng(2024);
  const int draws = 10000;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d second = Eigen::Vector3d::Zero();
  for (int i = 0; i < draws; ++i) {
    const Observation obs = observe(eq, u, i + 1, rng, 1.0);
    const Eigen::Vector3d eps = obs.y - eq.x;
    mean += eps;
    second += eps.cwiseProduct(eps);
  }
  mean /= draws;
  second /= draws;
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(mean[i]) < 4.0 / std::sqrt(double(draws)));
    const double var = second[i] - mean[i] * mean[i];
    CHECK(var == doctest::Approx(1.0).epsilon(0.1));
  }
}
