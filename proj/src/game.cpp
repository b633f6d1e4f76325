// Copyright (c) gncg contributors
#include "gncg/game.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gncg {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

Signal make_cournot_signal(double a, double b, double q) {
  require(std::isfinite(a) && std::isfinite(b) && std::isfinite(q),
          "cournot signal: entries must be finite");
  require(a > 0.0, "cournot signal: price intercept a must be positive");
  require(b < 0.0, "cournot signal: price slope b must be negative");
  require(q > 0.0, "cournot signal: minimum demand q must be positive");
  require(a + b * q > 0.0, "cournot signal: price at the demand floor must be positive");
  Signal u;
  u.values = Eigen::Vector3d(a, b, q);
  return u;
}

bool ThetaBox::contains(const Eigen::VectorXd& theta, double tol) const {
  if (theta.size() != lo.size()) return false;
  return (theta.array() >= lo.array() - tol).all() &&
         (theta.array() <= hi.array() + tol).all();
}

Eigen::VectorXd ThetaBox::clamp(const Eigen::VectorXd& theta) const {
  return theta.cwiseMax(lo).cwiseMin(hi);
}

double ThetaBox::corner_norm() const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    s += std::max(lo[i] * lo[i], hi[i] * hi[i]);
  }
  return std::sqrt(s);
}

int ParametricGame::strategy_dim() const {
  return std::accumulate(player_dims.begin(), player_dims.end(), 0);
}

int ParametricGame::param_dim() const {
  return std::accumulate(param_dims.begin(), param_dims.end(), 0);
}

void ParametricGame::check_strategy(const Eigen::VectorXd& x) const {
  require(x.size() == strategy_dim(),
          name + ": strategy vector has dimension " + std::to_string(x.size()) +
              ", expected " + std::to_string(strategy_dim()));
}

void ParametricGame::check_theta(const Eigen::VectorXd& theta) const {
  require(theta.size() == param_dim(),
          name + ": parameter vector has dimension " + std::to_string(theta.size()) +
              ", expected " + std::to_string(param_dim()));
}

void ParametricGame::check_signal(const Signal& u) const {
  require(u.size() == signal_dim,
          name + ": signal has dimension " + std::to_string(u.size()) +
              ", expected " + std::to_string(signal_dim));
  if (validate_signal) validate_signal(u);
}

Eigen::VectorXd ParametricGame::pseudo_gradient(const Eigen::VectorXd& x, const Signal& u,
                                                const Eigen::VectorXd& theta) const {
  check_theta(theta);
  const BasisMatrices bm = basis_matrices(x, u);
  return bm.M.transpose() * theta + bm.c;
}

BasisMatrices ParametricGame::basis_matrices(const Eigen::VectorXd& x, const Signal& u) const {
  check_strategy(x);
  check_signal(u);
  BasisMatrices bm = basis(x, u);
  require(bm.M.rows() == param_dim() && bm.M.cols() == strategy_dim(),
          name + ": basis matrix has wrong shape");
  require(bm.c.size() == strategy_dim(), name + ": basis offset has wrong length");
  return bm;
}

ConstraintEval ParametricGame::constraint_eval(const Eigen::VectorXd& x, const Signal& u) const {
  check_strategy(x);
  check_signal(u);
  ConstraintEval ce = constraints(x, u);
  const int n = strategy_dim();
  require(ce.grad_h.rows() == n && ce.grad_h.cols() == ce.h.size(),
          name + ": inequality gradient matrix has wrong shape");
  require(ce.grad_g.rows() == n && ce.grad_g.cols() == ce.g.size(),
          name + ": equality gradient matrix has wrong shape");
  return ce;
}

int ParametricGame::num_inequalities(const Eigen::VectorXd& x, const Signal& u) const {
  return static_cast<int>(constraint_eval(x, u).h.size());
}

ParametricGame cournot_game(int players, double theta_max) {
  require(players >= 1, "cournot: need at least one company");
  require(theta_max > 0.0 && std::isfinite(theta_max),
          "cournot: theta_max must be positive and finite");

  const int n = players;
  ParametricGame game;
  game.name = "cournot";
  game.player_dims.assign(players, 1);
  game.param_dims.assign(players, 1);
  game.signal_dim = 3;
  game.theta_domain.lo = Eigen::VectorXd::Zero(n);
  game.theta_domain.hi = Eigen::VectorXd::Constant(n, theta_max);

  // Company v minimizes the negated profit theta_v x_v - (a + b sum(x)) x_v.
  // The parameter basis is f~_v = x_v, so the basis matrix is the identity
  // and the offset holds the price terms.
  game.basis = [n](const Eigen::VectorXd& x, const Signal& u) {
    const double a = u[0], b = u[1];
    const double total = x.sum();
    BasisMatrices bm;
    bm.M = Eigen::MatrixXd::Identity(n, n);
    bm.c = Eigen::VectorXd::Constant(n, -a - b * total) - b * x;
    return bm;
  };

  // Minimum demand: h(x, u) = q - sum(x) <= 0.
  game.constraints = [n](const Eigen::VectorXd& x, const Signal& u) {
    const double q = u[2];
    ConstraintEval ce;
    ce.h = Eigen::VectorXd::Constant(1, q - x.sum());
    ce.g = Eigen::VectorXd(0);
    ce.grad_h = Eigen::MatrixXd::Constant(n, 1, -1.0);
    ce.grad_g = Eigen::MatrixXd(n, 0);
    return ce;
  };

  // X(u) is the halfspace sum(x) >= q; its projection shifts every
  // coordinate equally.
  game.project_feasible = [n](const Eigen::VectorXd& x, const Signal& u) {
    const double q = u[2];
    const double gap = q - x.sum();
    if (gap <= 0.0) return x;
    return Eigen::VectorXd(x.array() + gap / n);
  };

  game.validate_signal = [](const Signal& u) {
    if (!all_finite(u.values)) throw std::invalid_argument("cournot signal: non-finite entry");
    make_cournot_signal(u[0], u[1], u[2]);
  };

  return game;
}

ParametricGame make_game(const std::string& name, int players, double theta_max) {
  if (name == "cournot") return cournot_game(players, theta_max);
  throw std::invalid_argument("unknown game: " + name);
}

}  // namespace gncg
