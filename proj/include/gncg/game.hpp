// Copyright (c) gncg contributors
#pragma once

#include <functional>
#include <string>
#include <vector>
#include <Eigen/Core>

namespace gncg {

/// Exogenous observable vector. For the Cournot market the layout is
/// (a, b, q): price intercept a > 0, price slope b < 0, minimum demand q > 0,
/// with a + b*q > 0 so the market price stays positive at the demand floor.
struct Signal {
  Eigen::VectorXd values;

  double operator[](Eigen::Index i) const { return values[i]; }
  Eigen::Index size() const { return values.size(); }
};

/// Validating constructor for Cournot signals.
Signal make_cournot_signal(double a, double b, double q);

/// Closed interval box for the parameter domain.
struct ThetaBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  Eigen::Index dim() const { return lo.size(); }
  bool contains(const Eigen::VectorXd& theta, double tol = 0.0) const;
  Eigen::VectorXd clamp(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd midpoint() const { return 0.5 * (lo + hi); }
  /// Largest Euclidean norm attained on the box (its worst corner).
  double corner_norm() const;
};

/// Basis decomposition of the pseudo-gradient at a fixed (x, u):
/// F(x, u, theta) = M^T theta + c for every theta.
struct BasisMatrices {
  Eigen::MatrixXd M;  // n_param x n
  Eigen::VectorXd c;  // n
};

/// Constraint data at a fixed (x, u). Columns of grad_h / grad_g are the
/// gradients of the individual scalar constraints.
struct ConstraintEval {
  Eigen::VectorXd h;       // m, inequality values (feasible iff h <= 0)
  Eigen::VectorXd g;       // p, equality values
  Eigen::MatrixXd grad_h;  // n x m
  Eigen::MatrixXd grad_g;  // n x p
};

/// A jointly convex game whose player costs are linear in the unknown
/// parameter vector. Immutable after construction; all evaluations are pure.
struct ParametricGame {
  std::string name;
  std::vector<int> player_dims;  // n_v
  std::vector<int> param_dims;   // n'_v
  int signal_dim = 0;

  std::function<BasisMatrices(const Eigen::VectorXd&, const Signal&)> basis;
  std::function<ConstraintEval(const Eigen::VectorXd&, const Signal&)> constraints;
  /// Euclidean projection onto the shared feasible set X(u). Required by the
  /// generic equilibrium solver; may be empty for assembly-only games.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Signal&)> project_feasible;
  /// Optional signal validation (sign conventions etc.).
  std::function<void(const Signal&)> validate_signal;

  ThetaBox theta_domain;

  int strategy_dim() const;  // n
  int param_dim() const;     // n'
  int num_inequalities(const Eigen::VectorXd& x, const Signal& u) const;

  /// F(x, u, theta) = M(x,u)^T theta + c(x,u); block v is the gradient of
  /// player v's cost with respect to its own strategy.
  Eigen::VectorXd pseudo_gradient(const Eigen::VectorXd& x, const Signal& u,
                                  const Eigen::VectorXd& theta) const;

  BasisMatrices basis_matrices(const Eigen::VectorXd& x, const Signal& u) const;
  ConstraintEval constraint_eval(const Eigen::VectorXd& x, const Signal& u) const;

  void check_strategy(const Eigen::VectorXd& x) const;
  void check_theta(const Eigen::VectorXd& theta) const;
  void check_signal(const Signal& u) const;
};

/// The N-company natural gas market. Company v picks an output x_v to
/// maximize profit (a + b*sum(x))*x_v - theta_v*x_v, equivalently minimizes
/// the negated profit; a minimum total demand q must be met: sum(x) >= q.
/// Parameter domain is the box [0, theta_max]^N.
ParametricGame cournot_game(int players, double theta_max = 100.0);

/// Registered constructors, selected by name in experiment configs.
ParametricGame make_game(const std::string& name, int players, double theta_max);

}  // namespace gncg
