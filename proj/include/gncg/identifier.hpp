// Copyright (c) gncg contributors
#pragma once

#include <span>
#include <vector>
#include <Eigen/Core>

#include "gncg/forward.hpp"
#include "gncg/game.hpp"
#include "gncg/kkt_loss.hpp"

namespace gncg {

/// mu_k = mu1 / sqrt(k). Rejects k < 1 and mu1 <= 0.
double learning_rate(int k, double mu1);

/// Euclidean projection onto the parameter box (componentwise clamp).
Eigen::VectorXd project_theta(const Eigen::VectorXd& theta_tilde, const ThetaBox& box);

/// One proximal update. theta_tilde minimizes
///   0.5 |theta - theta_k|^2 + mu_k * L(theta, lambda, nu; y, u)
/// jointly over theta free, lambda >= 0, nu free; theta_next is its
/// projection onto the box. stationarity_residual is
/// |theta_tilde - theta_k + mu_k * s| with s the loss subgradient at
/// theta_tilde recomputed from a fresh inner solve.
struct UpdateResult {
  Eigen::VectorXd theta_tilde;
  Eigen::VectorXd theta_next;
  Eigen::VectorXd lambda;
  Eigen::VectorXd nu;
  double stationarity_residual = 0.0;
};

/// Solves the joint proximal problem by eliminating (theta, nu) for each
/// fixed lambda (an unconstrained quadratic solve, factored once) and running
/// the active-set nonnegative QP on the eliminated lambda problem. A
/// block-coordinate fallback handles rank-deficient instances.
UpdateResult update_step(const KktData& kkt, const Eigen::VectorXd& theta_current,
                         double mu_k, const ThetaBox& box);

struct TrajectoryPoint {
  int round = 0;
  Eigen::VectorXd theta;  // estimate entering the round
  double loss = 0.0;      // l(theta^k; y^k, u^k)
  double residual = 0.0;  // stationarity residual of the round's update
  double wall_time_s = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  Eigen::VectorXd theta_final;  // estimate after the last round

  /// Estimate produced by round k (data through round k), the final one for
  /// k = size().
  const Eigen::VectorXd& theta_after(int k) const;
};

/// Sequential state machine for the online identification loop; one owner
/// advances it round by round.
class IdentifierState {
 public:
  IdentifierState(const ParametricGame& game, Eigen::VectorXd theta_init, double mu1);

  /// Consumes one observation: assembles the KKT data at (y, u), performs
  /// the proximal update and the projection, appends to the trajectory.
  /// Wall time covers the update and projection only.
  void step(const Observation& obs);

  int round() const { return round_; }
  const Eigen::VectorXd& theta_current() const { return theta_; }
  const Trajectory& trajectory() const { return trajectory_; }
  Trajectory take_trajectory() &&;

 private:
  const ParametricGame* game_;
  Eigen::VectorXd theta_;
  double mu1_;
  int round_ = 1;
  Trajectory trajectory_;
};

/// Runs the full online loop over the stream. theta_init must lie in the box.
Trajectory run_online(const ParametricGame& game, std::span<const Observation> stream,
                      const Eigen::VectorXd& theta_init, double mu1);

}  // namespace gncg
