// Copyright (c) gncg contributors
#pragma once

#include <span>
#include <vector>
#include <Eigen/Core>

#include "gncg/game.hpp"
#include "gncg/identifier.hpp"
#include "gncg/kkt_loss.hpp"

namespace gncg {

struct BatchSolveOptions {
  double tol = 1e-8;          // projected-gradient stationarity on the box
  long max_iterations = 20000;
  int extra_starts = 4;       // random starts beyond the supplied ones
  bool parallel_eval = false; // evaluate the sum with the OpenMP kernel
  std::uint64_t start_seed = 9001;
};

struct BatchResult {
  Eigen::VectorXd theta;
  double objective = 0.0;
  double stationarity = 0.0;
  long iterations = 0;
};

/// Minimizer of sum_k l(theta; y^k, u^k) over the box: projected gradient
/// with backtracking line search, run from each supplied start plus random
/// ones, best result kept (ties go to the earliest start, so a warm start
/// that already attains the optimum is returned unchanged).
/// Throws SolveError when no start reaches the stationarity tolerance.
BatchResult batch_solve(std::span<const KktData> kkts, const ThetaBox& box,
                        const std::vector<Eigen::VectorXd>& starts,
                        const BatchSolveOptions& opts = {});

/// Batch optima for every prefix 1..K, each solved from scratch at the given
/// initial estimate and individually timed, so the per-round cost reflects
/// the growing data volume.
struct PrefixSolution {
  Eigen::VectorXd theta;
  double objective = 0.0;
  double wall_time_s = 0.0;
};
std::vector<PrefixSolution> prefix_batch_solutions(std::span<const KktData> kkts,
                                                   const ThetaBox& box,
                                                   const Eigen::VectorXd& init,
                                                   const BatchSolveOptions& opts = {});

/// Per-round regret accounting. Row k compares the online estimates against
/// the batch optimum for the first k observations:
///   regret_k  = sum_{j<=k} l(theta^j) - sum_{j<=k} l(theta_star^k),
///   deviation_k = |theta^k - theta_star^k|,
///   bound_k   = (2 B1^2 / mu1 + mu1 C^2) sqrt(k).
struct RegretReport {
  std::vector<double> cum_online;
  std::vector<double> cum_batch;
  std::vector<double> regret;
  std::vector<double> avg_regret;
  std::vector<double> deviation;
  std::vector<double> bound;
  std::vector<double> batch_wall_time_s;
  std::vector<double> online_wall_time_s;
  double mu1 = 0.0;
  double b1_hat = 0.0;
  double c_hat = 0.0;

  int rounds() const { return static_cast<int>(regret.size()); }
};

/// R_K against a fixed comparator: both sums evaluated with the same loss
/// implementation. Throws on length mismatch.
double regret_against(const Trajectory& traj, std::span<const KktData> kkts,
                      const Eigen::VectorXd& theta_star);

/// Deviation sequence |theta^k - theta_star^k| for k = 1..K.
std::vector<double> deviation_curve(const Trajectory& traj,
                                    std::span<const PrefixSolution> prefix);

/// Assembles the full report from an online trajectory and the prefix chain.
RegretReport build_regret_report(const Trajectory& traj, std::span<const KktData> kkts,
                                 std::span<const PrefixSolution> prefix, double mu1,
                                 double b1_hat, double c_hat);

/// Indices k (1-based) where regret_k exceeds bound_k. Empty means the bound
/// held everywhere.
std::vector<int> bound_check(const RegretReport& report);

}  // namespace gncg
