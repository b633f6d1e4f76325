// Copyright (c) gncg contributors
#pragma once

#include <stdexcept>
#include <Eigen/Core>

#include "gncg/game.hpp"
#include "gncg/rng.hpp"

namespace gncg {

/// Thrown by iterative solvers that exhaust their budget; carries the last
/// residual so callers can report how close the run got.
class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Variational equilibrium together with its shared constraint multipliers.
/// kkt_residual is the infinity norm over the stationarity vector, the
/// per-constraint complementarity products, inequality violations max(h, 0)
/// and equality violations |g|.
struct EquilibriumResult {
  Eigen::VectorXd x;       // n
  Eigen::VectorXd lambda;  // m, >= 0
  Eigen::VectorXd nu;      // p
  double kkt_residual = 0.0;
};

/// One round of the observation stream: the signal and a noise-corrupted
/// equilibrium.
struct Observation {
  int round = 0;  // 1-based
  Signal u;
  Eigen::VectorXd y;
};

struct VeSolveOptions {
  double tol = 1e-8;
  long max_iterations = 100000;
  double initial_step = 1.0;
};

/// Generic variational equilibrium solver: fixed point iteration of the
/// projected pseudo-gradient map x -> proj(x - tau F(x, u, theta)) with the
/// step halved whenever the natural residual fails to contract. Multipliers
/// are recovered from the stationarity system at the converged point.
/// Throws SolveError if the iteration cap is hit, std::invalid_argument if
/// the game carries no projection.
EquilibriumResult solve_ve(const ParametricGame& game, const Signal& u,
                           const Eigen::VectorXd& theta,
                           const VeSolveOptions& opts = {});

/// Closed-form Cournot equilibrium: the unconstrained first-order solution
/// when total output clears the demand floor, otherwise the active-constraint
/// solution with the shared multiplier. Rejects b >= 0.
EquilibriumResult cournot_closed_form(const Signal& u, const Eigen::VectorXd& theta);

/// y = x* + noise_scale * eps with eps standard normal drawn from rng.
/// noise_scale = 0 reproduces x* bit-exactly.
Observation observe(const EquilibriumResult& eq, const Signal& u, int round,
                    Rng& rng, double noise_scale);

}  // namespace gncg
