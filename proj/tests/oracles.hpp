// Copyright (c) gncg contributors
//
// Independent verification paths used by the tests. Everything here works
// from raw problem data and direct objective evaluations only, so agreement
// with the library is a genuine cross-check rather than a tautology.
#pragma once

#include <functional>
#include <Eigen/Core>

#include "gncg/forward.hpp"
#include "gncg/game.hpp"
#include "gncg/kkt_loss.hpp"
#include "gncg/rng.hpp"

namespace gncg::testing {

/// Largest profit improvement any company can reach by a unilateral feasible
/// deviation, searched on a refining 1-D grid around its equilibrium output.
/// Player costs are strictly convex in the own output, so the refinement is
/// exhaustive. Uses its own cost formula, not the library gradients.
double cournot_best_response_gap(const Signal& u, const Eigen::VectorXd& x_star,
                                 const Eigen::VectorXd& theta);

/// Direct evaluation of the inner objective at a fixed lambda, with the
/// equality multipliers resolved by an SVD least-squares solve.
double inner_objective_direct(const KktData& kkt, const Eigen::VectorXd& theta,
                              const Eigen::VectorXd& lambda);

/// Brute-force inner minimum: multilevel grid over the lambda box followed by
/// exact coordinate descent (the objective is quadratic per coordinate, so a
/// three-point parabolic step is an exact line minimization). Supports m <= 2.
struct InnerOracleResult {
  double value = 0.0;
  Eigen::VectorXd lambda;
};
InnerOracleResult inner_loss_oracle(const KktData& kkt, const Eigen::VectorXd& theta);

/// Brute-force minimizer of the joint proximal objective
///   0.5 |theta - theta_k|^2 + mu L(theta, lambda, nu)
/// by projected gradient from several random starts; returns the pre-
/// projection theta. All starts must agree to start_agreement.
Eigen::VectorXd joint_prox_oracle(const KktData& kkt, const Eigen::VectorXd& theta_k,
                                  double mu, Rng& rng, int starts = 10,
                                  double start_agreement = 1e-6);

/// Central finite difference of f along direction d at step h.
double directional_fd(const std::function<double(const Eigen::VectorXd&)>& f,
                      const Eigen::VectorXd& at, const Eigen::VectorXd& d, double h);

/// Random full-rank synthetic instance of the assembled loss data.
KktData random_instance(Rng& rng, int n, int n_param, int m, int p);

/// Uniform draw from a box.
Eigen::VectorXd random_in_box(Rng& rng, const ThetaBox& box);

}  // namespace gncg::testing
