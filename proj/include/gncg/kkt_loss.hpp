// Copyright (c) gncg contributors
#pragma once

#include <span>
#include <string>
#include <Eigen/Core>

#include "gncg/forward.hpp"
#include "gncg/game.hpp"
#include "gncg/rng.hpp"

namespace gncg {

/// All matrices of the stationarity-residual loss assembled at one fixed
/// observed point (y, u):
///
///   F_theta = M^T theta + c,   H = diag(h),
///   l(theta) = min over lambda >= 0, nu of
///              |F_theta + grad_h lambda + grad_g nu|^2 + |H lambda|^2 + |g|^2.
///
/// When [grad_h, grad_g] has full column rank (rank_ok), the equality
/// multipliers can be eliminated through the projector complement
/// R = I - grad_g (grad_g^T grad_g)^-1 grad_g^T, leaving a strictly convex
/// nonnegative QP in lambda with Hessian P = grad_h^T R grad_h + H^2 and the
/// value expressible through Q = R - R grad_h P^-1 grad_h^T R. Those
/// reduced-form matrices are precomputed here; KktData is immutable after
/// assembly and safe to share across threads.
struct KktData {
  Eigen::MatrixXd M;       // n' x n
  Eigen::VectorXd c;       // n
  Eigen::MatrixXd grad_h;  // n x m
  Eigen::MatrixXd grad_g;  // n x p
  Eigen::VectorXd h;       // m
  Eigen::VectorXd g;       // p

  bool rank_ok = false;    // [grad_h, grad_g] numerically full column rank
  int rank = 0;

  // Reduced-form cache, valid when rank_ok.
  Eigen::MatrixXd R;        // n x n (identity when p = 0)
  Eigen::MatrixXd P;        // m x m
  Eigen::MatrixXd Q;        // n x n
  Eigen::MatrixXd gtg;      // p x p, grad_g^T grad_g
  Eigen::MatrixXd p_chol;   // Cholesky factor of P (possibly jittered)
  Eigen::MatrixXd gtg_chol; // Cholesky factor of gtg

  Eigen::Index n() const { return c.size(); }
  Eigen::Index n_param() const { return M.rows(); }
  Eigen::Index m() const { return h.size(); }
  Eigen::Index p() const { return g.size(); }

  Eigen::VectorXd f_theta(const Eigen::VectorXd& theta) const;

  /// Build from raw matrices (synthetic instances, tests).
  static KktData from_parts(Eigen::MatrixXd M, Eigen::VectorXd c,
                            Eigen::MatrixXd grad_h, Eigen::MatrixXd grad_g,
                            Eigen::VectorXd h, Eigen::VectorXd g);
};

/// Evaluate the game at an observed point and precompute the reduced form.
/// Rank deficiency of [grad_h, grad_g] only clears rank_ok; the loss remains
/// computable through the direct fallback.
KktData assemble_kkt(const ParametricGame& game, const Eigen::VectorXd& y,
                     const Signal& u);

/// Loss value together with the minimizing multipliers.
struct LossValue {
  double value = 0.0;
  Eigen::VectorXd lambda;  // m, >= 0
  Eigen::VectorXd nu;      // p
};

/// Minimizers of the inner problem. On the full-rank path nu is eliminated
/// analytically and lambda solves the reduced nonnegative QP by active-set
/// iteration; otherwise a projected-gradient fallback over (lambda, nu) runs
/// to the same tolerance.
std::pair<Eigen::VectorXd, Eigen::VectorXd> inner_dual_solve(
    const KktData& kkt, const Eigen::VectorXd& theta, double tol = 1e-10);

/// l(theta; y, u), evaluated directly from the residual definition at the
/// inner minimizers.
LossValue loss(const KktData& kkt, const Eigen::VectorXd& theta);

/// Same minimum through the eliminated quadratic form
///   (lambda* - lambda_u)^T P (lambda* - lambda_u) + F^T Q F + g^T g,
/// lambda_u the unconstrained minimizer. Requires rank_ok.
LossValue reduced_loss(const KktData& kkt, const Eigen::VectorXd& theta);

/// Subgradient of l at theta: s = 2 M (F_theta + grad_h lambda* + grad_g nu*),
/// the envelope derivative at the inner optimum.
Eigen::VectorXd loss_subgradient(const KktData& kkt, const Eigen::VectorXd& theta,
                                 const LossValue& at);
Eigen::VectorXd loss_subgradient(const KktData& kkt, const Eigen::VectorXd& theta);

/// Numerical certificates for the assembled matrices: positive definiteness
/// of the inner Hessian A = [[grad_h^T grad_h + H^2, grad_h^T grad_g],
/// [grad_g^T grad_h, grad_g^T grad_g]], idempotence and semidefiniteness of
/// R, positive definiteness of P and semidefiniteness of Q. Reports, never
/// throws.
struct CertificateReport {
  int round = 0;
  double min_eig_A = 0.0;
  double r_idempotence = 0.0;  // |R^2 - R|_F
  double min_eig_R = 0.0;
  double min_eig_P = 0.0;
  double min_eig_Q = 0.0;
  int rank = 0;
  int rank_expected = 0;
  bool reduced_enabled = false;
};

CertificateReport matrix_certificates(const KktData& kkt);

/// Largest sampled ratio |l(theta1) - l(theta2)| / |theta1 - theta2| over the
/// box, maximized across the given observations. Pairs mix box-wide draws
/// with short-range perturbations so the probe tracks the steepest local
/// slope. pair_budget counts pairs per observation.
double lipschitz_probe(std::span<const KktData> kkts, const ThetaBox& box,
                       Rng& rng, int pair_budget);

}  // namespace gncg
