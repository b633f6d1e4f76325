// Copyright (c) gncg contributors
#include "gncg/identifier.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "gncg/nnls.hpp"

namespace gncg {

namespace {

using Clock = std::chrono::steady_clock;

struct JointSolution {
  Eigen::VectorXd theta;
  Eigen::VectorXd lambda;
  Eigen::VectorXd nu;
};

/// Minimize 0.5|theta - theta_k|^2 + mu (|M^T theta + c + grad_h lambda +
/// grad_g nu|^2 + |H lambda|^2) over theta free, lambda >= 0, nu free.
///
/// For each fixed lambda the (theta, nu) block is an unconstrained quadratic;
/// eliminating it turns the problem into a strictly convex nonnegative QP in
/// lambda. The elimination map is affine, so one factorization yields both
/// the base point (lambda = 0) and the sensitivity columns, and the reduced
/// Hessian and gradient follow by composing the affine map with the original
/// quadratic.
JointSolution solve_joint_eliminated(const KktData& kkt, const Eigen::VectorXd& theta_k,
                                     double mu) {
  const Eigen::Index npr = kkt.n_param(), m = kkt.m(), p = kkt.p();

  // (theta, nu) block Hessian and the lambda = 0 right-hand side.
  Eigen::MatrixXd A(npr + p, npr + p);
  A.topLeftCorner(npr, npr) = 2.0 * mu * (kkt.M * kkt.M.transpose());
  A.topLeftCorner(npr, npr) += Eigen::MatrixXd::Identity(npr, npr);
  if (p > 0) {
    A.topRightCorner(npr, p) = 2.0 * mu * (kkt.M * kkt.grad_g);
    A.bottomLeftCorner(p, npr) = A.topRightCorner(npr, p).transpose();
    A.bottomRightCorner(p, p) = 2.0 * mu * (kkt.grad_g.transpose() * kkt.grad_g);
  }
  Eigen::VectorXd rhs0(npr + p);
  rhs0.head(npr) = theta_k - 2.0 * mu * (kkt.M * kkt.c);
  if (p > 0) rhs0.tail(p) = -2.0 * mu * (kkt.grad_g.transpose() * kkt.c);

  const Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  if (ldlt.info() != Eigen::Success) {
    throw SolveError("update: singular (theta, nu) block", 0.0);
  }
  const Eigen::VectorXd v0 = ldlt.solve(rhs0);
  const Eigen::VectorXd theta0 = v0.head(npr);
  const Eigen::VectorXd nu0 = v0.tail(p);

  JointSolution sol;
  if (m == 0) {
    sol.theta = theta0;
    sol.lambda = Eigen::VectorXd(0);
    sol.nu = nu0;
    return sol;
  }

  // Sensitivity of (theta, nu) to each lambda coordinate.
  Eigen::MatrixXd rhs_cols(npr + p, m);
  rhs_cols.topRows(npr) = -2.0 * mu * (kkt.M * kkt.grad_h);
  if (p > 0) rhs_cols.bottomRows(p) = -2.0 * mu * (kkt.grad_g.transpose() * kkt.grad_h);
  const Eigen::MatrixXd V = ldlt.solve(rhs_cols);
  const Eigen::MatrixXd d_theta = V.topRows(npr);
  const Eigen::MatrixXd d_nu = V.bottomRows(p);

  // Residual r(lambda) = M^T theta(lambda) + c + grad_h lambda + grad_g
  // nu(lambda) is affine: r0 + DR lambda.
  Eigen::VectorXd r0 = kkt.M.transpose() * theta0 + kkt.c;
  if (p > 0) r0 += kkt.grad_g * nu0;
  Eigen::MatrixXd DR = kkt.M.transpose() * d_theta + kkt.grad_h;
  if (p > 0) DR += kkt.grad_g * d_nu;

  // J(lambda) = 0.5|theta0 + d_theta l - theta_k|^2 + mu |r0 + DR l|^2
  //           + mu l^T H^2 l + const.
  Eigen::MatrixXd hess = d_theta.transpose() * d_theta + 2.0 * mu * (DR.transpose() * DR);
  hess += (2.0 * mu) * kkt.h.array().square().matrix().asDiagonal();
  hess = 0.5 * (hess + hess.transpose());
  const Eigen::VectorXd grad =
      d_theta.transpose() * (theta0 - theta_k) + 2.0 * mu * (DR.transpose() * r0);

  sol.lambda = solve_nonneg_qp(hess, grad).z;
  sol.theta = theta0 + d_theta * sol.lambda;
  sol.nu = nu0 + d_nu * sol.lambda;
  return sol;
}

/// Block-coordinate fallback for rank-deficient constraint gradients:
/// alternate the (theta, nu) minimum-norm solve with the lambda nonnegative
/// QP until the iterates settle.
JointSolution solve_joint_fallback(const KktData& kkt, const Eigen::VectorXd& theta_k,
                                   double mu) {
  const Eigen::Index npr = kkt.n_param(), m = kkt.m(), p = kkt.p();

  Eigen::MatrixXd A(npr + p, npr + p);
  A.topLeftCorner(npr, npr) = 2.0 * mu * (kkt.M * kkt.M.transpose());
  A.topLeftCorner(npr, npr) += Eigen::MatrixXd::Identity(npr, npr);
  if (p > 0) {
    A.topRightCorner(npr, p) = 2.0 * mu * (kkt.M * kkt.grad_g);
    A.bottomLeftCorner(p, npr) = A.topRightCorner(npr, p).transpose();
    A.bottomRightCorner(p, p) = 2.0 * mu * (kkt.grad_g.transpose() * kkt.grad_g);
  }
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);

  Eigen::MatrixXd lam_hess = kkt.grad_h.transpose() * kkt.grad_h;
  lam_hess += kkt.h.array().square().matrix().asDiagonal();
  lam_hess.diagonal().array() += 1e-12;

  Eigen::VectorXd theta = theta_k;
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(p);

  const int max_sweeps = 10000;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    Eigen::VectorXd rhs(npr + p);
    Eigen::VectorXd offset = kkt.c;
    if (m > 0) offset += kkt.grad_h * lambda;
    rhs.head(npr) = theta_k - 2.0 * mu * (kkt.M * offset);
    if (p > 0) rhs.tail(p) = -2.0 * mu * (kkt.grad_g.transpose() * offset);
    const Eigen::VectorXd v = cod.solve(rhs);
    const Eigen::VectorXd theta_new = v.head(npr);
    const Eigen::VectorXd nu_new = v.tail(p);

    Eigen::VectorXd lambda_new = lambda;
    if (m > 0) {
      Eigen::VectorXd r_base = kkt.M.transpose() * theta_new + kkt.c;
      if (p > 0) r_base += kkt.grad_g * nu_new;
      lambda_new = solve_nonneg_qp(lam_hess, kkt.grad_h.transpose() * r_base).z;
    }

    const double change = std::max((theta_new - theta).cwiseAbs().maxCoeff(),
                                   std::max(m > 0 ? (lambda_new - lambda).cwiseAbs().maxCoeff() : 0.0,
                                            p > 0 ? (nu_new - nu).cwiseAbs().maxCoeff() : 0.0));
    theta = theta_new;
    lambda = lambda_new;
    nu = nu_new;
    if (change <= 1e-10) break;
  }
  return {theta, lambda, nu};
}

}  // namespace

double learning_rate(int k, double mu1) {
  if (k < 1) throw std::invalid_argument("learning_rate: round index must be >= 1");
  if (!(mu1 > 0.0)) throw std::invalid_argument("learning_rate: mu1 must be positive");
  return mu1 / std::sqrt(static_cast<double>(k));
}

Eigen::VectorXd project_theta(const Eigen::VectorXd& theta_tilde, const ThetaBox& box) {
  if (theta_tilde.size() != box.dim()) {
    throw std::invalid_argument("project_theta: dimension mismatch");
  }
  return box.clamp(theta_tilde);
}

UpdateResult update_step(const KktData& kkt, const Eigen::VectorXd& theta_current,
                         double mu_k, const ThetaBox& box) {
  if (!(mu_k > 0.0)) throw std::invalid_argument("update_step: learning rate must be positive");
  if (theta_current.size() != kkt.n_param()) {
    throw std::invalid_argument("update_step: parameter dimension mismatch");
  }

  const JointSolution sol = kkt.rank_ok ? solve_joint_eliminated(kkt, theta_current, mu_k)
                                        : solve_joint_fallback(kkt, theta_current, mu_k);
  if ((sol.lambda.array() < 0.0).any()) {
    throw SolveError("update: inner solve produced an infeasible multiplier",
                     -sol.lambda.minCoeff());
  }

  UpdateResult out;
  out.theta_tilde = sol.theta;
  out.theta_next = project_theta(sol.theta, box);
  out.lambda = sol.lambda;
  out.nu = sol.nu;

  // First-order certificate with a fresh inner solve at theta_tilde.
  const Eigen::VectorXd s = loss_subgradient(kkt, out.theta_tilde);
  out.stationarity_residual = (out.theta_tilde - theta_current + mu_k * s).norm();
  return out;
}

const Eigen::VectorXd& Trajectory::theta_after(int k) const {
  if (k < 1 || k > static_cast<int>(points.size())) {
    throw std::out_of_range("trajectory: round out of range");
  }
  if (k == static_cast<int>(points.size())) return theta_final;
  return points[static_cast<size_t>(k)].theta;
}

IdentifierState::IdentifierState(const ParametricGame& game, Eigen::VectorXd theta_init,
                                 double mu1)
    : game_(&game), theta_(std::move(theta_init)), mu1_(mu1) {
  if (!(mu1 > 0.0)) throw std::invalid_argument("identifier: mu1 must be positive");
  game.check_theta(theta_);
  if (!game.theta_domain.contains(theta_)) {
    throw std::invalid_argument("identifier: initial estimate outside the parameter box");
  }
}

void IdentifierState::step(const Observation& obs) {
  if (obs.y.size() != game_->strategy_dim() || obs.u.size() != game_->signal_dim) {
    throw std::invalid_argument("identifier: observation at round " +
                                std::to_string(round_) + " has wrong dimensions");
  }

  const KktData kkt = assemble_kkt(*game_, obs.y, obs.u);
  const double loss_pre = loss(kkt, theta_).value;
  const double mu_k = learning_rate(round_, mu1_);

  const auto t0 = Clock::now();
  const UpdateResult up = update_step(kkt, theta_, mu_k, game_->theta_domain);
  const auto t1 = Clock::now();

  TrajectoryPoint pt;
  pt.round = round_;
  pt.theta = theta_;
  pt.loss = loss_pre;
  pt.residual = up.stationarity_residual;
  pt.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
  trajectory_.points.push_back(std::move(pt));

  theta_ = up.theta_next;
  trajectory_.theta_final = theta_;
  ++round_;
}

Trajectory IdentifierState::take_trajectory() && { return std::move(trajectory_); }

Trajectory run_online(const ParametricGame& game, std::span<const Observation> stream,
                      const Eigen::VectorXd& theta_init, double mu1) {
  IdentifierState state(game, theta_init, mu1);
  for (const Observation& obs : stream) state.step(obs);
  Trajectory traj = std::move(state).take_trajectory();
  if (traj.points.empty()) traj.theta_final = theta_init;
  return traj;
}

}  // namespace gncg
