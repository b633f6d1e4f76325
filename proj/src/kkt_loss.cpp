// Copyright (c) gncg contributors
#include "gncg/kkt_loss.hpp"

#include <cmath>
#include <stdexcept>
#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "gncg/nnls.hpp"

namespace gncg {

namespace {

constexpr double kRankThreshold = 1e-10;  // relative to the largest singular value
constexpr double kJitter = 1e-12;

/// Solve L L^T x = rhs given the lower Cholesky factor.
Eigen::VectorXd chol_solve(const Eigen::MatrixXd& L, const Eigen::VectorXd& rhs) {
  Eigen::VectorXd y = L.triangularView<Eigen::Lower>().solve(rhs);
  return L.transpose().triangularView<Eigen::Upper>().solve(y);
}

Eigen::MatrixXd chol_solve_matrix(const Eigen::MatrixXd& L, const Eigen::MatrixXd& rhs) {
  Eigen::MatrixXd y = L.triangularView<Eigen::Lower>().solve(rhs);
  return L.transpose().triangularView<Eigen::Upper>().solve(y);
}

/// Cholesky with one jittered retry for near-singular matrices; empty result
/// signals failure.
bool try_cholesky(const Eigen::MatrixXd& S, Eigen::MatrixXd* L) {
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() == Eigen::Success) {
    *L = llt.matrixL();
    return true;
  }
  Eigen::MatrixXd jittered = S;
  jittered.diagonal().array() += kJitter;
  llt.compute(jittered);
  if (llt.info() == Eigen::Success) {
    *L = llt.matrixL();
    return true;
  }
  return false;
}

double direct_objective(const KktData& kkt, const Eigen::VectorXd& f_theta,
                        const Eigen::VectorXd& lambda, const Eigen::VectorXd& nu) {
  Eigen::VectorXd r = f_theta;
  if (kkt.m() > 0) r += kkt.grad_h * lambda;
  if (kkt.p() > 0) r += kkt.grad_g * nu;
  double v = r.squaredNorm() + kkt.g.squaredNorm();
  if (kkt.m() > 0) v += (kkt.h.array() * lambda.array()).matrix().squaredNorm();
  return v;
}

/// Projected-gradient fallback over (lambda, nu) for rank-deficient
/// constraint gradients. The objective is convex (possibly not strictly), so
/// the value converges even when the minimizer is not unique.
std::pair<Eigen::VectorXd, Eigen::VectorXd> inner_fallback_pg(const KktData& kkt,
                                                              const Eigen::VectorXd& f_theta,
                                                              double tol) {
  const Eigen::Index m = kkt.m(), p = kkt.p();
  Eigen::MatrixXd B(kkt.n(), m + p);
  if (m > 0) B.leftCols(m) = kkt.grad_h;
  if (p > 0) B.rightCols(p) = kkt.grad_g;
  Eigen::VectorXd hsq = Eigen::VectorXd::Zero(m + p);
  if (m > 0) hsq.head(m) = kkt.h.array().square();

  const double bnorm = B.size() ? B.operatorNorm() : 0.0;
  const double lip = 2.0 * (bnorm * bnorm + (m > 0 ? hsq.maxCoeff() : 0.0)) + 1e-12;
  const double step = 1.0 / lip;
  const double grad_tol = tol * (1.0 + f_theta.cwiseAbs().maxCoeff());

  Eigen::VectorXd z = Eigen::VectorXd::Zero(m + p);
  const long cap = 2000000;
  for (long it = 0; it < cap; ++it) {
    const Eigen::VectorXd r = f_theta + B * z;
    Eigen::VectorXd grad = 2.0 * (B.transpose() * r) + 2.0 * (hsq.array() * z.array()).matrix();
    Eigen::VectorXd z_next = z - step * grad;
    z_next.head(m) = z_next.head(m).cwiseMax(0.0);
    const double change = (z_next - z).cwiseAbs().maxCoeff();
    z = std::move(z_next);
    if (change <= grad_tol * step) break;
  }
  return {z.head(m), z.tail(p)};
}

}  // namespace

Eigen::VectorXd KktData::f_theta(const Eigen::VectorXd& theta) const {
  if (theta.size() != M.rows()) {
    throw std::invalid_argument("kkt: parameter vector has wrong dimension");
  }
  return M.transpose() * theta + c;
}

KktData KktData::from_parts(Eigen::MatrixXd M, Eigen::VectorXd c, Eigen::MatrixXd grad_h,
                            Eigen::MatrixXd grad_g, Eigen::VectorXd h, Eigen::VectorXd g) {
  KktData kkt;
  kkt.M = std::move(M);
  kkt.c = std::move(c);
  kkt.grad_h = std::move(grad_h);
  kkt.grad_g = std::move(grad_g);
  kkt.h = std::move(h);
  kkt.g = std::move(g);

  const Eigen::Index n = kkt.c.size(), m = kkt.m(), p = kkt.p();
  if (kkt.M.cols() != n || kkt.grad_h.rows() != n || kkt.grad_g.rows() != n ||
      kkt.grad_h.cols() != m || kkt.grad_g.cols() != p) {
    throw std::invalid_argument("kkt: inconsistent matrix shapes");
  }

  // Rank of [grad_h, grad_g] by singular values.
  if (m + p == 0) {
    kkt.rank = 0;
    kkt.rank_ok = true;
  } else {
    Eigen::MatrixXd J(n, m + p);
    if (m > 0) J.leftCols(m) = kkt.grad_h;
    if (p > 0) J.rightCols(p) = kkt.grad_g;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cutoff = kRankThreshold * sv[0];
    kkt.rank = static_cast<int>((sv.array() > cutoff).count());
    kkt.rank_ok = (kkt.rank == m + p);
  }

  if (kkt.rank_ok) {
    bool ok = true;
    if (p > 0) {
      kkt.gtg = kkt.grad_g.transpose() * kkt.grad_g;
      ok = try_cholesky(kkt.gtg, &kkt.gtg_chol);
      if (ok) {
        kkt.R = Eigen::MatrixXd::Identity(n, n) -
                kkt.grad_g * chol_solve_matrix(kkt.gtg_chol, kkt.grad_g.transpose());
      }
    } else {
      kkt.R = Eigen::MatrixXd::Identity(n, n);
    }
    if (ok && m > 0) {
      kkt.P = kkt.grad_h.transpose() * kkt.R * kkt.grad_h;
      kkt.P += kkt.h.array().square().matrix().asDiagonal();
      kkt.P = 0.5 * (kkt.P + kkt.P.transpose());  // symmetrize rounding
      ok = try_cholesky(kkt.P, &kkt.p_chol);
      if (ok) {
        const Eigen::MatrixXd rh = kkt.R * kkt.grad_h;
        kkt.Q = kkt.R - rh * chol_solve_matrix(kkt.p_chol, rh.transpose());
      }
    } else if (ok) {
      kkt.P.resize(0, 0);
      kkt.Q = kkt.R;
    }
    if (!ok) kkt.rank_ok = false;  // numerically unusable reduced form
  }
  return kkt;
}

KktData assemble_kkt(const ParametricGame& game, const Eigen::VectorXd& y, const Signal& u) {
  BasisMatrices bm = game.basis_matrices(y, u);
  ConstraintEval ce = game.constraint_eval(y, u);
  return KktData::from_parts(std::move(bm.M), std::move(bm.c), std::move(ce.grad_h),
                             std::move(ce.grad_g), std::move(ce.h), std::move(ce.g));
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> inner_dual_solve(const KktData& kkt,
                                                             const Eigen::VectorXd& theta,
                                                             double tol) {
  const Eigen::VectorXd f = kkt.f_theta(theta);
  if (!kkt.rank_ok) return inner_fallback_pg(kkt, f, tol);

  const Eigen::Index m = kkt.m(), p = kkt.p();
  Eigen::VectorXd lambda(m);
  if (m > 0) {
    const Eigen::VectorXd rf = (p > 0) ? Eigen::VectorXd(kkt.R * f) : f;
    const Eigen::VectorXd q = kkt.grad_h.transpose() * rf;
    lambda = solve_nonneg_qp(kkt.P, q, tol).z;
  }
  Eigen::VectorXd nu(p);
  if (p > 0) {
    Eigen::VectorXd rhs = f;
    if (m > 0) rhs += kkt.grad_h * lambda;
    nu = -chol_solve(kkt.gtg_chol, kkt.grad_g.transpose() * rhs);
  }
  return {std::move(lambda), std::move(nu)};
}

LossValue loss(const KktData& kkt, const Eigen::VectorXd& theta) {
  auto [lambda, nu] = inner_dual_solve(kkt, theta);
  LossValue lv;
  lv.value = direct_objective(kkt, kkt.f_theta(theta), lambda, nu);
  lv.lambda = std::move(lambda);
  lv.nu = std::move(nu);
  return lv;
}

LossValue reduced_loss(const KktData& kkt, const Eigen::VectorXd& theta) {
  if (!kkt.rank_ok) {
    throw std::invalid_argument("reduced_loss: constraint gradients are rank deficient");
  }
  const Eigen::Index m = kkt.m(), p = kkt.p();
  const Eigen::VectorXd f = kkt.f_theta(theta);

  LossValue lv;
  lv.value = f.dot(kkt.Q * f) + kkt.g.squaredNorm();
  if (m > 0) {
    const Eigen::VectorXd rf = (p > 0) ? Eigen::VectorXd(kkt.R * f) : f;
    const Eigen::VectorXd q = kkt.grad_h.transpose() * rf;
    const Eigen::VectorXd lambda_unconstrained = -chol_solve(kkt.p_chol, q);
    if ((lambda_unconstrained.array() >= 0.0).all()) {
      lv.lambda = lambda_unconstrained;
    } else {
      lv.lambda = solve_nonneg_qp(kkt.P, q).z;
      const Eigen::VectorXd d = lv.lambda - lambda_unconstrained;
      lv.value += d.dot(kkt.P * d);
    }
  } else {
    lv.lambda = Eigen::VectorXd(0);
  }
  if (p > 0) {
    Eigen::VectorXd rhs = f;
    if (m > 0) rhs += kkt.grad_h * lv.lambda;
    lv.nu = -chol_solve(kkt.gtg_chol, kkt.grad_g.transpose() * rhs);
  } else {
    lv.nu = Eigen::VectorXd(0);
  }
  return lv;
}

Eigen::VectorXd loss_subgradient(const KktData& kkt, const Eigen::VectorXd& theta,
                                 const LossValue& at) {
  Eigen::VectorXd r = kkt.f_theta(theta);
  if (kkt.m() > 0) r += kkt.grad_h * at.lambda;
  if (kkt.p() > 0) r += kkt.grad_g * at.nu;
  return 2.0 * (kkt.M * r);
}

Eigen::VectorXd loss_subgradient(const KktData& kkt, const Eigen::VectorXd& theta) {
  return loss_subgradient(kkt, theta, loss(kkt, theta));
}

CertificateReport matrix_certificates(const KktData& kkt) {
  const Eigen::Index m = kkt.m(), p = kkt.p();
  CertificateReport rep;
  rep.rank = kkt.rank;
  rep.rank_expected = static_cast<int>(m + p);
  rep.reduced_enabled = kkt.rank_ok;

  const double nan = std::numeric_limits<double>::quiet_NaN();
  rep.min_eig_A = nan;
  rep.r_idempotence = nan;
  rep.min_eig_R = nan;
  rep.min_eig_P = nan;
  rep.min_eig_Q = nan;

  if (m + p > 0) {
    Eigen::MatrixXd A(m + p, m + p);
    const Eigen::MatrixXd hth = kkt.grad_h.transpose() * kkt.grad_h;
    A.topLeftCorner(m, m) = hth;
    A.topLeftCorner(m, m) += kkt.h.array().square().matrix().asDiagonal();
    A.topRightCorner(m, p) = kkt.grad_h.transpose() * kkt.grad_g;
    A.bottomLeftCorner(p, m) = A.topRightCorner(m, p).transpose();
    A.bottomRightCorner(p, p) = kkt.grad_g.transpose() * kkt.grad_g;
    rep.min_eig_A = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A).eigenvalues().minCoeff();
  }

  if (kkt.rank_ok) {
    rep.r_idempotence = (kkt.R * kkt.R - kkt.R).norm();
    rep.min_eig_R =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(kkt.R).eigenvalues().minCoeff();
    rep.min_eig_P =
        m > 0 ? Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(kkt.P).eigenvalues().minCoeff()
              : std::numeric_limits<double>::infinity();
    rep.min_eig_Q =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(kkt.Q).eigenvalues().minCoeff();
  }
  return rep;
}

double lipschitz_probe(std::span<const KktData> kkts, const ThetaBox& box, Rng& rng,
                       int pair_budget) {
  if (pair_budget < 2) throw std::invalid_argument("lipschitz_probe: need at least 2 pairs");
  const Eigen::Index d = box.dim();
  const double width = (box.hi - box.lo).norm();

  auto draw_in_box = [&]() {
    Eigen::VectorXd t(d);
    for (Eigen::Index i = 0; i < d; ++i) t[i] = rng.uniform(box.lo[i], box.hi[i]);
    return t;
  };

  double c_hat = 0.0;
  for (const KktData& kkt : kkts) {
    for (int i = 0; i < pair_budget; ++i) {
      const Eigen::VectorXd t1 = draw_in_box();
      Eigen::VectorXd t2;
      // Alternate box-wide pairs with short- and mid-range perturbations; the
      // short pairs track the steepest local slope.
      switch (i % 3) {
        case 0:
          t2 = draw_in_box();
          break;
        case 1:
          t2 = box.clamp(t1 + 1e-4 * width * rng.normal_vector(d).normalized());
          break;
        default:
          t2 = box.clamp(t1 + 5e-2 * width * rng.normal_vector(d).normalized());
          break;
      }
      const double dist = (t1 - t2).norm();
      if (dist < 1e-12) continue;
      const double ratio = std::abs(loss(kkt, t1).value - loss(kkt, t2).value) / dist;
      c_hat = std::max(c_hat, ratio);
    }
  }
  return c_hat;
}

}  // namespace gncg
