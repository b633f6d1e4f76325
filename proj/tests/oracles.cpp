// Copyright (c) gncg contributors
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace gncg::testing {

namespace {

/// Minimize a 1-D convex function on [lo, hi] by repeated grid refinement.
double refine_minimum(const std::function<double(double)>& f, double lo, double hi,
                      int levels = 5, int points = 401) {
  double best_x = lo;
  for (int level = 0; level < levels; ++level) {
    double best_val = std::numeric_limits<double>::infinity();
    const double step = (hi - lo) / (points - 1);
    for (int i = 0; i < points; ++i) {
      const double x = lo + step * i;
      const double v = f(x);
      if (v < best_val) {
        best_val = v;
        best_x = x;
      }
    }
    lo = best_x - 2.0 * step;
    hi = best_x + 2.0 * step;
  }
  return best_x;
}

}  // namespace

double cournot_best_response_gap(const Signal& u, const Eigen::VectorXd& x_star,
                                 const Eigen::VectorXd& theta) {
  const double a = u[0], b = u[1], q = u[2];
  const int n = static_cast<int>(x_star.size());
  double worst = 0.0;
  for (int v = 0; v < n; ++v) {
    const double others = x_star.sum() - x_star[v];
    // Cost of company v at its own deviation xv, everyone else fixed.
    const auto cost = [&](double xv) {
      return theta[v] * xv - (a + b * (others + xv)) * xv;
    };
    const double lb = q - others;  // deviations must keep total output >= q

    double width = std::max(5.0, std::abs(x_star[v]));
    double best = x_star[v];
    for (int attempt = 0; attempt < 6; ++attempt) {
      const double lo = std::max(lb, x_star[v] - width);
      const double hi = std::max(x_star[v] + width, lb + width);
      best = refine_minimum(cost, lo, hi);
      // Convexity: an interior minimum certifies the window was wide enough.
      if (best > lo + 1e-9 * width && best < hi - 1e-9 * width) break;
      if (best <= lb + 1e-12) break;  // pinned at the feasibility bound
      width *= 4.0;
    }
    worst = std::max(worst, cost(x_star[v]) - cost(std::max(best, lb)));
  }
  return worst;
}

double inner_objective_direct(const KktData& kkt, const Eigen::VectorXd& theta,
                              const Eigen::VectorXd& lambda) {
  Eigen::VectorXd r = kkt.f_theta(theta);
  if (kkt.m() > 0) r += kkt.grad_h * lambda;
  if (kkt.p() > 0) {
    const Eigen::VectorXd nu =
        kkt.grad_g.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(-r);
    r += kkt.grad_g * nu;
  }
  double val = r.squaredNorm() + kkt.g.squaredNorm();
  if (kkt.m() > 0) val += (kkt.h.array() * lambda.array()).matrix().squaredNorm();
  return val;
}

InnerOracleResult inner_loss_oracle(const KktData& kkt, const Eigen::VectorXd& theta) {
  const int m = static_cast<int>(kkt.m());
  InnerOracleResult res;
  res.lambda = Eigen::VectorXd::Zero(m);
  if (m == 0) {
    res.value = inner_objective_direct(kkt, theta, res.lambda);
    return res;
  }
  if (m > 2) throw std::invalid_argument("inner oracle supports m <= 2");

  // Multiplier bound from the strictly convex inner Hessian.
  Eigen::MatrixXd J(kkt.n(), m + kkt.p());
  J.leftCols(m) = kkt.grad_h;
  if (kkt.p() > 0) J.rightCols(kkt.p()) = kkt.grad_g;
  Eigen::MatrixXd A = J.transpose() * J;
  A.topLeftCorner(m, m) += kkt.h.array().square().matrix().asDiagonal();
  const double min_eig =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A).eigenvalues().minCoeff();
  const double f_norm = kkt.f_theta(theta).norm();
  const double lam_hi = std::max(1.0, 2.0 * J.operatorNorm() * f_norm / std::max(min_eig, 1e-12));

  Eigen::VectorXd lam = Eigen::VectorXd::Zero(m);
  const auto eval = [&](const Eigen::VectorXd& l) {
    return inner_objective_direct(kkt, theta, l);
  };

  if (m == 1) {
    lam[0] = refine_minimum([&](double l0) { return eval(Eigen::VectorXd::Constant(1, l0)); },
                            0.0, lam_hi, 6);
    lam[0] = std::max(lam[0], 0.0);
  } else {
    // Coarse 2-D localization.
    double lo0 = 0.0, hi0 = lam_hi, lo1 = 0.0, hi1 = lam_hi;
    for (int level = 0; level < 5; ++level) {
      const int pts = 61;
      double best = std::numeric_limits<double>::infinity();
      double b0 = lo0, b1 = lo1;
      const double s0 = (hi0 - lo0) / (pts - 1), s1 = (hi1 - lo1) / (pts - 1);
      for (int i = 0; i < pts; ++i) {
        for (int j = 0; j < pts; ++j) {
          Eigen::Vector2d l(lo0 + s0 * i, lo1 + s1 * j);
          const double v = eval(l);
          if (v < best) {
            best = v;
            b0 = l[0];
            b1 = l[1];
          }
        }
      }
      lo0 = std::max(0.0, b0 - 2 * s0);
      hi0 = b0 + 2 * s0;
      lo1 = std::max(0.0, b1 - 2 * s1);
      hi1 = b1 + 2 * s1;
      lam = Eigen::Vector2d(b0, b1);
    }
  }

  // Exact coordinate descent: per coordinate the objective is a parabola, so
  // three evaluations give the exact line minimum; clamp at zero.
  for (int sweep = 0; sweep < 400; ++sweep) {
    double change = 0.0;
    for (int i = 0; i < m; ++i) {
      const double delta = std::max(1e-6, 1e-6 * std::abs(lam[i]));
      Eigen::VectorXd lp = lam, lmn = lam;
      lp[i] += delta;
      lmn[i] -= delta;
      const double f0 = eval(lam), fp = eval(lp), fm = eval(lmn);
      const double curvature = (fp - 2.0 * f0 + fm) / (delta * delta);
      if (curvature <= 0.0) continue;
      const double slope = (fp - fm) / (2.0 * delta);
      double next = std::max(0.0, lam[i] - slope / curvature);
      change = std::max(change, std::abs(next - lam[i]));
      lam[i] = next;
    }
    if (change <= 1e-13 * (1.0 + lam.cwiseAbs().maxCoeff())) break;
  }

  res.lambda = lam;
  res.value = eval(lam);
  return res;
}

Eigen::VectorXd joint_prox_oracle(const KktData& kkt, const Eigen::VectorXd& theta_k,
                                  double mu, Rng& rng, int starts, double start_agreement) {
  const Eigen::Index npr = kkt.n_param(), m = kkt.m(), p = kkt.p();
  Eigen::MatrixXd E(kkt.n(), npr + m + p);
  E.leftCols(npr) = kkt.M.transpose();
  if (m > 0) E.middleCols(npr, m) = kkt.grad_h;
  if (p > 0) E.rightCols(p) = kkt.grad_g;
  Eigen::VectorXd hsq = Eigen::VectorXd::Zero(npr + m + p);
  if (m > 0) hsq.segment(npr, m) = kkt.h.array().square();

  const double enorm = E.operatorNorm();
  const double lip = 1.0 + 2.0 * mu * (enorm * enorm + hsq.maxCoeff());
  const double step = 1.0 / lip;

  const auto grad = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd g = 2.0 * mu * (E.transpose() * (E * v + kkt.c)) +
                        2.0 * mu * (hsq.array() * v.array()).matrix();
    g.head(npr) += v.head(npr) - theta_k;
    return g;
  };

  Eigen::VectorXd best;
  for (int s = 0; s < starts; ++s) {
    Eigen::VectorXd v(npr + m + p);
    if (s == 0) {
      v.setZero();
      v.head(npr) = theta_k;
    } else {
      v = rng.normal_vector(npr + m + p);
      v.head(npr) += theta_k;
      if (m > 0) v.segment(npr, m) = v.segment(npr, m).cwiseAbs();
    }
    const double tol = 1e-10 * (1.0 + theta_k.cwiseAbs().maxCoeff());
    for (long it = 0; it < 4000000; ++it) {
      Eigen::VectorXd v_next = v - step * grad(v);
      if (m > 0) v_next.segment(npr, m) = v_next.segment(npr, m).cwiseMax(0.0);
      const double move = (v_next - v).cwiseAbs().maxCoeff();
      v = std::move(v_next);
      if (move <= tol * step) break;
    }
    if (s == 0) {
      best = v;
    } else if ((v.head(npr) - best.head(npr)).cwiseAbs().maxCoeff() > start_agreement) {
      throw std::runtime_error("joint prox oracle: starts disagree");
    }
  }
  return best.head(npr);
}

double directional_fd(const std::function<double(const Eigen::VectorXd&)>& f,
                      const Eigen::VectorXd& at, const Eigen::VectorXd& d, double h) {
  return (f(at + h * d) - f(at - h * d)) / (2.0 * h);
}

KktData random_instance(Rng& rng, int n, int n_param, int m, int p) {
  auto mat = [&](int r, int c) {
    Eigen::MatrixXd out(r, c);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < c; ++j) out(i, j) = rng.normal();
    }
    return out;
  };
  return KktData::from_parts(mat(n_param, n), rng.normal_vector(n), mat(n, m), mat(n, p),
                             rng.normal_vector(m), rng.normal_vector(p));
}

Eigen::VectorXd random_in_box(Rng& rng, const ThetaBox& box) {
  Eigen::VectorXd t(box.dim());
  for (Eigen::Index i = 0; i < box.dim(); ++i) t[i] = rng.uniform(box.lo[i], box.hi[i]);
  return t;
}

}  // namespace gncg::testing
