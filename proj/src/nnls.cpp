// Copyright (c) gncg contributors
#include "gncg/nnls.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>
#include <Eigen/Cholesky>

#include "gncg/forward.hpp"

namespace gncg {

namespace {

Eigen::VectorXd solve_free_subsystem(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                     const std::vector<int>& free) {
  const int nf = static_cast<int>(free.size());
  Eigen::MatrixXd Af(nf, nf);
  Eigen::VectorXd bf(nf);
  for (int i = 0; i < nf; ++i) {
    bf[i] = -b[free[i]];
    for (int j = 0; j < nf; ++j) Af(i, j) = A(free[i], free[j]);
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(Af);
  if (ldlt.info() != Eigen::Success) {
    // Near-singular principal submatrix: jitter once and retry.
    Af.diagonal().array() += 1e-12;
    ldlt.compute(Af);
    if (ldlt.info() != Eigen::Success) {
      throw SolveError("nnls: singular free-variable subsystem", 0.0);
    }
  }
  return ldlt.solve(bf);
}

}  // namespace

NnlsResult solve_nonneg_qp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double tol) {
  const int n = static_cast<int>(b.size());
  NnlsResult res;
  res.z = Eigen::VectorXd::Zero(n);
  if (n == 0) return res;
  if (A.rows() != n || A.cols() != n) {
    throw std::invalid_argument("nnls: Hessian shape does not match the linear term");
  }

  const double abs_tol = tol * std::max(1.0, b.cwiseAbs().maxCoeff());
  std::vector<char> free_set(n, 0);
  std::vector<int> free_idx;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);

  const int max_outer = 50 * (n + 2);
  int outer = 0;
  for (; outer < max_outer; ++outer) {
    // Optimality over the bound set: release the most negative gradient.
    const Eigen::VectorXd grad = A * z + b;
    int release = -1;
    double most_negative = -abs_tol;
    for (int i = 0; i < n; ++i) {
      if (!free_set[i] && grad[i] < most_negative) {
        most_negative = grad[i];
        release = i;
      }
    }
    if (release < 0) break;
    free_set[release] = 1;

    // Inner loop: restore feasibility of the free subsystem solution.
    for (int inner = 0; inner <= n + 1; ++inner) {
      free_idx.clear();
      for (int i = 0; i < n; ++i) {
        if (free_set[i]) free_idx.push_back(i);
      }
      const Eigen::VectorXd t = solve_free_subsystem(A, b, free_idx);

      double alpha = 1.0;
      int blocker = -1;
      for (size_t k = 0; k < free_idx.size(); ++k) {
        if (t[k] < 0.0) {
          const double zi = z[free_idx[k]];
          const double a = zi / (zi - t[k]);
          if (a < alpha) {
            alpha = a;
            blocker = static_cast<int>(k);
          }
        }
      }
      if (blocker < 0) {
        z.setZero();
        for (size_t k = 0; k < free_idx.size(); ++k) z[free_idx[k]] = t[k];
        break;
      }
      // Partial step to the nearest bound, then drop every variable that
      // landed on it.
      for (size_t k = 0; k < free_idx.size(); ++k) {
        const int i = free_idx[k];
        z[i] += alpha * (t[k] - z[i]);
        if (k == static_cast<size_t>(blocker) || z[i] <= 0.0) {
          z[i] = 0.0;
          free_set[i] = 0;
        }
      }
    }
  }
  if (outer >= max_outer) {
    throw SolveError("nnls: active-set iteration cap reached", 0.0);
  }

  const Eigen::VectorXd grad = A * z + b;
  double kkt = 0.0;
  for (int i = 0; i < n; ++i) {
    kkt = std::max(kkt, free_set[i] ? std::abs(grad[i]) : std::max(0.0, -grad[i]));
  }
  res.z = std::move(z);
  res.iterations = outer;
  res.kkt_residual = kkt;
  return res;
}

}  // namespace gncg
