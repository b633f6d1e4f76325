// Copyright (c) gncg contributors
#pragma once

#include <Eigen/Core>

namespace gncg {

struct NnlsResult {
  Eigen::VectorXd z;
  int iterations = 0;
  double kkt_residual = 0.0;
};

/// Minimize 0.5 z^T A z + b^T z subject to z >= 0, with A symmetric positive
/// definite. Primal active-set iteration in the Lawson-Hanson style: free
/// variables solve the reduced normal equations exactly, bound variables are
/// released one at a time on the most negative reduced gradient. Terminates
/// finitely on strictly convex problems.
///
/// The returned kkt_residual is max(|A z + b| on free indices,
/// max(0, -(A z + b)) on bound indices) and is driven below
/// tol * max(1, |b|_inf).
NnlsResult solve_nonneg_qp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                           double tol = 1e-10);

}  // namespace gncg
