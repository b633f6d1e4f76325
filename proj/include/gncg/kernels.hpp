// Copyright (c) gncg contributors
#pragma once

#include <span>
#include <Eigen/Core>

#include "gncg/kkt_loss.hpp"

namespace gncg {

/// Summed loss and summed subgradient of the batch objective
/// sum_k l(theta; y^k, u^k) at a fixed theta.
struct BatchEval {
  double loss_sum = 0.0;
  Eigen::VectorXd subgrad_sum;
};

/// Serial reference implementation: one pass in stream order.
BatchEval batch_eval_serial(std::span<const KktData> kkts, const Eigen::VectorXd& theta);

/// OpenMP implementation. Per-observation terms are computed in parallel
/// into index-addressed buffers and folded in stream order, so the result is
/// bitwise identical to the serial reference for any thread count.
BatchEval batch_eval_parallel(std::span<const KktData> kkts, const Eigen::VectorXd& theta);

double batch_loss_serial(std::span<const KktData> kkts, const Eigen::VectorXd& theta);
double batch_loss_parallel(std::span<const KktData> kkts, const Eigen::VectorXd& theta);

/// Certificate sweep over a stream (parallel, order preserved).
std::vector<CertificateReport> certificates_serial(std::span<const KktData> kkts);
std::vector<CertificateReport> certificates_parallel(std::span<const KktData> kkts);

}  // namespace gncg
