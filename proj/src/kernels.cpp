// Copyright (c) gncg contributors
#include "gncg/kernels.hpp"

#include <vector>

namespace gncg {

namespace {

struct Term {
  double loss = 0.0;
  Eigen::VectorXd subgrad;
};

Term eval_one(const KktData& kkt, const Eigen::VectorXd& theta) {
  Term t;
  const LossValue lv = loss(kkt, theta);
  t.loss = lv.value;
  t.subgrad = loss_subgradient(kkt, theta, lv);
  return t;
}

}  // namespace

BatchEval batch_eval_serial(std::span<const KktData> kkts, const Eigen::VectorXd& theta) {
  BatchEval out;
  out.subgrad_sum = Eigen::VectorXd::Zero(theta.size());
  for (const KktData& kkt : kkts) {
    const Term t = eval_one(kkt, theta);
    out.loss_sum += t.loss;
    out.subgrad_sum += t.subgrad;
  }
  return out;
}

BatchEval batch_eval_parallel(std::span<const KktData> kkts, const Eigen::VectorXd& theta) {
  const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(kkts.size());
  std::vector<Term> terms(static_cast<size_t>(k));
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < k; ++i) {
    terms[static_cast<size_t>(i)] = eval_one(kkts[static_cast<size_t>(i)], theta);
  }
  // Fold in stream order so the sums match the serial reference bitwise.
  BatchEval out;
  out.subgrad_sum = Eigen::VectorXd::Zero(theta.size());
  for (const Term& t : terms) {
    out.loss_sum += t.loss;
    out.subgrad_sum += t.subgrad;
  }
  return out;
}

double batch_loss_serial(std::span<const KktData> kkts, const Eigen::VectorXd& theta) {
  double sum = 0.0;
  for (const KktData& kkt : kkts) sum += loss(kkt, theta).value;
  return sum;
}

double batch_loss_parallel(std::span<const KktData> kkts, const Eigen::VectorXd& theta) {
  const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(kkts.size());
  std::vector<double> vals(static_cast<size_t>(k));
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < k; ++i) {
    vals[static_cast<size_t>(i)] = loss(kkts[static_cast<size_t>(i)], theta).value;
  }
  double sum = 0.0;
  for (double v : vals) sum += v;
  return sum;
}

std::vector<CertificateReport> certificates_serial(std::span<const KktData> kkts) {
  std::vector<CertificateReport> reports(kkts.size());
  for (size_t i = 0; i < kkts.size(); ++i) {
    reports[i] = matrix_certificates(kkts[i]);
    reports[i].round = static_cast<int>(i) + 1;
  }
  return reports;
}

std::vector<CertificateReport> certificates_parallel(std::span<const KktData> kkts) {
  std::vector<CertificateReport> reports(kkts.size());
  const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(kkts.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < k; ++i) {
    reports[static_cast<size_t>(i)] = matrix_certificates(kkts[static_cast<size_t>(i)]);
    reports[static_cast<size_t>(i)].round = static_cast<int>(i) + 1;
  }
  return reports;
}

}  // namespace gncg
