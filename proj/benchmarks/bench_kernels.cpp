// Copyright (c) gncg contributors
//
// Compares the serial reference kernels with their OpenMP counterparts on a
// synthetic observation stream and checks that both produce identical sums.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include <omp.h>

#include "gncg/experiment.hpp"
#include "gncg/kernels.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  int rounds = 20000;
  int repeats = 5;
  if (argc > 1) rounds = std::stoi(argv[1]);
  if (argc > 2) repeats = std::stoi(argv[2]);

  gncg::ExperimentConfig cfg;
  cfg.players = 3;
  cfg.theta_true = Eigen::Vector3d(10.0, 7.5, 6.0);
  cfg.rounds = rounds;
  cfg.seed = 42;

  const gncg::ParametricGame game = gncg::cournot_game(cfg.players, cfg.theta_max);
  const std::vector<gncg::Observation> stream = gncg::generate_stream(game, cfg);
  std::vector<gncg::KktData> kkts;
  kkts.reserve(stream.size());
  for (const gncg::Observation& obs : stream) {
    kkts.push_back(gncg::assemble_kkt(game, obs.y, obs.u));
  }

  std::printf("stream: %d rounds, %d threads\n", rounds, omp_get_max_threads());
  std::printf("%-24s %12s %12s %9s %10s\n", "kernel", "serial_ms", "parallel_ms", "speedup",
              "identical");

  gncg::Rng rng(7);
  Eigen::VectorXd theta(3);
  for (int r = 0; r < repeats; ++r) {
    for (int i = 0; i < 3; ++i) theta[i] = rng.uniform(0.0, 100.0);

    auto t0 = Clock::now();
    const gncg::BatchEval serial = gncg::batch_eval_serial(kkts, theta);
    const double serial_ms = ms_since(t0);

    t0 = Clock::now();
    const gncg::BatchEval parallel = gncg::batch_eval_parallel(kkts, theta);
    const double parallel_ms = ms_since(t0);

    const bool same = serial.loss_sum == parallel.loss_sum &&
                      serial.subgrad_sum == parallel.subgrad_sum;
    std::printf("%-24s %12.2f %12.2f %8.2fx %10s\n", "batch_eval", serial_ms, parallel_ms,
                serial_ms / parallel_ms, same ? "yes" : "NO");
    if (!same) return 1;
  }

  auto t0 = Clock::now();
  const auto cert_serial = gncg::certificates_serial(kkts);
  const double cert_serial_ms = ms_since(t0);
  t0 = Clock::now();
  const auto cert_parallel = gncg::certificates_parallel(kkts);
  const double cert_parallel_ms = ms_since(t0);
  bool cert_same = cert_serial.size() == cert_parallel.size();
  for (size_t i = 0; cert_same && i < cert_serial.size(); ++i) {
    cert_same = cert_serial[i].min_eig_A == cert_parallel[i].min_eig_A &&
                cert_serial[i].min_eig_Q == cert_parallel[i].min_eig_Q;
  }
  std::printf("%-24s %12.2f %12.2f %8.2fx %10s\n", "certificates", cert_serial_ms,
              cert_parallel_ms, cert_serial_ms / cert_parallel_ms, cert_same ? "yes" : "NO");
  return cert_same ? 0 : 1;
}
