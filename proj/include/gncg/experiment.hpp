// Copyright (c) gncg contributors
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>
#include <Eigen/Core>

#include "gncg/batch.hpp"
#include "gncg/forward.hpp"
#include "gncg/game.hpp"
#include "gncg/io.hpp"
#include "gncg/rng.hpp"

namespace gncg {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Full description of one experiment run. Parsed from a flat key=value
/// config file; unknown keys are rejected.
struct ExperimentConfig {
  std::string game_name = "cournot";
  int players = 3;
  Eigen::VectorXd theta_true;
  double theta_max = 100.0;
  int rounds = 100;
  std::vector<double> mu1 = {0.1};
  std::uint64_t seed = 1;
  double noise_scale = 1.0;
  Range a_range{15.0, 1800.0};
  Range b_magnitude_range{1.0, 120.0};
  Range q_range{5.0, 600.0};
  /// Keep the sampled slope positive instead of negating its magnitude
  /// (sensitivity runs only; the market model itself needs b < 0).
  bool b_literal_positive = false;
  std::string out_dir = "out";
  std::optional<Eigen::VectorXd> theta_init;  // default: box midpoint

  void validate() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// One Cournot signal: a and q uniform on their ranges, b the negated
/// magnitude draw; resampled until the price at the demand floor stays
/// positive (a + b q > 0). Throws after 10^6 rejected draws.
Signal sample_signal(Rng& rng, const ExperimentConfig& cfg);

/// The K-round observation stream: per round, sample the signal, solve the
/// equilibrium at theta_true, add noise. Signals and noise come from separate
/// substreams of the master seed, so noise settings never shift the signals.
std::vector<Observation> generate_stream(const ParametricGame& game,
                                         const ExperimentConfig& cfg);

/// Everything one run produces for a single mu1 on a shared stream.
struct RunArtifacts {
  double mu1 = 0.0;
  Trajectory trajectory;
  RegretReport report;
};

struct ExperimentResult {
  std::vector<Observation> stream;
  std::uint64_t stream_hash = 0;
  std::vector<CertificateReport> certificates;
  std::vector<RunArtifacts> runs;  // one per mu1
};

/// In-memory experiment: one stream shared across every mu1, online and
/// prefix-batch identification per mu1, certificates for the stream.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// run_experiment plus file emission into cfg.out_dir:
///   observations.csv, certificates.csv, trajectory_mu<v>.csv,
///   regret_mu<v>.csv and lr_compare.csv when several mu1 are given.
/// Returns the list of written paths.
std::vector<std::string> run_experiment_to_files(const ExperimentConfig& cfg);

/// Final average regret per mu1 and the induced ordering. All reports must
/// carry the same stream hash.
struct LearningRateSummary {
  std::vector<double> mu1;
  std::vector<double> final_avg_regret;
  std::vector<int> order;  // indices sorted by final average regret, best first
};
LearningRateSummary compare_learning_rates(std::span<const RegretReport> reports,
                                           std::span<const std::uint64_t> stream_hashes);
std::string learning_rate_summary_to_csv(const LearningRateSummary& summary);

/// Observation stream ingestion (documented CSV layout), validated against
/// the game's dimensions.
std::vector<Observation> ingest_stream(const std::string& path, const ParametricGame& game);

}  // namespace gncg
