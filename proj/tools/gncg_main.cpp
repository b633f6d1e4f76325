// Copyright (c) gncg contributors
//
// Command line driver: reproduces the natural-gas-market identification
// experiments end to end and offers stream ingestion, certificate audits and
// learning-rate comparison over emitted report files.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gncg/experiment.hpp"
#include "gncg/kernels.hpp"

namespace {

Eigen::VectorXd parse_vector_arg(const std::string& csv) {
  std::vector<double> vals;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
  return Eigen::Map<const Eigen::VectorXd>(vals.data(),
                                           static_cast<Eigen::Index>(vals.size()));
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<int> rounds, const std::vector<double>& mu1,
            std::optional<double> noise_scale, const std::string& out_dir,
            const std::string& theta_init) {
  gncg::ExperimentConfig cfg = gncg::load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (rounds) cfg.rounds = *rounds;
  if (!mu1.empty()) cfg.mu1 = mu1;
  if (noise_scale) cfg.noise_scale = *noise_scale;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (!theta_init.empty()) cfg.theta_init = parse_vector_arg(theta_init);
  cfg.validate();

  const std::vector<std::string> written = gncg::run_experiment_to_files(cfg);
  for (const std::string& path : written) std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_ingest_run(const std::string& obs_path, const std::string& game_name, int players,
                   double theta_max, double mu1, const std::string& theta_init,
                   const std::string& out_dir, bool skip_regret) {
  const gncg::ParametricGame game = gncg::make_game(game_name, players, theta_max);
  const std::vector<gncg::Observation> stream = gncg::ingest_stream(obs_path, game);
  const std::uint64_t stream_hash = gncg::fnv1a(gncg::observations_to_csv(stream));

  Eigen::VectorXd init =
      theta_init.empty() ? game.theta_domain.midpoint() : parse_vector_arg(theta_init);
  const gncg::Trajectory traj = gncg::run_online(game, stream, init, mu1);

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string traj_path = (fs::path(out_dir) / "trajectory.csv").string();
  gncg::write_text_file(traj_path, gncg::trajectory_to_csv(traj, stream_hash));
  std::cout << "wrote " << traj_path << "\n";

  if (!skip_regret && !stream.empty()) {
    std::vector<gncg::KktData> kkts;
    for (const gncg::Observation& obs : stream) {
      kkts.push_back(gncg::assemble_kkt(game, obs.y, obs.u));
    }
    const auto prefix = gncg::prefix_batch_solutions(kkts, game.theta_domain, init);
    gncg::Rng probe(stream_hash);
    const double c_hat = gncg::lipschitz_probe(kkts, game.theta_domain, probe, 64);
    const gncg::RegretReport report = gncg::build_regret_report(
        traj, kkts, prefix, mu1, game.theta_domain.corner_norm(), c_hat);
    const std::string regret_path = (fs::path(out_dir) / "regret.csv").string();
    gncg::write_text_file(regret_path, gncg::regret_report_to_csv(report, stream_hash));
    std::cout << "wrote " << regret_path << "\n";
  }
  return 0;
}

int cmd_certify(const std::string& obs_path, const std::string& game_name, int players,
                double theta_max, const std::string& out_path) {
  const gncg::ParametricGame game = gncg::make_game(game_name, players, theta_max);
  const std::vector<gncg::Observation> stream = gncg::ingest_stream(obs_path, game);
  const std::uint64_t stream_hash = gncg::fnv1a(gncg::observations_to_csv(stream));

  std::vector<gncg::KktData> kkts;
  for (const gncg::Observation& obs : stream) {
    kkts.push_back(gncg::assemble_kkt(game, obs.y, obs.u));
  }
  const auto reports = gncg::certificates_parallel(kkts);
  const std::string csv = gncg::certificates_to_csv(reports, stream_hash);
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    gncg::write_text_file(out_path, csv);
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

int cmd_compare(const std::vector<std::string>& report_paths, const std::string& out_path) {
  std::vector<gncg::RegretReport> reports;
  std::vector<std::uint64_t> hashes;
  for (const std::string& path : report_paths) {
    const std::string csv = gncg::read_text_file(path);
    reports.push_back(gncg::parse_regret_csv(csv));
    hashes.push_back(gncg::metric_stream_hash(csv));
  }
  const gncg::LearningRateSummary summary = gncg::compare_learning_rates(reports, hashes);
  const std::string csv = gncg::learning_rate_summary_to_csv(summary);
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    gncg::write_text_file(out_path, csv);
    std::cout << "wrote " << out_path << "\n";
  }
  std::cout << "ordering (best first):";
  for (int idx : summary.order) {
    std::printf(" mu1=%g", summary.mu1[static_cast<size_t>(idx)]);
  }
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online parameter identification for generalized non-cooperative games"};
  app.require_subcommand(1);

  // run
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> rounds;
  std::vector<double> mu1_list;
  std::optional<double> noise_scale;
  std::string out_dir;
  std::string theta_init;
  CLI::App* run = app.add_subcommand("run", "Run a configured experiment end to end");
  run->add_option("config", config_path, "Path to the key=value config file")->required();
  run->add_option("--seed", seed, "Override the master seed");
  run->add_option("--rounds", rounds, "Override the number of rounds");
  run->add_option("--mu1", mu1_list, "Override the mu1 list (repeatable)");
  run->add_option("--noise-scale", noise_scale, "Override the observation noise scale");
  run->add_option("--out-dir", out_dir, "Override the output directory");
  run->add_option("--theta-init", theta_init, "Initial estimate, comma separated");

  // ingest-run
  std::string obs_path;
  std::string game_name = "cournot";
  int players = 3;
  double theta_max = 100.0;
  double mu1_single = 0.1;
  std::string ingest_theta_init;
  std::string ingest_out_dir = "out";
  bool skip_regret = false;
  CLI::App* ingest =
      app.add_subcommand("ingest-run", "Run the identifier on an external observation file");
  ingest->add_option("observations", obs_path, "Observation CSV path")->required();
  ingest->add_option("--game", game_name, "Game name (default cournot)");
  ingest->add_option("--players", players, "Number of players");
  ingest->add_option("--theta-max", theta_max, "Upper bound of the parameter box");
  ingest->add_option("--mu1", mu1_single, "Learning rate scale");
  ingest->add_option("--theta-init", ingest_theta_init, "Initial estimate, comma separated");
  ingest->add_option("--out-dir", ingest_out_dir, "Output directory");
  ingest->add_flag("--no-regret", skip_regret, "Skip the prefix-batch regret report");

  // certify
  std::string cert_obs_path;
  std::string cert_game = "cournot";
  int cert_players = 3;
  double cert_theta_max = 100.0;
  std::string cert_out;
  CLI::App* certify =
      app.add_subcommand("certify", "Emit the matrix certificate log for a stream");
  certify->add_option("observations", cert_obs_path, "Observation CSV path")->required();
  certify->add_option("--game", cert_game, "Game name (default cournot)");
  certify->add_option("--players", cert_players, "Number of players");
  certify->add_option("--theta-max", cert_theta_max, "Upper bound of the parameter box");
  certify->add_option("--out", cert_out, "Output file (stdout when omitted)");

  // compare
  std::vector<std::string> report_paths;
  std::string compare_out;
  CLI::App* compare =
      app.add_subcommand("compare", "Summarize learning rates over regret report files");
  compare->add_option("reports", report_paths, "Two or more regret CSV files")
      ->required()
      ->expected(-2);
  compare->add_option("--out", compare_out, "Output file (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(config_path, seed, rounds, mu1_list, noise_scale, out_dir, theta_init);
    }
    if (ingest->parsed()) {
      return cmd_ingest_run(obs_path, game_name, players, theta_max, mu1_single,
                            ingest_theta_init, ingest_out_dir, skip_regret);
    }
    if (certify->parsed()) {
      return cmd_certify(cert_obs_path, cert_game, cert_players, cert_theta_max, cert_out);
    }
    if (compare->parsed()) {
      return cmd_compare(report_paths, compare_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
