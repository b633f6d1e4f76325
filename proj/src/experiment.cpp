// Copyright (c) gncg contributors
#include "gncg/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "gncg/kernels.hpp"

namespace gncg {

namespace {

constexpr long kMaxSignalDraws = 1000000;
constexpr int kLipschitzPairsPerObservation = 64;

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  size_t e = s.find_last_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') {
    throw std::invalid_argument("config: key '" + key + "' has malformed number '" + v + "'");
  }
  return d;
}

long to_long(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const long d = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') {
    throw std::invalid_argument("config: key '" + key + "' has malformed integer '" + v + "'");
  }
  return d;
}

bool to_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config: key '" + key + "' must be true or false");
}

std::vector<double> to_double_list(const std::string& v, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) {
      throw std::invalid_argument("config: key '" + key + "' has an empty list entry");
    }
    out.push_back(to_double(item, key));
  }
  if (out.empty()) throw std::invalid_argument("config: key '" + key + "' has an empty list");
  return out;
}

Range to_range(const std::string& v, const std::string& key) {
  const std::vector<double> vals = to_double_list(v, key);
  if (vals.size() != 2) {
    throw std::invalid_argument("config: key '" + key + "' must be 'lo, hi'");
  }
  return Range{vals[0], vals[1]};
}

Eigen::VectorXd to_vector(const std::string& v, const std::string& key) {
  const std::vector<double> vals = to_double_list(v, key);
  return Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

std::string mu_tag(double mu1) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", mu1);
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (players < 1) throw std::invalid_argument("config: players must be >= 1");
  if (rounds < 1) throw std::invalid_argument("config: rounds must be >= 1");
  if (!(theta_max > 0.0)) throw std::invalid_argument("config: theta_max must be positive");
  if (!(noise_scale >= 0.0)) throw std::invalid_argument("config: noise_scale must be >= 0");
  if (mu1.empty()) throw std::invalid_argument("config: need at least one mu1");
  for (double m : mu1) {
    if (!(m > 0.0)) throw std::invalid_argument("config: every mu1 must be positive");
  }
  for (const auto& [nm, r] : {std::pair<const char*, Range>{"a_range", a_range},
                              {"b_magnitude_range", b_magnitude_range},
                              {"q_range", q_range}}) {
    if (!(r.lo <= r.hi)) {
      throw std::invalid_argument(std::string("config: ") + nm + " must satisfy lo <= hi");
    }
  }
  if (theta_true.size() != players) {
    throw std::invalid_argument("config: theta_true must have one entry per player");
  }
  if ((theta_true.array() < 0.0).any() || (theta_true.array() > theta_max).any()) {
    throw std::invalid_argument("config: theta_true must lie in [0, theta_max]^N");
  }
  if (theta_init && theta_init->size() != players) {
    throw std::invalid_argument("config: theta_init must have one entry per player");
  }
  if (out_dir.empty()) throw std::invalid_argument("config: out_dir must not be empty");
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  bool theta_true_seen = false;

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty()) {
      throw std::invalid_argument("config: key '" + key + "' has no value");
    }

    if (key == "game") {
      cfg.game_name = value;
    } else if (key == "players") {
      cfg.players = static_cast<int>(to_long(value, key));
    } else if (key == "theta_true") {
      cfg.theta_true = to_vector(value, key);
      theta_true_seen = true;
    } else if (key == "theta_max") {
      cfg.theta_max = to_double(value, key);
    } else if (key == "rounds") {
      cfg.rounds = static_cast<int>(to_long(value, key));
    } else if (key == "mu1") {
      cfg.mu1 = to_double_list(value, key);
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(to_long(value, key));
    } else if (key == "noise_scale") {
      cfg.noise_scale = to_double(value, key);
    } else if (key == "a_range") {
      cfg.a_range = to_range(value, key);
    } else if (key == "b_magnitude_range") {
      cfg.b_magnitude_range = to_range(value, key);
    } else if (key == "q_range") {
      cfg.q_range = to_range(value, key);
    } else if (key == "b_literal_positive") {
      cfg.b_literal_positive = to_bool(value, key);
    } else if (key == "out_dir") {
      cfg.out_dir = value;
    } else if (key == "theta_init") {
      cfg.theta_init = to_vector(value, key);
    } else {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": unknown key '" + key + "'");
    }
  }
  if (!theta_true_seen) {
    throw std::invalid_argument("config: theta_true is required");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  return parse_config_text(read_text_file(path));
}

Signal sample_signal(Rng& rng, const ExperimentConfig& cfg) {
  for (long attempt = 0; attempt < kMaxSignalDraws; ++attempt) {
    const double a = rng.uniform(cfg.a_range.lo, cfg.a_range.hi);
    const double b_mag = rng.uniform(cfg.b_magnitude_range.lo, cfg.b_magnitude_range.hi);
    const double b = cfg.b_literal_positive ? b_mag : -b_mag;
    const double q = rng.uniform(cfg.q_range.lo, cfg.q_range.hi);
    if (a > 0.0 && q > 0.0 && a + b * q > 0.0) {
      Signal u;
      u.values = Eigen::Vector3d(a, b, q);
      return u;
    }
  }
  throw std::runtime_error("sample_signal: rejection cap exceeded, check the signal ranges");
}

std::vector<Observation> generate_stream(const ParametricGame& game,
                                         const ExperimentConfig& cfg) {
  Rng signals = make_stream(cfg.seed, RngStream::kSignals);
  Rng noise = make_stream(cfg.seed, RngStream::kNoise);

  std::vector<Observation> stream;
  stream.reserve(static_cast<size_t>(cfg.rounds));
  for (int k = 1; k <= cfg.rounds; ++k) {
    const Signal u = sample_signal(signals, cfg);
    EquilibriumResult eq;
    try {
      eq = (game.name == "cournot") ? cournot_closed_form(u, cfg.theta_true)
                                    : solve_ve(game, u, cfg.theta_true);
    } catch (const std::exception& e) {
      throw std::runtime_error("generate_stream: round " + std::to_string(k) + ": " + e.what());
    }
    stream.push_back(observe(eq, u, k, noise, cfg.noise_scale));
  }
  return stream;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const ParametricGame game = make_game(cfg.game_name, cfg.players, cfg.theta_max);

  ExperimentResult result;
  result.stream = generate_stream(game, cfg);
  result.stream_hash = fnv1a(observations_to_csv(result.stream));

  std::vector<KktData> kkts;
  kkts.reserve(result.stream.size());
  for (const Observation& obs : result.stream) {
    kkts.push_back(assemble_kkt(game, obs.y, obs.u));
  }
  result.certificates = certificates_parallel(kkts);

  const Eigen::VectorXd theta_init =
      cfg.theta_init ? *cfg.theta_init : game.theta_domain.midpoint();
  if (!game.theta_domain.contains(theta_init)) {
    throw std::invalid_argument("config: theta_init outside [0, theta_max]^N");
  }

  // The prefix-batch chain and the probed constants do not depend on mu1;
  // compute them once on the shared stream.
  const std::vector<PrefixSolution> prefix =
      prefix_batch_solutions(kkts, game.theta_domain, theta_init);
  const double b1_hat = game.theta_domain.corner_norm();
  Rng probe = make_stream(cfg.seed, RngStream::kProbe);
  const double c_hat =
      lipschitz_probe(kkts, game.theta_domain, probe, kLipschitzPairsPerObservation);

  for (double mu1 : cfg.mu1) {
    RunArtifacts run;
    run.mu1 = mu1;
    run.trajectory = run_online(game, result.stream, theta_init, mu1);
    run.report = build_regret_report(run.trajectory, kkts, prefix, mu1, b1_hat, c_hat);
    result.runs.push_back(std::move(run));
  }
  return result;
}

std::vector<std::string> run_experiment_to_files(const ExperimentConfig& cfg) {
  const ExperimentResult result = run_experiment(cfg);
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);

  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& content) {
    const std::string path = (fs::path(cfg.out_dir) / name).string();
    write_text_file(path, content);
    written.push_back(path);
  };

  emit("observations.csv", observations_to_csv(result.stream));
  emit("certificates.csv", certificates_to_csv(result.certificates, result.stream_hash));
  for (const RunArtifacts& run : result.runs) {
    emit("trajectory_mu" + mu_tag(run.mu1) + ".csv",
         trajectory_to_csv(run.trajectory, result.stream_hash));
    emit("regret_mu" + mu_tag(run.mu1) + ".csv",
         regret_report_to_csv(run.report, result.stream_hash));
  }
  if (result.runs.size() >= 2) {
    std::vector<RegretReport> reports;
    std::vector<std::uint64_t> hashes(result.runs.size(), result.stream_hash);
    for (const RunArtifacts& run : result.runs) reports.push_back(run.report);
    emit("lr_compare.csv",
         learning_rate_summary_to_csv(compare_learning_rates(reports, hashes)));
  }
  return written;
}

LearningRateSummary compare_learning_rates(std::span<const RegretReport> reports,
                                           std::span<const std::uint64_t> stream_hashes) {
  if (reports.size() < 2) {
    throw std::invalid_argument("compare: need at least two reports");
  }
  if (stream_hashes.size() != reports.size()) {
    throw std::invalid_argument("compare: one stream hash per report required");
  }
  for (size_t i = 1; i < stream_hashes.size(); ++i) {
    if (stream_hashes[i] != stream_hashes[0]) {
      throw std::invalid_argument("compare: reports come from different observation streams");
    }
  }

  LearningRateSummary summary;
  for (const RegretReport& rep : reports) {
    if (rep.avg_regret.empty()) throw std::invalid_argument("compare: empty report");
    summary.mu1.push_back(rep.mu1);
    summary.final_avg_regret.push_back(rep.avg_regret.back());
  }
  summary.order.resize(reports.size());
  std::iota(summary.order.begin(), summary.order.end(), 0);
  std::stable_sort(summary.order.begin(), summary.order.end(), [&](int a, int b) {
    return summary.final_avg_regret[static_cast<size_t>(a)] <
           summary.final_avg_regret[static_cast<size_t>(b)];
  });
  return summary;
}

std::string learning_rate_summary_to_csv(const LearningRateSummary& summary) {
  std::ostringstream out;
  out << "# schema: gncg.lr_compare.v1\n";
  out << "mu1,final_avg_regret,rank\n";
  std::vector<int> rank(summary.mu1.size());
  for (size_t pos = 0; pos < summary.order.size(); ++pos) {
    rank[static_cast<size_t>(summary.order[pos])] = static_cast<int>(pos) + 1;
  }
  for (size_t i = 0; i < summary.mu1.size(); ++i) {
    out << format_double(summary.mu1[i]) << "," << format_double(summary.final_avg_regret[i])
        << "," << rank[i] << "\n";
  }
  return out.str();
}

std::vector<Observation> ingest_stream(const std::string& path, const ParametricGame& game) {
  std::vector<Observation> stream = read_observations_csv(path);
  for (const Observation& obs : stream) {
    if (obs.u.size() != game.signal_dim || obs.y.size() != game.strategy_dim()) {
      throw std::runtime_error("ingest: round " + std::to_string(obs.round) +
                               " does not match the game dimensions");
    }
    try {
      game.check_signal(obs.u);
    } catch (const std::exception& e) {
      throw std::runtime_error("ingest: round " + std::to_string(obs.round) + ": " + e.what());
    }
  }
  return stream;
}

}  // namespace gncg
