// Copyright (c) gncg contributors
#include "gncg/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gncg {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, int line_no) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw std::runtime_error("csv line " + std::to_string(line_no) +
                             ": malformed number '" + s + "'");
  }
  return v;
}

long parse_long(const std::string& s, int line_no) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') {
    throw std::runtime_error("csv line " + std::to_string(line_no) +
                             ": malformed integer '" + s + "'");
  }
  return v;
}

std::string schema_line(const std::string& name, std::uint64_t stream_hash) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(stream_hash));
  return "# schema: " + name + " stream=" + buf + "\n";
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  // Shortest decimal form that parses back to the same double.
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char ch : bytes) {
    hash ^= ch;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::string observations_to_csv(std::span<const Observation> stream) {
  std::ostringstream out;
  const Eigen::Index d = stream.empty() ? 3 : stream.front().u.size();
  const Eigen::Index n = stream.empty() ? 3 : stream.front().y.size();
  out << "round";
  for (Eigen::Index i = 1; i <= d; ++i) out << ",u_" << i;
  for (Eigen::Index i = 1; i <= n; ++i) out << ",y_" << i;
  out << "\n";
  for (const Observation& obs : stream) {
    out << obs.round;
    for (Eigen::Index i = 0; i < obs.u.size(); ++i) out << "," << format_double(obs.u[i]);
    for (Eigen::Index i = 0; i < obs.y.size(); ++i) out << "," << format_double(obs.y[i]);
    out << "\n";
  }
  return out.str();
}

void write_observations_csv(const std::string& path, std::span<const Observation> stream) {
  write_text_file(path, observations_to_csv(stream));
}

std::vector<Observation> parse_observations_csv(std::istream& in) {
  std::string line;
  int line_no = 0;

  if (!std::getline(in, line)) throw std::runtime_error("observations: empty file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split(line, ',');
  if (header.empty() || header[0] != "round") {
    throw std::runtime_error("observations: header must start with 'round'");
  }
  Eigen::Index d = 0, n = 0;
  for (size_t i = 1; i < header.size(); ++i) {
    if (header[i].rfind("u_", 0) == 0 && n == 0) {
      ++d;
    } else if (header[i].rfind("y_", 0) == 0) {
      ++n;
    } else {
      throw std::runtime_error("observations: unexpected header column '" + header[i] + "'");
    }
  }
  if (d == 0 || n == 0) {
    throw std::runtime_error("observations: header must list u_* then y_* columns");
  }

  std::vector<Observation> out;
  int expected_round = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() != static_cast<size_t>(1 + d + n)) {
      throw std::runtime_error("csv line " + std::to_string(line_no) +
                               ": expected " + std::to_string(1 + d + n) + " cells, got " +
                               std::to_string(cells.size()));
    }
    Observation obs;
    obs.round = static_cast<int>(parse_long(cells[0], line_no));
    if (obs.round != expected_round) {
      throw std::runtime_error("csv line " + std::to_string(line_no) +
                               ": round numbers must increase consecutively from 1, got " +
                               cells[0]);
    }
    ++expected_round;
    obs.u.values.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      obs.u.values[i] = parse_double(cells[static_cast<size_t>(1 + i)], line_no);
    }
    obs.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      obs.y[i] = parse_double(cells[static_cast<size_t>(1 + d + i)], line_no);
    }
    if (!obs.y.allFinite() || !obs.u.values.allFinite()) {
      throw std::runtime_error("csv line " + std::to_string(line_no) + ": non-finite entry");
    }
    out.push_back(std::move(obs));
  }
  return out;
}

std::vector<Observation> read_observations_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_observations_csv(in);
}

std::string trajectory_to_csv(const Trajectory& traj, std::uint64_t stream_hash) {
  std::ostringstream out;
  out << schema_line("gncg.trajectory.v1", stream_hash);
  const Eigen::Index d = traj.points.empty() ? traj.theta_final.size()
                                             : traj.points.front().theta.size();
  out << "k";
  for (Eigen::Index i = 1; i <= d; ++i) out << ",theta_" << i;
  out << ",loss,residual,wall_time_s\n";
  for (const TrajectoryPoint& pt : traj.points) {
    out << pt.round;
    for (Eigen::Index i = 0; i < d; ++i) out << "," << format_double(pt.theta[i]);
    out << "," << format_double(pt.loss) << "," << format_double(pt.residual) << ","
        << format_double(pt.wall_time_s) << "\n";
  }
  // Final estimate: one trailing row without per-round metrics.
  if (traj.theta_final.size() == d && d > 0) {
    out << (traj.points.size() + 1);
    for (Eigen::Index i = 0; i < d; ++i) out << "," << format_double(traj.theta_final[i]);
    out << ",nan,nan,nan\n";
  }
  return out.str();
}

std::string regret_report_to_csv(const RegretReport& report, std::uint64_t stream_hash) {
  std::ostringstream out;
  out << schema_line("gncg.regret.v1", stream_hash);
  out << "# mu1=" << format_double(report.mu1) << " b1_hat=" << format_double(report.b1_hat)
      << " c_hat=" << format_double(report.c_hat) << "\n";
  out << "k,cum_online_loss,cum_batch_loss,regret,avg_regret,deviation,bound,"
         "batch_wall_time_s,online_wall_time_s\n";
  for (int k = 1; k <= report.rounds(); ++k) {
    const int i = k - 1;
    out << k << "," << format_double(report.cum_online[i]) << ","
        << format_double(report.cum_batch[i]) << "," << format_double(report.regret[i]) << ","
        << format_double(report.avg_regret[i]) << "," << format_double(report.deviation[i])
        << "," << format_double(report.bound[i]) << ","
        << format_double(report.batch_wall_time_s[i]) << ","
        << format_double(report.online_wall_time_s[i]) << "\n";
  }
  return out.str();
}

std::string certificates_to_csv(std::span<const CertificateReport> reports,
                                std::uint64_t stream_hash) {
  std::ostringstream out;
  out << schema_line("gncg.certificates.v1", stream_hash);
  out << "round,min_eig_A,r_idempotence,min_eig_R,min_eig_P,min_eig_Q,rank,rank_expected,"
         "reduced_enabled\n";
  for (const CertificateReport& r : reports) {
    out << r.round << "," << format_double(r.min_eig_A) << ","
        << format_double(r.r_idempotence) << "," << format_double(r.min_eig_R) << ","
        << format_double(r.min_eig_P) << "," << format_double(r.min_eig_Q) << "," << r.rank
        << "," << r.rank_expected << "," << (r.reduced_enabled ? 1 : 0) << "\n";
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t metric_stream_hash(const std::string& csv) {
  const std::string key = "stream=";
  const size_t pos = csv.find(key);
  if (pos == std::string::npos) return 0;
  return std::strtoull(csv.c_str() + pos + key.size(), nullptr, 16);
}

RegretReport parse_regret_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  RegretReport rep;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const size_t mu_pos = line.find("mu1=");
      if (mu_pos != std::string::npos) {
        rep.mu1 = std::strtod(line.c_str() + mu_pos + 4, nullptr);
      }
      continue;
    }
    if (!header_seen) {
      if (line.rfind("k,", 0) != 0) {
        throw std::runtime_error("regret csv: unexpected header '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() != 9) {
      throw std::runtime_error("regret csv line " + std::to_string(line_no) +
                               ": expected 9 cells");
    }
    rep.cum_online.push_back(parse_double(cells[1], line_no));
    rep.cum_batch.push_back(parse_double(cells[2], line_no));
    rep.regret.push_back(parse_double(cells[3], line_no));
    rep.avg_regret.push_back(parse_double(cells[4], line_no));
    rep.deviation.push_back(parse_double(cells[5], line_no));
    rep.bound.push_back(parse_double(cells[6], line_no));
    rep.batch_wall_time_s.push_back(parse_double(cells[7], line_no));
    rep.online_wall_time_s.push_back(parse_double(cells[8], line_no));
  }
  return rep;
}

}  // namespace gncg
