// Copyright (c) gncg contributors
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gncg/batch.hpp"
#include "gncg/forward.hpp"
#include "gncg/identifier.hpp"
#include "gncg/kkt_loss.hpp"

namespace gncg {

/// Shortest representation that round-trips the double exactly.
std::string format_double(double v);

/// FNV-1a over the raw bytes; used to tag metric files with the stream that
/// produced them.
std::uint64_t fnv1a(const std::string& bytes);

// ---------------------------------------------------------------------------
// Observation streams.
//
// Layout (exact): header "round,u_1,..,u_d,y_1,..,y_n" followed by one line
// per round with strictly increasing 1-based round numbers.
// ---------------------------------------------------------------------------

std::string observations_to_csv(std::span<const Observation> stream);
void write_observations_csv(const std::string& path, std::span<const Observation> stream);

/// Parses the documented layout. Malformed lines and non-monotone round
/// numbers raise std::runtime_error naming the offending line.
std::vector<Observation> parse_observations_csv(std::istream& in);
std::vector<Observation> read_observations_csv(const std::string& path);

// ---------------------------------------------------------------------------
// Metric files. Each begins with a "# schema: ..." comment carrying the
// format version and the hash of the observation stream, then a header row.
// Wall-time columns are the only nondeterministic ones.
// ---------------------------------------------------------------------------

/// trajectory.csv: k,theta_1..theta_n',loss,residual,wall_time_s.
/// Rows 1..K hold the estimate entering each round; one trailing row K+1
/// carries the final estimate with nan metrics.
std::string trajectory_to_csv(const Trajectory& traj, std::uint64_t stream_hash);

/// regret.csv: k,cum_online_loss,cum_batch_loss,regret,avg_regret,deviation,
/// bound,batch_wall_time_s,online_wall_time_s.
std::string regret_report_to_csv(const RegretReport& report, std::uint64_t stream_hash);

/// certificates.csv: round,min_eig_A,r_idempotence,min_eig_R,min_eig_P,
/// min_eig_Q,rank,rank_expected,reduced_enabled.
std::string certificates_to_csv(std::span<const CertificateReport> reports,
                                std::uint64_t stream_hash);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Stream hash recorded in a metric file header, 0 if absent.
std::uint64_t metric_stream_hash(const std::string& csv);

/// Parsed regret report (wall-time columns included), for the compare tool.
RegretReport parse_regret_csv(const std::string& csv);

}  // namespace gncg
