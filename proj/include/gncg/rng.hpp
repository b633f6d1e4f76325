// Copyright (c) gncg contributors
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <Eigen/Core>

namespace gncg {

/// Deterministic random source. Draws are generated from a mt19937_64 core
/// with explicit double conversion and a polar-method normal, so a given
/// (seed, stream) pair produces the same sequence on every build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32)};
    engine_.seed(seq);
  }

  Rng(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32), stream};
    engine_.seed(seq);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi). Degenerate lo == hi yields the constant lo.
  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  /// Standard normal via the Marsaglia polar method (one spare cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  Eigen::VectorXd normal_vector(Eigen::Index n) {
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = normal();
    return out;
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Named substreams derived from one master seed. Each consumer owns its
/// stream, so e.g. changing how noise is drawn never shifts the signal
/// sequence.
enum class RngStream : std::uint32_t {
  kSignals = 1,
  kNoise = 2,
  kSolverStarts = 3,
  kProbe = 4,
};

inline Rng make_stream(std::uint64_t master_seed, RngStream stream) {
  return Rng(master_seed, static_cast<std::uint32_t>(stream));
}

}  // namespace gncg
