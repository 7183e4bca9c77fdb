#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fraudscore {

/// Seeded generator whose draws are identical across standard libraries.
///
/// Only the engine (std::mt19937_64, fully specified by the standard) is
/// borrowed from <random>; the distributions are implemented here because the
/// std:: distribution algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Generator for an independent substream, keyed by (seed, tag, index).
  static Rng substream(std::uint64_t seed, std::string_view tag, std::uint64_t index);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on (0, 1].
  double uniform_open0();
  double normal(double mean = 0.0, double stddev = 1.0);
  /// Gamma with integer shape (sum of exponentials), scale parameterization.
  double gamma_int_shape(int shape, double scale);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace fraudscore
