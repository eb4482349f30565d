#pragma once

#include <cstdint>
#include <random>

namespace grw {

/// Seeded random substream. Two streams with equal (seed, stream) produce the
/// same variates on one build; different stream ids give independent sequences.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// Uniform on [0, 1).
  double uniform();
  double normal(double mean, double stddev);
  double exponential(double rate);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

}  // namespace grw
