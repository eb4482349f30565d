#include "grw/rng.hpp"

#include <cmath>

namespace grw {

namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(seeded_engine(seed, stream)) {}

double RngStream::uniform() {
  // libstdc++ may round generate_canonical up to exactly 1.
  const double u = std::generate_canonical<double, 53>(engine_);
  return u < 1.0 ? u : std::nextafter(1.0, 0.0);
}

double RngStream::normal(double mean, double stddev) {
  std::normal_distribution<double> dist(mean, stddev);
  return dist(engine_);
}

double RngStream::exponential(double rate) {
  std::exponential_distribution<double> dist(rate);
  return dist(engine_);
}

}  // namespace grw
