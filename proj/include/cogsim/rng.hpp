#pragma once

// Counter-based random streams. Every draw is a pure hash of
// (seed, stream, index, subindex), so a draw never depends on how many draws
// other subsystems made before it: runs with equal seeds are bit-identical,
// and policies evaluated under the same seed share the same random world
// (same arrivals, same per-packet decode luck) for paired comparisons.

#include <cmath>
#include <cstdint>

namespace cogsim {

enum class Stream : std::uint64_t {
  kArrivals = 1,        // one draw per slot, indexed by slot
  kPrimaryBackoff = 2,  // indexed by (service serial, stage)
  kPrimaryDecode = 3,   // indexed by (service serial, attempt)
  kSecondaryDecode = 4, // indexed by secondary attempt serial
  kAgent = 5,           // sequential draws for action selection
};

namespace detail {

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline double to_unit(std::uint64_t h) {
  // top 53 bits -> [0, 1)
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace detail

class RngBank {
 public:
  explicit RngBank(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // u in [0, 1), pure function of (seed, stream, i, j)
  double uniform(Stream s, std::uint64_t i, std::uint64_t j = 0) const {
    std::uint64_t h = detail::mix64(seed_ ^ detail::mix64(static_cast<std::uint64_t>(s)));
    h = detail::mix64(h ^ i);
    h = detail::mix64(h ^ detail::mix64(j));
    return detail::to_unit(h);
  }

  // sequential agent-stream draw
  double next_agent() { return uniform(Stream::kAgent, agent_counter_++); }

  std::uint64_t agent_draws() const { return agent_counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t agent_counter_ = 0;
};

// integer in [0, n), n >= 1
inline int uniform_int(double u, int n) {
  int k = static_cast<int>(u * n);
  return k < n ? k : n - 1;
}

// Poisson draw by CDF inversion; consumes exactly one uniform.
class PoissonSampler {
 public:
  explicit PoissonSampler(double lambda)
      : lambda_(lambda), p0_(std::exp(-lambda)) {}

  int operator()(double u) const {
    int k = 0;
    double p = p0_;
    double cdf = p0_;
    while (u > cdf && k < kCap) {
      ++k;
      p *= lambda_ / k;
      cdf += p;
    }
    return k;
  }

  double lambda() const { return lambda_; }

 private:
  static constexpr int kCap = 4096;
  double lambda_;
  double p0_;
};

}  // namespace cogsim
