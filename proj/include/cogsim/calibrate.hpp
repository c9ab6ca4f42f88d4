#pragma once

// Solo-channel primary throughput reference: a silent-secondary run of the
// same physics, long horizon, dedicated seed. Cached per physics key so a
// sweep cell reuses one value across policies and replications.

#include <cstdint>
#include <map>
#include <mutex>
#include <sstream>
#include <string>

#include "cogsim/sim.hpp"

namespace cogsim {

inline constexpr std::uint64_t kCalibrationSeed = 0x5eed0ca1;
inline constexpr std::uint64_t kCalibrationSlots = 1000000;

namespace detail {

inline std::string calibration_key(const SimConfig& c, std::uint64_t slots, std::uint64_t seed) {
  std::ostringstream os;
  os.precision(17);
  os << c.lambda1 << '|' << c.buffer << '|' << c.max_retry << '|';
  for (int w : c.windows) os << w << ',';
  os << '|' << c.rho << '|' << c.packet_slots << '|' << c.difs_slots
     << '|' << slots << '|' << seed;
  return os.str();
}

}  // namespace detail

inline double theta_p_max(const SimConfig& cfg, std::uint64_t slots = kCalibrationSlots,
                          std::uint64_t seed = kCalibrationSeed) {
  static std::map<std::string, double> cache;
  static std::mutex mtx;
  std::string key = detail::calibration_key(cfg, slots, seed);
  {
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  SimConfig solo = cfg;
  solo.seed = seed;
  SilentPolicy silent;
  RunResult run = run_simulation(solo, silent, slots);
  double theta = primary_throughput(run.metrics);
  std::lock_guard<std::mutex> lock(mtx);
  cache.emplace(key, theta);
  return theta;
}

}  // namespace cogsim
