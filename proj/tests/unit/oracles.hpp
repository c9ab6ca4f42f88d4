#pragma once

// Independent closed-form references used to check the simulator. These are
// derived by renewal-reward arguments directly from the slot rules and never
// touch the simulation code paths.
//
// Solo saturated primary, one attempt at stage b:
//   difs_slots idle observations + counter (uniform on [0, w_b-1]) wait slots
//   + packet_slots of airtime. A stage-b attempt happens with probability
//   rho^(b-1); the packet dies after m failures.
//
// Solo secondary with mean drawn counter c̄:
//   cycle = difs_slots + c̄ + packet_slots, delivering packet_slots payload
//   slots with probability 1 - nu.

#include <cmath>
#include <cstdint>
#include <vector>

#include "cogsim/config.hpp"

namespace oracles {

inline double solo_primary_saturated_theta(const cogsim::SimConfig& c) {
  double expected_service = 0.0;
  double reach = 1.0;  // probability the attempt at stage b happens
  for (int b = 1; b <= c.max_retry; ++b) {
    double mean_counter = (c.windows[b - 1] - 1) / 2.0;
    expected_service += reach * (c.difs_slots + mean_counter + c.packet_slots);
    reach *= c.rho;
  }
  double delivered = (1.0 - std::pow(c.rho, c.max_retry)) * c.packet_slots;
  return delivered / expected_service;
}

inline double solo_primary_drop_ratio(const cogsim::SimConfig& c) {
  return std::pow(c.rho, c.max_retry);
}

inline double solo_secondary_theta(const cogsim::SimConfig& c, double mean_counter) {
  return (1.0 - c.nu) * c.packet_slots / (c.difs_slots + mean_counter + c.packet_slots);
}

// Pearson statistic against equal cell probabilities.
inline double chi_square_uniform(const std::vector<std::uint64_t>& counts) {
  std::uint64_t n = 0;
  for (auto c : counts) n += c;
  double expected = static_cast<double>(n) / counts.size();
  double stat = 0.0;
  for (auto c : counts) {
    double d = c - expected;
    stat += d * d / expected;
  }
  return stat;
}

// 99th percentile of chi-square, i.e. reject at p < 0.01.
inline double chi_square_crit_p01(int df) {
  switch (df) {
    case 1: return 6.635;
    case 2: return 9.210;
    case 3: return 11.345;
    case 4: return 13.277;
    case 5: return 15.086;
    case 6: return 16.812;
    case 7: return 18.475;
    case 8: return 20.090;
    case 9: return 21.666;
    default: return df + 3.0 * std::sqrt(2.0 * df);  // coarse for larger df
  }
}

}  // namespace oracles
