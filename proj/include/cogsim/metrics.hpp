#pragma once

#include <cstdint>
#include <stdexcept>

#include "cogsim/config.hpp"

namespace cogsim {

// Running counters for one simulation. Throughputs are payload-slots per
// slot, so they stay in [0, 1] and compare across packet_slots settings.
struct Metrics {
  std::uint64_t slots = 0;
  std::uint64_t p_delivered_slots = 0;
  std::uint64_t s_delivered_slots = 0;
  std::uint64_t x2_count = 0;   // primary packets dropped after the last allowed attempt
  std::uint64_t x3_count = 0;   // primary first-attempt transmission starts
  double theta_p_max = 0.0;     // solo-channel primary throughput reference
  std::uint64_t arrivals_dropped = 0;   // buffer overflow
  std::uint64_t arrivals_admitted = 0;
  std::uint64_t primary_completions = 0;
  bool feedback_ok = true;      // latched constraint bit, refreshed at primary completions

  // Per-attempt failure accounting, split by whether the packet's airtime
  // overlapped the other transmitter.
  std::uint64_t p_attempts_clear = 0;
  std::uint64_t p_failures_clear = 0;
  std::uint64_t p_attempts_overlap = 0;
  std::uint64_t p_failures_overlap = 0;
};

inline double throughput(std::uint64_t delivered_slots, std::uint64_t slots) {
  if (slots == 0) throw std::invalid_argument("throughput: slots must be >= 1");
  return static_cast<double>(delivered_slots) / static_cast<double>(slots);
}

// Dropped-after-m packets over packets serviced; 0 before any service start.
inline double failure_ratio(const Metrics& m) {
  if (m.x3_count == 0) return 0.0;
  return static_cast<double>(m.x2_count) / static_cast<double>(m.x3_count);
}

inline double primary_throughput(const Metrics& m) {
  return m.slots ? throughput(m.p_delivered_slots, m.slots) : 0.0;
}

inline double secondary_throughput(const Metrics& m) {
  return m.slots ? throughput(m.s_delivered_slots, m.slots) : 0.0;
}

// Constraint-satisfaction bit, boundary inclusive.
inline bool feedback_bit(const Metrics& m, const SimConfig& cfg) {
  if (cfg.constraint_mode == ConstraintMode::kThroughputLoss)
    return m.theta_p_max - primary_throughput(m) <= cfg.gamma1;
  return failure_ratio(m) <= cfg.gamma2;
}

}  // namespace cogsim
