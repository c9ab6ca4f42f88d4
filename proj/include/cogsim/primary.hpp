#pragma once

// Primary transmitter: DCF state machine with Poisson arrivals into a finite
// buffer, per-stage backoff with freeze-on-busy, up to max_retry attempts.
//
// Slot rules (a node acts on the previous slot's channel observation):
//   Difs    busy -> re-arm the full DIFS; idle -> decrement; at zero enter
//           Backoff, drawing a counter only if none is pending from a freeze.
//   Backoff busy -> freeze, preserve the counter, re-enter Difs;
//           idle + counter 0 -> transmit this slot; otherwise decrement.
// The slot in which DIFS completes performs no backoff action.

#include <cstdint>
#include <stdexcept>

#include "cogsim/config.hpp"
#include "cogsim/rng.hpp"

namespace cogsim {

enum class PrimaryPhase { kIdle, kDifs, kBackoff, kTransmitting };

struct PrimaryState {
  int queue_len = 0;        // packets awaiting service, including the one in service
  int stage = 0;            // 0 only in Idle; otherwise current attempt index, 1-based
  int counter = 0;          // remaining backoff slots
  bool counter_valid = false;  // a frozen counter survives the re-DIFS
  int difs_remaining = 0;
  int tx_remaining = 0;
  PrimaryPhase phase = PrimaryPhase::kIdle;
  bool tx_interfered = false;  // any airtime slot overlapped by the secondary
  std::uint64_t service_serial = 0;  // 1-based id of the packet in service
};

struct ArrivalResult {
  int admitted = 0;
  int dropped = 0;
};

struct PrimaryStepResult {
  bool transmitting = false;
  bool completed = false;            // final airtime slot reached this slot
  bool tx_started = false;
  bool first_attempt_started = false;  // a fresh packet's stage-1 transmission began
};

struct CompletionEvents {
  bool delivered = false;
  bool dropped = false;
  bool new_service_started = false;  // next queued packet entered service
};

namespace detail {

inline void begin_service(PrimaryState& st, const SimConfig& cfg) {
  st.stage = 1;
  st.counter = 0;
  st.counter_valid = false;
  st.phase = PrimaryPhase::kDifs;
  st.difs_remaining = cfg.difs_slots;
  ++st.service_serial;
}

}  // namespace detail

// One Poisson draw per slot (indexed by slot, so arrival paths are shared
// across policies run under the same seed). Overflow beyond the buffer is
// dropped and reported.
inline ArrivalResult apply_arrivals(PrimaryState& st, const SimConfig& cfg,
                                    const PoissonSampler& sampler, const RngBank& rng,
                                    std::uint64_t slot) {
  ArrivalResult res;
  int k = sampler(rng.uniform(Stream::kArrivals, slot));
  res.admitted = std::min(k, cfg.buffer - st.queue_len);
  res.dropped = k - res.admitted;
  st.queue_len += res.admitted;
  if (st.phase == PrimaryPhase::kIdle && st.queue_len > 0)
    detail::begin_service(st, cfg);
  return res;
}

inline PrimaryStepResult primary_slot_step(PrimaryState& st, bool channel_busy_prev,
                                           const SimConfig& cfg, const RngBank& rng) {
  PrimaryStepResult res;
  switch (st.phase) {
    case PrimaryPhase::kIdle:
      break;
    case PrimaryPhase::kDifs:
      if (channel_busy_prev) {
        st.difs_remaining = cfg.difs_slots;
      } else if (--st.difs_remaining == 0) {
        st.phase = PrimaryPhase::kBackoff;
        if (!st.counter_valid) {
          int w = cfg.windows[st.stage - 1];
          st.counter = uniform_int(
              rng.uniform(Stream::kPrimaryBackoff, st.service_serial,
                          static_cast<std::uint64_t>(st.stage)),
              w);
          st.counter_valid = true;
        }
      }
      break;
    case PrimaryPhase::kBackoff:
      if (channel_busy_prev) {
        st.phase = PrimaryPhase::kDifs;  // freeze; counter preserved
        st.difs_remaining = cfg.difs_slots;
      } else if (st.counter == 0) {
        st.phase = PrimaryPhase::kTransmitting;
        st.tx_remaining = cfg.packet_slots;
        st.tx_interfered = false;
        res.tx_started = true;
        res.first_attempt_started = (st.stage == 1);
      } else {
        --st.counter;
      }
      break;
    case PrimaryPhase::kTransmitting:
      break;
  }
  if (st.phase == PrimaryPhase::kTransmitting) {
    res.transmitting = true;
    if (--st.tx_remaining == 0) res.completed = true;
  }
  return res;
}

// Resolves a finished transmission. Success or a final-stage failure retires
// the packet; an earlier failure escalates the stage and re-enters DIFS with
// a fresh counter to be drawn at the next stage's window.
inline CompletionEvents on_tx_complete(PrimaryState& st, bool success, const SimConfig& cfg) {
  if (st.phase != PrimaryPhase::kTransmitting || st.tx_remaining != 0)
    throw std::logic_error("on_tx_complete: no completed transmission pending");
  CompletionEvents ev;
  bool retire = success;
  if (!success) {
    if (st.stage < cfg.max_retry) {
      ++st.stage;
      st.counter_valid = false;
      st.phase = PrimaryPhase::kDifs;
      st.difs_remaining = cfg.difs_slots;
    } else {
      ev.dropped = true;
      retire = true;
    }
  }
  if (retire) {
    if (success) ev.delivered = true;
    --st.queue_len;
    if (st.queue_len > 0) {
      detail::begin_service(st, cfg);
      ev.new_service_started = true;
    } else {
      st.stage = 0;
      st.counter = 0;
      st.counter_valid = false;
      st.phase = PrimaryPhase::kIdle;
    }
  }
  return ev;
}

}  // namespace cogsim
