#pragma once

// Slotted simulation loop. Per slot: primary arrivals; both nodes advance on
// the previous slot's channel observation; completing packets are decoded;
// metrics updated; the constraint bit is refreshed at each primary packet
// completion and latched for the agent; completed secondary actions are
// costed against the running throughput.
//
// Carrier sensing is of the *other* node's transmission in the previous slot
// (a transmitter cannot sense the channel under its own signal). The trace's
// channel_busy stays the OR of both transmitters.

#include <cassert>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cogsim/agent.hpp"
#include "cogsim/config.hpp"
#include "cogsim/metrics.hpp"
#include "cogsim/primary.hpp"
#include "cogsim/rng.hpp"

namespace cogsim {

struct SlotOutcome {
  std::uint64_t slot = 0;
  bool primary_tx = false;
  bool secondary_tx = false;
  std::optional<bool> primary_ok;    // present iff a primary packet completed this slot
  std::optional<bool> secondary_ok;  // same for the secondary
  bool channel_busy = false;
  bool feedback_bit = true;          // latched bit after this slot's updates
  double theta_p = 0.0;
  double theta_s = 0.0;
};

inline bool decode_primary(const SimConfig& cfg, const RngBank& rng,
                           std::uint64_t serial, std::uint64_t attempt, bool interfered) {
  double fail = interfered ? cfg.rho_star : cfg.rho;
  return rng.uniform(Stream::kPrimaryDecode, serial, attempt) >= fail;
}

inline bool decode_secondary(const SimConfig& cfg, const RngBank& rng,
                             std::uint64_t serial, bool interfered) {
  double fail = interfered ? cfg.nu_star : cfg.nu;
  return rng.uniform(Stream::kSecondaryDecode, serial) >= fail;
}

struct DecodeResult {
  std::optional<bool> primary_ok;
  std::optional<bool> secondary_ok;
};

// Joint decode on a packet's final slot. A transmitter flag doubles as the
// other side's interference indicator; with multi-slot packets the caller
// tracks airtime intersection per packet and calls the decode_* primitives.
inline DecodeResult arbitrate_decode(bool primary_tx, bool secondary_tx, const SimConfig& cfg,
                                     const RngBank& rng, std::uint64_t p_serial,
                                     std::uint64_t p_attempt, std::uint64_t s_serial) {
  DecodeResult d;
  if (primary_tx) d.primary_ok = decode_primary(cfg, rng, p_serial, p_attempt, secondary_tx);
  if (secondary_tx) d.secondary_ok = decode_secondary(cfg, rng, s_serial, primary_tx);
  return d;
}

struct RunOptions {
  bool collect_trace = false;
  double theta_p_max = 0.0;  // reference for the feedback bit and reporting
};

struct RunResult {
  Metrics metrics;
  ActionStats actions{1};
  std::vector<SlotOutcome> trace;
  PrimaryState final_primary;
  std::uint64_t delivered_packets = 0;
  std::uint64_t dropped_packets = 0;
};

inline RunResult run_simulation(const SimConfig& cfg, SecondaryPolicy& policy,
                                std::uint64_t horizon_slots, const RunOptions& opts = {}) {
  validate(cfg);
  if (horizon_slots == 0)
    throw std::invalid_argument("run_simulation: horizon_slots must be >= 1");

  RngBank rng(cfg.seed);
  PoissonSampler arrivals(cfg.lambda1);
  PrimaryState prim;
  SecondaryNode node(policy, cfg.ws);

  RunResult out;
  out.actions = ActionStats(cfg.ws);
  Metrics& m = out.metrics;
  m.theta_p_max = opts.theta_p_max;
  if (opts.collect_trace) out.trace.reserve(horizon_slots);

  bool prev_p_tx = false;
  bool prev_s_tx = false;
  bool heard_primary = false;
  std::uint64_t stale_ref_slot = 0;

  for (std::uint64_t slot = 0; slot < horizon_slots; ++slot) {
    ArrivalResult arr = apply_arrivals(prim, cfg, arrivals, rng, slot);
    m.arrivals_admitted += arr.admitted;
    m.arrivals_dropped += arr.dropped;

    PrimaryStepResult ps = primary_slot_step(prim, prev_s_tx, cfg, rng);

    bool stale = cfg.feedback_stale_slots > 0 && heard_primary &&
                 slot - stale_ref_slot > cfg.feedback_stale_slots;
    bool effective_bit = m.feedback_ok && !stale;
    double theta_s_now = m.slots ? secondary_throughput(m) : 0.0;
    SecondaryNode::StepResult ss = node.step(prev_p_tx, effective_bit, theta_s_now, cfg, rng);

    bool p_tx = ps.transmitting;
    bool s_tx = ss.transmitting;
    if (p_tx && s_tx) {
      prim.tx_interfered = true;
      node.mark_interfered();
    }
    if (p_tx && !heard_primary) {
      heard_primary = true;
      stale_ref_slot = slot;
    }

    std::optional<bool> p_ok;
    std::optional<bool> s_ok;
    if (ps.completed)
      p_ok = decode_primary(cfg, rng, prim.service_serial,
                            static_cast<std::uint64_t>(prim.stage), prim.tx_interfered);
    if (ss.completed_tx)
      s_ok = decode_secondary(cfg, rng, node.attempt_serial(), node.tx_interfered());

    m.slots += 1;
    if (ps.first_attempt_started) m.x3_count += 1;
    if (p_ok && *p_ok) m.p_delivered_slots += cfg.packet_slots;
    if (s_ok && *s_ok) m.s_delivered_slots += cfg.packet_slots;

    if (ps.completed) {
      if (prim.tx_interfered) {
        m.p_attempts_overlap += 1;
        if (!*p_ok) m.p_failures_overlap += 1;
      } else {
        m.p_attempts_clear += 1;
        if (!*p_ok) m.p_failures_clear += 1;
      }
      CompletionEvents ev = on_tx_complete(prim, *p_ok, cfg);
      if (ev.delivered) out.delivered_packets += 1;
      if (ev.dropped) {
        m.x2_count += 1;
        out.dropped_packets += 1;
      }
      m.primary_completions += 1;
      // The very first completion carries no meaningful history; it reports
      // "satisfied" so an empty accumulator cannot force permanent silence.
      m.feedback_ok = m.primary_completions == 1 ? true : feedback_bit(m, cfg);
      stale_ref_slot = slot;
    }

    if (ss.completed_tx || ss.silent_epoch_done) {
      double x0n = throughput(m.s_delivered_slots, m.slots);
      node.complete_action(x0n, s_ok.value_or(false), slot);
    }

    if (opts.collect_trace) {
      SlotOutcome o;
      o.slot = slot;
      o.primary_tx = p_tx;
      o.secondary_tx = s_tx;
      o.primary_ok = p_ok;
      o.secondary_ok = s_ok;
      o.channel_busy = p_tx || s_tx;
      o.feedback_bit = m.feedback_ok;
      o.theta_p = primary_throughput(m);
      o.theta_s = secondary_throughput(m);
      out.trace.push_back(o);
    }

    prev_p_tx = p_tx;
    prev_s_tx = s_tx;
  }

  out.actions = node.stats();
  out.final_primary = prim;
  return out;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline void write_artifact_header(std::ostream& os, const SimConfig& cfg) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  os << "# config_hash=" << buf << " seed=" << cfg.seed << "\n";
}

inline void write_trace_csv(std::ostream& os, const SimConfig& cfg, const RunResult& run) {
  write_artifact_header(os, cfg);
  os << "slot,primary_tx,secondary_tx,primary_ok,secondary_ok,feedback_bit,theta_p,theta_s\n";
  for (const SlotOutcome& o : run.trace) {
    os << o.slot << ',' << (o.primary_tx ? 1 : 0) << ',' << (o.secondary_tx ? 1 : 0) << ',';
    if (o.primary_ok) os << (*o.primary_ok ? 1 : 0);
    os << ',';
    if (o.secondary_ok) os << (*o.secondary_ok ? 1 : 0);
    os << ',' << (o.feedback_bit ? 1 : 0) << ',' << format_double(o.theta_p) << ','
       << format_double(o.theta_s) << "\n";
  }
}

}  // namespace cogsim
