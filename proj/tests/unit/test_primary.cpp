#include <doctest.h>

#include <vector>

#include "cogsim/primary.hpp"
#include "oracles.hpp"

using namespace cogsim;

namespace {

PrimaryState backoff_state(int stage, int counter) {
  PrimaryState st;
  st.queue_len = 1;
  st.stage = stage;
  st.counter = counter;
  st.counter_valid = true;
  st.phase = PrimaryPhase::kBackoff;
  st.service_serial = 1;
  return st;
}

}  // namespace

TEST_CASE("arrivals: zero rate leaves the state untouched") {
  SimConfig cfg;
  cfg.lambda1 = 0.0;
  RngBank rng(1);
  PoissonSampler sampler(cfg.lambda1);
  PrimaryState st;
  for (std::uint64_t slot = 0; slot < 100; ++slot) {
    auto res = apply_arrivals(st, cfg, sampler, rng, slot);
    CHECK(res.admitted == 0);
    CHECK(res.dropped == 0);
  }
  CHECK(st.phase == PrimaryPhase::kIdle);
  CHECK(st.queue_len == 0);
}

TEST_CASE("arrivals: first packet moves Idle to Difs with a full DIFS") {
  SimConfig cfg;
  cfg.lambda1 = 0.05;
  RngBank rng(3);
  PoissonSampler sampler(cfg.lambda1);
  PrimaryState st;
  std::uint64_t slot = 0;
  while (st.queue_len == 0) apply_arrivals(st, cfg, sampler, rng, slot++);
  CHECK(st.phase == PrimaryPhase::kDifs);
  CHECK(st.difs_remaining == cfg.difs_slots);
  CHECK(st.stage == 1);
  CHECK(st.queue_len >= 1);
}

TEST_CASE("arrivals: buffer overflow is dropped and counted") {
  SimConfig cfg;
  cfg.lambda1 = 10.0;  // nearly every slot overflows
  RngBank rng(4);
  PoissonSampler sampler(cfg.lambda1);
  PrimaryState st;
  std::uint64_t dropped = 0;
  for (std::uint64_t slot = 0; slot < 50; ++slot) {
    auto res = apply_arrivals(st, cfg, sampler, rng, slot);
    dropped += res.dropped;
    CHECK(st.queue_len <= cfg.buffer);
  }
  CHECK(st.queue_len == cfg.buffer);
  CHECK(dropped > 0);
}

TEST_CASE("backoff decrements on idle and freezes on busy") {
  SimConfig cfg;
  RngBank rng(1);
  SUBCASE("idle: plain decrement") {
    PrimaryState st = backoff_state(1, 3);
    auto res = primary_slot_step(st, false, cfg, rng);
    CHECK(st.counter == 2);
    CHECK(st.phase == PrimaryPhase::kBackoff);
    CHECK(!res.transmitting);
  }
  SUBCASE("busy: freeze keeps the counter and re-arms DIFS") {
    PrimaryState st = backoff_state(1, 3);
    primary_slot_step(st, true, cfg, rng);
    CHECK(st.counter == 3);
    CHECK(st.phase == PrimaryPhase::kDifs);
    CHECK(st.difs_remaining == cfg.difs_slots);
    // resume needs the full DIFS again, then the counter continues
    primary_slot_step(st, false, cfg, rng);
    primary_slot_step(st, false, cfg, rng);
    CHECK(st.phase == PrimaryPhase::kBackoff);
    CHECK(st.counter == 3);
    primary_slot_step(st, false, cfg, rng);
    CHECK(st.counter == 2);
  }
}

TEST_CASE("DIFS completion enters backoff; the entry slot takes no counter action") {
  SimConfig cfg;
  RngBank rng(17);
  PrimaryState st;
  st.queue_len = 1;
  st.stage = 1;
  st.phase = PrimaryPhase::kDifs;
  st.difs_remaining = 1;
  st.service_serial = 1;
  auto res = primary_slot_step(st, false, cfg, rng);
  CHECK(st.phase == PrimaryPhase::kBackoff);
  CHECK(st.counter_valid);
  CHECK(st.counter >= 0);
  CHECK(st.counter <= cfg.windows[0] - 1);
  CHECK(!res.transmitting);  // even a zero counter waits for the next slot
}

TEST_CASE("fresh counter draws are uniform over each stage window") {
  SimConfig cfg;
  RngBank rng(12345);
  for (int stage = 1; stage <= cfg.max_retry; ++stage) {
    int w = cfg.windows[stage - 1];
    std::vector<std::uint64_t> counts(w, 0);
    const int n = 100000;
    for (int serial = 1; serial <= n; ++serial) {
      PrimaryState st;
      st.queue_len = 1;
      st.stage = stage;
      st.phase = PrimaryPhase::kDifs;
      st.difs_remaining = 1;
      st.service_serial = static_cast<std::uint64_t>(serial);
      primary_slot_step(st, false, cfg, rng);
      counts[st.counter]++;
    }
    CHECK(oracles::chi_square_uniform(counts) < oracles::chi_square_crit_p01(w - 1));
  }
}

TEST_CASE("counter zero transmits on the next idle slot and completes") {
  SimConfig cfg;
  RngBank rng(1);
  PrimaryState st = backoff_state(1, 0);
  auto res = primary_slot_step(st, false, cfg, rng);
  CHECK(res.transmitting);
  CHECK(res.tx_started);
  CHECK(res.first_attempt_started);  // stage 1
  CHECK(res.completed);              // packet_slots == 1
  CHECK(st.tx_remaining == 0);
}

TEST_CASE("a multi-slot packet spans packet_slots slots") {
  SimConfig cfg;
  cfg.packet_slots = 3;
  RngBank rng(1);
  PrimaryState st = backoff_state(2, 0);
  auto r1 = primary_slot_step(st, false, cfg, rng);
  CHECK(r1.transmitting);
  CHECK(!r1.first_attempt_started);  // stage 2 retry
  CHECK(!r1.completed);
  auto r2 = primary_slot_step(st, true, cfg, rng);  // sensing ignored while transmitting
  CHECK(r2.transmitting);
  CHECK(!r2.completed);
  auto r3 = primary_slot_step(st, false, cfg, rng);
  CHECK(r3.completed);
}

TEST_CASE("completion outcomes: deliver, escalate, drop") {
  SimConfig cfg;
  RngBank rng(1);
  SUBCASE("success with empty queue returns to the idle state") {
    PrimaryState st = backoff_state(1, 0);
    primary_slot_step(st, false, cfg, rng);
    auto ev = on_tx_complete(st, true, cfg);
    CHECK(ev.delivered);
    CHECK(!ev.dropped);
    CHECK(!ev.new_service_started);
    CHECK(st.phase == PrimaryPhase::kIdle);
    CHECK(st.stage == 0);
    CHECK(st.counter == 0);
    CHECK(st.queue_len == 0);
  }
  SUBCASE("success with backlog starts the next service at stage 1") {
    PrimaryState st = backoff_state(3, 0);
    st.queue_len = 2;
    primary_slot_step(st, false, cfg, rng);
    auto ev = on_tx_complete(st, true, cfg);
    CHECK(ev.delivered);
    CHECK(ev.new_service_started);
    CHECK(st.stage == 1);
    CHECK(st.phase == PrimaryPhase::kDifs);
    CHECK(st.queue_len == 1);
  }
  SUBCASE("failure below the retry limit escalates and re-enters DIFS") {
    PrimaryState st = backoff_state(2, 0);
    std::uint64_t serial = st.service_serial;
    primary_slot_step(st, false, cfg, rng);
    auto ev = on_tx_complete(st, false, cfg);
    CHECK(!ev.delivered);
    CHECK(!ev.dropped);
    CHECK(st.stage == 3);
    CHECK(st.phase == PrimaryPhase::kDifs);
    CHECK(st.difs_remaining == cfg.difs_slots);
    CHECK(!st.counter_valid);
    CHECK(st.service_serial == serial);  // same packet
    // the stage-3 counter comes from the stage-3 window
    primary_slot_step(st, false, cfg, rng);
    primary_slot_step(st, false, cfg, rng);
    CHECK(st.phase == PrimaryPhase::kBackoff);
    CHECK(st.counter <= cfg.windows[2] - 1);
  }
  SUBCASE("failure at the last stage drops the packet") {
    PrimaryState st = backoff_state(4, 0);
    st.queue_len = 1;
    primary_slot_step(st, false, cfg, rng);
    auto ev = on_tx_complete(st, false, cfg);
    CHECK(ev.dropped);
    CHECK(st.queue_len == 0);
    CHECK(st.phase == PrimaryPhase::kIdle);
  }
  SUBCASE("calling without a finished transmission is a contract violation") {
    PrimaryState st = backoff_state(1, 2);
    CHECK_THROWS_AS(on_tx_complete(st, true, cfg), std::logic_error);
  }
}

TEST_CASE("stage never exceeds the retry limit and drops take exactly m attempts") {
  SimConfig cfg;
  cfg.lambda1 = 0.4;
  RngBank rng(777);
  PoissonSampler sampler(cfg.lambda1);
  PrimaryState st;
  std::uint64_t delivered = 0, dropped = 0, admitted = 0;
  int attempts_this_packet = 0;
  for (std::uint64_t slot = 0; slot < 200000; ++slot) {
    admitted += apply_arrivals(st, cfg, sampler, rng, slot).admitted;
    bool busy_prev = rng.uniform(Stream::kAgent, slot) < 0.2;  // arbitrary disturbance
    auto res = primary_slot_step(st, busy_prev, cfg, rng);
    CHECK(st.stage <= cfg.max_retry);
    if (res.tx_started) ++attempts_this_packet;
    if (res.completed) {
      bool ok = rng.uniform(Stream::kPrimaryDecode, st.service_serial, st.stage) >= cfg.rho;
      auto ev = on_tx_complete(st, ok, cfg);
      if (ev.delivered) delivered++;
      if (ev.dropped) {
        dropped++;
        CHECK(attempts_this_packet == cfg.max_retry);
      }
      if (ev.delivered || ev.dropped) attempts_this_packet = 0;
    }
  }
  CHECK(admitted == delivered + dropped + static_cast<std::uint64_t>(st.queue_len));
  CHECK(delivered > 0);
}
