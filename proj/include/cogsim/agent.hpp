#pragma once

// Secondary transmitter. An action is either "keep silent for one slot"
// (index 0) or "take backoff counter i-1" (index i >= 1). A chosen counter is
// executed with the same DIFS/backoff/freeze slot mechanics as the primary;
// each packet is transmitted exactly once, success or not. Rewards are
// per-action sample averages of throughput deltas, updated with step 1/t.

#include <cassert>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cogsim/config.hpp"
#include "cogsim/rng.hpp"

namespace cogsim {

using ActionId = int;  // 0 = silent, i >= 1 = backoff counter i-1

struct RewardVector {
  std::vector<double> r;
  std::vector<std::uint64_t> counts;

  explicit RewardVector(int ws) : r(ws + 1, 0.0), counts(ws + 1, 0) {}
  int arms() const { return static_cast<int>(r.size()); }
};

inline double alpha(std::uint64_t t) {
  if (t == 0) throw std::invalid_argument("alpha: t must be >= 1");
  return 1.0 / static_cast<double>(t);
}

// x0n: running secondary throughput after the action completed;
// x0p: snapshot taken when the action started.
inline double compute_cost(double x0n, double x0p) { return x0n - x0p; }

// r[u] <- (1 - a_t) r[u] + a_t (c + gamma * max r); gamma = 0 is the
// stateless rule, under which a single arm's value is exactly the sample
// mean of its costs when updated at t = 1..n.
inline void q_update(RewardVector& rv, ActionId u, double cost, std::uint64_t t,
                     double gamma_discount = 0.0) {
  if (u < 0 || u >= rv.arms()) throw std::invalid_argument("q_update: action out of range");
  double a = alpha(t);
  double target = cost;
  if (gamma_discount != 0.0) {
    double best = rv.r[0];
    for (double v : rv.r) best = v > best ? v : best;
    target += gamma_discount * best;
  }
  rv.r[u] = (1.0 - a) * rv.r[u] + a * target;
  ++rv.counts[u];
}

inline double exploration_tau(std::uint64_t t, const SimConfig& cfg) {
  return cfg.tau0 / (1.0 + static_cast<double>(t) / cfg.tau_anneal_actions);
}

// Ties break toward the lowest index.
inline ActionId argmax_action(const RewardVector& rv) {
  ActionId best = 0;
  for (int u = 1; u < rv.arms(); ++u)
    if (rv.r[u] > rv.r[best]) best = u;
  return best;
}

// True when no reward entry moved more than eps across the last
// `window` snapshots.
inline bool convergence_detected(const std::deque<std::vector<double>>& history,
                                 int window, double eps) {
  if (static_cast<int>(history.size()) < window) return false;
  size_t arms = history.front().size();
  for (size_t u = 0; u < arms; ++u) {
    double lo = history.front()[u];
    double hi = lo;
    for (const auto& snap : history) {
      lo = snap[u] < lo ? snap[u] : lo;
      hi = snap[u] > hi ? snap[u] : hi;
    }
    if (hi - lo >= eps) return false;
  }
  return true;
}

struct ActionStats {
  std::vector<std::uint64_t> voluntary;  // completed voluntary actions per index
  std::uint64_t forced_silences = 0;
  std::uint64_t tx_attempts = 0;
  std::uint64_t tx_successes = 0;

  explicit ActionStats(int ws) : voluntary(ws + 1, 0) {}

  std::uint64_t decisions() const {
    std::uint64_t n = forced_silences;
    for (auto v : voluntary) n += v;
    return n;
  }
};

class SecondaryPolicy {
 public:
  virtual ~SecondaryPolicy() = default;
  virtual ActionId choose(bool constraint_ok, RngBank& rng) = 0;
  // A policy that obeys the feedback bit is forced silent when it is false.
  virtual bool obeys_feedback() const { return false; }
  virtual void on_action_complete(ActionId /*u*/, bool /*forced*/, double /*cost*/,
                                  std::uint64_t /*slot*/) {}
};

class SilentPolicy final : public SecondaryPolicy {
 public:
  ActionId choose(bool, RngBank&) override { return 0; }
};

struct RewardRow {
  std::uint64_t t;
  ActionId action;
  double cost;
  std::vector<double> r;
};

class QLearningPolicy final : public SecondaryPolicy {
 public:
  explicit QLearningPolicy(const SimConfig& cfg) : cfg_(cfg), rewards_(cfg.ws) {}

  ActionId choose(bool constraint_ok, RngBank& rng) override {
    if (!constraint_ok) return 0;
    double tau = converged_ ? 0.0 : exploration_tau(t_, cfg_);
    if (rng.next_agent() < tau)
      return uniform_int(rng.next_agent(), rewards_.arms());
    return argmax_action(rewards_);
  }

  bool obeys_feedback() const override { return true; }

  void on_action_complete(ActionId u, bool forced, double cost, std::uint64_t slot) override {
    if (forced && !cfg_.update_on_forced_silence) return;
    ++t_;
    q_update(rewards_, u, cost, t_, cfg_.gamma_discount);
    history_.push_back({t_, u, cost, rewards_.r});
    window_.push_back(rewards_.r);
    while (static_cast<int>(window_.size()) > cfg_.convergence_window) window_.pop_front();
    if (!converged_ && all_arms_tried() &&
        convergence_detected(window_, cfg_.convergence_window, cfg_.convergence_eps)) {
      converged_ = true;
      converged_at_slot_ = slot;
    }
  }

  const RewardVector& rewards() const { return rewards_; }
  std::uint64_t completed_actions() const { return t_; }
  bool converged() const { return converged_; }
  std::optional<std::uint64_t> converged_at_slot() const { return converged_at_slot_; }
  const std::vector<RewardRow>& history() const { return history_; }

 private:
  bool all_arms_tried() const {
    for (auto c : rewards_.counts)
      if (c == 0) return false;
    return true;
  }

  SimConfig cfg_;
  RewardVector rewards_;
  std::uint64_t t_ = 0;
  bool converged_ = false;
  std::optional<std::uint64_t> converged_at_slot_;
  std::deque<std::vector<double>> window_;
  std::vector<RewardRow> history_;
};

enum class AgentPhase { kDeciding, kDifs, kBackoff, kTransmitting, kSilentEpoch };

// Owns the slot mechanics shared by every secondary policy. Decisions are
// instantaneous: the decision slot is the silent epoch itself for action 0,
// or the first DIFS observation slot for a transmitting action.
class SecondaryNode {
 public:
  struct StepResult {
    bool transmitting = false;
    bool completed_tx = false;       // final airtime slot reached
    bool silent_epoch_done = false;  // 1-slot silent action elapsed
  };

  SecondaryNode(SecondaryPolicy& policy, int ws) : policy_(&policy), stats_(ws) {}

  StepResult step(bool channel_busy_prev, bool constraint_ok, double theta_s_now,
                  const SimConfig& cfg, RngBank& rng) {
    StepResult res;
    if (phase_ == AgentPhase::kDeciding) {
      ActionId a = policy_->choose(constraint_ok, rng);
      assert((constraint_ok || !policy_->obeys_feedback() || a == 0) &&
             "feedback-obeying policy must stay silent on a violated constraint");
      in_flight_ = InFlight{a, theta_s_now, !constraint_ok && policy_->obeys_feedback()};
      if (a == 0) {
        phase_ = AgentPhase::kSilentEpoch;
      } else {
        phase_ = AgentPhase::kDifs;
        difs_remaining_ = cfg.difs_slots;
        counter_ = a - 1;
      }
    }
    switch (phase_) {
      case AgentPhase::kSilentEpoch:
        res.silent_epoch_done = true;
        break;
      case AgentPhase::kDifs:
        if (channel_busy_prev) {
          difs_remaining_ = cfg.difs_slots;
        } else if (--difs_remaining_ == 0) {
          phase_ = AgentPhase::kBackoff;
        }
        break;
      case AgentPhase::kBackoff:
        if (channel_busy_prev) {
          phase_ = AgentPhase::kDifs;  // freeze; counter preserved
          difs_remaining_ = cfg.difs_slots;
        } else if (counter_ == 0) {
          phase_ = AgentPhase::kTransmitting;
          tx_remaining_ = cfg.packet_slots;
          tx_interfered_ = false;
          ++attempt_serial_;
          ++stats_.tx_attempts;
        } else {
          --counter_;
        }
        break;
      default:
        break;
    }
    if (phase_ == AgentPhase::kTransmitting) {
      res.transmitting = true;
      if (--tx_remaining_ == 0) res.completed_tx = true;
    }
    return res;
  }

  // Called by the simulation once the slot's metrics are settled.
  void complete_action(double x0n, bool tx_success, std::uint64_t slot) {
    assert(in_flight_ && "no action in flight");
    const InFlight act = *in_flight_;
    if (act.action >= 1 && tx_success) ++stats_.tx_successes;
    if (act.forced)
      ++stats_.forced_silences;
    else
      ++stats_.voluntary[act.action];
    policy_->on_action_complete(act.action, act.forced, compute_cost(x0n, act.x0p), slot);
    in_flight_.reset();
    phase_ = AgentPhase::kDeciding;
  }

  void mark_interfered() { tx_interfered_ = true; }
  bool tx_interfered() const { return tx_interfered_; }
  std::uint64_t attempt_serial() const { return attempt_serial_; }
  AgentPhase phase() const { return phase_; }
  const ActionStats& stats() const { return stats_; }

 private:
  struct InFlight {
    ActionId action;
    double x0p;
    bool forced;
  };

  SecondaryPolicy* policy_;
  AgentPhase phase_ = AgentPhase::kDeciding;
  int counter_ = 0;
  int difs_remaining_ = 0;
  int tx_remaining_ = 0;
  bool tx_interfered_ = false;
  std::optional<InFlight> in_flight_;
  std::uint64_t attempt_serial_ = 0;
  ActionStats stats_;
};

}  // namespace cogsim
