#pragma once

// Sweep harness: runs (lambda1, policy, replication) cells, writes the CSV
// artifacts, and keeps everything reproducible from the spec-level seed.
// Replication r runs with seed base_seed + r; the grid search and the
// calibration reference are computed once per lambda1 cell.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cogsim/calibrate.hpp"
#include "cogsim/policy.hpp"
#include "cogsim/sim.hpp"

namespace cogsim {

enum class PolicyKind { kQLearning = 0, kUniform = 1, kGridSearch = 2, kSilent = 3 };

inline const char* to_string(PolicyKind p) {
  switch (p) {
    case PolicyKind::kQLearning: return "qlearning";
    case PolicyKind::kUniform: return "uniform";
    case PolicyKind::kGridSearch: return "gridsearch";
    case PolicyKind::kSilent: return "silent";
  }
  return "?";
}

inline PolicyKind policy_kind_from_string(const std::string& s) {
  if (s == "qlearning") return PolicyKind::kQLearning;
  if (s == "uniform") return PolicyKind::kUniform;
  if (s == "gridsearch") return PolicyKind::kGridSearch;
  if (s == "silent") return PolicyKind::kSilent;
  throw std::invalid_argument("unknown policy '" + s + "'");
}

struct ExperimentSpec {
  SimConfig base;
  std::vector<double> sweep_lambda1;
  std::vector<PolicyKind> policies = {PolicyKind::kQLearning};
  std::uint64_t horizon_slots = 200000;
  int replications = 5;
  std::string output_dir;
  double grid_step = 0.1;
  std::uint64_t grid_eval_slots = 100000;
  bool write_traces = true;
};

inline void validate(const ExperimentSpec& s) {
  validate(s.base);
  if (s.sweep_lambda1.empty())
    throw std::invalid_argument("experiment: sweep_lambda1 must be non-empty");
  for (double l : s.sweep_lambda1)
    if (!(l >= 0.0)) throw std::invalid_argument("experiment: lambda1 values must be >= 0");
  if (s.policies.empty())
    throw std::invalid_argument("experiment: policies must be non-empty");
  if (s.horizon_slots == 0)
    throw std::invalid_argument("experiment: horizon_slots must be >= 1");
  if (s.replications < 1)
    throw std::invalid_argument("experiment: replications must be >= 1");
  if (s.output_dir.empty())
    throw std::invalid_argument("experiment: output_dir must be set");
}

// Same key=value format as the base config, plus the sweep keys.
inline void load_experiment_file(ExperimentSpec& spec, const std::string& path) {
  static const std::vector<std::string> sweep_keys = {
      "sweep_lambda1", "policies", "horizon_slots", "replications",
      "output_dir",    "grid_step", "grid_eval_slots", "write_traces"};
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("experiment: cannot open '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("experiment: line " + std::to_string(lineno) +
                                  " is not key=value");
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    if (key == "sweep_lambda1") {
      spec.sweep_lambda1.clear();
      for (const auto& tok : detail::split(value, ','))
        if (!tok.empty()) spec.sweep_lambda1.push_back(std::stod(tok));
    } else if (key == "policies") {
      spec.policies.clear();
      for (const auto& tok : detail::split(value, ','))
        if (!tok.empty()) spec.policies.push_back(policy_kind_from_string(tok));
    } else if (key == "horizon_slots") {
      spec.horizon_slots = std::stoull(value);
    } else if (key == "replications") {
      spec.replications = std::stoi(value);
    } else if (key == "output_dir") {
      spec.output_dir = value;
    } else if (key == "grid_step") {
      spec.grid_step = std::stod(value);
    } else if (key == "grid_eval_slots") {
      spec.grid_eval_slots = std::stoull(value);
    } else if (key == "write_traces") {
      spec.write_traces = detail::parse_bool(value);
    } else {
      apply_key_value(spec.base, key, value);
    }
  }
}

struct CellSummary {
  double lambda1 = 0.0;
  double gamma1 = 0.0;
  PolicyKind policy = PolicyKind::kQLearning;
  int replication = 0;
  std::uint64_t seed = 0;
  std::uint64_t slots = 0;
  double theta_s = 0.0;
  double theta_p = 0.0;
  double theta_p_max = 0.0;
  double loss = 0.0;
  double failure_ratio = 0.0;
  ActionStats actions{1};
  std::optional<std::uint64_t> converged_at_slot;  // learner cells only
};

struct ExperimentResult {
  std::vector<CellSummary> rows;
  std::map<double, GridResult> grids;  // by lambda1, when gridsearch was requested
};

namespace detail {

inline std::string lambda_tag(double l) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", l);
  return buf;
}

inline void check_finite(const CellSummary& row) {
  for (double v : {row.theta_s, row.theta_p, row.theta_p_max, row.loss, row.failure_ratio})
    if (!std::isfinite(v))
      throw std::runtime_error("experiment: non-finite metric in cell lambda1=" +
                               lambda_tag(row.lambda1) + " policy=" + to_string(row.policy));
}

}  // namespace detail

inline void write_summary_csv(std::ostream& os, const ExperimentSpec& spec,
                              const std::vector<CellSummary>& rows) {
  write_artifact_header(os, spec.base);
  os << "lambda1,gamma1,policy,theta_s,theta_p,theta_p_max,loss,failure_ratio,slots,seed\n";
  for (const CellSummary& r : rows) {
    os << format_double(r.lambda1) << ',' << format_double(r.gamma1) << ','
       << to_string(r.policy) << ',' << format_double(r.theta_s) << ','
       << format_double(r.theta_p) << ',' << format_double(r.theta_p_max) << ','
       << format_double(r.loss) << ',' << format_double(r.failure_ratio) << ','
       << r.slots << ',' << r.seed << "\n";
  }
}

inline void write_rewards_csv(std::ostream& os, const SimConfig& cfg,
                              const std::vector<RewardRow>& rows, int ws) {
  write_artifact_header(os, cfg);
  os << "t,action,cost";
  for (int u = 0; u <= ws; ++u) os << ",r" << u;
  os << "\n";
  for (const RewardRow& r : rows) {
    os << r.t << ',' << r.action << ',' << format_double(r.cost);
    for (double v : r.r) os << ',' << format_double(v);
    os << "\n";
  }
}

inline void write_grid_csv(std::ostream& os, const SimConfig& cfg, const GridResult& grid) {
  write_artifact_header(os, cfg);
  int ws = cfg.ws;
  for (int i = 0; i <= ws; ++i) os << 'k' << i << ',';
  os << "theta_s,theta_p,loss,feasible\n";
  for (const GridPoint& gp : grid.table) {
    for (double k : gp.kappa.kappa) os << format_double(k) << ',';
    os << format_double(gp.theta_s) << ',' << format_double(gp.theta_p) << ','
       << format_double(gp.loss) << ',' << (gp.feasible ? 1 : 0) << "\n";
  }
}

// Learned action frequencies (voluntary and forced reported separately)
// against the searched reference vector.
inline void emit_strategy_comparison(std::ostream& os, const SimConfig& cfg,
                                     const ActionStats& learned, const PolicyVector& oracle) {
  write_artifact_header(os, cfg);
  os << "action,learned_voluntary_freq,learned_forced_freq,learned_total_freq,oracle_kappa\n";
  double total = static_cast<double>(learned.decisions());
  for (size_t u = 0; u < learned.voluntary.size(); ++u) {
    double vol = total > 0 ? learned.voluntary[u] / total : 0.0;
    double forced = (u == 0 && total > 0) ? learned.forced_silences / total : 0.0;
    double oracle_k = u < oracle.kappa.size() ? oracle.kappa[u] : 0.0;
    os << u << ',' << format_double(vol) << ',' << format_double(forced) << ','
       << format_double(vol + forced) << ',' << format_double(oracle_k) << "\n";
  }
}

inline ExperimentResult run_experiment(const ExperimentSpec& spec_in) {
  ExperimentSpec spec = spec_in;
  validate(spec);
  std::sort(spec.sweep_lambda1.begin(), spec.sweep_lambda1.end());
  std::sort(spec.policies.begin(), spec.policies.end());
  spec.policies.erase(std::unique(spec.policies.begin(), spec.policies.end()),
                      spec.policies.end());

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(spec.output_dir, ec);
  if (ec || !fs::is_directory(spec.output_dir))
    throw std::runtime_error("experiment: cannot create output dir '" + spec.output_dir + "'");

  auto open_artifact = [&](const std::string& name) {
    std::ofstream f(fs::path(spec.output_dir) / name, std::ios::binary);
    if (!f) throw std::runtime_error("experiment: cannot write artifact '" + name + "'");
    return f;
  };

  bool wants_grid = false;
  for (PolicyKind p : spec.policies) wants_grid = wants_grid || p == PolicyKind::kGridSearch;
  bool wants_learner = false;
  for (PolicyKind p : spec.policies) wants_learner = wants_learner || p == PolicyKind::kQLearning;

  ExperimentResult result;
  for (double lambda : spec.sweep_lambda1) {
    SimConfig cell = spec.base;
    cell.lambda1 = lambda;
    double ref = theta_p_max(cell);
    std::string ltag = detail::lambda_tag(lambda);

    std::optional<GridResult> grid;
    if (wants_grid) {
      grid = grid_search(cell, spec.grid_step, spec.grid_eval_slots);
      auto f = open_artifact("grid_lam" + ltag + ".csv");
      write_grid_csv(f, cell, *grid);
      result.grids.emplace(lambda, *grid);
    }

    // learned stats per replication, for the strategy comparison
    std::vector<ActionStats> learned_stats(spec.replications, ActionStats(cell.ws));

    for (PolicyKind pk : spec.policies) {
      for (int rep = 0; rep < spec.replications; ++rep) {
        SimConfig run_cfg = cell;
        run_cfg.seed = spec.base.seed + static_cast<std::uint64_t>(rep);

        std::unique_ptr<SecondaryPolicy> policy;
        QLearningPolicy* learner = nullptr;
        switch (pk) {
          case PolicyKind::kQLearning: {
            auto q = std::make_unique<QLearningPolicy>(run_cfg);
            learner = q.get();
            policy = std::move(q);
            break;
          }
          case PolicyKind::kUniform:
            policy = std::make_unique<StationaryPolicy>(uniform_policy(run_cfg.ws));
            break;
          case PolicyKind::kGridSearch:
            policy = std::make_unique<StationaryPolicy>(grid->best);
            break;
          case PolicyKind::kSilent:
            policy = std::make_unique<SilentPolicy>();
            break;
        }

        RunOptions opts;
        opts.theta_p_max = ref;
        opts.collect_trace = spec.write_traces && pk == PolicyKind::kQLearning;
        RunResult run = run_simulation(run_cfg, *policy, spec.horizon_slots, opts);

        CellSummary row;
        row.lambda1 = lambda;
        row.gamma1 = run_cfg.gamma1;
        row.policy = pk;
        row.replication = rep;
        row.seed = run_cfg.seed;
        row.slots = run.metrics.slots;
        row.theta_s = secondary_throughput(run.metrics);
        row.theta_p = primary_throughput(run.metrics);
        row.theta_p_max = ref;
        row.loss = ref - row.theta_p;
        row.failure_ratio = failure_ratio(run.metrics);
        row.actions = run.actions;
        detail::check_finite(row);

        std::string cell_tag = "lam" + ltag + "_" + to_string(pk) + "_rep" + std::to_string(rep);
        if (pk == PolicyKind::kQLearning) {
          row.converged_at_slot = learner->converged_at_slot();
          learned_stats[rep] = run.actions;
          if (spec.write_traces) {
            auto f = open_artifact("trace_" + cell_tag + ".csv");
            write_trace_csv(f, run_cfg, run);
          }
          auto f = open_artifact("rewards_" + cell_tag + ".csv");
          write_rewards_csv(f, run_cfg, learner->history(), run_cfg.ws);
        }
        result.rows.push_back(std::move(row));
      }
    }

    if (wants_grid && wants_learner) {
      for (int rep = 0; rep < spec.replications; ++rep) {
        SimConfig run_cfg = cell;
        run_cfg.seed = spec.base.seed + static_cast<std::uint64_t>(rep);
        auto f = open_artifact("strategy_lam" + ltag + "_rep" + std::to_string(rep) + ".csv");
        emit_strategy_comparison(f, run_cfg, learned_stats[rep], grid->best);
      }
    }
  }

  auto f = open_artifact("summary.csv");
  write_summary_csv(f, spec, result.rows);
  return result;
}

}  // namespace cogsim
