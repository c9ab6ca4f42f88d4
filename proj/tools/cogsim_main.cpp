// Command-line front end.
//
//   cogsim run        one simulation, optional trace/rewards artifacts
//   cogsim sweep      (lambda1 x policy x replication) experiment harness
//   cogsim grid       brute-force stationary policy search
//   cogsim calibrate  solo-primary throughput reference
//
// Every config field is available as a flag; flags override --config values.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cogsim/calibrate.hpp"
#include "cogsim/experiment.hpp"
#include "cogsim/policy.hpp"
#include "cogsim/sim.hpp"

namespace {

struct ConfigFlags {
  std::optional<std::string> config_path;
  std::optional<double> lambda1, rho, rho_star, nu, nu_star, gamma1, gamma2, lambda2;
  std::optional<double> tau0, tau_anneal, convergence_eps, gamma_discount;
  std::optional<int> buffer, max_retry, ws, packet_slots, difs_slots, convergence_window;
  std::optional<std::uint64_t> seed, stale_slots;
  std::optional<std::string> windows, constraint_mode;
  std::optional<bool> update_on_forced;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& f) {
  cmd->add_option("--config", f.config_path, "key=value config file");
  cmd->add_option("--lambda1", f.lambda1, "primary arrival rate, packets/slot");
  cmd->add_option("--buffer", f.buffer, "primary buffer capacity");
  cmd->add_option("--max-retry", f.max_retry, "max attempts per primary packet");
  cmd->add_option("--windows", f.windows, "per-stage backoff windows, e.g. 4,6,8,10");
  cmd->add_option("--ws", f.ws, "secondary backoff window size");
  cmd->add_option("--rho", f.rho, "primary failure prob, secondary silent");
  cmd->add_option("--rho-star", f.rho_star, "primary failure prob, secondary transmitting");
  cmd->add_option("--nu", f.nu, "secondary failure prob, primary silent");
  cmd->add_option("--nu-star", f.nu_star, "secondary failure prob, primary transmitting");
  cmd->add_option("--gamma1", f.gamma1, "max tolerable primary throughput loss");
  cmd->add_option("--gamma2", f.gamma2, "max tolerable primary failure probability");
  cmd->add_option("--constraint-mode", f.constraint_mode, "throughput_loss | failure_prob");
  cmd->add_option("--packet-slots", f.packet_slots, "packet duration in slots");
  cmd->add_option("--difs-slots", f.difs_slots, "DIFS duration in slots");
  cmd->add_option("--seed", f.seed, "base RNG seed");
  cmd->add_option("--lambda2", f.lambda2, "secondary arrival rate (metadata)");
  cmd->add_option("--tau0", f.tau0, "initial exploration probability");
  cmd->add_option("--tau-anneal-actions", f.tau_anneal, "exploration anneal scale, in actions");
  cmd->add_option("--convergence-window", f.convergence_window, "reward snapshots per check");
  cmd->add_option("--convergence-eps", f.convergence_eps, "max reward drift at convergence");
  cmd->add_option("--gamma-discount", f.gamma_discount, "discount on the max-reward term");
  cmd->add_option("--update-on-forced-silence", f.update_on_forced,
                  "treat forced silences as learning updates");
  cmd->add_option("--feedback-stale-slots", f.stale_slots,
                  "slots without feedback before assuming violation (0 = off)");
}

void apply_flags(cogsim::SimConfig& cfg, const ConfigFlags& f) {
  if (f.lambda1) cfg.lambda1 = *f.lambda1;
  if (f.buffer) cfg.buffer = *f.buffer;
  if (f.max_retry) cfg.max_retry = *f.max_retry;
  if (f.windows) cogsim::apply_key_value(cfg, "windows", *f.windows);
  if (f.ws) cfg.ws = *f.ws;
  if (f.rho) cfg.rho = *f.rho;
  if (f.rho_star) cfg.rho_star = *f.rho_star;
  if (f.nu) cfg.nu = *f.nu;
  if (f.nu_star) cfg.nu_star = *f.nu_star;
  if (f.gamma1) cfg.gamma1 = *f.gamma1;
  if (f.gamma2) cfg.gamma2 = *f.gamma2;
  if (f.constraint_mode) cogsim::apply_key_value(cfg, "constraint_mode", *f.constraint_mode);
  if (f.packet_slots) cfg.packet_slots = *f.packet_slots;
  if (f.difs_slots) cfg.difs_slots = *f.difs_slots;
  if (f.seed) cfg.seed = *f.seed;
  if (f.lambda2) cfg.lambda2 = *f.lambda2;
  if (f.tau0) cfg.tau0 = *f.tau0;
  if (f.tau_anneal) cfg.tau_anneal_actions = *f.tau_anneal;
  if (f.convergence_window) cfg.convergence_window = *f.convergence_window;
  if (f.convergence_eps) cfg.convergence_eps = *f.convergence_eps;
  if (f.gamma_discount) cfg.gamma_discount = *f.gamma_discount;
  if (f.update_on_forced) cfg.update_on_forced_silence = *f.update_on_forced;
  if (f.stale_slots) cfg.feedback_stale_slots = *f.stale_slots;
}

cogsim::SimConfig build_config(const ConfigFlags& f) {
  cogsim::SimConfig cfg;
  if (f.config_path) cogsim::load_config_file(cfg, *f.config_path);
  apply_flags(cfg, f);
  cogsim::validate(cfg);
  return cfg;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  for (const auto& tok : cogsim::detail::split(csv, ','))
    if (!tok.empty()) out.push_back(std::stod(tok));
  return out;
}

int cmd_run(const ConfigFlags& flags, const std::string& policy_name,
            const std::string& kappa_csv, std::uint64_t horizon,
            const std::string& out_dir, bool want_trace, double theta_ref_flag) {
  cogsim::SimConfig cfg = build_config(flags);

  std::unique_ptr<cogsim::SecondaryPolicy> policy;
  cogsim::QLearningPolicy* learner = nullptr;
  if (policy_name == "qlearning") {
    auto q = std::make_unique<cogsim::QLearningPolicy>(cfg);
    learner = q.get();
    policy = std::move(q);
  } else if (policy_name == "uniform") {
    policy = std::make_unique<cogsim::StationaryPolicy>(cogsim::uniform_policy(cfg.ws));
  } else if (policy_name == "silent") {
    policy = std::make_unique<cogsim::SilentPolicy>();
  } else if (policy_name == "stationary") {
    cogsim::PolicyVector kappa;
    for (double v : parse_double_list(kappa_csv)) kappa.kappa.push_back(v);
    policy = std::make_unique<cogsim::StationaryPolicy>(kappa);
  } else {
    throw std::invalid_argument("run: unknown policy '" + policy_name + "'");
  }

  cogsim::RunOptions opts;
  opts.theta_p_max = theta_ref_flag >= 0.0 ? theta_ref_flag : cogsim::theta_p_max(cfg);
  opts.collect_trace = want_trace;
  cogsim::RunResult run = cogsim::run_simulation(cfg, *policy, horizon, opts);

  double theta_s = cogsim::secondary_throughput(run.metrics);
  double theta_p = cogsim::primary_throughput(run.metrics);
  std::cout << "policy=" << policy_name << " slots=" << run.metrics.slots
            << " theta_s=" << cogsim::format_double(theta_s)
            << " theta_p=" << cogsim::format_double(theta_p)
            << " theta_p_max=" << cogsim::format_double(opts.theta_p_max)
            << " loss=" << cogsim::format_double(opts.theta_p_max - theta_p)
            << " failure_ratio=" << cogsim::format_double(cogsim::failure_ratio(run.metrics))
            << "\n";
  if (learner && learner->converged_at_slot())
    std::cout << "converged_at_slot=" << *learner->converged_at_slot() << "\n";

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    if (want_trace) {
      std::ofstream f(std::filesystem::path(out_dir) / "trace.csv", std::ios::binary);
      cogsim::write_trace_csv(f, cfg, run);
    }
    if (learner) {
      std::ofstream f(std::filesystem::path(out_dir) / "rewards.csv", std::ios::binary);
      cogsim::write_rewards_csv(f, cfg, learner->history(), cfg.ws);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slotted cognitive-radio MAC simulator"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run one simulation");
  ConfigFlags run_flags;
  add_config_flags(run, run_flags);
  std::string run_policy = "qlearning";
  std::string run_kappa;
  std::uint64_t run_horizon = 200000;
  std::string run_out;
  bool run_trace = false;
  double run_theta_ref = -1.0;
  run->add_option("--policy", run_policy, "qlearning | uniform | silent | stationary");
  run->add_option("--kappa", run_kappa, "stationary policy vector, e.g. 0.1,0.9,0,0");
  run->add_option("--horizon", run_horizon, "slots to simulate");
  run->add_option("--out", run_out, "artifact directory");
  run->add_flag("--trace", run_trace, "collect and write the per-slot trace");
  run->add_option("--theta-p-max", run_theta_ref, "override the calibrated reference");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run an experiment sweep");
  ConfigFlags sweep_flags;
  add_config_flags(sweep, sweep_flags);
  std::string spec_path, sweep_out, sweep_policies, sweep_lambdas;
  std::uint64_t sweep_horizon = 0;
  int sweep_reps = 0;
  sweep->add_option("--spec", spec_path, "experiment spec file");
  sweep->add_option("--out", sweep_out, "output directory (overrides spec)");
  sweep->add_option("--policies", sweep_policies, "comma list: qlearning,uniform,gridsearch,silent");
  sweep->add_option("--lambda1-list", sweep_lambdas, "comma list of arrival rates");
  sweep->add_option("--horizon", sweep_horizon, "slots per run (overrides spec)");
  sweep->add_option("--replications", sweep_reps, "seeds per cell (overrides spec)");

  // grid
  auto* grid = app.add_subcommand("grid", "brute-force stationary policy search");
  ConfigFlags grid_flags;
  add_config_flags(grid, grid_flags);
  double grid_step = 0.1;
  std::uint64_t grid_eval = 100000;
  std::string grid_out;
  grid->add_option("--step", grid_step, "simplex grid spacing (must divide 1)");
  grid->add_option("--eval-slots", grid_eval, "slots per grid point");
  grid->add_option("--out", grid_out, "artifact directory");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "solo-primary throughput reference");
  ConfigFlags cal_flags;
  add_config_flags(cal, cal_flags);
  std::uint64_t cal_slots = cogsim::kCalibrationSlots;
  std::uint64_t cal_seed = cogsim::kCalibrationSeed;
  cal->add_option("--slots", cal_slots, "calibration horizon");
  cal->add_option("--cal-seed", cal_seed, "calibration seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(run_flags, run_policy, run_kappa, run_horizon, run_out, run_trace,
                     run_theta_ref);

    if (sweep->parsed()) {
      // layering: defaults -> --config file -> spec file -> flags
      cogsim::ExperimentSpec spec;
      if (sweep_flags.config_path)
        cogsim::load_config_file(spec.base, *sweep_flags.config_path);
      if (!spec_path.empty()) cogsim::load_experiment_file(spec, spec_path);
      apply_flags(spec.base, sweep_flags);
      cogsim::validate(spec.base);
      if (!sweep_out.empty()) spec.output_dir = sweep_out;
      if (!sweep_policies.empty()) {
        spec.policies.clear();
        for (const auto& tok : cogsim::detail::split(sweep_policies, ','))
          if (!tok.empty()) spec.policies.push_back(cogsim::policy_kind_from_string(tok));
      }
      if (!sweep_lambdas.empty()) spec.sweep_lambda1 = parse_double_list(sweep_lambdas);
      if (sweep_horizon) spec.horizon_slots = sweep_horizon;
      if (sweep_reps) spec.replications = sweep_reps;
      cogsim::ExperimentResult res = cogsim::run_experiment(spec);
      std::cout << "cells=" << res.rows.size() << " output_dir=" << spec.output_dir << "\n";
      return 0;
    }

    if (grid->parsed()) {
      cogsim::SimConfig cfg = build_config(grid_flags);
      cogsim::GridResult res = cogsim::grid_search(cfg, grid_step, grid_eval);
      std::cout << "points=" << res.table.size() << " theta_p_ref="
                << cogsim::format_double(res.theta_p_ref) << (res.no_feasible_warning
                ? " WARNING=no_feasible_point" : "") << "\nbest_kappa=";
      for (size_t i = 0; i < res.best.kappa.size(); ++i)
        std::cout << (i ? "," : "") << cogsim::format_double(res.best.kappa[i]);
      std::cout << "\n";
      if (!grid_out.empty()) {
        std::filesystem::create_directories(grid_out);
        std::ofstream f(std::filesystem::path(grid_out) / "grid.csv", std::ios::binary);
        cogsim::write_grid_csv(f, cfg, res);
      }
      return 0;
    }

    if (cal->parsed()) {
      cogsim::SimConfig cfg = build_config(cal_flags);
      double theta = cogsim::theta_p_max(cfg, cal_slots, cal_seed);
      std::cout << "theta_p_max=" << cogsim::format_double(theta) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
