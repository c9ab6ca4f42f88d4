#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cogsim {

enum class ConstraintMode { kThroughputLoss, kFailureProb };

inline const char* to_string(ConstraintMode m) {
  return m == ConstraintMode::kThroughputLoss ? "throughput_loss" : "failure_prob";
}

// Full scenario description. Defaults are the reference evaluation setup:
// buffer of 4, four retry stages with windows 4/6/8/10, secondary window 3,
// failure probabilities (0.2, 0.5) primary and (0.3, 0.3) secondary.
struct SimConfig {
  double lambda1 = 0.05;          // primary packet arrival rate, packets/slot
  int buffer = 4;                 // primary buffer capacity B
  int max_retry = 4;              // max transmission attempts m per packet
  std::vector<int> windows = {4, 6, 8, 10};  // backoff window per stage, size m
  int ws = 3;                     // secondary backoff window size
  double rho = 0.2;               // primary decode failure prob, secondary silent
  double rho_star = 0.5;          // primary decode failure prob, secondary transmitting
  double nu = 0.3;                // secondary decode failure prob, primary silent
  double nu_star = 0.3;           // secondary decode failure prob, primary transmitting
  double gamma1 = 0.04;           // max tolerable primary throughput loss
  double gamma2 = 0.1;            // max tolerable primary packet-failure probability
  ConstraintMode constraint_mode = ConstraintMode::kThroughputLoss;
  int packet_slots = 1;           // packet + feedback duration in slots
  int difs_slots = 2;             // DIFS duration in slots
  std::uint64_t seed = 1;
  double lambda2 = 0.0;           // metadata only; the secondary queue is always backlogged

  // Learner knobs. tau_t = tau0 / (1 + t / tau_anneal_actions), forced to 0
  // once the reward vector stops moving.
  double tau0 = 0.3;
  double tau_anneal_actions = 200.0;
  int convergence_window = 50;
  double convergence_eps = 1e-3;
  double gamma_discount = 0.0;    // 0 = stateless update
  bool update_on_forced_silence = false;

  // If no primary packet completion refreshed the constraint bit within this
  // many slots (and a primary has been heard at least once), the agent treats
  // the constraint as violated until the next refresh. Keeps the feedback
  // loop live when an aggressive policy locks the primary out of the channel.
  // 0 disables the guard.
  std::uint64_t feedback_stale_slots = 500;
};

inline void validate(const SimConfig& c) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (!(c.lambda1 >= 0.0)) fail("lambda1 must be >= 0");
  if (c.buffer < 1) fail("buffer must be >= 1");
  if (c.max_retry < 1) fail("max_retry must be >= 1");
  if (static_cast<int>(c.windows.size()) != c.max_retry)
    fail("windows must have exactly max_retry entries");
  for (int w : c.windows)
    if (w < 1) fail("every backoff window must be >= 1");
  if (c.ws < 1) fail("ws must be >= 1");
  for (double p : {c.rho, c.rho_star, c.nu, c.nu_star})
    if (!(p >= 0.0 && p <= 1.0)) fail("failure probabilities must lie in [0, 1]");
  if (c.rho_star < c.rho) fail("rho_star must be >= rho");
  if (c.nu_star < c.nu) fail("nu_star must be >= nu");
  if (!(c.gamma1 >= 0.0)) fail("gamma1 must be >= 0");
  if (!(c.gamma2 >= 0.0 && c.gamma2 <= 1.0)) fail("gamma2 must lie in [0, 1]");
  if (c.packet_slots < 1) fail("packet_slots must be >= 1");
  if (c.difs_slots < 1) fail("difs_slots must be >= 1");
  if (!(c.lambda2 >= 0.0)) fail("lambda2 must be >= 0");
  if (!(c.tau0 >= 0.0 && c.tau0 <= 1.0)) fail("tau0 must lie in [0, 1]");
  if (!(c.tau_anneal_actions > 0.0)) fail("tau_anneal_actions must be > 0");
  if (c.convergence_window < 1) fail("convergence_window must be >= 1");
  if (!(c.convergence_eps > 0.0)) fail("convergence_eps must be > 0");
  if (!(c.gamma_discount >= 0.0 && c.gamma_discount < 1.0)) fail("gamma_discount must lie in [0, 1)");
}

namespace detail {

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

inline bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw std::invalid_argument("config: bad boolean '" + v + "'");
}

}  // namespace detail

// Applies one key=value pair; throws on unknown keys or malformed values.
inline void apply_key_value(SimConfig& c, const std::string& key, const std::string& value) {
  try {
    if (key == "lambda1") c.lambda1 = std::stod(value);
    else if (key == "buffer") c.buffer = std::stoi(value);
    else if (key == "max_retry") c.max_retry = std::stoi(value);
    else if (key == "windows") {
      c.windows.clear();
      for (const auto& tok : detail::split(value, ','))
        if (!tok.empty()) c.windows.push_back(std::stoi(tok));
    }
    else if (key == "ws") c.ws = std::stoi(value);
    else if (key == "rho") c.rho = std::stod(value);
    else if (key == "rho_star") c.rho_star = std::stod(value);
    else if (key == "nu") c.nu = std::stod(value);
    else if (key == "nu_star") c.nu_star = std::stod(value);
    else if (key == "gamma1") c.gamma1 = std::stod(value);
    else if (key == "gamma2") c.gamma2 = std::stod(value);
    else if (key == "constraint_mode") {
      if (value == "throughput_loss") c.constraint_mode = ConstraintMode::kThroughputLoss;
      else if (value == "failure_prob") c.constraint_mode = ConstraintMode::kFailureProb;
      else throw std::invalid_argument("config: unknown constraint_mode '" + value + "'");
    }
    else if (key == "packet_slots") c.packet_slots = std::stoi(value);
    else if (key == "difs_slots") c.difs_slots = std::stoi(value);
    else if (key == "seed") c.seed = std::stoull(value);
    else if (key == "lambda2") c.lambda2 = std::stod(value);
    else if (key == "tau0") c.tau0 = std::stod(value);
    else if (key == "tau_anneal_actions") c.tau_anneal_actions = std::stod(value);
    else if (key == "convergence_window") c.convergence_window = std::stoi(value);
    else if (key == "convergence_eps") c.convergence_eps = std::stod(value);
    else if (key == "gamma_discount") c.gamma_discount = std::stod(value);
    else if (key == "update_on_forced_silence") c.update_on_forced_silence = detail::parse_bool(value);
    else if (key == "feedback_stale_slots") c.feedback_stale_slots = std::stoull(value);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad value '" + value + "' for key '" + key + "'");
  }
}

// key = value lines; '#' starts a comment; unknown keys are errors.
inline void load_config_file(SimConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
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
      throw std::invalid_argument("config: line " + std::to_string(lineno) + " is not key=value");
    apply_key_value(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
}

// Canonical text form; feeds the artifact hash and debug output.
inline std::string to_key_values(const SimConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "lambda1=" << c.lambda1 << '\n'
     << "buffer=" << c.buffer << '\n'
     << "max_retry=" << c.max_retry << '\n'
     << "windows=";
  for (size_t i = 0; i < c.windows.size(); ++i) os << (i ? "," : "") << c.windows[i];
  os << '\n'
     << "ws=" << c.ws << '\n'
     << "rho=" << c.rho << '\n'
     << "rho_star=" << c.rho_star << '\n'
     << "nu=" << c.nu << '\n'
     << "nu_star=" << c.nu_star << '\n'
     << "gamma1=" << c.gamma1 << '\n'
     << "gamma2=" << c.gamma2 << '\n'
     << "constraint_mode=" << to_string(c.constraint_mode) << '\n'
     << "packet_slots=" << c.packet_slots << '\n'
     << "difs_slots=" << c.difs_slots << '\n'
     << "seed=" << c.seed << '\n'
     << "lambda2=" << c.lambda2 << '\n'
     << "tau0=" << c.tau0 << '\n'
     << "tau_anneal_actions=" << c.tau_anneal_actions << '\n'
     << "convergence_window=" << c.convergence_window << '\n'
     << "convergence_eps=" << c.convergence_eps << '\n'
     << "gamma_discount=" << c.gamma_discount << '\n'
     << "update_on_forced_silence=" << (c.update_on_forced_silence ? 1 : 0) << '\n'
     << "feedback_stale_slots=" << c.feedback_stale_slots << '\n';
  return os.str();
}

// FNV-1a over the canonical serialization.
inline std::uint64_t config_hash(const SimConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_key_values(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace cogsim
