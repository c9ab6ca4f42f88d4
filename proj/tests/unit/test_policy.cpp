#include <doctest.h>

#include <cmath>

#include "cogsim/policy.hpp"
#include "oracles.hpp"

using namespace cogsim;

TEST_CASE("uniform policy spreads mass over the counters and never idles") {
  PolicyVector p3 = uniform_policy(3);
  REQUIRE(p3.kappa.size() == 4);
  CHECK(p3.kappa[0] == 0.0);
  for (int i = 1; i <= 3; ++i) CHECK(p3.kappa[i] == doctest::Approx(1.0 / 3));

  PolicyVector p1 = uniform_policy(1);
  CHECK(p1.kappa == std::vector<double>{0.0, 1.0});

  PolicyVector p4 = uniform_policy(4);
  for (int i = 1; i <= 4; ++i) CHECK(p4.kappa[i] == doctest::Approx(0.25));
  CHECK_THROWS_AS(uniform_policy(0), std::invalid_argument);
}

TEST_CASE("policy vectors must be distributions") {
  CHECK_THROWS_AS(validate_policy(PolicyVector{{0.5, 0.6}}), std::invalid_argument);
  CHECK_THROWS_AS(validate_policy(PolicyVector{{-0.1, 1.1}}), std::invalid_argument);
  CHECK_THROWS_AS(validate_policy(PolicyVector{{1.0}}), std::invalid_argument);
  CHECK_NOTHROW(validate_policy(PolicyVector{{0.25, 0.25, 0.25, 0.25}}));
}

TEST_CASE("stationary executor: silent vector never transmits") {
  SimConfig cfg;
  cfg.lambda1 = 0.05;
  StationaryPolicy pol(silent_policy(cfg.ws));
  RunResult run = run_simulation(cfg, pol, 100000);
  CHECK(run.actions.tx_attempts == 0);
  CHECK(secondary_throughput(run.metrics) == 0.0);
  CHECK(run.actions.voluntary[0] == run.actions.decisions());
}

TEST_CASE("stationary executor: a deterministic arm always picks it") {
  SimConfig cfg;
  cfg.lambda1 = 0.0;
  StationaryPolicy pol(PolicyVector{{0.0, 1.0, 0.0, 0.0}});
  RunResult run = run_simulation(cfg, pol, 30000);
  CHECK(run.actions.voluntary[1] == run.actions.decisions());
  CHECK(run.actions.voluntary[1] > 0);
}

TEST_CASE("stationary executor matches its sampling distribution") {
  SimConfig cfg;
  cfg.lambda1 = 0.0;  // keep cycles short and decision counts high
  StationaryPolicy pol(uniform_policy(cfg.ws));
  RunResult run = run_simulation(cfg, pol, 60000);
  std::uint64_t actions = 0;
  for (int u = 1; u <= cfg.ws; ++u) actions += run.actions.voluntary[u];
  REQUIRE(actions > 10000);
  CHECK(run.actions.voluntary[0] == 0);
  std::vector<std::uint64_t> counts(run.actions.voluntary.begin() + 1,
                                    run.actions.voluntary.end());
  CHECK(oracles::chi_square_uniform(counts) < oracles::chi_square_crit_p01(cfg.ws - 1));
}

TEST_CASE("simplex grid enumeration is lexicographic and complete") {
  auto grid = simplex_grid(4, 10);
  CHECK(grid.size() == 286);  // C(13, 3)
  for (const auto& g : grid) {
    int sum = 0;
    for (int v : g) sum += v;
    CHECK(sum == 10);
  }
  CHECK(grid.front() == std::vector<int>{0, 0, 0, 10});
  CHECK(grid.back() == std::vector<int>{10, 0, 0, 0});
  CHECK(std::is_sorted(grid.begin(), grid.end()));
}

TEST_CASE("grid search validates its inputs") {
  SimConfig cfg;
  CHECK_THROWS_AS(grid_search(cfg, 0.3, 100000), std::invalid_argument);
  CHECK_THROWS_AS(grid_search(cfg, 0.0, 100000), std::invalid_argument);
  CHECK_THROWS_AS(grid_search(cfg, 0.1, 5000), std::invalid_argument);
}

TEST_CASE("grid search is deterministic and the best point dominates the table") {
  SimConfig cfg;
  cfg.lambda1 = 0.05;
  GridResult a = grid_search(cfg, 0.2, 100000, 2);
  GridResult b = grid_search(cfg, 0.2, 100000, 1);  // thread count must not matter
  REQUIRE(a.table.size() == b.table.size());
  CHECK(a.best.kappa == b.best.kappa);
  for (size_t i = 0; i < a.table.size(); ++i) {
    CHECK(a.table[i].theta_s == b.table[i].theta_s);
    CHECK(a.table[i].feasible == b.table[i].feasible);
  }
  double best_theta_s = -1.0;
  for (const GridPoint& gp : a.table)
    if (gp.kappa.kappa == a.best.kappa) best_theta_s = gp.theta_s;
  if (!a.no_feasible_warning) {
    for (const GridPoint& gp : a.table)
      if (gp.feasible) CHECK(best_theta_s >= gp.theta_s);
  }
}

TEST_CASE("the silent point sits exactly on the zero-loss boundary") {
  SimConfig cfg;
  cfg.lambda1 = 0.05;
  GridResult res = grid_search(cfg, 0.2, 100000);
  for (const GridPoint& gp : res.table)
    if (gp.kappa.kappa[0] == 1.0) {
      CHECK(gp.loss == 0.0);
      CHECK(gp.feasible);
    }
}

TEST_CASE("zero tolerance returns the all-silent vector") {
  SimConfig cfg;
  cfg.lambda1 = 0.05;
  cfg.gamma1 = 0.0;
  GridResult res = grid_search(cfg, 0.2, 100000);
  REQUIRE(res.best.kappa.size() == 4);
  CHECK(res.best.kappa[0] == 1.0);
  for (size_t i = 1; i < res.best.kappa.size(); ++i) CHECK(res.best.kappa[i] == 0.0);
}

TEST_CASE("with no primary the best point puts all mass on transmitting arms") {
  SimConfig cfg;
  cfg.lambda1 = 0.0;
  GridResult res = grid_search(cfg, 0.2, 100000);
  CHECK(!res.no_feasible_warning);
  CHECK(res.best.kappa[0] == 0.0);
  // the shortest cycle wins outright
  CHECK(res.best.kappa[1] == 1.0);
}
