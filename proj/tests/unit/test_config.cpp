#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "cogsim/config.hpp"

using namespace cogsim;

TEST_CASE("default config validates") {
  SimConfig cfg;
  CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("validation rejects inconsistent settings") {
  SimConfig cfg;
  SUBCASE("windows size must equal max_retry") {
    cfg.windows = {4, 6};
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  }
  SUBCASE("rho_star below rho") {
    cfg.rho_star = 0.1;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  }
  SUBCASE("nu_star below nu") {
    cfg.nu_star = 0.0;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  }
  SUBCASE("negative lambda1") {
    cfg.lambda1 = -0.1;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  }
  SUBCASE("zero window entry") {
    cfg.windows = {4, 0, 8, 10};
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  }
  SUBCASE("probability out of range") {
    cfg.nu = 1.5;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  }
}

TEST_CASE("equality of rho/rho_star and nu/nu_star is allowed") {
  SimConfig cfg;
  cfg.rho_star = cfg.rho;
  cfg.nu_star = cfg.nu;
  CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("key=value file round trip with overrides") {
  const char* path = "cfg_test_tmp.conf";
  {
    std::ofstream f(path);
    f << "# comment\n"
      << "lambda1 = 0.07\n"
      << "windows = 4, 6, 8, 10\n"
      << "constraint_mode = failure_prob\n"
      << "seed = 99\n"
      << "update_on_forced_silence = true\n";
  }
  SimConfig cfg;
  load_config_file(cfg, path);
  CHECK(cfg.lambda1 == doctest::Approx(0.07));
  CHECK(cfg.constraint_mode == ConstraintMode::kFailureProb);
  CHECK(cfg.seed == 99);
  CHECK(cfg.update_on_forced_silence);
  apply_key_value(cfg, "lambda1", "0.03");  // flag-style override wins
  CHECK(cfg.lambda1 == doctest::Approx(0.03));
  std::remove(path);
}

TEST_CASE("unknown keys and bad values are rejected") {
  SimConfig cfg;
  CHECK_THROWS_AS(apply_key_value(cfg, "lambda_one", "0.1"), std::invalid_argument);
  CHECK_THROWS_AS(apply_key_value(cfg, "lambda1", "abc"), std::invalid_argument);
  CHECK_THROWS_AS(apply_key_value(cfg, "constraint_mode", "strict"), std::invalid_argument);
  CHECK_THROWS_AS(load_config_file(cfg, "does_not_exist.conf"), std::invalid_argument);
}

TEST_CASE("config hash tracks content") {
  SimConfig a, b;
  CHECK(config_hash(a) == config_hash(b));
  b.lambda1 = 0.051;
  CHECK(config_hash(a) != config_hash(b));
  b = a;
  b.seed = 2;
  CHECK(config_hash(a) != config_hash(b));
}
