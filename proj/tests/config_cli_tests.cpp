#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "dlh/config.hpp"
#include "test_support.hpp"

using dlh::ConfigParse;
using dlh::InequalityForm;
using dlh::NormVariant;
using dlh::RunConfig;
using Catch::Matchers::WithinRel;

TEST_CASE("config parser reads every section") {
  const std::string text =
      "# leading comment\n"
      "[system]\n"
      "k = 2\n"
      "dims = 3 1\n"
      "alpha = 0 0 1.5 0  ; trailing comment\n"
      "\n"
      "[params]\n"
      "p = 2\n"
      "s = 2.5\n"
      "t = 0.5\n"
      "mu = 1, 0.25\n"
      "variant = dist\n"
      "norm = dist2\n"
      "[run]\n"
      "command = verify\n"
      "n = 1000\n"
      "seed = 42\n"
      "domain = ball:0,0,0,0:2\n"
      "testfn = bump:0:1.5\n"
      "override_conditions = true\n"
      "format = csv\n"
      "[schedule]\n"
      "deltas = 0.5 0.2\n"
      "radii = 1\n";
  RunConfig cfg;
  dlh::parse_config(text, cfg);
  REQUIRE(cfg.k == 2);
  REQUIRE(cfg.dims == std::vector<int>{3, 1});
  REQUIRE(cfg.alpha == std::vector<double>{0.0, 0.0, 1.5, 0.0});
  REQUIRE(cfg.p == 2.0);
  REQUIRE(cfg.s == 2.5);
  REQUIRE(cfg.t == 0.5);
  REQUIRE(cfg.mu == std::vector<double>{1.0, 0.25});
  REQUIRE(cfg.variant == InequalityForm::DistNorm);
  REQUIRE(cfg.norm == NormVariant::Dist2);
  REQUIRE(cfg.command == "verify");
  REQUIRE(cfg.n == 1000);
  REQUIRE(cfg.seed == 42);
  REQUIRE(cfg.domain == "ball:0,0,0,0:2");
  REQUIRE(cfg.testfn == "bump:0:1.5");
  REQUIRE(cfg.override_conditions == true);
  REQUIRE(cfg.format == "csv");
  REQUIRE(cfg.deltas == std::vector<double>{0.5, 0.2});
  REQUIRE(cfg.radii == std::vector<double>{1.0});
}

TEST_CASE("config parser rejects malformed input") {
  RunConfig cfg;
  SECTION("unknown section") {
    REQUIRE_THROWS_AS(dlh::parse_config("[extras]\nx = 1\n", cfg), ConfigParse);
  }
  SECTION("unknown key") {
    REQUIRE_THROWS_AS(dlh::parse_config("[system]\nkk = 2\n", cfg),
                      ConfigParse);
    REQUIRE_THROWS_AS(dlh::parse_config("[params]\nq = 2\n", cfg), ConfigParse);
    REQUIRE_THROWS_AS(dlh::parse_config("[run]\nthreads = 2\n", cfg),
                      ConfigParse);
  }
  SECTION("key before any section") {
    REQUIRE_THROWS_AS(dlh::parse_config("k = 2\n[system]\n", cfg), ConfigParse);
  }
  SECTION("missing equals") {
    REQUIRE_THROWS_AS(dlh::parse_config("[system]\nk 2\n", cfg), ConfigParse);
  }
  SECTION("malformed header") {
    REQUIRE_THROWS_AS(dlh::parse_config("[system\nk = 2\n", cfg), ConfigParse);
  }
  SECTION("bad numbers") {
    REQUIRE_THROWS_AS(dlh::parse_config("[system]\nk = two\n", cfg),
                      ConfigParse);
    REQUIRE_THROWS_AS(dlh::parse_config("[params]\np = 1.5x\n", cfg),
                      ConfigParse);
    REQUIRE_THROWS_AS(dlh::parse_config("[params]\nmu =\n", cfg), ConfigParse);
    REQUIRE_THROWS_AS(dlh::parse_config("[run]\nn = -5\n", cfg), ConfigParse);
    REQUIRE_THROWS_AS(
        dlh::parse_config("[run]\noverride_conditions = maybe\n", cfg),
        ConfigParse);
  }
  SECTION("bad enums") {
    REQUIRE_THROWS_AS(dlh::parse_config("[params]\nvariant = weighted\n", cfg),
                      ConfigParse);
    REQUIRE_THROWS_AS(dlh::parse_config("[params]\nnorm = euclid\n", cfg),
                      ConfigParse);
  }
}

TEST_CASE("single-section loading filters and insists on presence") {
  const std::string text =
      "[system]\nk = 1\ndims = 3\nalpha = 0\n[params]\np = 4\n";
  RunConfig cfg;
  dlh::parse_config(text, cfg, "params");
  REQUIRE(cfg.p == 4.0);
  REQUIRE_FALSE(cfg.k.has_value());  // [system] was skipped
  RunConfig cfg2;
  REQUIRE_THROWS_AS(dlh::parse_config(text, cfg2, "schedule"), ConfigParse);
}

TEST_CASE("later values win when sections repeat") {
  RunConfig cfg;
  dlh::parse_config("[params]\np = 2\ns = 1\n", cfg);
  dlh::parse_config("[params]\ns = 3\n", cfg);
  REQUIRE(cfg.p == 2.0);
  REQUIRE(cfg.s == 3.0);
}

TEST_CASE("system construction validates the three keys") {
  RunConfig cfg;
  REQUIRE_THROWS_AS(dlh::build_system(cfg), ConfigParse);
  dlh::parse_config("[system]\nk = 2\ndims = 3 1\nalpha = 0 0 1 0\n", cfg);
  const auto sys = dlh::build_system(cfg);
  REQUIRE(sys.k() == 2);
  REQUIRE(sys.sigma(1) == 2.0);
  REQUIRE(sys.Q() == 5.0);

  RunConfig bad_k;
  dlh::parse_config("[system]\nk = 3\ndims = 3 1\nalpha = 0 0 1 0\n", bad_k);
  REQUIRE_THROWS_AS(dlh::build_system(bad_k), ConfigParse);
  RunConfig bad_alpha;
  dlh::parse_config("[system]\nk = 2\ndims = 3 1\nalpha = 0 0 1\n", bad_alpha);
  REQUIRE_THROWS_AS(dlh::build_system(bad_alpha), ConfigParse);
}

TEST_CASE("parameter defaults fill every unset key") {
  RunConfig cfg;
  dlh::parse_config("[system]\nk = 2\ndims = 3 1\nalpha = 0 0 1 0\n", cfg);
  const auto sys = dlh::build_system(cfg);
  const auto prm = dlh::build_params(cfg, sys);
  REQUIRE(prm.p == 2.0);
  REQUIRE(prm.s == 0.0);
  REQUIRE(prm.t == 0.0);
  REQUIRE(prm.mu == std::vector<double>{0.0, 0.0});
  REQUIRE(prm.form == InequalityForm::SemiNorm);
  REQUIRE(prm.norm == NormVariant::Bracket);
}

TEST_CASE("domain specs parse and broadcast scalar centers") {
  const auto ball = dlh::parse_domain("ball:0:2", 4);
  REQUIRE(ball.origin_centered());
  const auto ball2 = dlh::parse_domain("ball:1,0,0,0:2", 4);
  REQUIRE_FALSE(ball2.origin_centered());
  const auto box = dlh::parse_domain("box:-1:1", 3);
  REQUIRE(box.origin_centered());
  REQUIRE_THAT(box.volume(), WithinRel(8.0, 1e-12));
  const auto box2 = dlh::parse_domain("box:-1,-2,-3:1,2,3", 3);
  REQUIRE_THAT(box2.volume(), WithinRel(48.0, 1e-12));

  REQUIRE_THROWS_AS(dlh::parse_domain("ball:0", 3), ConfigParse);
  REQUIRE_THROWS_AS(dlh::parse_domain("cube:-1:1", 3), ConfigParse);
  REQUIRE_THROWS_AS(dlh::parse_domain("ball:0,0:2", 3), ConfigParse);
  REQUIRE_THROWS_AS(dlh::parse_domain("box:-1,-1:1", 3), ConfigParse);
}

TEST_CASE("test function specs parse") {
  const auto u = dlh::parse_testfn("bump:0:1.5", 3);
  const double peak = std::exp(-1.0);  // mollifier value at its center
  REQUIRE(u.value(std::vector<double>{0.0, 0.0, 0.0}) == peak);
  REQUIRE(u.value(std::vector<double>{2.0, 0.0, 0.0}) == 0.0);
  const auto v = dlh::parse_testfn("bump:1,0,0:1", 3);
  REQUIRE(v.value(std::vector<double>{1.0, 0.0, 0.0}) == peak);

  REQUIRE_THROWS_AS(dlh::parse_testfn("bump:0", 3), ConfigParse);
  REQUIRE_THROWS_AS(dlh::parse_testfn("spike:0:1", 3), ConfigParse);
  REQUIRE_THROWS_AS(dlh::parse_testfn("bump:0,0:1", 3), ConfigParse);
}

TEST_CASE("formatted system sections survive a parse round trip") {
  std::mt19937_64 rng(20260814);
  for (int rep = 0; rep < 50; ++rep) {
    const auto sys = dlh_test::random_system(rng);
    const std::string text = dlh::format_system_section(sys);
    RunConfig cfg;
    dlh::parse_config(text, cfg);
    const auto back = dlh::build_system(cfg);
    REQUIRE(back.k() == sys.k());
    for (int i = 0; i < sys.k(); ++i) {
      REQUIRE(back.dim(i) == sys.dim(i));
      for (int j = 0; j < sys.k(); ++j)
        REQUIRE(back.alpha(i, j) == sys.alpha(i, j));  // bitwise
    }
    // Formatting the reparsed system reproduces the bytes too.
    REQUIRE(dlh::format_system_section(back) == text);
  }
  // Awkward exponents round-trip through the %.17g printing.
  dlh::LambdaSystem odd({1, 1}, {0.0, 0.0, 0.1 + 0.2, 0.0});
  RunConfig cfg;
  dlh::parse_config(dlh::format_system_section(odd), cfg);
  REQUIRE(dlh::build_system(cfg).alpha(1, 0) == 0.1 + 0.2);
}
