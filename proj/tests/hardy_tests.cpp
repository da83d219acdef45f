#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>
#include <vector>

#include "dlh/hardy.hpp"
#include "test_support.hpp"

using namespace dlh;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("parameter validation rejects malformed inputs") {
  auto sys = make_grushin(3, 1, 1.0);
  HardyParams prm;
  prm.mu = {0.0, 0.0};
  REQUIRE_NOTHROW(validate_params(sys, prm));

  SECTION("p must be positive") {
    prm.p = 0.0;
    REQUIRE_THROWS_AS(validate_params(sys, prm), InvalidParams);
  }
  SECTION("s and t must be nonnegative") {
    prm.s = -0.5;
    REQUIRE_THROWS_AS(validate_params(sys, prm), InvalidParams);
  }
  SECTION("t needs the distance form") {
    prm.t = 1.0;
    REQUIRE_THROWS_AS(validate_params(sys, prm), InvalidParams);
    prm.form = InequalityForm::DistNorm;
    prm.norm = NormVariant::Dist1;
    REQUIRE_NOTHROW(validate_params(sys, prm));
  }
  SECTION("distance form rejects the bracket variant") {
    prm.form = InequalityForm::DistNorm;
    REQUIRE_THROWS_AS(validate_params(sys, prm), InvalidParams);
  }
  SECTION("mu must match the block count and be nonnegative") {
    prm.mu = {0.0};
    REQUIRE_THROWS_AS(validate_params(sys, prm), DimensionMismatch);
    prm.mu = {0.0, -1.0};
    REQUIRE_THROWS_AS(validate_params(sys, prm), InvalidParams);
  }
  SECTION("unweighted form takes no exponents") {
    prm.form = InequalityForm::Unweighted;
    prm.mu = {1.0, 0.0};
    REQUIRE_THROWS_AS(validate_params(sys, prm), InvalidParams);
    prm.mu.clear();
    REQUIRE_NOTHROW(validate_params(sys, prm));
    prm.s = 1.0;
    REQUIRE_THROWS_AS(validate_params(sys, prm), InvalidParams);
  }
}

TEST_CASE("admissibility on the plain two-block example") {
  // dims (3,1), single exponent 1, p = 2, s = 2: the second-block condition
  // reads 2 < 1 verbatim (min over the column is 0) and 0 < 1 relaxed.
  auto sys = make_grushin(3, 1, 1.0);
  HardyParams prm;
  prm.s = 2.0;
  prm.mu = {0.0, 0.0};

  auto verbatim = check_conditions(sys, prm, ConditionMode::Verbatim);
  REQUIRE(verbatim.records.size() == 3);  // global + one per block
  REQUIRE(verbatim.records[0].satisfied);  // 2 < 3
  REQUIRE(verbatim.records[1].satisfied);  // 2 < 3
  REQUIRE_FALSE(verbatim.records[2].satisfied);
  REQUIRE(verbatim.records[2].lhs == 2.0);
  REQUIRE(verbatim.records[2].rhs == 1.0);
  REQUIRE_FALSE(verbatim.all_satisfied);

  auto relaxed = check_conditions(sys, prm, ConditionMode::Relaxed);
  // column 2 has no positive entries, so the min falls back to 1:
  // -2 * 1 + 2 = 0 < 1
  REQUIRE(relaxed.records[2].lhs == 0.0);
  REQUIRE(relaxed.all_satisfied);

  // extra block-2 weight rescues the verbatim conditions
  prm.mu = {0.0, 2.0};
  auto heavier = check_conditions(sys, prm, ConditionMode::Verbatim);
  REQUIRE(heavier.records[2].rhs == 3.0);
  REQUIRE(heavier.all_satisfied);
}

TEST_CASE("row scan differs from column scan where the matrix is asymmetric") {
  // dims (1,1,1) chain: alpha_21 = 4, alpha_32 = 4. For block 2, column
  // entries {4} but row entries {4} too; block 1: column {4, 0} vs row {}.
  LambdaSystem sys({1, 1, 1}, {0, 0, 0, 4, 0, 0, 0, 4, 0});
  HardyParams prm;
  prm.p = 1.0;
  prm.s = 1.5;
  prm.mu = {1.0, 4.0, 12.0};
  auto col = check_conditions(sys, prm, ConditionMode::Relaxed,
                              MinIndexAxis::Column);
  auto row =
      check_conditions(sys, prm, ConditionMode::Relaxed, MinIndexAxis::Row);
  // block 1 relaxed column min: positive entries {4} -> min(4, 1) = 1;
  // row 1 has no entries at all -> min = 1 as well
  REQUIRE(col.records[1].lhs == row.records[1].lhs);
  // block 3 column has no positive entries (min 1), row 3 has {4} (min 1):
  // both fall back to 1 -- scan block 2 instead where row vs column agree
  REQUIRE(col.records[2].lhs == -1.0 * 1.0 + 1.5);
  // asymmetric case: alpha_31 = 0.25 makes column 1 min 0.25 but row 1 stays 1
  LambdaSystem sys2({1, 1, 1}, {0, 0, 0, 4, 0, 0, 0.25, 4, 0});
  auto col2 = check_conditions(sys2, prm, ConditionMode::Relaxed,
                               MinIndexAxis::Column);
  auto row2 =
      check_conditions(sys2, prm, ConditionMode::Relaxed, MinIndexAxis::Row);
  REQUIRE_THAT(col2.records[1].lhs, WithinRel(-0.25 + 1.5, 1e-14));
  REQUIRE_THAT(row2.records[1].lhs, WithinRel(-1.0 + 1.5, 1e-14));
}

TEST_CASE("unweighted admissibility is p between 1 and the first dimension") {
  auto sys = make_grushin(5, 1, 1.0);
  HardyParams prm;
  prm.form = InequalityForm::Unweighted;
  prm.p = 2.0;
  REQUIRE(check_conditions(sys, prm).all_satisfied);
  prm.p = 5.0;
  REQUIRE_FALSE(check_conditions(sys, prm).all_satisfied);
  prm.p = 1.0;
  REQUIRE_FALSE(check_conditions(sys, prm).all_satisfied);
}

TEST_CASE("explicit constants on frozen examples") {
  SECTION("two-block, dims (3,1), exponent 1, p = 2, s = 2") {
    auto sys = make_grushin(3, 1, 1.0);
    HardyParams prm;
    prm.s = 2.0;
    prm.mu = {0.0, 0.0};
    auto c = hardy_constant(sys, prm);  // ((5 - 2)/2)^2
    REQUIRE(c.applicable);
    REQUIRE_THAT(c.value, WithinRel(2.25, 1e-15));
  }
  SECTION("single block N = 3, p = 2, s = 2") {
    LambdaSystem sys({3}, {0.0});
    HardyParams prm;
    prm.s = 2.0;
    prm.mu = {0.0};
    REQUIRE_THAT(hardy_constant(sys, prm).value, WithinRel(0.25, 1e-15));
  }
  SECTION("single block N = 4, p = 3, s = 3") {
    LambdaSystem sys({4}, {0.0});
    HardyParams prm;
    prm.p = 3.0;
    prm.s = 3.0;
    prm.mu = {0.0};
    REQUIRE_THAT(hardy_constant(sys, prm).value,
                 WithinRel(1.0 / 27.0, 1e-15));
  }
  SECTION("three blocks, dims (3,2,2), all exponents 1, s = 5, heavy mu") {
    LambdaSystem sys({3, 2, 2}, {0, 0, 0, 1, 0, 0, 1, 1, 0});
    HardyParams prm;
    prm.s = 5.0;
    prm.mu = {4.0, 2.0, 2.0};
    // sigma = (1,2,4), Q = 15, sum sigma mu = 16: ((15-5+16)/2)^2
    REQUIRE_THAT(hardy_constant(sys, prm).value, WithinRel(169.0, 1e-15));
  }
  SECTION("distance form, dims (5,1), exponent 1") {
    auto sys = make_grushin(5, 1, 1.0);  // Q = 7
    HardyParams prm;
    prm.form = InequalityForm::DistNorm;
    prm.norm = NormVariant::Dist1;
    prm.t = 2.0;
    prm.mu = {0.0, 0.0};
    REQUIRE_THAT(hardy_constant(sys, prm).value, WithinRel(6.25, 1e-15));
    prm.s = 1.0;
    prm.t = 1.0;
    prm.norm = NormVariant::Dist2;
    REQUIRE_THAT(hardy_constant(sys, prm).value, WithinRel(6.25, 1e-15));
  }
  SECTION("unweighted, dims (5,1), p = 2") {
    auto sys = make_grushin(5, 1, 1.0);
    HardyParams prm;
    prm.form = InequalityForm::Unweighted;
    REQUIRE_THAT(hardy_constant(sys, prm).value, WithinRel(2.25, 1e-15));
    REQUIRE(hardy_constant(sys, prm).numerator == 3.0);
  }
  SECTION("nonpositive numerator is reported, not thrown") {
    LambdaSystem sys({3}, {0.0});
    HardyParams prm;
    prm.s = 4.0;
    prm.mu = {0.0};
    auto c = hardy_constant(sys, prm);
    REQUIRE_FALSE(c.applicable);
    REQUIRE(c.value == 0.0);
    REQUIRE(c.numerator == -1.0);
  }
}

TEST_CASE("weights on frozen points") {
  auto sys = make_grushin(3, 1, 1.0);
  HardyParams prm;
  prm.s = 2.0;
  prm.mu = {0.0, 0.0};
  // at (1,0,0,0): bracket norm 1, first block norm 1, second 0 with zero
  // exponent, so both weights are 1
  std::vector<double> e1 = {1.0, 0.0, 0.0, 0.0};
  REQUIRE_THAT(gradient_weight(sys, prm, e1), WithinRel(1.0, 1e-14));
  REQUIRE_THAT(potential_density(sys, prm, e1), WithinRel(1.0, 1e-14));

  // generic point, naive recomputation: psi = [[x]]^{pE-s} |x|^{-p B_1},
  // E = 2, B = (1, 0)
  std::vector<double> x = {0.5, -1.0, 0.25, 2.0};
  const double br = bracket_norm(sys, x);
  const double b1 = sys.block_norm(x, 0);
  REQUIRE_THAT(gradient_weight(sys, prm, x),
               WithinRel(std::pow(br, 2.0) * std::pow(b1, -2.0), 1e-13));
  REQUIRE_THAT(potential_density(sys, prm, x),
               WithinRel(std::pow(br, -2.0), 1e-13));

  // mu = (2,0), s = 4 on dims (3,3): psi collapses to 1 everywhere
  auto sys33 = make_grushin(3, 3, 1.0);
  HardyParams flat;
  flat.s = 4.0;
  flat.mu = {2.0, 0.0};
  std::vector<double> y = {0.3, 1.0, -0.2, 0.9, 0.1, -1.4};
  REQUIRE_THAT(gradient_weight(sys33, flat, y), WithinRel(1.0, 1e-13));

  // unweighted densities
  HardyParams unw;
  unw.form = InequalityForm::Unweighted;
  REQUIRE_THAT(potential_density(sys, unw, x),
               WithinRel(std::pow(b1, -2.0), 1e-13));
  REQUIRE(gradient_weight(sys, unw, x) == 1.0);
  unw.norm = NormVariant::Dist1;
  REQUIRE_THAT(potential_density(sys, unw, x),
               WithinRel(std::pow(dist_norm(sys, x, NormVariant::Dist1), -2.0),
                         1e-13));
}

TEST_CASE("weights scale with the homogeneity the constants assume") {
  std::mt19937_64 rng(91);
  std::uniform_real_distribution<> sd(0.0, 3.0), md(0.0, 2.0);
  for (int rep = 0; rep < 20; ++rep) {
    auto sys = dlh_test::random_system(rng);
    auto x = dlh_test::random_point(rng, sys);
    HardyParams prm;
    prm.form = InequalityForm::DistNorm;
    prm.norm = NormVariant::Dist2;
    prm.p = 1.0 + sd(rng);
    prm.s = sd(rng);
    prm.t = sd(rng);
    prm.mu.resize(sys.k());
    double smu = 0.0;
    for (int i = 0; i < sys.k(); ++i) {
      prm.mu[i] = md(rng);
      smu += sys.sigma(i) * prm.mu[i];
    }
    const double r = 1.7;
    auto xr = dilate(sys, r, x);
    // psi has degree p - s - t + sum sigma mu, the density s+t fewer by p
    const double deg_psi = prm.p - prm.s - prm.t + smu;
    const double deg_rho = smu - prm.s - prm.t;
    REQUIRE_THAT(gradient_weight(sys, prm, xr),
                 WithinRel(std::pow(r, deg_psi) * gradient_weight(sys, prm, x),
                           1e-10));
    REQUIRE_THAT(
        potential_density(sys, prm, xr),
        WithinRel(std::pow(r, deg_rho) * potential_density(sys, prm, x),
                  1e-10));
  }
}

TEST_CASE("distance form with t = 0 collapses to the plain form") {
  auto sys = make_grushin(2, 2, 1.5);
  HardyParams plain;
  plain.s = 1.0;
  plain.mu = {0.5, 1.0};
  HardyParams dist = plain;
  dist.form = InequalityForm::DistNorm;
  dist.norm = NormVariant::Dist1;

  REQUIRE_THAT(hardy_constant(sys, dist).value,
               WithinRel(hardy_constant(sys, plain).value, 1e-15));
  std::vector<double> x = {0.3, 0.7, -0.8, 0.2};
  REQUIRE_THAT(gradient_weight(sys, dist, x),
               WithinRel(gradient_weight(sys, plain, x), 1e-15));
  REQUIRE_THAT(potential_density(sys, dist, x),
               WithinRel(potential_density(sys, plain, x), 1e-15));
  auto ca = check_conditions(sys, dist);
  auto cb = check_conditions(sys, plain);
  REQUIRE(ca.records.size() == cb.records.size());
  for (size_t i = 0; i < ca.records.size(); ++i) {
    REQUIRE(ca.records[i].lhs == cb.records[i].lhs);
    REQUIRE(ca.records[i].rhs == cb.records[i].rhs);
  }
}

TEST_CASE("chain system admissibility matches hand evaluation") {
  // dims (3,2,1), alpha_21 = alpha_32 = 1: sigma = (1,2,3), Q = 10
  LambdaSystem sys({3, 2, 1}, {0, 0, 0, 1, 0, 0, 0, 1, 0});
  REQUIRE(sys.Q() == 10.0);
  HardyParams prm;
  prm.s = 4.0;
  prm.mu = {2.0, 2.0, 2.0};
  // verbatim block 2: 4 < 2 + 2 fails (strict); relaxed: -2 + 4 = 2 < 4
  auto v = check_conditions(sys, prm, ConditionMode::Verbatim);
  REQUIRE_FALSE(v.all_satisfied);
  REQUIRE_FALSE(v.records[2].satisfied);
  auto r = check_conditions(sys, prm, ConditionMode::Relaxed);
  REQUIRE(r.all_satisfied);
  // constant: ((10 - 4 + (2 + 4 + 6))/2)^2 = 81
  REQUIRE_THAT(hardy_constant(sys, prm).value, WithinRel(81.0, 1e-15));
}
