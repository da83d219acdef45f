#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>
#include <vector>

#include "dlh/sharpness.hpp"
#include "test_support.hpp"

using namespace dlh;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("trial function profile") {
  auto sys = make_grushin(3, 1, 1.0);  // Q = 5, (Q-2)/2 = 1.5
  const double delta = 0.25, R = 1.0;
  auto u = sharpness_trial(sys, delta, R);
  const double m = 1.25;

  SECTION("power region") {
    std::vector<double> x = {0.3, 0.2, -0.1, 0.05};
    const double nu = bracket_norm(sys, x);
    REQUIRE(nu < R);
    REQUIRE_THAT(u.value(x), WithinRel(std::pow(nu, -m), 1e-13));
    auto g = u.gradient(x);
    auto gfd = fd_gradient(u.value, x);
    for (size_t c = 0; c < g.size(); ++c)
      REQUIRE_THAT(g[c], WithinAbs(gfd[c], 1e-5 * (1.0 + std::abs(g[c]))));
  }
  SECTION("cutoff region and support edge") {
    std::vector<double> x = {1.2, 0.0, 0.0, 0.4};
    const double nu = bracket_norm(sys, x);
    REQUIRE(nu > R);
    REQUIRE(nu < 2.0 * R);
    REQUIRE(u.value(x) > 0.0);
    REQUIRE(u.value(x) < std::pow(R, -m));
    auto g = u.gradient(x);
    auto gfd = fd_gradient(u.value, x);
    for (size_t c = 0; c < g.size(); ++c)
      REQUIRE_THAT(g[c], WithinAbs(gfd[c], 1e-5 * (1.0 + std::abs(g[c]))));

    std::vector<double> far = {2.5, 0.0, 0.0, 0.0};
    REQUIRE(bracket_norm(sys, far) > 2.0 * R);
    REQUIRE(u.value(far) == 0.0);
    for (double c : u.gradient(far)) REQUIRE(c == 0.0);
  }
  SECTION("profile is continuous at the seams") {
    // points just inside/outside [[x]] = R and 2R along the first axis
    for (double nu0 : {1.0, 2.0}) {
      std::vector<double> lo = {nu0 - 1e-9, 0.0, 0.0, 0.0};
      std::vector<double> hi = {nu0 + 1e-9, 0.0, 0.0, 0.0};
      REQUIRE_THAT(u.value(lo), WithinAbs(u.value(hi), 1e-7));
    }
    // min([[x]], R) makes the trial only Lipschitz at [[x]] = R: the slope
    // jumps from -m R^{-m-1} to 0. The cutoff seam at 2R is genuinely C^1.
    std::vector<double> lo = {1.0 - 1e-9, 0.0, 0.0, 0.0};
    REQUIRE_THAT(u.gradient(lo)[0], WithinAbs(-m, 1e-5));
    std::vector<double> hi = {1.0 + 1e-9, 0.0, 0.0, 0.0};
    REQUIRE_THAT(u.gradient(hi)[0], WithinAbs(0.0, 1e-5));
    std::vector<double> lo2 = {2.0 - 1e-9, 0.0, 0.0, 0.0};
    std::vector<double> hi2 = {2.0 + 1e-9, 0.0, 0.0, 0.0};
    REQUIRE_THAT(u.gradient(lo2)[0], WithinAbs(u.gradient(hi2)[0], 1e-5));
  }
  SECTION("validation") {
    REQUIRE_THROWS_AS(sharpness_trial(sys, 0.0, 1.0), InvalidParams);
    REQUIRE_THROWS_AS(sharpness_trial(sys, 0.1, 0.0), NonPositiveScale);
  }
}

TEST_CASE("enclosing ball really encloses the norm ball") {
  std::mt19937_64 rng(31);
  for (double a : {0.5, 1.0, 2.0}) {
    auto sys = make_grushin(2, 1, a);
    const double nu = 1.7;
    const double enc = enclosing_euclidean_radius(sys, nu);
    // the known corner bound for a single exponent
    const double s2 = 1.0 + a;
    REQUIRE_THAT(enc,
                 WithinRel(std::hypot(nu, std::pow(nu, s2) / s2), 1e-13));
    std::normal_distribution<> nd;
    for (int rep = 0; rep < 200; ++rep) {
      std::vector<double> x(3);
      for (auto& c : x) c = nd(rng);
      const double b = bracket_norm(sys, x);
      if (b == 0.0) continue;
      // rescale onto the norm sphere of radius nu
      auto y = dilate(sys, nu / b, x);
      REQUIRE_THAT(bracket_norm(sys, y), WithinRel(nu, 1e-10));
      double r2 = 0.0;
      for (double c : y) r2 += c * c;
      REQUIRE(std::sqrt(r2) <= enc * (1.0 + 1e-12));
    }
  }
  LambdaSystem three({1, 1, 1}, {0, 0, 0, 1, 0, 0, 0, 1, 0});
  REQUIRE_THROWS_AS(enclosing_euclidean_radius(three, 1.0), NotGrushin);
}

TEST_CASE("rayleigh quotients stay above the constant and close in on it") {
  auto sys = make_grushin(1, 1, 1.0);  // Q = 3, target 0.25
  std::vector<double> deltas = {0.2, 0.08};
  std::vector<double> radii = {1.0};
  auto sweep = grushin_sharpness_sweep(sys, deltas, radii, 120000, 17);
  REQUIRE_THAT(sweep.target, WithinRel(0.25, 1e-15));
  REQUIRE(sweep.entries.size() == 2);
  for (const auto& e : sweep.entries) {
    CAPTURE(e.delta, e.ray.ratio, e.ray.ratio_se);
    REQUIRE(e.ray.ratio > 0.0);
    REQUIRE(e.ray.ratio_se > 0.0);
    // the inequality itself: no quotient may dip below the constant
    REQUIRE(e.ray.ratio >= sweep.target - 3.0 * e.ray.ratio_se);
  }
  // smaller delta approaches the constant from above
  REQUIRE(sweep.entries[1].ray.ratio < sweep.entries[0].ray.ratio);
  REQUIRE(sweep.best_ratio <= sweep.entries[1].ray.ratio);
  // the delta -> 0 extrapolation overshoots only by the curvature of the
  // trend, well below the smallest sampled quotient
  REQUIRE(sweep.extrapolated_ratio < sweep.entries[1].ray.ratio);
  REQUIRE(sweep.extrapolated_ratio >
          sweep.target - 3.0 * sweep.extrapolated_se);
  REQUIRE_THAT(sweep.extrapolated_ratio, WithinAbs(sweep.target, 0.05));

  SECTION("the quotient is insensitive to the cap radius") {
    std::vector<double> one_delta = {0.3};
    std::vector<double> two_radii = {1.0, 4.0};
    auto sr = grushin_sharpness_sweep(sys, one_delta, two_radii, 120000, 23);
    const auto& a = sr.entries[0].ray;
    const auto& b = sr.entries[1].ray;
    REQUIRE_THAT(a.ratio,
                 WithinAbs(b.ratio, 5.0 * std::hypot(a.ratio_se, b.ratio_se)));
    // a single distinct delta degrades to the weighted mean of the entries
    REQUIRE(sr.extrapolated_ratio >=
            std::min(a.ratio, b.ratio) - 1e-12);
    REQUIRE(sr.extrapolated_ratio <= std::max(a.ratio, b.ratio) + 1e-12);
  }
}

TEST_CASE("drift field matches the general family and its identity") {
  std::mt19937_64 rng(37);
  std::normal_distribution<> nd;
  for (double a : {0.5, 1.0, 1.5}) {
    auto sys = make_grushin(2, 1, a);
    auto phi = appendix_phi(sys);
    auto general = extremal_drift(sys, 2.0 * sys.degree_sum(), {2.0 * a, 0.0});
    for (int rep = 0; rep < 25; ++rep) {
      std::vector<double> x(3);
      for (auto& c : x) c = nd(rng);
      if (sys.block_norm(x, 0) < 0.2) continue;
      auto va = phi.value(x);
      auto vb = general.value(x);
      for (size_t c = 0; c < va.size(); ++c)
        REQUIRE_THAT(va[c], WithinAbs(vb[c], 1e-12 * (1.0 + std::abs(va[c]))));
      REQUIRE(drift_identity_residual(sys, x) < 1e-10);
      REQUIRE(drift_identity_residual(sys, x, true) < 1e-5);
    }
  }
}

TEST_CASE("weight identity of the inverse-power quotient") {
  std::mt19937_64 rng(53);
  std::normal_distribution<> nd;
  for (double a : {0.5, 1.0, 2.0}) {
    for (auto dims : {std::pair{3, 1}, std::pair{2, 2}}) {
      auto sys = make_grushin(dims.first, dims.second, a);
      for (int rep = 0; rep < 25; ++rep) {
        std::vector<double> x(sys.total_dim());
        for (auto& c : x) c = nd(rng);
        if (sys.block_norm(x, 0) < 0.2) continue;
        REQUIRE(fundamental_identity_residual(sys, x) < 1e-12);
      }
    }
  }
  // classical reduction: |grad |x|^{2-N}|^2 / |x|^{2(2-N)} = (N-2)^2/|x|^2
  // corresponds to a = 0, where the residual formula degenerates to the
  // plain euclidean identity.
  auto cls = make_grushin(3, 1, 0.0);
  std::vector<double> x{0.3, -1.2, 0.8, 2.0};
  REQUIRE(fundamental_identity_residual(cls, x) < 1e-12);
}

TEST_CASE("extremal profile solves the first-order equation") {
  std::mt19937_64 rng(41);
  std::normal_distribution<> nd;
  for (double a : {0.5, 1.0, 2.0}) {
    for (auto dims : {std::pair{1, 1}, std::pair{3, 2}}) {
      auto sys = make_grushin(dims.first, dims.second, a);
      for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> x(sys.total_dim());
        for (auto& c : x) c = nd(rng);
        if (sys.block_norm(x, 0) < 0.2) continue;
        REQUIRE(extremal_equation_residual(sys, x) < 1e-11);
      }
    }
  }
}
