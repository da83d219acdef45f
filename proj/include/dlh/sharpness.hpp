#ifndef DLH_SHARPNESS_HPP
#define DLH_SHARPNESS_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "dlh/errors.hpp"
#include "dlh/fields.hpp"
#include "dlh/hardy.hpp"
#include "dlh/integrate.hpp"
#include "dlh/lambda_system.hpp"
#include "dlh/norms.hpp"
#include "dlh/proof_fields.hpp"

namespace dlh {

// Near-extremal trial function
//   u(x) = min([[x]], R)^{delta - (Q-2)/2} * cutoff([[x]])
// where cutoff is 1 on [0, R], a quintic smoothstep down to 0 on [R, 2R].
// As delta -> 0 its Rayleigh quotient approaches the p = 2, s = 2, mu = 0
// constant ((Q-2)/2)^2 from above.
inline ScalarField sharpness_trial(const LambdaSystem& sys, double delta,
                                   double R) {
  if (!(R > 0.0)) throw NonPositiveScale("trial radius must be positive");
  if (!(delta > 0.0))
    throw InvalidParams("trial exponent shift delta must be positive");
  const double m = 0.5 * (sys.Q() - 2.0) - delta;

  // g(nu) and g'(nu) for nu = [[x]]
  auto profile = [m, R](double nu, double& g, double& dg) {
    if (nu <= R) {
      g = std::pow(nu, -m);
      dg = -m * std::pow(nu, -m - 1.0);
      return;
    }
    if (nu >= 2.0 * R) {
      g = dg = 0.0;
      return;
    }
    const double t = (nu - R) / R;
    const double st = t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
    const double dst = 30.0 * t * t * (1.0 + t * (-2.0 + t));
    const double cap = std::pow(R, -m);
    g = cap * (1.0 - st);
    dg = -cap * dst / R;
  };

  ScalarField u;
  u.value = [sys, profile](std::span<const double> x) {
    double g, dg;
    profile(bracket_norm(sys, x), g, dg);
    return g;
  };
  u.gradient = [sys, profile](std::span<const double> x) {
    double g, dg;
    const double nu = bracket_norm(sys, x);
    profile(nu, g, dg);
    if (dg == 0.0) return std::vector<double>(x.size(), 0.0);
    auto grad = bracket_norm_gradient(sys, x);
    for (auto& c : grad) c *= dg;
    return grad;
  };
  return u;
}

// Radius of the smallest origin-centered euclidean ball containing
// {[[x]] <= nu} for a two-block system, where the bracket norm coincides
// with the sigma-weighted distance: |x^(j)| <= nu^{sigma_j} / sigma_j.
inline double enclosing_euclidean_radius(const LambdaSystem& sys, double nu) {
  if (sys.k() != 2)
    throw NotGrushin("enclosing radius uses the two-block norm identity");
  double r2 = 0.0;
  for (int j = 0; j < 2; ++j) {
    const double bj = std::pow(nu, sys.sigma(j)) / sys.sigma(j);
    r2 += bj * bj;
  }
  return std::sqrt(r2);
}

struct RayleighResult {
  double lhs = 0.0, lhs_se = 0.0;  // integral(density u^2)
  double rhs = 0.0, rhs_se = 0.0;  // integral(weight |grad_w u|^2)
  double ratio = 0.0, ratio_se = 0.0;
  std::uint64_t n = 0, rejected = 0;
};

// rhs/lhs for one test function; admissibility is not consulted (the point
// of the sweep is to probe the constant itself).
inline RayleighResult rayleigh_ratio(const LambdaSystem& sys,
                                     const HardyParams& prm,
                                     const ScalarField& u, const Domain& dom,
                                     const McOptions& opts) {
  validate_params(sys, prm);
  auto eval = [&](std::span<const double> x) {
    std::array<double, 2> v{};
    const double uval = u.value(x);
    if (uval != 0.0)
      v[0] = potential_density(sys, prm, x) *
             std::pow(std::abs(uval), prm.p);
    const double gn = grad_lambda_norm(sys, u, x);
    if (gn != 0.0) v[1] = gradient_weight(sys, prm, x) * std::pow(gn, prm.p);
    return v;
  };
  auto est = detail::estimate_components<2>(sys, eval, dom, opts);
  RayleighResult res;
  res.lhs = est[0].value;
  res.lhs_se = est[0].se;
  res.rhs = est[1].value;
  res.rhs_se = est[1].se;
  res.n = est[0].n;
  res.rejected = est[0].rejected;
  if (res.lhs > 0.0) {
    res.ratio = res.rhs / res.lhs;
    res.ratio_se = std::abs(res.ratio) *
                   std::hypot(res.lhs_se / res.lhs, res.rhs_se / res.rhs);
  }
  return res;
}

struct SweepEntry {
  double delta = 0.0;
  double R = 0.0;
  RayleighResult ray;
};

struct SweepResult {
  double target = 0.0;      // the constant the ratios should approach
  double best_ratio = 0.0;  // smallest observed Rayleigh quotient
  double best_ratio_se = 0.0;
  // delta -> 0 limit of the trend (the quotient is affine in delta to first
  // order), from a weighted straight-line fit over the two smallest deltas
  double extrapolated_ratio = 0.0;
  double extrapolated_se = 0.0;
  std::vector<SweepEntry> entries;
};

namespace detail {

// A box containing the bracket ball of radius nu with padding: every point
// with [[x]] <= nu has |x^(i)| <= nu^{sigma_i}/sigma_i, so per-coordinate
// bounds pad * nu^{sigma_i}/sigma_i enclose the support. Unlike a euclidean
// ball this is covariant with the dilations, so sampling efficiency does not
// degrade as nu grows.
inline Domain trial_support_box(const LambdaSystem& sys, double nu,
                                double pad) {
  std::vector<double> hi(sys.total_dim());
  for (int i = 0; i < sys.k(); ++i) {
    const double h = pad * std::pow(nu, sys.sigma(i)) / sys.sigma(i);
    for (int c = sys.offset(i); c < sys.offset(i) + sys.dim(i); ++c) hi[c] = h;
  }
  std::vector<double> lo(hi.size());
  for (size_t c = 0; c < hi.size(); ++c) lo[c] = -hi[c];
  return Domain::box(std::move(lo), std::move(hi));
}

// Weighted least-squares line y = a + c x; returns a and its standard error.
inline void wls_intercept(std::span<const double> xs, std::span<const double> ys,
                          std::span<const double> ses, double& a, double& a_se) {
  double W = 0.0, Sx = 0.0, Sy = 0.0, Sxx = 0.0, Sxy = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double se = std::max(ses[i], 1e-300);
    const double w = 1.0 / (se * se);
    W += w;
    Sx += w * xs[i];
    Sy += w * ys[i];
    Sxx += w * xs[i] * xs[i];
    Sxy += w * xs[i] * ys[i];
  }
  const double det = W * Sxx - Sx * Sx;
  const auto [xlo, xhi] = std::minmax_element(xs.begin(), xs.end());
  if (xs.size() < 2 || !(*xhi > *xlo) || !(det > 0.0)) {
    a = Sy / W;  // no spread in x: weighted mean
    a_se = std::sqrt(1.0 / W);
    return;
  }
  a = (Sxx * Sy - Sx * Sxy) / det;
  a_se = std::sqrt(Sxx / det);
}

}  // namespace detail

// Rayleigh quotients of the trial family over a delta/R grid for a two-block
// system with p = 2, s = 2, mu = 0. Sampling concentrates like the
// integrands themselves (concentration Q - 2 delta) over a dilation-adapted
// box padded so the integrand dies well inside it. The reported limit
// extrapolates the trend linearly to delta = 0 from the entries at the two
// smallest deltas (all R pooled; the quotient does not depend on R).
inline SweepResult grushin_sharpness_sweep(const LambdaSystem& sys,
                                           std::span<const double> deltas,
                                           std::span<const double> radii,
                                           std::uint64_t n_per_entry,
                                           std::uint64_t seed,
                                           int threads = 0) {
  grushin_exponent(sys);  // insists on the two-block shape
  if (deltas.empty() || radii.empty())
    throw InvalidParams("sweep schedule needs at least one delta and radius");
  HardyParams prm;
  prm.p = 2.0;
  prm.s = 2.0;
  prm.mu = {0.0, 0.0};
  SweepResult sweep;
  sweep.target = hardy_constant(sys, prm).value;
  sweep.best_ratio = HUGE_VAL;

  std::uint64_t entry_index = 0;
  for (double R : radii)
    for (double delta : deltas) {
      auto u = sharpness_trial(sys, delta, R);
      Domain dom = detail::trial_support_box(sys, 2.0 * R, 1.25);
      McOptions opts;
      opts.n = n_per_entry;
      opts.seed = seed + 0x9e37 * entry_index++;
      opts.sampler = SamplerKind::RadialLogUniform;
      opts.concentration = sys.Q() - 2.0 * delta;
      opts.threads = threads;
      SweepEntry entry;
      entry.delta = delta;
      entry.R = R;
      entry.ray = rayleigh_ratio(sys, prm, u, dom, opts);
      if (entry.ray.ratio < sweep.best_ratio) {
        sweep.best_ratio = entry.ray.ratio;
        sweep.best_ratio_se = entry.ray.ratio_se;
      }
      sweep.entries.push_back(std::move(entry));
    }

  std::vector<double> cut(deltas.begin(), deltas.end());
  std::sort(cut.begin(), cut.end());
  cut.erase(std::unique(cut.begin(), cut.end()), cut.end());
  const double dmax = cut.size() > 1 ? cut[1] : cut[0];
  std::vector<double> xs, ys, ses;
  for (const auto& e : sweep.entries)
    if (e.delta <= dmax) {
      xs.push_back(e.delta);
      ys.push_back(e.ray.ratio);
      ses.push_back(e.ray.ratio_se);
    }
  detail::wls_intercept(xs, ys, ses, sweep.extrapolated_ratio,
                        sweep.extrapolated_se);
  return sweep;
}

// Residual of the two-block square-completion identity
//   |phi|^2 + div_w phi + ((Q-2)/2)^2 |x|^{2a} / [[x]]^{2(1+a)}
// with the divergence taken analytically (the drift is the s = 2E,
// mu = (2a, 0) member of the general family) or by finite differences.
inline double drift_identity_residual(const LambdaSystem& sys,
                                      std::span<const double> x,
                                      bool fd_divergence = false) {
  const double a = grushin_exponent(sys);
  auto phi = appendix_phi(sys);
  const auto v = phi.value(x);
  double phi2 = 0.0;
  for (double c : v) phi2 += c * c;
  double div;
  if (fd_divergence) {
    div = div_lambda_fd(sys, phi.value, x);
  } else {
    auto general = extremal_drift(sys, 2.0 * sys.degree_sum(), {2.0 * a, 0.0});
    div = general.div_lambda(x);
  }
  const double C = 0.5 * (sys.Q() - 2.0);
  const double target = -C * C *
                        std::pow(sys.block_norm(x, 0), 2.0 * a) /
                        std::pow(bracket_norm(sys, x), 2.0 * (1.0 + a));
  return std::abs(phi2 + div - target);
}

// Relative residual of the two-block weight identity
//   |grad_w Phi|^2 / Phi^2 = (Q-2)^2 |x^(1)|^{2a} / [[x]]^{2(1+a)}
// for Phi = [[x]]^{2-Q} (any constant prefactor cancels in the quotient).
inline double fundamental_identity_residual(const LambdaSystem& sys,
                                            std::span<const double> x) {
  const double a = grushin_exponent(sys);
  const double nu = bracket_norm(sys, x);
  if (nu == 0.0)
    throw DegeneratePoint("quotient undefined where the norm vanishes");
  const auto g = bracket_norm_gradient(sys, x);
  double glam2 = 0.0;  // |grad_w nu|^2 = sum_i lambda_i^2 |grad_i nu|^2
  for (int i = 0; i < sys.k(); ++i) {
    const double li = lambda_eval(sys, i, x);
    double b2 = 0.0;
    for (int c = sys.offset(i); c < sys.offset(i) + sys.dim(i); ++c)
      b2 += g[c] * g[c];
    glam2 += li * li * b2;
  }
  const double C2 = (sys.Q() - 2.0) * (sys.Q() - 2.0);
  const double lhs = C2 * glam2 / (nu * nu);
  const double rhs = C2 * std::pow(sys.block_norm(x, 0), 2.0 * a) /
                     std::pow(nu, 2.0 * (1.0 + a));
  return std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300);
}

// Residual of the first-order extremal equation
//   grad_{x^(i)} u = -C prod_{j != i} lambda_j^2 sigma_i x^(i) u / [[x]]^{2E}
// for u = [[x]]^{-(Q-2)/2} and C = (Q-2)/2, reported relative to |grad u|.
inline double extremal_equation_residual(const LambdaSystem& sys,
                                         std::span<const double> x) {
  const double C = 0.5 * (sys.Q() - 2.0);
  const double nu = bracket_norm(sys, x);
  if (nu == 0.0) throw DegeneratePoint("extremal function undefined at 0");
  auto grad_nu = bracket_norm_gradient(sys, x);
  // grad u = -C [[x]]^{-C-1} grad [[x]]
  std::vector<double> lhs(grad_nu.size());
  for (size_t c = 0; c < grad_nu.size(); ++c)
    lhs[c] = -C * std::pow(nu, -C - 1.0) * grad_nu[c];

  const double uval = std::pow(nu, -C);
  const double denom = std::pow(nu, 2.0 * sys.degree_sum());
  double num = 0.0, scale = 0.0;
  for (int i = 0; i < sys.k(); ++i) {
    double lam2 = 1.0;
    for (int j = 0; j < sys.k(); ++j) {
      if (j == i) continue;
      const double lj = lambda_eval(sys, j, x);
      lam2 *= lj * lj;
    }
    const auto xb = sys.block(x, i);
    for (int c = 0; c < sys.dim(i); ++c) {
      const double rhs =
          -C * lam2 * sys.sigma(i) * xb[c] * uval / denom;
      const double d = lhs[sys.offset(i) + c] - rhs;
      num += d * d;
      scale += lhs[sys.offset(i) + c] * lhs[sys.offset(i) + c];
    }
  }
  return std::sqrt(num) / std::max(std::sqrt(scale), 1e-300);
}

}  // namespace dlh

#endif
