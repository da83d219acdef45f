#ifndef DLH_PROOF_FIELDS_HPP
#define DLH_PROOF_FIELDS_HPP

#include <cmath>
#include <span>
#include <vector>

#include "dlh/errors.hpp"
#include "dlh/fields.hpp"
#include "dlh/lambda_system.hpp"
#include "dlh/norms.hpp"

namespace dlh {
namespace detail {

// Accumulates sum of coeff * log(factor) terms where factors may vanish.
// A vanishing factor with positive coefficient makes the product zero; with
// negative coefficient the product blows up and the point is degenerate.
struct LogAccum {
  double finite = 0.0;
  int zeros = 0;
  int poles = 0;
  void add(double coeff, double logv) {
    if (coeff == 0.0) return;
    if (logv == kNegInf) {
      ++(coeff > 0.0 ? zeros : poles);
      return;
    }
    finite += coeff * logv;
  }
  bool is_zero() const { return poles == 0 && zeros > 0; }
  bool is_pole() const { return poles > 0; }
  double value(const char* what) const {
    if (poles > 0) throw DegeneratePoint(what);
    if (zeros > 0) return 0.0;
    return std::exp(finite);
  }
  double log_value(const char* what) const {
    if (poles > 0) throw DegeneratePoint(what);
    return zeros > 0 ? kNegInf : finite;
  }
};

inline void check_mu(const LambdaSystem& sys, std::span<const double> mu) {
  if (static_cast<int>(mu.size()) != sys.k())
    throw DimensionMismatch("mu must have one entry per block");
}

// log of prod_i |x^(i)|^{mu_i} / ([[x]]_eps^s ||x||_eps^t); t term skipped
// when dist_log is NaN.
inline LogAccum density_log(const LambdaSystem& sys, const PointData& d,
                            std::span<const double> mu, double s,
                            double bracket_log_eps, double t = 0.0,
                            double dist_log_eps = 0.0) {
  LogAccum acc;
  for (int i = 0; i < sys.k(); ++i) acc.add(mu[i], d.logb[i]);
  acc.add(-s, bracket_log_eps);
  if (t != 0.0) acc.add(-t, dist_log_eps);
  return acc;
}

}  // namespace detail

// Divergence factor of the radial proof field: with
// h(x) = rho(x) (sigma_1 x^(1)/lambda_1^eps, ..., sigma_k x^(k)/lambda_k^eps)
// and rho = prod |x^(i)|^{mu_i} / [[x]]_eps^s, the weighted divergence is
// rho * c_eps where
//
//   c_eps = sum_l (lambda_l/lambda_l^eps)
//           (N_l sigma_l + sigma_l mu_l
//            - s [[x]]_eps^{-1} sigma_l x^(l) . grad_{x^(l)} [[x]]_eps).
//
// For s, mu >= 0 it satisfies N_1 + mu_1 - s <= c_eps <= sum_l sigma_l (N_l +
// mu_l) and converges to Q - s + sum_l sigma_l mu_l as eps -> 0. eps == 0
// evaluates the limit directly (points off the degenerate sets only).
inline double c_eps(const LambdaSystem& sys, double s,
                    std::span<const double> mu, double eps,
                    std::span<const double> x) {
  detail::check_mu(sys, mu);
  if (eps < 0.0) throw NonPositiveEpsilon("epsilon must be >= 0");
  const auto d = detail::point_data(sys, x);
  const int k = sys.k();
  const auto loglam_eps = eps > 0.0
                              ? detail::log_lambdas_regularized(sys, d, eps)
                              : detail::log_lambdas(sys, d);
  const auto lt = detail::bracket_log_terms(sys, d, loglam_eps);
  const double lse = detail::log_sum_exp(lt);
  if (lse == detail::kNegInf)
    throw DegeneratePoint("regularized bracket norm vanishes here");

  const double twoE = 2.0 * sys.degree_sum();
  double c = 0.0;
  for (int l = 0; l < k; ++l) {
    double r_l = 1.0;  // lambda_l / lambda_l^eps
    if (eps > 0.0) {
      for (int m = 0; m < k; ++m) {
        const double a = sys.alpha(l, m);
        if (a == 0.0) continue;
        const double b2 = d.b[m] * d.b[m];
        r_l *= std::pow(b2 / (b2 + eps), 0.5 * a);
      }
    }
    if (r_l == 0.0) continue;
    double grad_part = 0.0;  // sum_j w_j (2 delta_jl + 2 A_jl rho_l)
    if (s != 0.0) {
      const double rho_l =
          eps > 0.0 ? d.b[l] * d.b[l] / (d.b[l] * d.b[l] + eps) : 1.0;
      for (int j = 0; j < k; ++j) {
        if (lt[j] == detail::kNegInf) continue;
        const double w = std::exp(lt[j] - lse);
        double A = 0.0;
        for (int i = 0; i < k; ++i)
          if (i != j) A += sys.alpha(i, l);
        grad_part += w * (2.0 * (j == l ? 1.0 : 0.0) + 2.0 * A * rho_l);
      }
    }
    c += r_l * sys.sigma(l) * (sys.dim(l) + mu[l] - s * grad_part / twoE);
  }
  return c;
}

// Correction subtracted from c_eps when the field carries an extra
// ||x||_eps^{-t} factor:
//
//   eta_eps = t ||x||_eps^{-1} sum_l (lambda_l/lambda_l^eps)
//             sigma_l x^(l) . grad_{x^(l)} ||x||_eps,
//
// which always lies in [0, t].
inline double eta_eps(const LambdaSystem& sys, double t, double eps,
                      NormVariant v, std::span<const double> x) {
  if (t == 0.0) return 0.0;
  if (v == NormVariant::Bracket)
    throw IndexOutOfRange("eta_eps expects Dist1 or Dist2");
  if (eps < 0.0) throw NonPositiveEpsilon("epsilon must be >= 0");
  const auto d = detail::point_data(sys, x);
  const int k = sys.k();
  const double dl = detail::dist_log(sys, d, v, eps);
  if (dl == detail::kNegInf)
    throw DegeneratePoint("distance norm vanishes here");
  double P;
  std::vector<double> Pj;
  detail::sigma_products(sys, P, Pj);
  double acc = 0.0;
  for (int l = 0; l < k; ++l) {
    if (d.b[l] == 0.0) continue;
    double logr = 0.0;
    if (eps > 0.0) {
      for (int m = 0; m < k; ++m) {
        const double a = sys.alpha(l, m);
        if (a == 0.0) continue;
        if (d.b[m] == 0.0) { logr = detail::kNegInf; break; }
        const double b2 = d.b[m] * d.b[m];
        logr += 0.5 * a * (std::log(b2) - std::log(b2 + eps));
      }
      if (logr == detail::kNegInf) continue;
    }
    const double b2 = d.b[l] * d.b[l];
    const double logrho = eps > 0.0 ? std::log(b2) - std::log(b2 + eps) : 0.0;
    const double logc = v == NormVariant::Dist2 ? std::log(sys.sigma(l)) : 0.0;
    const double logterm =
        logr + logrho + 2.0 * Pj[l] * logc + Pj[l] * std::log(b2 + eps);
    acc += std::exp(logterm - 2.0 * P * dl);
  }
  return t * acc;
}

// |h| of the proof fields below in closed form:
// prod_i |x^(i)|^{mu_i} [[x]]_eps^{E-s} ||x||_eps^{-t} / prod_i lambda_i^eps
// with E = degree_sum; the dual expansion of the bracket norm collapses the
// block sum exactly.
inline double h_dist_magnitude(const LambdaSystem& sys, double s, double t,
                               std::span<const double> mu, NormVariant v,
                               double eps, std::span<const double> x) {
  detail::check_mu(sys, mu);
  if (eps < 0.0) throw NonPositiveEpsilon("epsilon must be >= 0");
  const auto d = detail::point_data(sys, x);
  const auto loglam_eps = eps > 0.0
                              ? detail::log_lambdas_regularized(sys, d, eps)
                              : detail::log_lambdas(sys, d);
  const auto lt = detail::bracket_log_terms(sys, d, loglam_eps);
  const double lse = detail::log_sum_exp(lt);
  const double blog =
      lse == detail::kNegInf ? detail::kNegInf : lse / (2.0 * sys.degree_sum());
  detail::LogAccum acc;
  for (int i = 0; i < sys.k(); ++i) acc.add(mu[i], d.logb[i]);
  acc.add(sys.degree_sum() - s, blog);
  for (int i = 0; i < sys.k(); ++i) acc.add(-1.0, loglam_eps[i]);
  if (t != 0.0) acc.add(-t, detail::dist_log(sys, d, v, eps));
  return acc.value("field magnitude undefined at this point");
}

inline double h_semi_magnitude(const LambdaSystem& sys, double s,
                               std::span<const double> mu, double eps,
                               std::span<const double> x) {
  return h_dist_magnitude(sys, s, 0.0, mu, NormVariant::Dist1, eps, x);
}

namespace detail {

// Shared builder for the two proof fields. t == 0 gives the plain one.
inline BlockVectorField make_proof_field(const LambdaSystem& sys, double s,
                                         std::vector<double> mu, double t,
                                         NormVariant dist_variant, double eps) {
  check_mu(sys, mu);
  if (eps < 0.0) throw NonPositiveEpsilon("epsilon must be >= 0");
  BlockVectorField f;
  f.value = [sys, s, mu, t, dist_variant, eps](std::span<const double> x) {
    const auto d = point_data(sys, x);
    const auto loglam_eps = eps > 0.0 ? log_lambdas_regularized(sys, d, eps)
                                      : log_lambdas(sys, d);
    const auto lt = bracket_log_terms(sys, d, loglam_eps);
    const double lse = log_sum_exp(lt);
    const double blog = lse == kNegInf ? kNegInf : lse / (2.0 * sys.degree_sum());
    const double dl = t != 0.0 ? dist_log(sys, d, dist_variant, eps) : 0.0;
    std::vector<double> out(x.size(), 0.0);
    for (int i = 0; i < sys.k(); ++i) {
      LogAccum acc = density_log(sys, d, mu, s, blog, t, dl);
      acc.add(-1.0, loglam_eps[i]);
      acc.add(1.0, d.logb[i]);  // |x^(i)| from the block factor
      const double mag =
          sys.sigma(i) * acc.value("proof field undefined at this point");
      if (mag == 0.0) continue;
      const auto xb = sys.block(x, i);
      for (int c = 0; c < sys.dim(i); ++c)
        out[sys.offset(i) + c] = mag * xb[c] / d.b[i];
    }
    return out;
  };
  f.div_lambda = [sys, s, mu, t, dist_variant, eps](std::span<const double> x) {
    const auto d = point_data(sys, x);
    const auto loglam_eps = eps > 0.0 ? log_lambdas_regularized(sys, d, eps)
                                      : log_lambdas(sys, d);
    const auto lt = bracket_log_terms(sys, d, loglam_eps);
    const double lse = log_sum_exp(lt);
    const double blog = lse == kNegInf ? kNegInf : lse / (2.0 * sys.degree_sum());
    const double dl = t != 0.0 ? dist_log(sys, d, dist_variant, eps) : 0.0;
    const LogAccum acc = density_log(sys, d, mu, s, blog, t, dl);
    if (acc.is_zero()) return 0.0;
    const double rho = acc.value("proof field divergence undefined here");
    double factor = c_eps(sys, s, mu, eps, x);
    if (t != 0.0) factor -= eta_eps(sys, t, eps, dist_variant, x);
    return rho * factor;
  };
  return f;
}

}  // namespace detail

// Radial proof field
//   h(x) = (prod_i |x^(i)|^{mu_i} / [[x]]_eps^s)
//          (sigma_1 x^(1)/lambda_1^eps, ..., sigma_k x^(k)/lambda_k^eps)
// with analytic weighted divergence rho * c_eps. eps == 0 gives the
// unregularized field, defined only where all factors are finite.
inline BlockVectorField h_eps_semi(const LambdaSystem& sys, double s,
                                   std::vector<double> mu, double eps) {
  return detail::make_proof_field(sys, s, std::move(mu), 0.0,
                                  NormVariant::Dist1, eps);
}

// Same with an extra ||x||_eps^{-t} factor; weighted divergence
// rho * (c_eps - eta_eps).
inline BlockVectorField h_eps_dist(const LambdaSystem& sys, double s, double t,
                                   std::vector<double> mu, NormVariant v,
                                   double eps) {
  if (v == NormVariant::Bracket)
    throw IndexOutOfRange("h_eps_dist expects Dist1 or Dist2");
  return detail::make_proof_field(sys, s, std::move(mu), t, v, eps);
}

// Classical regularized field x / (|x|^2 + eps)^{p/2} on a single block,
// with its exact weighted (= ordinary) divergence
// (N - p |x|^2/(|x|^2+eps)) / (|x|^2+eps)^{p/2}.
inline BlockVectorField classical_hardy_field(int n, double p, double eps) {
  if (eps < 0.0) throw NonPositiveEpsilon("epsilon must be >= 0");
  BlockVectorField f;
  f.value = [p, eps](std::span<const double> x) {
    double n2 = 0.0;
    for (double v : x) n2 += v * v;
    const double denom = std::pow(n2 + eps, 0.5 * p);
    std::vector<double> out(x.begin(), x.end());
    for (double& v : out) v /= denom;
    return out;
  };
  f.div_lambda = [n, p, eps](std::span<const double> x) {
    double n2 = 0.0;
    for (double v : x) n2 += v * v;
    return (n - p * n2 / (n2 + eps)) / std::pow(n2 + eps, 0.5 * p);
  };
  return f;
}

// Two-block drift field
//   phi(x,y) = -((Q-2)/2) (|x|^{2a} / [[(x,y)]]^{2(1+a)}) (x, (1+a) y / |x|^a)
// appearing in the square-completion identity
// |phi|^2 + div_lambda phi = -((Q-2)/2)^2 |x|^{2a} / [[(x,y)]]^{2(1+a)}.
// No analytic divergence is attached; consumers differentiate numerically.
inline BlockVectorField appendix_phi(const LambdaSystem& sys) {
  const double a = grushin_exponent(sys);
  const double C = 0.5 * (sys.Q() - 2.0);
  BlockVectorField f;
  f.value = [sys, a, C](std::span<const double> x) {
    const auto d = detail::point_data(sys, x);
    const double blog = detail::bracket_log(sys, d);
    if (blog == detail::kNegInf)
      throw DegeneratePoint("drift field undefined at the origin");
    std::vector<double> out(x.size(), 0.0);
    const auto x1 = sys.block(x, 0);
    const auto x2 = sys.block(x, 1);
    detail::LogAccum l1;
    l1.add(2.0 * a, d.logb[0]);
    l1.add(-2.0 * (1.0 + a), blog);
    const double c1 = -C * l1.value("drift field undefined here");
    for (int c = 0; c < sys.dim(0); ++c) out[sys.offset(0) + c] = c1 * x1[c];
    detail::LogAccum l2;
    l2.add(a, d.logb[0]);
    l2.add(-2.0 * (1.0 + a), blog);
    const double c2 = -C * (1.0 + a) * l2.value("drift field undefined here");
    for (int c = 0; c < sys.dim(1); ++c) out[sys.offset(1) + c] = c2 * x2[c];
    return out;
  };
  return f;
}

// General drift realizing the square-completion argument:
// phi = -((Q - s + sum sigma_i mu_i)/2) *
//       (prod |x^(i)|^{mu_i} / [[x]]^s)(sigma_i x^(i) / lambda_i).
inline BlockVectorField extremal_drift(const LambdaSystem& sys, double s,
                                       std::vector<double> mu) {
  detail::check_mu(sys, mu);
  double smu = 0.0;
  for (int i = 0; i < sys.k(); ++i) smu += sys.sigma(i) * mu[i];
  const double C = 0.5 * (sys.Q() - s + smu);
  BlockVectorField h = h_eps_semi(sys, s, std::move(mu), 0.0);
  BlockVectorField f;
  f.value = [h, C](std::span<const double> x) {
    auto v = h.value(x);
    for (double& c : v) c *= -C;
    return v;
  };
  f.div_lambda = [h, C](std::span<const double> x) {
    return -C * h.div_lambda(x);
  };
  return f;
}

}  // namespace dlh

#endif
