#ifndef DLH_NORMS_HPP
#define DLH_NORMS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "dlh/errors.hpp"
#include "dlh/lambda_system.hpp"

namespace dlh {

enum class NormVariant { Bracket, Dist1, Dist2 };

namespace detail {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// A block counts as zero for differentiability purposes below this relative
// threshold.
constexpr double kDegenerateTol = 1e-8;

inline double log_sum_exp(std::span<const double> logs) {
  double m = kNegInf;
  for (double l : logs) m = std::max(m, l);
  if (m == kNegInf || !std::isfinite(m)) return m;
  double s = 0.0;
  for (double l : logs) s += std::exp(l - m);
  return m + std::log(s);
}

struct PointData {
  std::vector<double> b;     // block norms |x^(j)|
  std::vector<double> logb;  // log |x^(j)|, -inf at zero
  double xnorm = 0.0;        // euclidean norm of the whole point
};

inline PointData point_data(const LambdaSystem& sys, std::span<const double> x) {
  sys.check_point(x);
  PointData d;
  const int k = sys.k();
  d.b.resize(k);
  d.logb.resize(k);
  double s = 0.0;
  for (int j = 0; j < k; ++j) {
    d.b[j] = sys.block_norm(x, j);
    d.logb[j] = d.b[j] > 0.0 ? std::log(d.b[j]) : kNegInf;
    s += d.b[j] * d.b[j];
  }
  d.xnorm = std::sqrt(s);
  return d;
}

// Index of a weighted block (nonzero alpha column) that is degenerate at x,
// or -1. The test is scale-free: block l counts as zero when
// |x^(l)| < tol * g(x)^{sigma_l} with g(x) = max_j |x^(j)|^{1/sigma_j}, a
// dilation-homogeneous gauge of the point itself, so rescaling x along the
// dilations never changes the answer.
inline int degenerate_weighted_block(const LambdaSystem& sys,
                                     const PointData& d) {
  const int k = sys.k();
  double logg = kNegInf;  // log g(x)
  for (int j = 0; j < k; ++j)
    logg = std::max(logg, d.logb[j] / sys.sigma(j));
  const double logtol = std::log(kDegenerateTol);
  for (int l = 0; l < k; ++l) {
    double col = 0.0;
    for (int j = 0; j < k; ++j) col += sys.alpha(j, l);
    if (col == 0.0) continue;
    if (d.logb[l] == kNegInf ||
        d.logb[l] < sys.sigma(l) * logg + logtol)
      return l;
  }
  return -1;
}

// log lambda_i(x) for all i; -inf when a positively-weighted block vanishes.
inline std::vector<double> log_lambdas(const LambdaSystem& sys,
                                       const PointData& d) {
  const int k = sys.k();
  std::vector<double> ll(k, 0.0);
  for (int i = 0; i < k; ++i) {
    double acc = 0.0;
    for (int j = 0; j < i; ++j) {
      const double a = sys.alpha(i, j);
      if (a == 0.0) continue;
      if (d.logb[j] == kNegInf) { acc = kNegInf; break; }
      acc += a * d.logb[j];
    }
    ll[i] = acc;
  }
  return ll;
}

// log lambda_i^eps(x); finite for eps > 0.
inline std::vector<double> log_lambdas_regularized(const LambdaSystem& sys,
                                                   const PointData& d,
                                                   double eps) {
  const int k = sys.k();
  std::vector<double> ll(k, 0.0);
  for (int i = 0; i < k; ++i) {
    double acc = 0.0;
    for (int j = 0; j < i; ++j) {
      const double a = sys.alpha(i, j);
      if (a == 0.0) continue;
      acc += 0.5 * a * std::log(d.b[j] * d.b[j] + eps);
    }
    ll[i] = acc;
  }
  return ll;
}

// log of the j-th bracket summand prod_{i != j} lambda_i^2 sigma_j^2 |x^(j)|^2
// given precomputed log lambda values.
inline std::vector<double> bracket_log_terms(const LambdaSystem& sys,
                                             const PointData& d,
                                             const std::vector<double>& loglam) {
  const int k = sys.k();
  std::vector<double> lt(k);
  for (int j = 0; j < k; ++j) {
    if (d.logb[j] == kNegInf) { lt[j] = kNegInf; continue; }
    double acc = 2.0 * (std::log(sys.sigma(j)) + d.logb[j]);
    for (int i = 0; i < k; ++i) {
      if (i == j) continue;
      if (loglam[i] == kNegInf) { acc = kNegInf; break; }
      acc += 2.0 * loglam[i];
    }
    lt[j] = acc;
  }
  return lt;
}

// log of the bracket norm; -inf on the set where every summand vanishes.
inline double bracket_log(const LambdaSystem& sys, const PointData& d) {
  const auto loglam = log_lambdas(sys, d);
  const auto lt = bracket_log_terms(sys, d, loglam);
  const double lse = log_sum_exp(lt);
  return lse == kNegInf ? kNegInf : lse / (2.0 * sys.degree_sum());
}

inline double bracket_log_regularized(const LambdaSystem& sys,
                                      const PointData& d, double eps) {
  const auto loglam = log_lambdas_regularized(sys, d, eps);
  const auto lt = bracket_log_terms(sys, d, loglam);
  const double lse = log_sum_exp(lt);
  return lse == kNegInf ? kNegInf : lse / (2.0 * sys.degree_sum());
}

// Exclusion products of dilation weights: P = prod_i sigma_i and
// P_j = prod_{i != j} sigma_i.
inline void sigma_products(const LambdaSystem& sys, double& P,
                           std::vector<double>& Pj) {
  const int k = sys.k();
  Pj.assign(k, 1.0);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i)
      if (i != j) Pj[j] *= sys.sigma(i);
  P = Pj[0] * sys.sigma(0);
}

inline double dist_log(const LambdaSystem& sys, const PointData& d,
                       NormVariant v, double eps) {
  const int k = sys.k();
  double P;
  std::vector<double> Pj;
  sigma_products(sys, P, Pj);
  std::vector<double> lt(k);
  for (int j = 0; j < k; ++j) {
    const double logc = v == NormVariant::Dist2 ? std::log(sys.sigma(j)) : 0.0;
    if (eps > 0.0) {
      lt[j] = Pj[j] * (2.0 * logc + std::log(d.b[j] * d.b[j] + eps));
    } else if (d.logb[j] == kNegInf) {
      lt[j] = kNegInf;
    } else {
      lt[j] = 2.0 * Pj[j] * (logc + d.logb[j]);
    }
  }
  const double lse = log_sum_exp(lt);
  return lse == kNegInf ? kNegInf : lse / (2.0 * P);
}

inline double check_eps_positive(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw NonPositiveEpsilon("regularization epsilon must be > 0");
  return eps;
}

}  // namespace detail

// Homogeneous quasi-norm built from the operator weights,
//
//   [[x]] = ( sum_j prod_{i != j} lambda_i(x)^2 sigma_j^2 |x^(j)|^2 )
//           ^ { 1 / (2 (1 + sum_i (sigma_i - 1))) },
//
// homogeneous of degree one under delta_r. It vanishes at the origin, and
// also on the degenerate set of systems where at least two weights share a
// vanishing block.
inline double bracket_norm(const LambdaSystem& sys, std::span<const double> x) {
  const auto d = detail::point_data(sys, x);
  const double l = detail::bracket_log(sys, d);
  return l == detail::kNegInf ? 0.0 : std::exp(l);
}

// Same value computed through the expanded monomial form: summand j is
// sigma_j^2 |x^(j)|^2 prod_m |x^(m)|^{2 A_jm} with A_jm = sum_{i != j}
// alpha_im. Serves as an independent cross-check of bracket_norm.
inline double bracket_norm_expanded(const LambdaSystem& sys,
                                    std::span<const double> x) {
  const auto d = detail::point_data(sys, x);
  const int k = sys.k();
  std::vector<double> lt(k);
  for (int j = 0; j < k; ++j) {
    if (d.logb[j] == detail::kNegInf) { lt[j] = detail::kNegInf; continue; }
    double acc = 2.0 * (std::log(sys.sigma(j)) + d.logb[j]);
    for (int m = 0; m < k; ++m) {
      double A = 0.0;
      for (int i = 0; i < k; ++i)
        if (i != j) A += sys.alpha(i, m);
      if (A == 0.0) continue;
      if (d.logb[m] == detail::kNegInf) { acc = detail::kNegInf; break; }
      acc += 2.0 * A * d.logb[m];
    }
    lt[j] = acc;
  }
  const double lse = detail::log_sum_exp(lt);
  return lse == detail::kNegInf ? 0.0
                                : std::exp(lse / (2.0 * sys.degree_sum()));
}

// Bracket norm with every weight replaced by its regularization
// lambda_i^eps; the |x^(j)|^2 factors are kept as in the plain norm, so the
// value still vanishes at the origin and converges to bracket_norm as
// eps -> 0.
inline double bracket_norm_regularized(const LambdaSystem& sys,
                                       std::span<const double> x, double eps) {
  detail::check_eps_positive(eps);
  const auto d = detail::point_data(sys, x);
  const double l = detail::bracket_log_regularized(sys, d, eps);
  return l == detail::kNegInf ? 0.0 : std::exp(l);
}

// Distance-style homogeneous norms built from the dilation weights only:
//
//   Dist1:  ( sum_j |x^(j)|^{2 P_j} )^{1/(2P)}
//   Dist2:  ( sum_j (sigma_j |x^(j)|)^{2 P_j} )^{1/(2P)}
//
// with P_j = prod_{i != j} sigma_i and P = prod_i sigma_i. Positive away
// from the origin and degree-one homogeneous under delta_r.
inline double dist_norm(const LambdaSystem& sys, std::span<const double> x,
                        NormVariant v) {
  if (v == NormVariant::Bracket)
    throw IndexOutOfRange("dist_norm expects Dist1 or Dist2");
  const auto d = detail::point_data(sys, x);
  const double l = detail::dist_log(sys, d, v, 0.0);
  return l == detail::kNegInf ? 0.0 : std::exp(l);
}

// Regularized distance norm: block terms use |x^(j)|^2 + eps, so the value
// is strictly positive everywhere.
inline double dist_norm_regularized(const LambdaSystem& sys,
                                    std::span<const double> x, NormVariant v,
                                    double eps) {
  if (v == NormVariant::Bracket)
    throw IndexOutOfRange("dist_norm expects Dist1 or Dist2");
  detail::check_eps_positive(eps);
  const auto d = detail::point_data(sys, x);
  return std::exp(detail::dist_log(sys, d, v, eps));
}

inline double norm_value(const LambdaSystem& sys, std::span<const double> x,
                         NormVariant v) {
  return v == NormVariant::Bracket ? bracket_norm(sys, x) : dist_norm(sys, x, v);
}

inline double norm_value_regularized(const LambdaSystem& sys,
                                     std::span<const double> x, NormVariant v,
                                     double eps) {
  return v == NormVariant::Bracket ? bracket_norm_regularized(sys, x, eps)
                                   : dist_norm_regularized(sys, x, v, eps);
}

// True when some block that carries weight exponents (nonzero alpha column)
// is numerically zero; the bracket norm is not differentiable there.
inline bool is_degenerate(const LambdaSystem& sys, std::span<const double> x) {
  const auto d = detail::point_data(sys, x);
  return detail::degenerate_weighted_block(sys, d) >= 0;
}

// Analytic gradient of the bracket norm. Block l of the gradient is
// coeff_l * x^(l) with
//
//   coeff_l = [[x]]^{1-2E} / (2E) * ( 2 sigma_l^2 prod_{i != l} lambda_i^2
//             + sum_j T_j * 2 A_jl / |x^(l)|^2 ),   E = degree_sum().
//
// Requires a non-degenerate point away from the origin.
inline std::vector<double> bracket_norm_gradient(const LambdaSystem& sys,
                                                 std::span<const double> x) {
  const auto d = detail::point_data(sys, x);
  const int k = sys.k();
  if (detail::degenerate_weighted_block(sys, d) >= 0)
    throw DegeneratePoint("bracket norm is not differentiable where a "
                          "weighted block vanishes");
  const auto loglam = detail::log_lambdas(sys, d);
  const auto lt = detail::bracket_log_terms(sys, d, loglam);
  const double lse = detail::log_sum_exp(lt);
  if (lse == detail::kNegInf)
    throw DegeneratePoint("bracket norm vanishes at this point");
  const double twoE = 2.0 * sys.degree_sum();
  const double lognorm = lse / twoE;
  const double logpref = (1.0 - twoE) * lognorm - std::log(twoE);

  std::vector<double> grad(x.size(), 0.0);
  std::vector<double> pieces;
  for (int l = 0; l < k; ++l) {
    pieces.clear();
    double acc = std::log(2.0 * sys.sigma(l) * sys.sigma(l));
    for (int i = 0; i < k; ++i) {
      if (i == l) continue;
      if (loglam[i] == detail::kNegInf) { acc = detail::kNegInf; break; }
      acc += 2.0 * loglam[i];
    }
    if (acc != detail::kNegInf) pieces.push_back(acc);
    for (int j = 0; j < k; ++j) {
      double A = 0.0;  // A_jl = sum_{i != j} alpha_il
      for (int i = 0; i < k; ++i)
        if (i != j) A += sys.alpha(i, l);
      if (A == 0.0 || lt[j] == detail::kNegInf) continue;
      pieces.push_back(lt[j] - 2.0 * d.logb[l] + std::log(2.0 * A));
    }
    if (pieces.empty()) continue;
    const double coeff = std::exp(logpref + detail::log_sum_exp(pieces));
    const auto xb = sys.block(x, l);
    for (int c = 0; c < sys.dim(l); ++c)
      grad[sys.offset(l) + c] = coeff * xb[c];
  }
  return grad;
}

// Analytic gradient of a distance norm. Block l is coeff_l * x^(l) with
// coeff_l = ||x||^{1-2P} c_l^{2 P_l} (P_l / P) |x^(l)|^{2 P_l - 2}.
inline std::vector<double> dist_norm_gradient(const LambdaSystem& sys,
                                              std::span<const double> x,
                                              NormVariant v) {
  if (v == NormVariant::Bracket)
    throw IndexOutOfRange("dist_norm_gradient expects Dist1 or Dist2");
  const auto d = detail::point_data(sys, x);
  double P;
  std::vector<double> Pj;
  detail::sigma_products(sys, P, Pj);
  const double l = detail::dist_log(sys, d, v, 0.0);
  if (l == detail::kNegInf)
    throw DegeneratePoint("distance norm vanishes at this point");
  std::vector<double> grad(x.size(), 0.0);
  for (int b = 0; b < sys.k(); ++b) {
    const double ex = 2.0 * Pj[b] - 2.0;
    if (d.logb[b] == detail::kNegInf && ex > 0.0) continue;
    if (d.logb[b] == detail::kNegInf && ex < 0.0)
      throw DegeneratePoint("distance norm not differentiable here");
    const double logc =
        v == NormVariant::Dist2 ? std::log(sys.sigma(b)) : 0.0;
    double lc = (1.0 - 2.0 * P) * l + 2.0 * Pj[b] * logc +
                std::log(Pj[b] / P);
    if (ex != 0.0) lc += ex * d.logb[b];
    const double coeff = std::exp(lc);
    const auto xb = sys.block(x, b);
    for (int c = 0; c < sys.dim(b); ++c)
      grad[sys.offset(b) + c] = coeff * xb[c];
  }
  return grad;
}

// Residual of the degree-one Euler relation
// sum_i sigma_i x^(i) . grad_{x^(i)} ||x|| - ||x||, with the gradient taken
// by central finite differences (step fd_step * (1 + |x|) per coordinate).
// An exactly degree-one homogeneous norm has residual 0.
inline double euler_residual(const LambdaSystem& sys, std::span<const double> x,
                             NormVariant v, double fd_step = 1e-5) {
  sys.check_point(x);
  const auto d = detail::point_data(sys, x);
  const double h = fd_step * (1.0 + d.xnorm);
  std::vector<double> xp(x.begin(), x.end());
  double acc = 0.0;
  for (int b = 0; b < sys.k(); ++b) {
    for (int c = sys.offset(b); c < sys.offset(b) + sys.dim(b); ++c) {
      const double x0 = xp[c];
      xp[c] = x0 + h;
      const double fp = norm_value(sys, xp, v);
      xp[c] = x0 - h;
      const double fm = norm_value(sys, xp, v);
      xp[c] = x0;
      acc += sys.sigma(b) * x0 * (fp - fm) / (2.0 * h);
    }
  }
  return acc - norm_value(sys, x, v);
}

}  // namespace dlh

#endif
