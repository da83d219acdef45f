#ifndef DLH_FIELDS_HPP
#define DLH_FIELDS_HPP

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "dlh/errors.hpp"
#include "dlh/lambda_system.hpp"
#include "dlh/norms.hpp"

namespace dlh {

// Scalar function on R^N with an optional analytic euclidean gradient.
// When `gradient` is empty, consumers fall back to central differences.
struct ScalarField {
  std::function<double(std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>)> gradient;
};

// Vector field on R^N in flat block layout, with an optional analytic
// weighted divergence sum_i lambda_i div_{x^(i)}.
struct BlockVectorField {
  std::function<std::vector<double>(std::span<const double>)> value;
  std::function<double(std::span<const double>)> div_lambda;
};

inline double default_fd_step(std::span<const double> x, double base = 1e-5) {
  double n2 = 0.0;
  for (double v : x) n2 += v * v;
  return base * (1.0 + std::sqrt(n2));
}

inline std::vector<double> fd_gradient(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double step = 0.0) {
  std::vector<double> xv(x.begin(), x.end());
  const double h = step > 0.0 ? step : default_fd_step(x);
  std::vector<double> g(xv.size());
  for (std::size_t c = 0; c < xv.size(); ++c) {
    const double x0 = xv[c];
    xv[c] = x0 + h;
    const double fp = f(xv);
    xv[c] = x0 - h;
    const double fm = f(xv);
    xv[c] = x0;
    g[c] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Weighted gradient (lambda_1 grad_{x^(1)} u, ..., lambda_k grad_{x^(k)} u),
// flat layout. Uses the analytic gradient when the field provides one.
inline std::vector<double> grad_lambda(const LambdaSystem& sys,
                                       const ScalarField& u,
                                       std::span<const double> x,
                                       double fd_step = 0.0) {
  sys.check_point(x);
  std::vector<double> g =
      u.gradient ? u.gradient(x) : fd_gradient(u.value, x, fd_step);
  if (g.size() != x.size())
    throw DimensionMismatch("gradient length does not match the point");
  for (int i = 0; i < sys.k(); ++i) {
    const double li = lambda_eval(sys, i, x);
    for (int c = sys.offset(i); c < sys.offset(i) + sys.dim(i); ++c) g[c] *= li;
  }
  return g;
}

inline double grad_lambda_norm(const LambdaSystem& sys, const ScalarField& u,
                               std::span<const double> x, double fd_step = 0.0) {
  const auto g = grad_lambda(sys, u, x, fd_step);
  double s = 0.0;
  for (double v : g) s += v * v;
  return std::sqrt(s);
}

// Weighted divergence sum_i lambda_i(x) div_{x^(i)} h^(i) by central
// differences on the field components.
inline double div_lambda_fd(
    const LambdaSystem& sys,
    const std::function<std::vector<double>(std::span<const double>)>& h,
    std::span<const double> x, double fd_step = 0.0) {
  sys.check_point(x);
  std::vector<double> xv(x.begin(), x.end());
  const double step = fd_step > 0.0 ? fd_step : default_fd_step(x);
  double acc = 0.0;
  for (int i = 0; i < sys.k(); ++i) {
    const double li = lambda_eval(sys, i, x);
    if (li == 0.0) continue;
    double d = 0.0;
    for (int c = sys.offset(i); c < sys.offset(i) + sys.dim(i); ++c) {
      const double x0 = xv[c];
      xv[c] = x0 + step;
      const double fp = h(xv)[c];
      xv[c] = x0 - step;
      const double fm = h(xv)[c];
      xv[c] = x0;
      d += (fp - fm) / (2.0 * step);
    }
    acc += li * d;
  }
  return acc;
}

inline double div_lambda(const LambdaSystem& sys, const BlockVectorField& h,
                         std::span<const double> x, double fd_step = 0.0) {
  if (h.div_lambda) return h.div_lambda(x);
  return div_lambda_fd(sys, h.value, x, fd_step);
}

// u composed with delta_r; the gradient picks up r^{sigma_i} per block.
inline ScalarField compose_dilation(const LambdaSystem& sys, double r,
                                    const ScalarField& u) {
  if (!(r > 0.0)) throw NonPositiveScale("dilation factor must be positive");
  ScalarField v;
  v.value = [sys, r, u](std::span<const double> x) {
    return u.value(dilate(sys, r, x));
  };
  if (u.gradient) {
    v.gradient = [sys, r, u](std::span<const double> x) {
      auto g = u.gradient(dilate(sys, r, x));
      for (int i = 0; i < sys.k(); ++i) {
        const double f = std::pow(r, sys.sigma(i));
        for (int c = sys.offset(i); c < sys.offset(i) + sys.dim(i); ++c)
          g[c] *= f;
      }
      return g;
    };
  }
  return v;
}

}  // namespace dlh

#endif
