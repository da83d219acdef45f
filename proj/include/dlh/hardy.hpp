#ifndef DLH_HARDY_HPP
#define DLH_HARDY_HPP

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "dlh/errors.hpp"
#include "dlh/lambda_system.hpp"
#include "dlh/norms.hpp"
#include "dlh/proof_fields.hpp"

namespace dlh {

// Which of the three inequalities is being handled. All take the shape
//   constant * integral(density * |u|^p) <= integral(weight * |grad_w u|^p).
enum class InequalityForm { SemiNorm, DistNorm, Unweighted };

// Verbatim keeps zero exponent-matrix entries inside the min in the
// per-block admissibility conditions (so the min is always 0); Relaxed
// drops them and keeps only the positive entries alongside 1.
enum class ConditionMode { Verbatim, Relaxed };

// Whether the per-block min scans column i or row i of the exponent matrix.
enum class MinIndexAxis { Column, Row };

struct HardyParams {
  InequalityForm form = InequalityForm::SemiNorm;
  double p = 2.0;
  double s = 0.0;
  double t = 0.0;                           // DistNorm only
  std::vector<double> mu;                   // one entry per block
  NormVariant norm = NormVariant::Bracket;  // distance choice where relevant
};

inline void validate_params(const LambdaSystem& sys, const HardyParams& prm) {
  if (!(prm.p > 0.0) || !std::isfinite(prm.p))
    throw InvalidParams("p must be positive");
  if (prm.s < 0.0 || !std::isfinite(prm.s))
    throw InvalidParams("s must be >= 0");
  if (prm.t < 0.0 || !std::isfinite(prm.t))
    throw InvalidParams("t must be >= 0");
  switch (prm.form) {
    case InequalityForm::SemiNorm:
      if (prm.t != 0.0)
        throw InvalidParams("t is only meaningful for the distance form");
      break;
    case InequalityForm::DistNorm:
      if (prm.norm == NormVariant::Bracket)
        throw InvalidParams("distance form needs dist1 or dist2");
      break;
    case InequalityForm::Unweighted:
      if (prm.s != 0.0 || prm.t != 0.0)
        throw InvalidParams("unweighted form takes no s or t");
      break;
  }
  if (prm.form == InequalityForm::Unweighted) {
    for (double m : prm.mu)
      if (m != 0.0) throw InvalidParams("unweighted form takes no mu");
    return;
  }
  if (static_cast<int>(prm.mu.size()) != sys.k())
    throw DimensionMismatch("mu must have one entry per block");
  for (double m : prm.mu)
    if (m < 0.0 || !std::isfinite(m))
      throw InvalidParams("mu entries must be >= 0");
}

struct ConditionRecord {
  int block;          // 0-based block index, -1 for the global records
  std::string label;  // human-readable "lhs < rhs" description
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
};

struct ConditionReport {
  ConditionMode mode = ConditionMode::Verbatim;
  MinIndexAxis axis = MinIndexAxis::Column;
  std::vector<ConditionRecord> records;
  bool all_satisfied = true;
};

namespace detail {

inline ConditionRecord make_record(int block, std::string label, double lhs,
                                   double rhs) {
  return ConditionRecord{block, std::move(label), lhs, rhs, lhs < rhs};
}

// min over {exponent entries of column/row i} union {1}; Relaxed keeps only
// the positive entries.
inline double admissibility_min(const LambdaSystem& sys, int i,
                                ConditionMode mode, MinIndexAxis axis) {
  double m = 1.0;
  for (int j = 0; j < sys.k(); ++j) {
    const double a =
        axis == MinIndexAxis::Column ? sys.alpha(j, i) : sys.alpha(i, j);
    if (mode == ConditionMode::Relaxed && a == 0.0) continue;
    m = std::min(m, a);
  }
  return m;
}

}  // namespace detail

// Numeric admissibility check. Every record demands lhs < rhs strictly.
inline ConditionReport check_conditions(
    const LambdaSystem& sys, const HardyParams& prm,
    ConditionMode mode = ConditionMode::Verbatim,
    MinIndexAxis axis = MinIndexAxis::Column) {
  validate_params(sys, prm);
  ConditionReport rep;
  rep.mode = mode;
  rep.axis = axis;
  char buf[128];

  if (prm.form == InequalityForm::Unweighted) {
    rep.records.push_back(detail::make_record(-1, "1 < p", 1.0, prm.p));
    std::snprintf(buf, sizeof buf, "p < N_1 = %d", sys.dim(0));
    rep.records.push_back(
        detail::make_record(-1, buf, prm.p, static_cast<double>(sys.dim(0))));
  } else {
    const double st = prm.s + prm.t;
    std::snprintf(buf, sizeof buf, "s%s < N_1 + mu_1",
                  prm.form == InequalityForm::DistNorm ? " + t" : "");
    rep.records.push_back(
        detail::make_record(-1, buf, st, sys.dim(0) + prm.mu[0]));
    for (int i = 0; i < sys.k(); ++i) {
      const double m = detail::admissibility_min(sys, i, mode, axis);
      const double lhs = -prm.p * m + prm.s + prm.t / sys.sigma(i);
      std::snprintf(buf, sizeof buf,
                    "-p min + s%s < N_%d + mu_%d (min = %g)",
                    prm.form == InequalityForm::DistNorm ? " + t/sigma" : "",
                    i + 1, i + 1, m);
      rep.records.push_back(
          detail::make_record(i, buf, lhs, sys.dim(i) + prm.mu[i]));
    }
  }
  for (const auto& r : rep.records) rep.all_satisfied &= r.satisfied;
  return rep;
}

struct ConstantResult {
  double value = 0.0;      // ((numerator)/p)^p, or 0 when not applicable
  double numerator = 0.0;  // Q - s - t + sum_i sigma_i mu_i (or N_1 - p)
  bool applicable = false;
};

// The explicit constant in front of the potential-side integral.
inline ConstantResult hardy_constant(const LambdaSystem& sys,
                                     const HardyParams& prm) {
  validate_params(sys, prm);
  ConstantResult res;
  if (prm.form == InequalityForm::Unweighted) {
    res.numerator = sys.dim(0) - prm.p;
  } else {
    double smu = 0.0;
    for (int i = 0; i < sys.k(); ++i) smu += sys.sigma(i) * prm.mu[i];
    res.numerator = sys.Q() - prm.s - prm.t + smu;
  }
  res.applicable = res.numerator > 0.0;
  res.value =
      res.applicable ? std::pow(res.numerator / prm.p, prm.p) : 0.0;
  return res;
}

// Weight multiplying |grad_w u|^p:
//   [[x]]^{pE - s} prod_i |x^(i)|^{mu_i - p B_i} ||x||^{-t}
// with B_i the i-th column sum of the exponent matrix (so prod lambda_i^p =
// prod |x^(i)|^{p B_i}); identically 1 for the unweighted form.
inline double gradient_weight(const LambdaSystem& sys, const HardyParams& prm,
                              std::span<const double> x) {
  if (prm.form == InequalityForm::Unweighted) return 1.0;
  const auto d = detail::point_data(sys, x);
  detail::LogAccum acc;
  acc.add(prm.p * sys.degree_sum() - prm.s, detail::bracket_log(sys, d));
  for (int i = 0; i < sys.k(); ++i) {
    double col = 0.0;
    for (int j = 0; j < sys.k(); ++j) col += sys.alpha(j, i);
    acc.add(prm.mu[i] - prm.p * col, d.logb[i]);
  }
  if (prm.form == InequalityForm::DistNorm)
    acc.add(-prm.t, detail::dist_log(sys, d, prm.norm, 0.0));
  return acc.value("gradient weight undefined at this point");
}

// Density multiplying |u|^p:
//   prod_i |x^(i)|^{mu_i} / ([[x]]^s ||x||^t)
// or, for the unweighted form, |x^(1)|^{-p} (default) resp. ||x||^{-p} when a
// distance variant is selected.
inline double potential_density(const LambdaSystem& sys,
                                const HardyParams& prm,
                                std::span<const double> x) {
  const auto d = detail::point_data(sys, x);
  detail::LogAccum acc;
  if (prm.form == InequalityForm::Unweighted) {
    if (prm.norm == NormVariant::Bracket) {
      acc.add(-prm.p, d.logb[0]);
    } else {
      acc.add(-prm.p, detail::dist_log(sys, d, prm.norm, 0.0));
    }
    return acc.value("potential density undefined at this point");
  }
  for (int i = 0; i < sys.k(); ++i) acc.add(prm.mu[i], d.logb[i]);
  acc.add(-prm.s, detail::bracket_log(sys, d));
  if (prm.form == InequalityForm::DistNorm)
    acc.add(-prm.t, detail::dist_log(sys, d, prm.norm, 0.0));
  return acc.value("potential density undefined at this point");
}

}  // namespace dlh

#endif
