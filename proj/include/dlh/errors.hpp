#ifndef DLH_ERRORS_HPP
#define DLH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dlh {

// Base class for everything thrown by the library. Construction-time
// validation failures and evaluation-time degeneracies use distinct types so
// callers can tell a bad operator definition from a bad evaluation point.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exponent matrix has a nonzero entry on or above the diagonal.
struct NonTriangularAlpha : Error { using Error::Error; };
// Exponent matrix has a negative (or non-finite) entry.
struct NegativeExponent : Error { using Error::Error; };
// Point length, block count or parameter vector length does not match.
struct DimensionMismatch : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };
// Dilation factor r <= 0.
struct NonPositiveScale : Error { using Error::Error; };
// Regularization parameter epsilon <= 0 where a positive one is required.
struct NonPositiveEpsilon : Error { using Error::Error; };
// Evaluation point lies on a set where the requested quantity is undefined
// (a weighted block vanishes, or the point is the origin).
struct DegeneratePoint : Error { using Error::Error; };
// Operation requires a two-block system with a single weight exponent.
struct NotGrushin : Error { using Error::Error; };
// Integrand or sampling density evaluated non-finite at a sampled point.
struct NonIntegrableSample : Error { using Error::Error; };
// More than the tolerated fraction of samples hit degenerate sets.
struct ExcessiveRejections : Error { using Error::Error; };
struct ConditionsNotMet : Error { using Error::Error; };
// Inequality parameters are inconsistent (negative exponents, wrong form).
struct InvalidParams : Error { using Error::Error; };
// Sampler/domain pairing the estimator cannot honor.
struct UnsupportedDomain : Error { using Error::Error; };
// Divergence of the supplied field is not positive at a sampled point.
struct NonPositiveDivergence : Error { using Error::Error; };
struct DegenerateDenominator : Error { using Error::Error; };
struct ConfigParse : Error { using Error::Error; };

}  // namespace dlh

#endif
