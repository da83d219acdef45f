#ifndef DLH_LAMBDA_SYSTEM_HPP
#define DLH_LAMBDA_SYSTEM_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dlh/errors.hpp"

namespace dlh {

/**
 * Structure data of a degenerate elliptic operator of the form
 *
 *   L = sum_i lambda_i(x)^2 Laplace_{x^(i)},
 *   lambda_i(x) = prod_j |x^(j)|^{alpha_ij},   with 0^0 := 1,
 *
 * acting on R^{N_1} x ... x R^{N_k}. The exponent matrix alpha must be
 * strictly lower triangular with nonnegative entries, so lambda_1 == 1 and
 * each weight only involves earlier blocks.
 *
 * From alpha the constructor derives the dilation weights
 *
 *   sigma_1 = 1,  sigma_i = 1 + sum_{j<i} alpha_ij sigma_j,
 *
 * which make lambda_i homogeneous of degree sigma_i - 1 under the anisotropic
 * dilation delta_r(x) = (r^{sigma_1} x^(1), ..., r^{sigma_k} x^(k)), and the
 * homogeneous dimension Q = sum_i sigma_i N_i.
 *
 * Points are stored flat: x has length N = sum_i N_i, block i occupying
 * coordinates [offset(i), offset(i) + dim(i)). Indices are 0-based.
 */
class LambdaSystem {
 public:
  LambdaSystem(std::vector<int> dims, std::vector<double> alpha_row_major)
      : dims_(std::move(dims)), alpha_(std::move(alpha_row_major)) {
    const std::size_t k = dims_.size();
    if (k == 0) throw DimensionMismatch("system needs at least one block");
    for (int n : dims_)
      if (n < 1) throw DimensionMismatch("every block dimension must be >= 1");
    if (alpha_.size() != k * k)
      throw DimensionMismatch("alpha must be a full k*k row-major matrix");
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        const double a = alpha_[i * k + j];
        if (!std::isfinite(a) || a < 0.0)
          throw NegativeExponent("alpha entries must be finite and >= 0");
        if (j >= i && a != 0.0)
          throw NonTriangularAlpha(
              "alpha must be strictly lower triangular (block ordering)");
      }
    }
    offsets_.resize(k + 1, 0);
    for (std::size_t i = 0; i < k; ++i) offsets_[i + 1] = offsets_[i] + dims_[i];
    sigma_.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      double s = 1.0;
      for (std::size_t j = 0; j < i; ++j) s += alpha_[i * k + j] * sigma_[j];
      sigma_[i] = s;
    }
    q_ = 0.0;
    for (std::size_t i = 0; i < k; ++i) q_ += sigma_[i] * dims_[i];
  }

  int k() const { return static_cast<int>(dims_.size()); }
  int dim(int i) const { return dims_[checked(i)]; }
  int total_dim() const { return offsets_.back(); }
  int offset(int i) const { return offsets_[checked(i)]; }

  double alpha(int i, int j) const {
    return alpha_[checked(i) * dims_.size() + checked(j)];
  }
  const std::vector<double>& alpha_flat() const { return alpha_; }
  const std::vector<int>& dims() const { return dims_; }

  double sigma(int i) const { return sigma_[checked(i)]; }
  const std::vector<double>& sigmas() const { return sigma_; }
  double Q() const { return q_; }

  // 1 + sum_i (sigma_i - 1); the bracket norm is the 2*this root of a sum of
  // squared homogeneous monomials.
  double degree_sum() const {
    double e = 1.0;
    for (double s : sigma_) e += s - 1.0;
    return e;
  }

  std::span<const double> block(std::span<const double> x, int i) const {
    check_point(x);
    const int b = checked(i);
    return x.subspan(static_cast<std::size_t>(offsets_[b]),
                     static_cast<std::size_t>(dims_[b]));
  }

  double block_norm(std::span<const double> x, int i) const {
    const auto xb = block(x, i);
    double s = 0.0;
    for (double v : xb) s += v * v;
    return std::sqrt(s);
  }

  void check_point(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != total_dim())
      throw DimensionMismatch("point has length " + std::to_string(x.size()) +
                              ", system acts on R^" +
                              std::to_string(total_dim()));
  }

 private:
  int checked(int i) const {
    if (i < 0 || i >= static_cast<int>(dims_.size()))
      throw IndexOutOfRange("block index " + std::to_string(i) +
                            " out of range for k=" +
                            std::to_string(dims_.size()));
    return i;
  }

  std::vector<int> dims_;
  std::vector<double> alpha_;
  std::vector<int> offsets_;
  std::vector<double> sigma_;
  double q_ = 0.0;
};

// Concatenates per-block coordinate vectors into the flat representation,
// validating the block layout against the system.
inline std::vector<double> flatten_blocks(
    const LambdaSystem& sys, const std::vector<std::vector<double>>& blocks) {
  if (static_cast<int>(blocks.size()) != sys.k())
    throw DimensionMismatch("expected " + std::to_string(sys.k()) + " blocks");
  std::vector<double> x;
  x.reserve(sys.total_dim());
  for (int i = 0; i < sys.k(); ++i) {
    if (static_cast<int>(blocks[i].size()) != sys.dim(i))
      throw DimensionMismatch("block " + std::to_string(i) + " must have length " +
                              std::to_string(sys.dim(i)));
    x.insert(x.end(), blocks[i].begin(), blocks[i].end());
  }
  return x;
}

// lambda_i(x) = prod_j |x^(j)|^{alpha_ij}; factors with exponent 0 contribute
// 1 even when the block vanishes.
inline double lambda_eval(const LambdaSystem& sys, int i,
                          std::span<const double> x) {
  sys.check_point(x);
  double v = 1.0;
  for (int j = 0; j < sys.k(); ++j) {
    const double a = sys.alpha(i, j);
    if (a == 0.0) continue;
    v *= std::pow(sys.block_norm(x, j), a);
  }
  return v;
}

// lambda_i^eps(x) = prod_j (|x^(j)|^2 + eps)^{alpha_ij / 2}. eps == 0 gives
// the plain weight; eps < 0 is rejected.
inline double lambda_eval_regularized(const LambdaSystem& sys, int i,
                                      std::span<const double> x, double eps) {
  if (eps < 0.0 || !std::isfinite(eps))
    throw NonPositiveEpsilon("regularization epsilon must be >= 0");
  sys.check_point(x);
  double v = 1.0;
  for (int j = 0; j < sys.k(); ++j) {
    const double a = sys.alpha(i, j);
    if (a == 0.0) continue;
    const double b = sys.block_norm(x, j);
    v *= std::pow(b * b + eps, 0.5 * a);
  }
  return v;
}

// delta_r(x): block i is scaled by r^{sigma_i}. Requires r > 0.
inline std::vector<double> dilate(const LambdaSystem& sys, double r,
                                  std::span<const double> x) {
  if (!(r > 0.0) || !std::isfinite(r))
    throw NonPositiveScale("dilation factor must be positive and finite");
  sys.check_point(x);
  std::vector<double> y(x.begin(), x.end());
  for (int i = 0; i < sys.k(); ++i) {
    const double f = std::pow(r, sys.sigma(i));
    for (int c = sys.offset(i); c < sys.offset(i) + sys.dim(i); ++c) y[c] *= f;
  }
  return y;
}

// Convenience factory for the two-block prototype
// Delta_x + |x|^{2a} Delta_y on R^{n1} x R^{n2}.
inline LambdaSystem make_grushin(int n1, int n2, double a) {
  return LambdaSystem({n1, n2}, {0.0, 0.0, a, 0.0});
}

// True when the system is the two-block prototype above.
inline bool is_grushin(const LambdaSystem& sys) {
  return sys.k() == 2;
}

// The single weight exponent of a two-block system; throws otherwise.
inline double grushin_exponent(const LambdaSystem& sys) {
  if (!is_grushin(sys))
    throw NotGrushin("operation requires a two-block system");
  return sys.alpha(1, 0);
}

}  // namespace dlh

#endif
