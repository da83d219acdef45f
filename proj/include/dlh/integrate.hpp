#ifndef DLH_INTEGRATE_HPP
#define DLH_INTEGRATE_HPP

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "dlh/errors.hpp"
#include "dlh/fields.hpp"
#include "dlh/hardy.hpp"
#include "dlh/lambda_system.hpp"

namespace dlh {

struct Domain {
  enum class Shape { Ball, Box };
  Shape shape = Shape::Ball;
  std::vector<double> center;  // Ball
  double radius = 1.0;         // Ball
  std::vector<double> lo, hi;  // Box

  static Domain ball(std::vector<double> c, double r) {
    if (!(r > 0.0)) throw NonPositiveScale("ball radius must be positive");
    Domain d;
    d.shape = Shape::Ball;
    d.center = std::move(c);
    d.radius = r;
    return d;
  }
  static Domain box(std::vector<double> lo, std::vector<double> hi) {
    if (lo.size() != hi.size())
      throw DimensionMismatch("box bounds disagree in length");
    for (size_t i = 0; i < lo.size(); ++i)
      if (!(lo[i] < hi[i]))
        throw UnsupportedDomain("box bounds must satisfy lo < hi");
    Domain d;
    d.shape = Shape::Box;
    d.lo = std::move(lo);
    d.hi = std::move(hi);
    return d;
  }
  int dimension() const {
    return static_cast<int>(shape == Shape::Ball ? center.size() : lo.size());
  }
  double volume() const {
    if (shape == Shape::Box) {
      double v = 1.0;
      for (size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
      return v;
    }
    const double n = static_cast<double>(center.size());
    return std::exp(0.5 * n * std::log(M_PI) + n * std::log(radius) -
                    std::lgamma(0.5 * n + 1.0));
  }
  // true when the domain is star-shaped under dilations about 0
  bool origin_centered() const {
    if (shape == Shape::Ball) {
      for (double c : center)
        if (c != 0.0) return false;
      return true;
    }
    for (size_t i = 0; i < lo.size(); ++i)
      if (!(lo[i] < 0.0 && hi[i] > 0.0)) return false;
    return true;
  }
};

// Uniform draws points evenly; RadialLogUniform pushes mass toward the
// origin by composing a uniform draw with a random dilation, compensating
// exactly through the mixture density. Use it when the integrand blows up
// like a power of the homogeneous norm at 0.
enum class SamplerKind { Uniform, RadialLogUniform };

struct McOptions {
  std::uint64_t n = 200000;
  std::uint64_t seed = 1;
  SamplerKind sampler = SamplerKind::Uniform;
  double concentration = 0.0;  // exponent a: dilation radius ~ rho^{Q-a-1}
  int threads = 0;             // 0: DLH_THREADS, then hardware count
  double max_reject_fraction = 1e-3;
};

struct IntegralEstimate {
  double value = 0.0;
  double se = 0.0;
  std::uint64_t n = 0;
  std::uint64_t rejected = 0;
};

namespace detail {

constexpr std::uint64_t kChunk = 8192;

inline std::uint64_t splitmix64_next(std::uint64_t& s) {
  s += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Chunk-local seed so every chunk is its own stream no matter which thread
// runs it.
inline std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t chunk) {
  std::uint64_t s = seed ^ (chunk * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
  const std::uint64_t a = splitmix64_next(s);
  return a ^ splitmix64_next(s);
}

// All randomness is derived from raw 64-bit outputs so results do not depend
// on library distribution internals.
struct ChunkRng {
  std::mt19937_64 gen;
  double spare = 0.0;
  bool has_spare = false;
  explicit ChunkRng(std::uint64_t seed) : gen(seed) {}
  double unit() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
  double unit_pos() { return 1.0 - unit(); }  // (0, 1]
  double gaussian() {
    if (has_spare) {
      has_spare = false;
      return spare;
    }
    const double r = std::sqrt(-2.0 * std::log(unit_pos()));
    const double a = 2.0 * M_PI * unit();
    spare = r * std::sin(a);
    has_spare = true;
    return r * std::cos(a);
  }
};

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("DLH_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

inline void uniform_point(ChunkRng& rng, const Domain& dom,
                          std::vector<double>& out) {
  const size_t n = out.size();
  if (dom.shape == Domain::Shape::Box) {
    for (size_t c = 0; c < n; ++c)
      out[c] = dom.lo[c] + (dom.hi[c] - dom.lo[c]) * rng.unit();
    return;
  }
  double norm2 = 0.0;
  for (size_t c = 0; c < n; ++c) {
    out[c] = rng.gaussian();
    norm2 += out[c] * out[c];
  }
  const double norm = std::sqrt(norm2);
  const double r =
      dom.radius * std::pow(rng.unit(), 1.0 / static_cast<double>(n));
  const double f = norm > 0.0 ? r / norm : 0.0;
  for (size_t c = 0; c < n; ++c) out[c] = dom.center[c] + f * out[c];
}

// Smallest rho with delta_{1/rho} z inside the domain. For boxes this is a
// per-coordinate closed form; for balls a Newton iteration on log rho (the
// objective is convex and decreasing there).
inline double dilation_gauge(const LambdaSystem& sys,
                             std::span<const double> z, const Domain& dom) {
  if (dom.shape == Domain::Shape::Box) {
    double rho = 0.0;
    for (int i = 0; i < sys.k(); ++i)
      for (int c = sys.offset(i); c < sys.offset(i) + sys.dim(i); ++c) {
        if (z[c] == 0.0) continue;
        const double bound = z[c] > 0.0 ? dom.hi[c] : -dom.lo[c];
        rho = std::max(rho, std::pow(std::abs(z[c]) / bound,
                                     1.0 / sys.sigma(i)));
      }
    return rho;
  }
  // f(tau) = log sum_c z_c^2 exp(-2 sigma_c tau) - 2 log R
  std::vector<double> logz2;
  std::vector<double> sig;
  logz2.reserve(z.size());
  sig.reserve(z.size());
  for (int i = 0; i < sys.k(); ++i)
    for (int c = sys.offset(i); c < sys.offset(i) + sys.dim(i); ++c)
      if (z[c] != 0.0) {
        logz2.push_back(2.0 * std::log(std::abs(z[c])));
        sig.push_back(sys.sigma(i));
      }
  if (logz2.empty()) return 0.0;
  const double target = 2.0 * std::log(dom.radius);
  double tau = 0.0;
  for (int it = 0; it < 100; ++it) {
    double mx = -HUGE_VAL;
    for (size_t c = 0; c < logz2.size(); ++c)
      mx = std::max(mx, logz2[c] - 2.0 * sig[c] * tau);
    double sum = 0.0, dsum = 0.0;
    for (size_t c = 0; c < logz2.size(); ++c) {
      const double e = std::exp(logz2[c] - 2.0 * sig[c] * tau - mx);
      sum += e;
      dsum += -2.0 * sig[c] * e;
    }
    const double f = mx + std::log(sum) - target;
    if (std::abs(f) < 1e-14) break;
    tau -= f / (dsum / sum);
  }
  return std::exp(tau);
}

struct RadialSampler {
  // Dilations below this factor are cut off (with the density renormalized
  // exactly, so the estimator stays unbiased). Keeps integrand values and
  // importance weights representable in double precision when the radial
  // exponent b is small and rho^{1/b} would otherwise reach denormal scales.
  static constexpr double kRhoMin = 1e-18;

  const LambdaSystem& sys;
  const Domain& dom;
  double b;       // Q - concentration, the radial density exponent
  double log_vol;
  double frac_min;  // kRhoMin^b, the truncated tail mass
  std::vector<double> w;

  RadialSampler(const LambdaSystem& s, const Domain& d, double concentration)
      : sys(s), dom(d), b(s.Q() - concentration),
        log_vol(std::log(d.volume())), w(s.total_dim()) {
    if (!dom.origin_centered())
      throw UnsupportedDomain(
          "radial sampling needs an origin-centered ball or a box straddling "
          "0");
    if (!(b > 0.0))
      throw InvalidParams("sampler concentration must be below Q");
    frac_min = std::pow(kRhoMin, b);
  }

  // draws z and returns the importance weight 1/q(z)
  double draw(ChunkRng& rng, std::vector<double>& z) {
    uniform_point(rng, dom, w);
    // rho^b uniform on [frac_min, 1] gives density b rho^{b-1}/(1 - frac_min)
    // on [kRhoMin, 1].
    const double rho =
        std::pow(frac_min + rng.unit_pos() * (1.0 - frac_min), 1.0 / b);
    for (int i = 0; i < sys.k(); ++i) {
      const double f = std::pow(rho, sys.sigma(i));
      for (int c = sys.offset(i); c < sys.offset(i) + sys.dim(i); ++c)
        z[c] = f * w[c];
    }
    const double gauge = dilation_gauge(sys, z, dom);
    if (gauge <= 0.0) return 0.0;  // z = 0; caller treats as rejection
    // q(z) = (b / (V (1 - frac_min))) * int_{lo}^1 rho^{b - Q - 1} d rho,
    // lo = max(gauge, kRhoMin)
    const double lo = std::max(gauge, kRhoMin);
    const double g = b - sys.Q();
    double log_int;  // log of the rho integral
    if (g == 0.0) {
      log_int = std::log(-std::log(lo));
    } else {
      // (1 - lo^g)/g, stable for either sign of g
      log_int = std::log(std::abs((1.0 - std::pow(lo, g)) / g));
    }
    if (!std::isfinite(log_int)) return 0.0;  // gauge == 1 boundary draw
    return std::exp(log_vol + std::log1p(-frac_min) - std::log(b) - log_int);
  }
};

template <size_t M>
struct ChunkPartial {
  std::array<double, M> sum{};
  std::array<double, M> sumsq{};
  std::uint64_t rejected = 0;
};

// Deterministic chunked estimator: chunk c always produces the same partial
// regardless of scheduling, and partials are reduced in chunk order, so the
// result is bit-identical for any thread count.
template <size_t M, class Eval>
std::array<IntegralEstimate, M> estimate_components(const LambdaSystem& sys,
                                                    Eval&& eval,
                                                    const Domain& dom,
                                                    const McOptions& opts) {
  if (dom.dimension() != sys.total_dim())
    throw DimensionMismatch("domain dimension does not match the system");
  if (opts.n == 0) throw InvalidParams("sample count must be positive");

  const std::uint64_t nchunks = (opts.n + kChunk - 1) / kChunk;
  std::vector<ChunkPartial<M>> partials(nchunks);

  const bool radial = opts.sampler == SamplerKind::RadialLogUniform;
  if (radial) RadialSampler(sys, dom, opts.concentration);  // validate early

  const double vol = dom.volume();
  std::atomic<std::uint64_t> next{0};
  std::mutex err_mutex;
  std::uint64_t err_chunk = ~0ULL;
  std::exception_ptr err;

  auto worker = [&]() {
    std::vector<double> z(sys.total_dim());
    for (;;) {
      const std::uint64_t c = next.fetch_add(1);
      if (c >= nchunks) return;
      try {
        ChunkRng rng(chunk_seed(opts.seed, c));
        std::optional<RadialSampler> sampler;
        if (radial) sampler.emplace(sys, dom, opts.concentration);
        ChunkPartial<M>& part = partials[c];
        const std::uint64_t lo = c * kChunk;
        const std::uint64_t hi = std::min<std::uint64_t>(lo + kChunk, opts.n);
        for (std::uint64_t i = lo; i < hi; ++i) {
          std::array<double, M> v{};
          for (std::uint64_t attempt = 0;; ++attempt) {
            if (attempt == 10000)
              throw ExcessiveRejections(
                  "10000 consecutive degenerate samples");
            double weight;
            if (!radial) {
              uniform_point(rng, dom, z);
              weight = vol;
            } else {
              weight = sampler->draw(rng, z);
              if (weight == 0.0) {
                ++part.rejected;
                continue;
              }
            }
            bool ok = true;
            try {
              v = eval(std::span<const double>(z));
            } catch (const DegeneratePoint&) {
              ok = false;
            }
            if (!ok) {
              ++part.rejected;
              continue;
            }
            for (auto& comp : v) {
              if (comp != 0.0) comp *= weight;
              if (!std::isfinite(comp))
                throw NonIntegrableSample(
                    "integrand evaluated non-finite; check the exponents");
            }
            break;
          }
          for (size_t m = 0; m < M; ++m) {
            part.sum[m] += v[m];
            part.sumsq[m] += v[m] * v[m];
          }
        }
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mutex);
        if (c < err_chunk) {
          err_chunk = c;
          err = std::current_exception();
        }
        return;
      }
    }
  };

  const int nthreads =
      static_cast<int>(std::min<std::uint64_t>(resolve_threads(opts.threads),
                                               nchunks));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (err) std::rethrow_exception(err);

  std::array<IntegralEstimate, M> out;
  std::array<double, M> sum{}, sumsq{};
  std::uint64_t rejected = 0;
  for (const auto& part : partials) {
    for (size_t m = 0; m < M; ++m) {
      sum[m] += part.sum[m];
      sumsq[m] += part.sumsq[m];
    }
    rejected += part.rejected;
  }
  const double n = static_cast<double>(opts.n);
  if (static_cast<double>(rejected) >
      opts.max_reject_fraction * static_cast<double>(opts.n + rejected))
    throw ExcessiveRejections("degenerate-sample fraction above threshold");
  for (size_t m = 0; m < M; ++m) {
    const double mean = sum[m] / n;
    double var = 0.0;
    if (opts.n > 1) {
      var = std::max(0.0, sumsq[m] / n - mean * mean) * n / (n - 1.0);
    }
    out[m].value = mean;
    out[m].se = std::sqrt(var / n);
    out[m].n = opts.n;
    out[m].rejected = rejected;
  }
  return out;
}

}  // namespace detail

inline IntegralEstimate estimate_integral(
    const LambdaSystem& sys,
    const std::function<double(std::span<const double>)>& f,
    const Domain& dom, const McOptions& opts) {
  auto r = detail::estimate_components<1>(
      sys,
      [&f](std::span<const double> x) { return std::array<double, 1>{f(x)}; },
      dom, opts);
  return r[0];
}

// Smooth compactly supported test function exp(-1/(1 - |x-c|^2/R^2)) inside
// the euclidean ball B(c, R), 0 outside; comes with its analytic gradient.
inline ScalarField bump(std::vector<double> center, double radius) {
  if (!(radius > 0.0)) throw NonPositiveScale("bump radius must be positive");
  ScalarField u;
  auto rho2 = [center, radius](std::span<const double> x) {
    if (x.size() != center.size())
      throw DimensionMismatch("bump center length does not match the point");
    double r2 = 0.0;
    for (size_t c = 0; c < center.size(); ++c) {
      const double d = x[c] - center[c];
      r2 += d * d;
    }
    return r2 / (radius * radius);
  };
  u.value = [rho2](std::span<const double> x) {
    const double r2 = rho2(x);
    return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0;
  };
  u.gradient = [rho2, center, radius](std::span<const double> x) {
    std::vector<double> g(x.size(), 0.0);
    const double r2 = rho2(x);
    if (r2 >= 1.0) return g;
    const double om = 1.0 - r2;
    const double f =
        -2.0 * std::exp(-1.0 / om) / (om * om * radius * radius);
    for (size_t c = 0; c < x.size(); ++c) g[c] = f * (x[c] - center[c]);
    return g;
  };
  return u;
}

enum class Verdict { Holds, Inconclusive, Violated };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Violated: return "violated";
    default: return "inconclusive";
  }
}

struct InequalityReport {
  double constant = 0.0;
  bool constant_applicable = false;
  bool conditions_verbatim = false;
  bool conditions_relaxed = false;
  double lhs = 0.0, lhs_se = 0.0;  // potential side: integral(density |u|^p)
  double rhs = 0.0, rhs_se = 0.0;  // gradient side: integral(weight |grad|^p)
  double margin = 0.0;             // rhs - constant * lhs
  double z = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  std::uint64_t n = 0, rejected = 0;
};

namespace detail {

inline void finish_report(InequalityReport& rep, double constant,
                          const IntegralEstimate& lhs,
                          const IntegralEstimate& rhs) {
  rep.constant = constant;
  rep.lhs = lhs.value;
  rep.lhs_se = lhs.se;
  rep.rhs = rhs.value;
  rep.rhs_se = rhs.se;
  rep.margin = rhs.value - constant * lhs.value;
  const double se = std::hypot(constant * lhs.se, rhs.se);
  if (se > 0.0) {
    rep.z = rep.margin / se;
  } else {
    rep.z = rep.margin == 0.0 ? 0.0
                              : std::copysign(HUGE_VAL, rep.margin);
  }
  rep.verdict = rep.z > 3.0    ? Verdict::Holds
                : rep.z < -3.0 ? Verdict::Violated
                               : Verdict::Inconclusive;
  rep.n = lhs.n;
  rep.rejected = lhs.rejected;
}

}  // namespace detail

// Monte-Carlo check of constant * integral(density |u|^p) <=
// integral(weight |grad_w u|^p) for a given test function. Admissibility
// must hold in at least one mode unless overridden.
inline InequalityReport verify_hardy(const LambdaSystem& sys,
                                     const HardyParams& prm,
                                     const ScalarField& u, const Domain& dom,
                                     const McOptions& opts,
                                     bool override_conditions = false) {
  validate_params(sys, prm);
  InequalityReport rep;
  rep.conditions_verbatim =
      check_conditions(sys, prm, ConditionMode::Verbatim).all_satisfied;
  rep.conditions_relaxed =
      check_conditions(sys, prm, ConditionMode::Relaxed).all_satisfied;
  if (!rep.conditions_verbatim && !rep.conditions_relaxed &&
      !override_conditions)
    throw ConditionsNotMet(
        "admissibility conditions fail in both modes; override to force");
  const auto constant = hardy_constant(sys, prm);
  rep.constant_applicable = constant.applicable;

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
  detail::finish_report(rep, constant.value, est[0], est[1]);
  return rep;
}

// Monte-Carlo check of the divergence lemma
//   integral(div_w h |u|^p) <= p^p integral(|h|^p (div_w h)^{1-p}
//                                           |grad_w u|^p),
// reported with the constant p^{-p} multiplying the left integral.
inline InequalityReport lemma_check(const LambdaSystem& sys,
                                    const BlockVectorField& h, double p,
                                    const ScalarField& u, const Domain& dom,
                                    const McOptions& opts) {
  if (!(p > 0.0)) throw InvalidParams("p must be positive");
  InequalityReport rep;
  rep.conditions_verbatim = rep.conditions_relaxed = true;
  rep.constant_applicable = true;

  auto eval = [&](std::span<const double> x) {
    std::array<double, 2> v{};
    const double uval = u.value(x);
    const double gn = grad_lambda_norm(sys, u, x);
    if (uval == 0.0 && gn == 0.0) return v;
    const double div = div_lambda(sys, h, x);
    if (!(div > 0.0))
      throw NonPositiveDivergence(
          "divergence lemma needs div_w h > 0 on the support of u");
    if (uval != 0.0) v[0] = div * std::pow(std::abs(uval), p);
    if (gn != 0.0) {
      const auto hv = h.value(x);
      double hn = 0.0;
      for (double c : hv) hn += c * c;
      hn = std::sqrt(hn);
      v[1] = std::pow(hn, p) * std::pow(div, 1.0 - p) * std::pow(gn, p);
    }
    return v;
  };
  auto est = detail::estimate_components<2>(sys, eval, dom, opts);
  detail::finish_report(rep, std::pow(p, -p), est[0], est[1]);
  return rep;
}

}  // namespace dlh

#endif
