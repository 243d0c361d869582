#pragma once

// Continuous location–scale families and maximum-likelihood fitting.
//
// Every family is written in terms of the standardized variable
// z = (x − loc)/scale, with parameter vectors ordered (shapes..., loc, scale)
// exactly as in the common statistics-catalog convention:
//
//   normal            Φ(z)
//   beta (a, b)       I_z(a, b)                          0 < z < 1
//   johnsonsb (γ, δ)  Φ(γ + δ·ln(z/(1−z)))               0 < z < 1
//   johnsonsu (γ, δ)  Φ(γ + δ·asinh z)
//   loggamma (c)      P(c, eᶻ)
//   powernorm (c)     1 − Φ(−z)ᶜ
//   skewnorm (a)      Φ(z) − 2·T(z, a)

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rlrepro/error.hpp"
#include "rlrepro/optimize.hpp"
#include "rlrepro/quadrature.hpp"
#include "rlrepro/rng.hpp"
#include "rlrepro/special.hpp"

namespace rlrepro {

enum class Family { normal, beta, johnsonsb, johnsonsu, loggamma, powernorm, skewnorm };

struct FamilyInfo {
  Family family;
  std::string_view name;
  int shape_arity;
  std::array<bool, 2> shape_positive;  // per shape: must be > 0
  bool bounded;                        // support is (loc, loc + scale)
};

inline constexpr std::array<FamilyInfo, 7> family_registry = {{
    {Family::normal, "normal", 0, {false, false}, false},
    {Family::beta, "beta", 2, {true, true}, true},
    {Family::johnsonsb, "johnsonsb", 2, {false, true}, true},
    {Family::johnsonsu, "johnsonsu", 2, {false, true}, false},
    {Family::loggamma, "loggamma", 1, {true, false}, false},
    {Family::powernorm, "powernorm", 1, {true, false}, false},
    {Family::skewnorm, "skewnorm", 1, {false, false}, false},
}};

/// The six families fitted to bootstrap distributions by default.
inline constexpr std::array<Family, 6> default_fit_families = {
    Family::beta,     Family::johnsonsb, Family::johnsonsu,
    Family::loggamma, Family::powernorm, Family::skewnorm};

inline const FamilyInfo& info(Family f) {
  return family_registry[static_cast<std::size_t>(f)];
}

inline std::string_view to_string(Family f) { return info(f).name; }

inline Family family_from_name(std::string_view name) {
  for (const auto& fi : family_registry)
    if (fi.name == name) return fi.family;
  throw ValidationError("unknown distribution family '" + std::string(name) + "'");
}

/// A family with concrete parameters.
struct Distribution {
  Family family = Family::normal;
  std::vector<double> shapes;
  double loc = 0.0;
  double scale = 1.0;

  /// Parameters in catalog order: shapes..., loc, scale.
  std::vector<double> params() const {
    std::vector<double> p = shapes;
    p.push_back(loc);
    p.push_back(scale);
    return p;
  }

  double shape(std::size_t i) const { return shapes.at(i); }

  void validate() const {
    const auto& fi = info(family);
    if (static_cast<int>(shapes.size()) != fi.shape_arity)
      throw ValidationError(std::string(fi.name) + " takes " +
                            std::to_string(fi.shape_arity) + " shape parameter(s)");
    if (!(scale > 0.0) || !std::isfinite(scale))
      throw ValidationError(std::string(fi.name) + ": scale must be positive");
    if (!std::isfinite(loc))
      throw ValidationError(std::string(fi.name) + ": loc must be finite");
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      if (!std::isfinite(shapes[i]))
        throw ValidationError(std::string(fi.name) + ": shape must be finite");
      if (fi.shape_positive[i] && !(shapes[i] > 0.0))
        throw ValidationError(std::string(fi.name) + ": shape " +
                              std::to_string(i) + " must be positive");
    }
  }

  bool operator==(const Distribution&) const = default;
};

/// Build from a catalog-ordered parameter list.
inline Distribution make_distribution(Family f, std::span<const double> params) {
  const auto arity = static_cast<std::size_t>(info(f).shape_arity);
  if (params.size() != arity + 2)
    throw ValidationError(std::string(to_string(f)) + " expects " +
                          std::to_string(arity + 2) + " parameters");
  Distribution d{f, std::vector<double>(params.begin(), params.begin() + arity),
                 params[arity], params[arity + 1]};
  d.validate();
  return d;
}

inline Distribution make_distribution(Family f, std::initializer_list<double> params) {
  return make_distribution(f, std::span<const double>(params.begin(), params.size()));
}

struct FittedDistribution {
  Distribution dist;
  double log_likelihood = 0.0;
  bool converged = false;
  bool degenerate = false;
  int iterations = 0;
  double ks_statistic = 0.0;
  double ks_pvalue = 1.0;
  special::KsMode ks_mode = special::KsMode::exact;
  // KS p-value computed on the same data the parameters were estimated from.
  bool post_fit_ks = true;
  std::size_t sample_size = 0;
};

// ---------------------------------------------------------------------------
// Density, distribution and survival functions.

inline std::pair<double, double> support(const Distribution& d) {
  if (info(d.family).bounded) return {d.loc, d.loc + d.scale};
  const double inf = std::numeric_limits<double>::infinity();
  return {-inf, inf};
}

namespace detail {

inline double logit(double z) { return std::log(z) - std::log1p(-z); }

// log f(z) split as kernel(z) + normalizer, so likelihood loops evaluate
// the normalizer once.
inline double log_std_normalizer(const Distribution& d) {
  switch (d.family) {
    case Family::normal:
      return -special::ln_sqrt_2pi;
    case Family::beta:
      return -special::ln_beta(d.shapes[0], d.shapes[1]);
    case Family::johnsonsb:
    case Family::johnsonsu:
      return std::log(d.shapes[1]) - special::ln_sqrt_2pi;
    case Family::loggamma:
      return -special::ln_gamma(d.shapes[0]);
    case Family::powernorm:
      return std::log(d.shapes[0]) - special::ln_sqrt_2pi;
    case Family::skewnorm:
      return std::numbers::ln2 - special::ln_sqrt_2pi;
  }
  return 0.0;
}

inline double log_std_kernel(const Distribution& d, double z) {
  const double ninf = -std::numeric_limits<double>::infinity();
  switch (d.family) {
    case Family::normal:
      return -0.5 * z * z;
    case Family::beta:
      if (!(z > 0.0 && z < 1.0)) return ninf;
      return (d.shapes[0] - 1.0) * std::log(z) + (d.shapes[1] - 1.0) * std::log1p(-z);
    case Family::johnsonsb: {
      if (!(z > 0.0 && z < 1.0)) return ninf;
      const double lz = std::log(z), l1z = std::log1p(-z);
      const double u = d.shapes[0] + d.shapes[1] * (lz - l1z);
      return -lz - l1z - 0.5 * u * u;
    }
    case Family::johnsonsu: {
      const double u = d.shapes[0] + d.shapes[1] * std::asinh(z);
      return -std::log(std::hypot(z, 1.0)) - 0.5 * u * u;
    }
    case Family::loggamma:
      return d.shapes[0] * z - std::exp(z);
    case Family::powernorm:
      return -0.5 * z * z + (d.shapes[0] - 1.0) * special::log_std_normal_cdf(-z);
    case Family::skewnorm:
      return -0.5 * z * z + special::log_std_normal_cdf(d.shapes[0] * z);
  }
  return ninf;
}

inline double log_std_pdf(const Distribution& d, double z) {
  return log_std_kernel(d, z) + log_std_normalizer(d);
}

inline double std_cdf(const Distribution& d, double z) {
  switch (d.family) {
    case Family::normal:
      return special::std_normal_cdf(z);
    case Family::beta:
      if (z <= 0.0) return 0.0;
      if (z >= 1.0) return 1.0;
      return special::reg_inc_beta(d.shapes[0], d.shapes[1], z);
    case Family::johnsonsb:
      if (z <= 0.0) return 0.0;
      if (z >= 1.0) return 1.0;
      return special::std_normal_cdf(d.shapes[0] + d.shapes[1] * logit(z));
    case Family::johnsonsu:
      return special::std_normal_cdf(d.shapes[0] + d.shapes[1] * std::asinh(z));
    case Family::loggamma:
      if (z > 709.0) return 1.0;
      return special::reg_inc_gamma_lower(d.shapes[0], std::exp(z));
    case Family::powernorm:
      return -std::expm1(d.shapes[0] * special::log_std_normal_cdf(-z));
    case Family::skewnorm: {
      const double v = special::std_normal_cdf(z) - 2.0 * special::owens_t(z, d.shapes[0]);
      return std::clamp(v, 0.0, 1.0);
    }
  }
  return 0.0;
}

inline double std_sf(const Distribution& d, double z) {
  switch (d.family) {
    case Family::normal:
      return special::std_normal_sf(z);
    case Family::beta:
      if (z <= 0.0) return 1.0;
      if (z >= 1.0) return 0.0;
      return special::reg_inc_beta(d.shapes[1], d.shapes[0], 1.0 - z);
    case Family::johnsonsb:
      if (z <= 0.0) return 1.0;
      if (z >= 1.0) return 0.0;
      return special::std_normal_sf(d.shapes[0] + d.shapes[1] * logit(z));
    case Family::johnsonsu:
      return special::std_normal_sf(d.shapes[0] + d.shapes[1] * std::asinh(z));
    case Family::loggamma:
      if (z > 709.0) return 0.0;
      return special::reg_inc_gamma_upper(d.shapes[0], std::exp(z));
    case Family::powernorm:
      return std::exp(d.shapes[0] * special::log_std_normal_cdf(-z));
    case Family::skewnorm: {
      const double v = special::std_normal_sf(z) + 2.0 * special::owens_t(z, d.shapes[0]);
      return std::clamp(v, 0.0, 1.0);
    }
  }
  return 0.0;
}

}  // namespace detail

inline double log_pdf(const Distribution& d, double x) {
  return detail::log_std_pdf(d, (x - d.loc) / d.scale) - std::log(d.scale);
}

inline double pdf(const Distribution& d, double x) { return std::exp(log_pdf(d, x)); }

inline double cdf(const Distribution& d, double x) {
  return detail::std_cdf(d, (x - d.loc) / d.scale);
}

/// 1 − cdf, evaluated in complementary form.
inline double sf(const Distribution& d, double x) {
  return detail::std_sf(d, (x - d.loc) / d.scale);
}

inline double pdf(const FittedDistribution& f, double x) { return pdf(f.dist, x); }
inline double cdf(const FittedDistribution& f, double x) { return cdf(f.dist, x); }
inline double sf(const FittedDistribution& f, double x) { return sf(f.dist, x); }

/// Σ log pdf(xᵢ).
inline double log_likelihood(const Distribution& d, std::span<const double> data) {
  double ll = 0.0;
  for (double x : data) ll += detail::log_std_kernel(d, (x - d.loc) / d.scale);
  return ll + static_cast<double>(data.size()) *
                  (detail::log_std_normalizer(d) - std::log(d.scale));
}

/// Quantile by bisection on the CDF; stops once |cdf(x) − p| ≤ tol or the
/// bracket can no longer shrink.
inline double quantile(const Distribution& d, double p, double tol = 1e-10) {
  if (!(p > 0.0 && p < 1.0))
    throw DomainError("quantile: p must lie in (0, 1)");
  double lo, hi;
  if (info(d.family).bounded) {
    lo = d.loc;
    hi = d.loc + d.scale;
  } else {
    double width = d.scale;
    lo = d.loc - width;
    hi = d.loc + width;
    for (int i = 0; i < 2100 && cdf(d, lo) > p; ++i) {
      width *= 2.0;
      lo = d.loc - width;
    }
    width = d.scale;
    for (int i = 0; i < 2100 && cdf(d, hi) < p; ++i) {
      width *= 2.0;
      hi = d.loc + width;
    }
  }
  double mid = 0.5 * (lo + hi);
  for (int i = 0; i < 2000; ++i) {
    mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double c = cdf(d, mid);
    if (std::fabs(c - p) <= tol) break;
    if (c < p)
      lo = mid;
    else
      hi = mid;
  }
  return mid;
}

/// Inverse-CDF sampling; one uniform per draw, in order.
inline std::vector<double> sample(const Distribution& d, std::size_t count,
                                  SeededRng& rng) {
  d.validate();
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(quantile(d, rng.uniform_open()));
  return out;
}

/// Mean: closed form for normal and beta, quadrature of x·pdf otherwise.
inline double mean(const Distribution& d) {
  d.validate();
  switch (d.family) {
    case Family::normal:
      return d.loc;
    case Family::beta:
      return d.loc + d.scale * d.shapes[0] / (d.shapes[0] + d.shapes[1]);
    default:
      break;
  }
  // E[X] = loc + scale·E[Z]; integrate z·f(z) between far quantiles.
  const Distribution standard{d.family, d.shapes, 0.0, 1.0};
  const double lo = quantile(standard, 1e-15, 1e-17);
  const double hi = quantile(standard, 1.0 - 1e-15, 1e-17);
  auto integrand = [&](double z) {
    return z * std::exp(detail::log_std_pdf(standard, z));
  };
  const auto r = integrate(integrand, lo, hi, 1e-13, 1e-11, 32);
  return d.loc + d.scale * r.value;
}

inline double mean(const FittedDistribution& f) { return mean(f.dist); }

// ---------------------------------------------------------------------------
// Goodness of fit.

struct KsResult {
  double statistic = 0.0;
  double pvalue = 1.0;
};

inline double ks_statistic(const Distribution& d, std::span<const double> data) {
  if (data.empty()) throw ValidationError("ks_statistic: data must be non-empty");
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double D = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double F = cdf(d, sorted[i]);
    const double above = static_cast<double>(i + 1) / n - F;
    const double below = F - static_cast<double>(i) / n;
    D = std::max({D, above, below});
  }
  return D;
}

inline KsResult gof_ks(const Distribution& d, std::span<const double> data,
                       special::KsMode mode = special::KsMode::exact) {
  d.validate();
  const double D = ks_statistic(d, data);
  return {D, special::ks_one_sample_pvalue(D, static_cast<long>(data.size()), mode)};
}

inline KsResult gof_ks(const FittedDistribution& f, std::span<const double> data,
                       special::KsMode mode = special::KsMode::exact) {
  return gof_ks(f.dist, data, mode);
}

// ---------------------------------------------------------------------------
// Maximum-likelihood fitting.

struct FitOptions {
  std::uint64_t seed = 0;
  int restarts = 3;
  double jitter = 0.25;
  NelderMeadOptions simplex{};
  special::KsMode ks_mode = special::KsMode::exact;
};

/// Smallest σ reported for constant data under the normal family.
inline double normal_sigma_floor(double level) {
  return 1e-12 * std::max(1.0, std::fabs(level));
}

/// Penalty per data point outside the support, plus 1e9 per z-unit of
/// violation distance.
inline constexpr double support_penalty = 1e9;

namespace detail {

struct SampleSummary {
  double min, max, mean, variance, median, iqr, skewness;
};

inline double sorted_quantile(const std::vector<double>& s, double p) {
  const double h = (static_cast<double>(s.size()) - 1.0) * p;
  const auto i = static_cast<std::size_t>(std::floor(h));
  if (i + 1 >= s.size()) return s.back();
  return s[i] + (h - static_cast<double>(i)) * (s[i + 1] - s[i]);
}

inline SampleSummary summarize(std::span<const double> data) {
  std::vector<double> s(data.begin(), data.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  const double m = std::accumulate(s.begin(), s.end(), 0.0) / n;
  double m2 = 0.0, m3 = 0.0;
  for (double x : s) {
    const double d = x - m;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  return {s.front(),
          s.back(),
          m,
          m2,
          sorted_quantile(s, 0.5),
          sorted_quantile(s, 0.75) - sorted_quantile(s, 0.25),
          m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0};
}

inline std::pair<double, double> mean_sd(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / n)};
}

// Moment-based starting point (see fit_mle).
inline Distribution initial_guess(Family family, std::span<const double> data,
                                  const SampleSummary& s) {
  const double range = s.max - s.min;
  Distribution d{family, {}, 0.0, 1.0};
  if (info(family).bounded) {
    d.loc = s.min - 0.05 * range;
    d.scale = 1.1 * range;
  } else {
    d.loc = s.median;
    d.scale = s.iqr > 0.0 ? s.iqr / 1.349 : std::sqrt(s.variance);
  }
  std::vector<double> z;
  z.reserve(data.size());
  for (double x : data) z.push_back((x - d.loc) / d.scale);

  switch (family) {
    case Family::normal:
      break;
    case Family::beta: {
      const auto [m, sd] = mean_sd(z);
      const double common = m * (1.0 - m) / (sd * sd) - 1.0;
      d.shapes = common > 0.0 ? std::vector<double>{m * common, (1.0 - m) * common}
                              : std::vector<double>{1.0, 1.0};
      break;
    }
    case Family::johnsonsb: {
      for (auto& v : z) v = logit(v);
      const auto [m, sd] = mean_sd(z);
      const double delta = sd > 0.0 ? 1.0 / sd : 1.0;
      d.shapes = {-m * delta, delta};
      break;
    }
    case Family::johnsonsu: {
      for (auto& v : z) v = std::asinh(v);
      const auto [m, sd] = mean_sd(z);
      const double delta = sd > 0.0 ? 1.0 / sd : 1.0;
      d.shapes = {-m * delta, delta};
      break;
    }
    case Family::loggamma:
    case Family::powernorm:
      d.shapes = {1.0};
      break;
    case Family::skewnorm: {
      // Invert the skewness of the skew-normal for |δ|.
      const double max_skew = 0.99 * 0.9952717464311565;
      const double g = std::min(std::fabs(s.skewness), max_skew);
      const double g23 = std::pow(g, 2.0 / 3.0);
      const double k = std::pow((4.0 - std::numbers::pi) / 2.0, 2.0 / 3.0);
      const double delta = std::sqrt(std::numbers::pi / 2.0 * g23 / (g23 + k));
      const double a = delta / std::sqrt(1.0 - delta * delta);
      d.shapes = {s.skewness < 0.0 ? -a : a};
      break;
    }
  }
  return d;
}

// Unconstrained coordinates: log for positive shapes and the scale, loc in
// units of the reference scale.
struct Transform {
  Family family;
  double loc0;
  double scale0;

  std::vector<double> to_theta(const Distribution& d) const {
    std::vector<double> t;
    const auto& fi = info(family);
    for (std::size_t i = 0; i < d.shapes.size(); ++i)
      t.push_back(fi.shape_positive[i] ? std::log(d.shapes[i]) : d.shapes[i]);
    t.push_back((d.loc - loc0) / scale0);
    t.push_back(std::log(d.scale / scale0));
    return t;
  }

  Distribution from_theta(std::span<const double> t) const {
    Distribution d{family, {}, 0.0, 1.0};
    const auto& fi = info(family);
    const auto arity = static_cast<std::size_t>(fi.shape_arity);
    for (std::size_t i = 0; i < arity; ++i)
      d.shapes.push_back(fi.shape_positive[i] ? std::exp(t[i]) : t[i]);
    d.loc = loc0 + scale0 * t[arity];
    d.scale = scale0 * std::exp(t[arity + 1]);
    return d;
  }
};

// Log-likelihood with the out-of-support penalty.
inline double penalized_log_likelihood(const Distribution& d,
                                       std::span<const double> data) {
  // exp() in the transform can still overflow or underflow to zero.
  if (!(d.scale > 0.0) || !std::isfinite(d.scale) || !std::isfinite(d.loc))
    return -HUGE_VAL;
  const auto& fi = info(d.family);
  for (std::size_t i = 0; i < d.shapes.size(); ++i)
    if (!std::isfinite(d.shapes[i]) || (fi.shape_positive[i] && !(d.shapes[i] > 0.0)))
      return -HUGE_VAL;
  const bool bounded = info(d.family).bounded;
  const double constant = log_std_normalizer(d) - std::log(d.scale);
  double ll = 0.0;
  for (double x : data) {
    const double z = (x - d.loc) / d.scale;
    if (bounded && !(z > 0.0 && z < 1.0)) {
      const double dist = z <= 0.0 ? -z : z - 1.0;
      ll -= support_penalty * (1.0 + dist);
      continue;
    }
    const double term = log_std_kernel(d, z) + constant;
    ll += std::isfinite(term) ? term : -support_penalty;
  }
  return ll;
}

}  // namespace detail

/// Maximum-likelihood fit of `family` to `data`.
///
/// Normal: closed form (sample mean, population σ). Constant data yields
/// σ = normal_sigma_floor and `degenerate`. All other families: Nelder–Mead
/// on −log L in transformed coordinates, started at a moment-based guess
///   bounded families   loc₀ = min − 0.05·range, scale₀ = 1.1·range
///   unbounded          loc₀ = median, scale₀ = IQR/1.349
///   shapes             beta: moments; Johnson: normal fit of the
///                      transformed data; skewnorm: sample skewness;
///                      otherwise 1.
/// followed by `restarts` runs from jittered copies of that guess (seeded
/// from options.seed). Each run is polished once from its own optimum and
/// the best log-likelihood wins. The KS statistic and p-value against the
/// same data are attached.
inline FittedDistribution fit_mle(Family family, std::span<const double> data,
                                  const FitOptions& options = {}) {
  if (data.size() < 20)
    throw ValidationError("fit_mle: at least 20 data points required");
  for (double x : data)
    if (!std::isfinite(x)) throw ValidationError("fit_mle: data must be finite");

  const auto summary = detail::summarize(data);
  FittedDistribution fit;
  fit.sample_size = data.size();
  fit.ks_mode = options.ks_mode;

  if (family == Family::normal) {
    fit.dist = {Family::normal, {}, summary.mean, std::sqrt(summary.variance)};
    fit.converged = true;
    if (!(fit.dist.scale > normal_sigma_floor(summary.mean))) {
      fit.dist.scale = normal_sigma_floor(summary.mean);
      fit.degenerate = true;
    }
  } else {
    if (summary.max == summary.min)
      throw ValidationError("fit_mle: degenerate (zero-variance) data for " +
                            std::string(to_string(family)));
    const Distribution guess = detail::initial_guess(family, data, summary);
    const detail::Transform tf{family, guess.loc, guess.scale};
    auto objective = [&](const std::vector<double>& theta) {
      return -detail::penalized_log_likelihood(tf.from_theta(theta), data);
    };

    const auto theta0 = tf.to_theta(guess);
    NelderMeadResult best;
    best.f = HUGE_VAL;
    int total_iterations = 0;
    for (int r = 0; r <= options.restarts; ++r) {
      auto start = theta0;
      if (r > 0) {
        auto rng = SeededRng::stream(options.seed, static_cast<std::uint64_t>(r));
        for (auto& t : start) t += options.jitter * rng.normal();
      }
      auto run = nelder_mead(objective, start, options.simplex);
      auto polish = nelder_mead(objective, run.x, options.simplex);
      total_iterations += run.iterations + polish.iterations;
      if (polish.f <= run.f) run = std::move(polish);
      if (run.f < best.f) best = std::move(run);
    }
    fit.dist = tf.from_theta(best.x);
    fit.converged = best.converged;
    fit.iterations = total_iterations;
  }

  fit.log_likelihood = log_likelihood(fit.dist, data);
  const auto ks = gof_ks(fit.dist, data, options.ks_mode);
  fit.ks_statistic = ks.statistic;
  fit.ks_pvalue = ks.pvalue;
  fit.post_fit_ks = true;
  return fit;
}

}  // namespace rlrepro
