#pragma once

// Normality testing and the reproducibility verdict.
//
// For a fitted distribution of bootstrap means and a reported single-value
// result μ̂, the probability of drawing a mean at least as good is
//   P{v ≥ μ̂ | data} = P_d · P_v,
// with P_v the survival of the fit at μ̂ and P_d the KS p-value of the fit.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rlrepro/distributions.hpp"
#include "rlrepro/error.hpp"
#include "rlrepro/format.hpp"
#include "rlrepro/resample.hpp"
#include "rlrepro/table.hpp"

namespace rlrepro {

inline constexpr double default_alpha = 0.05;

enum class Decision { rejected, failed_to_reject };

inline std::string_view to_string(Decision d) {
  return d == Decision::rejected ? "Rejected" : "Failed to reject";
}

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
}

struct NormalityResult {
  double statistic = 0.0;  // K²
  double pvalue = 1.0;
  double z_skew = 0.0;
  double z_kurt = 0.0;
  Decision decision = Decision::failed_to_reject;
  double alpha = default_alpha;
  std::size_t n = 0;
};

inline constexpr std::size_t normality_min_n = 20;

/// Survival of χ² with 2 degrees of freedom.
inline double chi2_2df_sf(double x) { return x <= 0.0 ? 1.0 : std::exp(-0.5 * x); }

/// Skewness z-score (D'Agostino 1970 transform of √b1).
inline double skew_z(double b1_sqrt, double n) {
  const double y = b1_sqrt * std::sqrt((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0)));
  const double beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0) /
                       ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
  const double w2 = -1.0 + std::sqrt(2.0 * (beta2 - 1.0));
  const double delta = 1.0 / std::sqrt(0.5 * std::log(w2));
  const double alpha = std::sqrt(2.0 / (w2 - 1.0));
  return delta * std::asinh(y / alpha);
}

/// Kurtosis z-score (Anscombe–Glynn transform of b2).
inline double kurtosis_z(double b2, double n) {
  const double e = 3.0 * (n - 1.0) / (n + 1.0);
  const double var = 24.0 * n * (n - 2.0) * (n - 3.0) /
                     ((n + 1.0) * (n + 1.0) * (n + 3.0) * (n + 5.0));
  const double x = (b2 - e) / std::sqrt(var);
  const double sqrt_beta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0)) *
                            std::sqrt(6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0)));
  const double a = 6.0 + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + std::sqrt(1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)));
  const double term1 = 1.0 - 2.0 / (9.0 * a);
  const double denom = 1.0 + x * std::sqrt(2.0 / (a - 4.0));
  if (denom == 0.0) throw NumericError("kurtosis z-score: singular transform");
  const double term2 = std::copysign(std::cbrt((1.0 - 2.0 / a) / std::fabs(denom)), denom);
  return (term1 - term2) / std::sqrt(2.0 / (9.0 * a));
}

/// D'Agostino–Pearson omnibus test: K² = z_skew² + z_kurt², p = exp(−K²/2).
inline NormalityResult dagostino_pearson(std::span<const double> data, double alpha = default_alpha) {
  check_alpha(alpha);
  if (data.size() < normality_min_n)
    throw ValidationError("dagostino_pearson: need at least " + std::to_string(normality_min_n) +
                          " values, got " + std::to_string(data.size()));
  const double n = static_cast<double>(data.size());
  double sum = 0.0;
  for (double x : data) {
    if (!std::isfinite(x)) throw ValidationError("dagostino_pearson: data must be finite");
    sum += x;
  }
  const double mean = sum / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : data) {
    const double d = x - mean, d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (!(m2 > 0.0) || m2 <= 1e-28 * mean * mean)
    throw ValidationError("dagostino_pearson: data has zero variance");

  NormalityResult r;
  r.n = data.size();
  r.alpha = alpha;
  r.z_skew = skew_z(m3 / std::pow(m2, 1.5), n);
  r.z_kurt = kurtosis_z(m4 / (m2 * m2), n);
  r.statistic = r.z_skew * r.z_skew + r.z_kurt * r.z_kurt;
  r.pvalue = chi2_2df_sf(r.statistic);
  r.decision = r.pvalue < alpha ? Decision::rejected : Decision::failed_to_reject;
  return r;
}

struct ReproducibilityVerdict {
  double reported = 0.0;  // μ̂
  FittedDistribution fit;
  double p_v = 0.0;
  double p_d = 0.0;
  double combined = 0.0;
  double alpha = default_alpha;
  Decision decision = Decision::rejected;
  Decision decision_pv_only = Decision::rejected;
};

inline Decision decide(double probability, double alpha) {
  return probability >= alpha ? Decision::failed_to_reject : Decision::rejected;
}

inline ReproducibilityVerdict verdict_for(const FittedDistribution& fit, double reported,
                                          double alpha = default_alpha) {
  check_alpha(alpha);
  if (!std::isfinite(reported)) throw ValidationError("reported value must be finite");
  fit.dist.validate();
  if (!(fit.ks_pvalue >= 0.0 && fit.ks_pvalue <= 1.0))
    throw ValidationError("fit for '" + std::string(to_string(fit.dist.family)) + "' has no valid KS p-value");
  ReproducibilityVerdict v;
  v.reported = reported;
  v.fit = fit;
  v.alpha = alpha;
  v.p_v = sf(fit, reported);
  v.p_d = fit.ks_pvalue;
  v.combined = v.p_d * v.p_v;
  v.decision = decide(v.combined, alpha);
  v.decision_pv_only = decide(v.p_v, alpha);
  return v;
}

inline std::vector<ReproducibilityVerdict> verify_reproducibility(
    const BootstrapDistribution& boot, std::span<const FittedDistribution> fits, double reported,
    double alpha = default_alpha) {
  std::vector<ReproducibilityVerdict> out;
  out.reserve(fits.size());
  for (const auto& f : fits) {
    if (f.sample_size != 0 && f.sample_size != boot.means.size())
      throw ValidationError("verify_reproducibility: fit of '" + std::string(to_string(f.dist.family)) +
                            "' used " + std::to_string(f.sample_size) + " values, bootstrap has " +
                            std::to_string(boot.means.size()));
    out.push_back(verdict_for(f, reported, alpha));
  }
  return out;
}

// ---- significance table --------------------------------------------------

inline constexpr std::string_view star = "*";

/// Probability cell: 4 decimals, starred when the hypothesis is not rejected.
inline std::string probability_cell(double p, Decision d) {
  auto s = fmt::fixed(p, 4);
  if (d == Decision::failed_to_reject) s += star;
  return s;
}

struct SignificanceSummary {
  TextTable table;
  std::size_t rejected = 0;
  std::size_t total = 0;
};

/// `verdicts[r][c]`: row r (family), column c (configuration).
inline SignificanceSummary significance_summary(
    const std::vector<std::vector<ReproducibilityVerdict>>& verdicts,
    const std::vector<std::string>& row_labels, const std::vector<std::string>& column_labels,
    std::string_view corner = "family") {
  if (verdicts.empty() || column_labels.empty())
    throw ValidationError("significance_summary: empty verdict matrix");
  if (row_labels.size() != verdicts.size())
    throw ValidationError("significance_summary: row label count does not match the matrix");
  for (const auto& row : verdicts)
    if (row.size() != column_labels.size())
      throw ValidationError("significance_summary: ragged verdict matrix");

  SignificanceSummary s;
  s.table.header.emplace_back(corner);
  s.table.header.insert(s.table.header.end(), column_labels.begin(), column_labels.end());
  for (std::size_t r = 0; r < verdicts.size(); ++r) {
    std::vector<std::string> row{row_labels[r]};
    for (const auto& v : verdicts[r]) {
      row.push_back(probability_cell(v.combined, v.decision));
      ++s.total;
      if (v.decision == Decision::rejected) ++s.rejected;
    }
    s.table.rows.push_back(std::move(row));
  }
  s.table.footer.push_back("rejected " + std::to_string(s.rejected) + " of " + std::to_string(s.total) +
                           " (alpha " + fmt::shortest(verdicts.front().front().alpha) + ", " +
                           std::string(star) + " = failed to reject)");
  return s;
}

}  // namespace rlrepro
