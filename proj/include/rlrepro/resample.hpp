#pragma once

// Bootstrap distribution of the sample mean.
//
// Resample i draws length(sample) indices with replacement from its own
// generator SeededRng::stream(seed, i), so the means vector does not depend
// on how resamples are spread over threads.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "rlrepro/error.hpp"
#include "rlrepro/rng.hpp"

namespace rlrepro {

inline constexpr std::size_t default_resamples = 10000;
inline constexpr double default_confidence = 0.95;
inline constexpr std::string_view ci_method = "percentile (linear interpolation between closest ranks)";

struct BootstrapDistribution {
  std::vector<double> source_sample;
  std::size_t resample_count = 0;
  std::vector<double> means;
  double empirical_mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double confidence = default_confidence;
  std::uint64_t seed = 0;
};

/// Empirical quantile with linear interpolation between closest ranks:
/// h = (N − 1)p, q = x[⌊h⌋] + (h − ⌊h⌋)(x[⌊h⌋+1] − x[⌊h⌋]).
/// `sorted` must be ascending.
inline double empirical_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ValidationError("empirical_quantile: empty input");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  // Exact when both neighbours agree, so constant data gives a point interval.
  if (sorted[lo] == sorted[lo + 1]) return sorted[lo];
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline std::pair<double, double> percentile_ci(std::span<const double> means,
                                               double confidence = default_confidence) {
  if (means.empty()) throw ValidationError("percentile_ci: means must be non-empty");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw ValidationError("percentile_ci: confidence must lie in (0, 1)");
  std::vector<double> sorted(means.begin(), means.end());
  std::sort(sorted.begin(), sorted.end());
  const double tail = (1.0 - confidence) / 2.0;
  return {empirical_quantile(sorted, tail), empirical_quantile(sorted, 1.0 - tail)};
}

/// Mean of one resample, drawn from sub-stream `index`. The exact mean lies
/// in [lo, hi]; clamping removes round-off that would leave that range.
inline double resample_mean(std::span<const double> sample, std::uint64_t seed,
                            std::uint64_t index, double lo, double hi) {
  auto rng = SeededRng::stream(seed, index);
  double sum = 0.0;
  for (std::size_t j = 0; j < sample.size(); ++j) sum += sample[rng.bounded(sample.size())];
  return std::clamp(sum / static_cast<double>(sample.size()), lo, hi);
}

inline BootstrapDistribution bootstrap_means(std::span<const double> sample,
                                             std::size_t resamples, std::uint64_t seed,
                                             double confidence = default_confidence,
                                             unsigned threads = 1) {
  if (sample.size() < 2)
    throw ValidationError("bootstrap_means: sample must have at least 2 values");
  if (resamples < 1) throw ValidationError("bootstrap_means: resample count must be >= 1");
  for (double x : sample)
    if (!std::isfinite(x)) throw ValidationError("bootstrap_means: sample must be finite");

  BootstrapDistribution out;
  out.source_sample.assign(sample.begin(), sample.end());
  out.resample_count = resamples;
  out.confidence = confidence;
  out.seed = seed;
  out.means.resize(resamples);

  const auto [min_it, max_it] = std::minmax_element(sample.begin(), sample.end());
  auto fill = [&, lo = *min_it, hi = *max_it](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      out.means[i] = resample_mean(sample, seed, i, lo, hi);
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(resamples)));
  if (threads == 1) {
    fill(0, resamples);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (resamples + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk;
      const std::size_t e = std::min(resamples, b + chunk);
      if (b < e) pool.emplace_back(fill, b, e);
    }
  }

  // Summed in index order so the result is independent of threading.
  double total = 0.0;
  for (double m : out.means) total += m;
  out.empirical_mean = total / static_cast<double>(resamples);
  std::tie(out.ci_low, out.ci_high) = percentile_ci(out.means, confidence);
  return out;
}

}  // namespace rlrepro
