#pragma once

// Smoothed learning curves and per-run summaries.
//
// A curve point at eval step t is the mean return of the episodes whose end
// step lies in the half-open window (t − window, t]. Eval steps are the
// multiples of `stride` up to the last episode's end step, starting at the
// first one whose window holds an episode. Later eval steps with an empty
// window repeat the previous value.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rlrepro/error.hpp"
#include "rlrepro/format.hpp"
#include "rlrepro/ingest.hpp"

namespace rlrepro {

inline constexpr std::int64_t default_window = 5000;
inline constexpr std::int64_t default_stride = 1000;
inline constexpr std::string_view empty_window_policy = "carry-forward";

struct CurvePoint {
  std::int64_t eval_step = 0;
  double value = 0.0;
  bool operator==(const CurvePoint&) const = default;
};

struct LearningCurve {
  std::vector<CurvePoint> points;
  std::int64_t window = default_window;
  std::int64_t stride = default_stride;
  bool operator==(const LearningCurve&) const = default;
};

struct BandPoint {
  std::int64_t eval_step = 0;
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

struct CurveBand {
  std::vector<BandPoint> points;
  std::int64_t window = default_window;
  std::int64_t stride = default_stride;
};

inline LearningCurve learning_curve(const RunLog& run, std::int64_t window = default_window,
                                    std::int64_t stride = default_stride) {
  if (window <= 0 || stride <= 0)
    throw ValidationError("learning_curve: window and stride must be positive");
  if (run.episodes.empty()) throw ValidationError("learning_curve: run '" + run.run_id + "' has no episodes");

  LearningCurve curve;
  curve.window = window;
  curve.stride = stride;
  const auto& eps = run.episodes;
  const std::int64_t first = eps.front().end_step;
  const std::int64_t last = eps.back().end_step;
  // Smallest positive multiple of stride that is >= first.
  std::int64_t t = std::max<std::int64_t>(1, (first + stride - 1) / stride) * stride;

  std::size_t lo = 0, hi = 0;  // window is eps[lo, hi)
  double previous = 0.0;
  for (; t <= last; t += stride) {
    while (hi < eps.size() && eps[hi].end_step <= t) ++hi;
    while (lo < hi && eps[lo].end_step <= t - window) ++lo;
    if (lo == hi) {
      if (!curve.points.empty()) curve.points.push_back({t, previous});
      continue;
    }
    // Summed directly in episode order; a running sum would drift.
    double sum = 0.0;
    for (std::size_t i = lo; i < hi; ++i) sum += eps[i].episode_return;
    previous = sum / static_cast<double>(hi - lo);
    curve.points.push_back({t, previous});
  }
  return curve;
}

enum class AverageMode { episodes, curve };

inline std::string_view to_string(AverageMode m) {
  return m == AverageMode::episodes ? "episodes" : "curve";
}

inline AverageMode average_mode_from_name(std::string_view s) {
  if (s == "episodes") return AverageMode::episodes;
  if (s == "curve") return AverageMode::curve;
  throw ValidationError("unknown average mode '" + std::string(s) + "' (expected episodes or curve)");
}

/// Neumaier-compensated sum.
inline double compensated_sum(std::span<const double> xs) {
  double sum = 0.0, c = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x))
      c += (sum - t) + x;
    else
      c += (x - t) + sum;
    sum = t;
  }
  return sum + c;
}

/// Scalar summary of one run: the mean over all episode returns, or with
/// AverageMode::curve the mean of its learning-curve points.
inline double run_average_return(const RunLog& run, AverageMode mode = AverageMode::episodes,
                                 std::int64_t window = default_window,
                                 std::int64_t stride = default_stride) {
  if (run.episodes.empty())
    throw ValidationError("run_average_return: run '" + run.run_id + "' has no episodes");
  std::vector<double> xs;
  if (mode == AverageMode::episodes) {
    xs.reserve(run.episodes.size());
    for (const auto& e : run.episodes) xs.push_back(e.episode_return);
  } else {
    const auto curve = learning_curve(run, window, stride);
    if (curve.points.empty())
      throw ValidationError("run_average_return: run '" + run.run_id + "' is shorter than one stride");
    for (const auto& p : curve.points) xs.push_back(p.value);
  }
  return compensated_sum(xs) / static_cast<double>(xs.size());
}

namespace detail {

inline void require_same_grid_params(std::span<const LearningCurve> curves, const char* who) {
  if (curves.size() < 2) throw ValidationError(std::string(who) + ": need at least 2 curves");
  for (const auto& c : curves)
    if (c.window != curves.front().window || c.stride != curves.front().stride)
      throw ValidationError(std::string(who) + ": curves differ in window/stride");
}

}  // namespace detail

/// Cross-run mean and standard error at every eval step shared by all curves.
inline CurveBand curve_band(std::span<const LearningCurve> curves) {
  detail::require_same_grid_params(curves, "curve_band");
  CurveBand band;
  band.window = curves.front().window;
  band.stride = curves.front().stride;

  std::int64_t start = std::numeric_limits<std::int64_t>::min();
  std::int64_t end = std::numeric_limits<std::int64_t>::max();
  for (const auto& c : curves) {
    if (c.points.empty()) return band;
    start = std::max(start, c.points.front().eval_step);
    end = std::min(end, c.points.back().eval_step);
  }
  const auto n = curves.size();
  std::vector<double> vals(n);
  for (std::int64_t t = start; t <= end; t += band.stride) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& pts = curves[i].points;
      vals[i] = pts[static_cast<std::size_t>((t - pts.front().eval_step) / band.stride)].value;
    }
    double sum = 0.0;
    for (double v : vals) sum += v;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : vals) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    band.points.push_back({t, mean, sd / std::sqrt(static_cast<double>(n)), n});
  }
  return band;
}

/// Largest spread (max − min across curves) over the eval steps.
inline double repeatability_deviation(std::span<const LearningCurve> curves) {
  detail::require_same_grid_params(curves, "repeatability_deviation");
  const auto& ref = curves.front().points;
  for (const auto& c : curves) {
    if (c.points.size() != ref.size())
      throw ValidationError("repeatability_deviation: curves have different grids");
    for (std::size_t i = 0; i < ref.size(); ++i)
      if (c.points[i].eval_step != ref[i].eval_step)
        throw ValidationError("repeatability_deviation: curves have different grids");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    double lo = ref[i].value, hi = ref[i].value;
    for (const auto& c : curves) {
      lo = std::min(lo, c.points[i].value);
      hi = std::max(hi, c.points[i].value);
    }
    worst = std::max(worst, hi - lo);
  }
  return worst;
}

inline std::string curve_csv(const LearningCurve& c) {
  std::string out = "eval_step,value\n";
  for (const auto& p : c.points) out += fmt::integer(p.eval_step) + "," + fmt::shortest(p.value) + "\n";
  return out;
}

inline std::string band_csv(const CurveBand& b) {
  std::string out = "eval_step,mean,se,n\n";
  for (const auto& p : b.points)
    out += fmt::integer(p.eval_step) + "," + fmt::shortest(p.mean) + "," + fmt::shortest(p.se) + "," +
           std::to_string(p.n) + "\n";
  return out;
}

}  // namespace rlrepro
