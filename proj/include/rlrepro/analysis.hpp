#pragma once

// The end-to-end pipeline for one configuration:
// exclusions → per-run averages → bootstrap → normality → fits → verdicts.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rlrepro/config.hpp"
#include "rlrepro/distributions.hpp"
#include "rlrepro/inference.hpp"
#include "rlrepro/ingest.hpp"
#include "rlrepro/metrics.hpp"
#include "rlrepro/parallel.hpp"
#include "rlrepro/report.hpp"
#include "rlrepro/resample.hpp"

namespace rlrepro {

struct AnalyzeOptions {
  std::uint64_t seed = 0;
  std::size_t resamples = default_resamples;
  double confidence = default_confidence;
  double alpha = default_alpha;
  std::int64_t window = default_window;
  std::int64_t stride = default_stride;
  std::vector<Family> families{default_fit_families.begin(), default_fit_families.end()};
  special::KsMode ks_mode = special::KsMode::exact;
  AverageMode average_mode = AverageMode::episodes;
  unsigned threads = 1;
};

inline Provenance make_provenance(const AnalyzeOptions& o) {
  Provenance p;
  p.seed = o.seed;
  p.resamples = static_cast<std::int64_t>(o.resamples);
  p.confidence = o.confidence;
  p.alpha = o.alpha;
  p.window = o.window;
  p.stride = o.stride;
  p.ks_mode = std::string(special::to_string(o.ks_mode));
  p.average_mode = std::string(to_string(o.average_mode));
  for (auto f : o.families) p.families.emplace_back(to_string(f));
  return p;
}

/// Analyze one trial set. The bootstrap uses `options.seed` directly and
/// every fit uses it for its restart jitter, so results depend only on the
/// inputs and the seed.
inline ConfigAnalysis analyze_trials(const TrialSet& trials, std::optional<double> reported,
                                     const AnalyzeOptions& options) {
  check_alpha(options.alpha);
  if (!trials.exclusions_applied) throw ValidationError("analyze: exclusions have not been applied");
  if (trials.runs.size() < 2)
    throw ValidationError("analyze: '" + trials.config.name + "' needs at least 2 runs after exclusions");
  const auto digest = config_hash(trials.config);
  for (const auto& r : trials.runs)
    if (r.config_hash && *r.config_hash != digest)
      throw ValidationError("analyze: run '" + r.run_id + "' records config hash " + *r.config_hash +
                            " but '" + trials.config.name + "' hashes to " + digest);

  ConfigAnalysis a;
  a.name = trials.config.name;
  a.config_hash = digest;
  a.reported = reported;
  a.excluded = trials.excluded;
  a.curves.resize(trials.runs.size());
  a.run_averages.resize(trials.runs.size());
  for (const auto& r : trials.runs) a.run_ids.push_back(r.run_id);
  parallel_for(trials.runs.size(), options.threads, [&](std::size_t i) {
    a.curves[i] = learning_curve(trials.runs[i], options.window, options.stride);
    a.run_averages[i] = run_average_return(trials.runs[i], options.average_mode, options.window, options.stride);
  });
  if (std::all_of(a.curves.begin(), a.curves.end(), [](const auto& c) { return !c.points.empty(); }))
    a.band = curve_band(a.curves);

  a.boot = bootstrap_means(a.run_averages, options.resamples, options.seed, options.confidence, options.threads);
  if (a.boot.means.size() >= normality_min_n) {
    try {
      a.normality = dagostino_pearson(a.boot.means, options.alpha);
    } catch (const ValidationError&) {
      // Zero-variance bootstrap: nothing to test.
    }
  }

  FitOptions fo;
  fo.seed = options.seed;
  fo.ks_mode = options.ks_mode;
  a.fits.resize(options.families.size());
  parallel_for(options.families.size(), options.threads,
               [&](std::size_t i) { a.fits[i] = fit_mle(options.families[i], a.boot.means, fo); });
  if (reported) a.verdicts = verify_reproducibility(a.boot, a.fits, *reported, options.alpha);
  return a;
}

inline ConfigProvenance provenance_entry(const ConfigAnalysis& a) {
  return {a.name, a.config_hash, static_cast<std::int64_t>(a.run_averages.size()), a.excluded, a.reported};
}

}  // namespace rlrepro
