// Acceptance suite: one PASS/FAIL line per criterion. Exit status is
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"
#include "fixtures/benchmark_tables.hpp"
#include "oracle/oracles.hpp"
#include "rlrepro/distributions.hpp"
#include "rlrepro/inference.hpp"
#include "rlrepro/ingest.hpp"
#include "rlrepro/metrics.hpp"
#include "rlrepro/resample.hpp"
#include "rlrepro/rng.hpp"
#include "rlrepro/special.hpp"

namespace {

using namespace rlrepro;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
};

std::string num(double x, int digits = 4) { return fmt::fixed(x, digits); }

// 1 ---------------------------------------------------------------------------

Outcome ks_fixtures() {
  Outcome o;
  // The five named pairs plus fifteen more from the tables.
  const std::vector<std::pair<double, double>> pairs = {
      {0.0082, 0.5188}, {0.0044, 0.9911}, {0.0075, 0.6235}, {0.0134, 0.0555}, {0.0032, 1.0000},
      {0.0079, 0.5644}, {0.0080, 0.5406}, {0.0085, 0.4630}, {0.0088, 0.4167}, {0.0058, 0.8847},
      {0.0083, 0.4996}, {0.0061, 0.8466}, {0.0064, 0.8108}, {0.0071, 0.6874}, {0.0053, 0.9402},
      {0.0045, 0.9886}, {0.0067, 0.7663}, {0.0101, 0.2577}, {0.0049, 0.9699}, {0.0063, 0.8247}};
  const auto t0 = Clock::now();
  double worst_exact = 0.0, worst_asym = 0.0;
  for (const auto& [d, p] : pairs) {
    const double exact = special::ks_one_sample_pvalue(d, fixtures::ks_sample_size, special::KsMode::exact);
    const double asym = special::ks_one_sample_pvalue(d, fixtures::ks_sample_size, special::KsMode::asymptotic);
    worst_exact = std::max(worst_exact, std::fabs(exact - p));
    worst_asym = std::max(worst_asym, std::fabs(asym - exact));
    o.check(std::fabs(exact - p) <= 0.01,
            "D=" + num(d) + " exact p " + num(exact) + " vs published " + num(p));
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  o.check(worst_asym <= 0.01, "asymptotic mode within 0.01 of exact (max " + num(worst_asym) + ")");
  o.check(secs < 1.0, std::to_string(pairs.size()) + " p-values in " + num(secs, 3) + " s (< 1 s)");
  return o;
}

// 2 ---------------------------------------------------------------------------

Outcome fitted_means() {
  Outcome o;
  const auto t0 = Clock::now();
  for (int c : {1, 2}) {
    const auto& row = fixtures::ks_row("trpo", c, Family::beta);
    const double m = mean(make_distribution(Family::beta, row.params));
    const double mu_bar = fixtures::summary_rows[static_cast<std::size_t>(c - 1)].mu_bar;
    o.check(std::fabs(m - mu_bar) <= 0.5,
            "trpo c" + std::to_string(c) + " beta mean " + num(m, 3) + " vs bootstrap mean " + num(mu_bar, 2));
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  o.check(secs < 1.0, "runtime " + num(secs, 3) + " s (< 1 s)");
  return o;
}

// 3 ---------------------------------------------------------------------------

Outcome table_reconstruction() {
  Outcome o;
  const auto t0 = Clock::now();
  std::vector<std::vector<ReproducibilityVerdict>> matrix(fixtures::table_families.size());
  std::vector<std::string> columns;
  int combined_better = 0, pv_better = 0, matched = 0;
  double worst = 0.0;
  for (int col = 0; col < 10; ++col) {
    const std::string alg = col < 5 ? "trpo" : "ppo";
    const int cfg = col % 5 + 1;
    columns.push_back(alg + "-c" + std::to_string(cfg));
    const double mu_hat = fixtures::reported_for(alg, cfg);
    for (std::size_t r = 0; r < fixtures::table_families.size(); ++r) {
      const auto& row = fixtures::ks_row(alg, cfg, fixtures::table_families[r]);
      FittedDistribution fit;
      fit.dist = make_distribution(row.family, row.params);
      fit.ks_statistic = row.D;
      fit.ks_pvalue = row.p;
      fit.sample_size = static_cast<std::size_t>(fixtures::ks_sample_size);
      const auto v = verdict_for(fit, mu_hat);
      const double published = fixtures::probability_table[r][static_cast<std::size_t>(col)];
      const double dc = std::fabs(v.combined - published), dv = std::fabs(v.p_v - published);
      (dc <= dv ? combined_better : pv_better)++;
      const double best = std::min(dc, dv);
      worst = std::max(worst, best);
      if (best <= 0.03) ++matched;
      else
        o.check(false, columns.back() + " " + std::string(to_string(row.family)) + ": combined " +
                           num(v.combined) + ", P_v " + num(v.p_v) + ", published " + num(published));
      matrix[r].push_back(v);
    }
  }
  o.check(matched == 60, std::to_string(matched) + "/60 cells within 0.03 under the better reading (max gap " +
                             num(worst) + "; combined closer in " + std::to_string(combined_better) +
                             ", P_v-only closer in " + std::to_string(pv_better) + ")");

  bool pattern = true;
  for (std::size_t r = 0; r < matrix.size(); ++r)
    for (std::size_t c = 0; c < matrix[r].size(); ++c)
      pattern = pattern && ((matrix[r][c].decision == Decision::failed_to_reject) ==
                            (static_cast<int>(c) == fixtures::starred_column));
  o.check(pattern, "stars exactly on the trpo-c2 column");

  std::vector<std::string> rows;
  for (auto f : fixtures::table_families) rows.emplace_back(to_string(f));
  const auto summary = significance_summary(matrix, rows, columns);
  o.check(summary.rejected == fixtures::published_reject_count,
          "reject count " + std::to_string(summary.rejected) + "/" + std::to_string(summary.total) +
              " vs published " + std::to_string(fixtures::published_reject_count) + "/60");
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  o.check(secs < 5.0, "runtime " + num(secs, 3) + " s (< 5 s)");
  return o;
}

// 4 ---------------------------------------------------------------------------

Outcome bootstrap_coverage() {
  Outcome o;
  const auto t0 = Clock::now();
  constexpr int trials = 2000;
  constexpr double mu = 100.0, sigma = 15.0;
  int covered = 0;
  for (int t = 0; t < trials; ++t) {
    auto rng = SeededRng::stream(2024, static_cast<std::uint64_t>(t));
    std::vector<double> sample(10);
    for (auto& x : sample) x = rng.normal(mu, sigma);
    const auto boot = bootstrap_means(sample, default_resamples, 1'000'000 + static_cast<std::uint64_t>(t));
    if (boot.ci_low <= mu && mu <= boot.ci_high) ++covered;
  }
  const double rate = static_cast<double>(covered) / trials;
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  o.check(rate >= 0.90 && rate <= 0.97, "coverage " + num(rate, 4) + " in [0.90, 0.97]");
  o.check(secs < 120.0, "runtime " + num(secs, 1) + " s (< 120 s)");
  return o;
}

// 5 ---------------------------------------------------------------------------

Outcome mle_recovery() {
  Outcome o;
  const auto t0 = Clock::now();
  const std::vector<Distribution> truths = {
      make_distribution(Family::normal, {139.65, 6.3}),
      make_distribution(Family::beta, {18.83, 8.83, 89.22, 74.13}),
      make_distribution(Family::johnsonsb, {-1.62, 2.71, 89.67, 78.02}),
      make_distribution(Family::johnsonsu, {12.79, 8.57, 189.57, 23.46}),
      make_distribution(Family::loggamma, {10.59, 92.24, 20.53}),
      make_distribution(Family::powernorm, {5.39, 151.53, 9.81}),
      make_distribution(Family::skewnorm, {-1.53, 145.51, 8.69})};
  constexpr std::size_t n = 10000;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    SeededRng rng(500 + i);
    const auto data = sample(truths[i], n, rng);
    FitOptions fo;
    fo.seed = 77;
    const auto fit = fit_mle(truths[i].family, data, fo);
    o.check(fit.ks_pvalue > 0.05, std::string(to_string(truths[i].family)) + ": post-fit KS p " +
                                      num(fit.ks_pvalue) + " (D " + num(fit.ks_statistic) + ")");
    if (truths[i].family == Family::normal) {
      const double se_mu = truths[i].scale / std::sqrt(double(n));
      const double se_sigma = truths[i].scale / std::sqrt(2.0 * n);
      const double zm = std::fabs(fit.dist.loc - truths[i].loc) / se_mu;
      const double zs = std::fabs(fit.dist.scale - truths[i].scale) / se_sigma;
      o.check(zm <= 3.0 && zs <= 3.0, "normal: |error|/SE loc " + num(zm, 2) + ", scale " + num(zs, 2) + " (<= 3)");
    }
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  o.check(secs < 120.0, "runtime " + num(secs, 1) + " s (< 120 s)");
  return o;
}

// 6 ---------------------------------------------------------------------------

Outcome normality_calibration() {
  Outcome o;
  const auto t0 = Clock::now();
  constexpr int trials = 2000;
  int normal_rejects = 0, lognormal_rejects = 0;
  std::vector<double> x(1000);
  for (int t = 0; t < trials; ++t) {
    auto rng = SeededRng::stream(31337, static_cast<std::uint64_t>(t));
    for (auto& v : x) v = rng.normal();
    if (dagostino_pearson(x).decision == Decision::rejected) ++normal_rejects;
    for (auto& v : x) v = std::exp(rng.normal());
    if (dagostino_pearson(x).decision == Decision::rejected) ++lognormal_rejects;
  }
  const double rn = double(normal_rejects) / trials, rl = double(lognormal_rejects) / trials;
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  o.check(rn >= 0.03 && rn <= 0.07, "normal rejection rate " + num(rn, 4) + " in [0.03, 0.07]");
  o.check(rl > 0.99, "log-normal rejection rate " + num(rl, 4) + " > 0.99");
  o.check(secs < 60.0, "runtime " + num(secs, 1) + " s (< 60 s)");
  return o;
}

// 7 ---------------------------------------------------------------------------

Outcome metric_oracle() {
  Outcome o;
  const auto t0 = Clock::now();
  int identical = 0;
  std::size_t points = 0;
  for (int r = 0; r < 200; ++r) {
    auto rng = SeededRng::stream(99, static_cast<std::uint64_t>(r));
    RunLog run;
    run.run_id = "random";
    std::int64_t step = static_cast<std::int64_t>(rng.bounded(3000));
    const auto count = 1 + rng.bounded(400);
    for (std::uint64_t i = 0; i < count; ++i) {
      run.episodes.push_back({step, rng.normal(50.0, 80.0)});
      step += 1 + static_cast<std::int64_t>(rng.bounded(rng.uniform() < 0.1 ? 20000 : 800));
    }
    const std::int64_t window = 1 + static_cast<std::int64_t>(rng.bounded(8000));
    const std::int64_t stride = 1 + static_cast<std::int64_t>(rng.bounded(2000));
    const auto curve = learning_curve(run, window, stride);
    const auto ref = oracle::brute_force_curve(run, window, stride);
    bool same = curve.points.size() == ref.size();
    for (std::size_t i = 0; same && i < ref.size(); ++i)
      same = curve.points[i].eval_step == ref[i].first &&
             fmt::shortest(curve.points[i].value) == fmt::shortest(ref[i].second);
    points += ref.size();
    if (same) ++identical;
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  o.check(identical == 200, std::to_string(identical) + "/200 random runs identical to the rescan oracle (" +
                                std::to_string(points) + " points)");
  o.check(secs < 30.0, "runtime " + num(secs, 2) + " s (< 30 s)");
  return o;
}

// 8 ---------------------------------------------------------------------------

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = read_text_file(e.path());
  return files;
}

int run_cli(std::vector<std::string> args, std::string& out_text) {
  std::vector<const char*> argv{"rlrepro"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  out_text = out.str() + err.str();
  return rc;
}

Outcome determinism() {
  Outcome o;
  const auto t0 = Clock::now();
  const fs::path data = RLREPRO_DATA_DIR;
  const fs::path tmp = fs::temp_directory_path() / ("rlrepro_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(tmp);
  std::string text;
  const int synth_rc = run_cli({"synth", (data / "synth_reacher.yaml").string(), "--seed", "7", "--out",
                                (tmp / "runs").string()},
                               text);
  o.check(synth_rc == 0, "synth exit status " + std::to_string(synth_rc));

  std::vector<std::string> logs;
  for (int r = 0; r < 10; ++r) logs.push_back((tmp / "runs" / (synth_run_id(r) + ".csv")).string());
  auto analyze = [&](const std::string& out_dir, const std::string& threads) {
    std::vector<std::string> args{"analyze", (data / "configs" / "ppo_c4.yaml").string()};
    args.insert(args.end(), logs.begin(), logs.end());
    for (const auto& a : {"--seed", "7", "--reported", "137.26", "--threads"}) args.emplace_back(a);
    args.push_back(threads);
    args.push_back("--out");
    args.push_back((tmp / out_dir).string());
    return run_cli(args, text);
  };
  const int a1 = analyze("bundle_a", "1");
  o.check(a1 == 0 && text.find("9 runs analyzed") != std::string::npos,
          "first analyze exit " + std::to_string(a1) + ", reports 9 runs analyzed");
  const int a2 = analyze("bundle_b", "1");
  const int a3 = analyze("bundle_c", "4");
  o.check(a2 == 0 && a3 == 0, "repeat runs exit 0");
  const auto a = read_tree(tmp / "bundle_a"), b = read_tree(tmp / "bundle_b"), c = read_tree(tmp / "bundle_c");
  o.check(!a.empty() && a == b, "two sequential runs byte-identical (" + std::to_string(a.size()) + " files)");
  o.check(!a.empty() && a == c, "4-thread run byte-identical to 1-thread run");
  fs::remove_all(tmp);
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  o.notes.push_back("     runtime " + num(secs, 1) + " s");
  return o;
}

// 9 ---------------------------------------------------------------------------

Outcome special_accuracy() {
  Outcome o;
  const auto t0 = Clock::now();
  constexpr int grid = 1000;
  auto u = [](int i) { return (i + 0.5) / grid; };

  double phi_rel = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double x = -30.0 + 38.0 * u(i);
    const auto ref = oracle::normal_cdf(x);
    phi_rel = std::max(phi_rel, double(std::fabs((special::std_normal_cdf(x) - ref) / ref)));
  }
  o.check(phi_rel <= 1e-12, "Phi on [-30, 8]: max relative error " + fmt::shortest(phi_rel) + " (<= 1e-12)");

  double p_abs = 0.0;
  SeededRng rng(9);
  for (int i = 0; i < grid; ++i) {
    const double a = 0.1 + 99.9 * rng.uniform();
    const double x = (a + 5.0 * std::sqrt(a) + 5.0) * rng.uniform();
    p_abs = std::max(p_abs, double(std::fabs(special::reg_inc_gamma_lower(a, x) - oracle::gamma_p(a, x))));
  }
  o.check(p_abs <= 1e-12, "P(a,x), a in [0.1, 100]: max abs error " + fmt::shortest(p_abs) + " (<= 1e-12)");

  double i_abs = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double a = std::exp(std::log(0.2) + (std::log(1000.0) - std::log(0.2)) * rng.uniform());
    const double b = std::exp(std::log(0.2) + (std::log(1000.0) - std::log(0.2)) * rng.uniform());
    const double z = rng.uniform();
    i_abs = std::max(i_abs, double(std::fabs(special::reg_inc_beta(a, b, z) - oracle::beta_i(a, b, z))));
  }
  o.check(i_abs <= 1e-12, "I_z(a,b), a,b in [0.2, 1000]: max abs error " + fmt::shortest(i_abs) + " (<= 1e-12)");

  double t_abs = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double h = -8.0 + 16.0 * rng.uniform();
    const double a = -10.0 + 20.0 * rng.uniform();
    t_abs = std::max(t_abs, double(std::fabs(special::owens_t(h, a) - oracle::owens_t(h, a))));
  }
  o.check(t_abs <= 1e-14, "Owen's T, h in [-8, 8], a in [-10, 10]: max abs error " + fmt::shortest(t_abs) +
                              " (<= 1e-14)");
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  o.notes.push_back("     runtime " + num(secs, 2) + " s");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"KS p-value fixtures", ks_fixtures},
      {"fitted-mean cross-check", fitted_means},
      {"probability table reconstruction", table_reconstruction},
      {"bootstrap coverage", bootstrap_coverage},
      {"MLE recovery", mle_recovery},
      {"normality-test calibration", normality_calibration},
      {"metric oracle equivalence", metric_oracle},
      {"determinism", determinism},
      {"special-function accuracy", special_accuracy},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::stoi(argv[i]));
  if (selected.empty())
    for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) selected.push_back(i);

  int failures = 0;
  for (int idx : selected) {
    const auto& [name, fn] = criteria.at(static_cast<std::size_t>(idx - 1));
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out.check(false, std::string("exception: ") + e.what());
    }
    std::printf("criterion %d: %s  %s\n", idx, out.pass ? "PASS" : "FAIL", name.c_str());
    for (const auto& n : out.notes) std::printf("    %s\n", n.c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(selected.size()) - failures, selected.size());
  return failures == 0 ? 0 : 1;
}
