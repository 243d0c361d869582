#pragma once

// rlrepro command line. `run` is the whole program minus process setup, so
// tests can drive it in-process.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "rlrepro/analysis.hpp"
#include "rlrepro/config.hpp"
#include "rlrepro/error.hpp"
#include "rlrepro/format.hpp"
#include "rlrepro/hash.hpp"
#include "rlrepro/ingest.hpp"
#include "rlrepro/metrics.hpp"
#include "rlrepro/report.hpp"
#include "rlrepro/version.hpp"

namespace rlrepro::cli {

namespace fs = std::filesystem;

struct Settings {
  // shared
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::string out;
  double alpha = default_alpha;
  std::string ks_mode = "exact";
  // validate
  std::vector<std::string> config_files;
  bool hyper_table = false;
  // curves / analyze
  std::string config_file;
  std::vector<std::string> run_logs;
  std::int64_t window = default_window;
  std::int64_t stride = default_stride;
  std::size_t resamples = default_resamples;
  double confidence = default_confidence;
  std::optional<double> reported;
  std::string families;
  std::string average_mode = "episodes";
  // fit / verify / synth
  std::string input;
  std::string family;
};

inline unsigned resolve_threads(unsigned t) {
  return t == 0 ? std::max(1u, std::thread::hardware_concurrency()) : t;
}

inline std::vector<Family> parse_families(const std::string& list) {
  if (list.empty()) return {default_fit_families.begin(), default_fit_families.end()};
  std::vector<Family> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const auto comma = std::min(list.find(',', pos), list.size());
    const auto name = fmt::trim(std::string_view(list).substr(pos, comma - pos));
    if (name.empty()) throw ValidationError("--families: empty family name");
    const auto f = family_from_name(name);
    if (std::find(out.begin(), out.end(), f) != out.end())
      throw ValidationError("--families: '" + std::string(name) + "' listed twice");
    out.push_back(f);
    pos = comma + 1;
  }
  return out;
}

inline std::uint64_t require_seed(const Settings& s, const char* command) {
  if (!s.seed)
    throw ValidationError(std::string(command) +
                          " consumes randomness and needs an explicit --seed (no implicit seeding)");
  return *s.seed;
}

inline ExperimentConfig load_config(const std::string& path) {
  return parse_config(read_text_file(path));
}

inline std::vector<RunLog> load_runs(const std::vector<std::string>& paths) {
  std::vector<RunLog> runs;
  for (const auto& p : paths) runs.push_back(load_run_log(p));
  return runs;
}

inline void print_warnings(const ExperimentConfig& c, const std::string& path, std::ostream& err) {
  for (const auto& w : config_warnings(c)) err << "warning: " << path << ": " << w << "\n";
}

// ---- commands ------------------------------------------------------------

inline int cmd_validate(const Settings& s, std::ostream& out, std::ostream& err) {
  int status = 0;
  std::vector<ExperimentConfig> ok;
  for (const auto& path : s.config_files) {
    try {
      const auto c = load_config(path);
      print_warnings(c, path, err);
      out << config_hash(c) << "  " << path << "\n";
      ok.push_back(c);
    } catch (const Error& e) {
      err << "error[" << to_string(e.kind()) << "]: " << path << ": " << e.what() << "\n";
      status = std::max(status, static_cast<int>(e.kind()));
    }
  }
  if (status == 0 && s.hyper_table) out << "\n" << hyperparameter_report(ok).render();
  return status;
}

inline int cmd_curves(const Settings& s, std::ostream& out, std::ostream& err) {
  const auto config = load_config(s.config_file);
  print_warnings(config, s.config_file, err);
  auto runs = load_runs(s.run_logs);
  std::vector<std::string> ids;
  std::vector<LearningCurve> curves;
  for (const auto& r : runs) {
    ids.push_back(r.run_id);
    curves.push_back(learning_curve(r, s.window, s.stride));
  }
  const auto trials = apply_exclusions(std::move(runs), config);
  std::vector<LearningCurve> kept;
  for (const auto& r : trials.runs)
    kept.push_back(curves[static_cast<std::size_t>(std::find(ids.begin(), ids.end(), r.run_id) - ids.begin())]);

  const fs::path dir(s.out);
  for (std::size_t i = 0; i < curves.size(); ++i)
    write_text_file(dir / "curves" / (path_component(ids[i]) + ".csv"), curve_csv(curves[i]));
  out << curves.size() << " curves written\n";
  for (const auto& ex : trials.excluded)
    out << "excluded run " << ex.index << " (" << ids[static_cast<std::size_t>(ex.index)] << ") from band: " << ex.reason
        << "\n";
  if (kept.size() >= 2) {
    const auto band = curve_band(kept);
    write_text_file(dir / "band.csv", band_csv(band));
    out << "band over " << kept.size() << " runs, " << band.points.size() << " points\n";
  } else {
    err << "warning: fewer than 2 runs after exclusions; no band written\n";
  }
  return 0;
}

inline int cmd_analyze(const Settings& s, std::ostream& out, std::ostream& err) {
  AnalyzeOptions o;
  o.seed = require_seed(s, "analyze");
  o.resamples = s.resamples;
  o.confidence = s.confidence;
  o.alpha = s.alpha;
  o.window = s.window;
  o.stride = s.stride;
  o.families = parse_families(s.families);
  o.ks_mode = special::ks_mode_from_name(s.ks_mode);
  o.average_mode = average_mode_from_name(s.average_mode);
  o.threads = resolve_threads(s.threads);
  if (!(o.confidence > 0.0 && o.confidence < 1.0)) throw ValidationError("--confidence must lie in (0, 1)");

  const auto config_text = read_text_file(s.config_file);
  const auto config = parse_config(config_text);
  print_warnings(config, s.config_file, err);

  AnalysisReport report;
  report.provenance = make_provenance(o);
  report.provenance.inputs.push_back({fs::path(s.config_file).filename().string(), sha256_hex(config_text)});
  std::vector<RunLog> runs;
  for (const auto& p : s.run_logs) {
    runs.push_back(load_run_log(p));
    report.provenance.inputs.push_back({fs::path(p).filename().string(), sha256_hex(read_text_file(p))});
  }
  const std::vector<RunLog> all_runs = runs;
  const auto trials = apply_exclusions(std::move(runs), config);
  report.configs.push_back(analyze_trials(trials, s.reported, o));
  report.provenance.configs.push_back(provenance_entry(report.configs.back()));

  const auto& a = report.configs.back();
  out << a.run_averages.size() << " runs analyzed\n";
  for (const auto& ex : a.excluded)
    out << "excluded run " << ex.index << " (" << all_runs[static_cast<std::size_t>(ex.index)].run_id
        << "): " << ex.reason << "\n";
  out << "\n" << render_summary_table(report).render();
  if (a.normality)
    out << "\nnormality (D'Agostino-Pearson): K2 " << fmt::fixed(a.normality->statistic, 4) << ", p "
        << fmt::shortest(a.normality->pvalue) << ", " << to_string(a.normality->decision) << "\n";
  out << "\n";
  for (const auto& f : a.fits)
    out << to_string(f.dist.family) << ": params " << params_text(f.dist) << ", D "
        << fmt::fixed(f.ks_statistic, 4) << ", p " << fmt::fixed(f.ks_pvalue, 4) << "\n";
  if (!a.verdicts.empty()) out << "\n" << render_probability_table(report).table.render();
  if (!s.out.empty()) {
    const auto manifest = emit_bundle(report, s.out);
    out << "\nbundle: " << manifest.size() + 1 << " files in " << s.out << "\n";
  }
  return 0;
}

inline int cmd_fit(const Settings& s, std::ostream& out, std::ostream&) {
  FitOptions fo;
  fo.seed = require_seed(s, "fit");
  fo.ks_mode = special::ks_mode_from_name(s.ks_mode);
  const auto family = family_from_name(s.family);
  const auto data = read_value_column(read_text_file(s.input), s.input);
  const auto f = fit_mle(family, data, fo);
  out << "family: " << to_string(f.dist.family) << "\n"
      << "params: " << params_text(f.dist) << "\n"
      << "log_likelihood: " << fmt::shortest(f.log_likelihood) << "\n"
      << "mean: " << fmt::shortest(mean(f.dist)) << "\n"
      << "ks_statistic: " << fmt::shortest(f.ks_statistic) << "\n"
      << "ks_pvalue: " << fmt::shortest(f.ks_pvalue) << " (" << special::to_string(f.ks_mode) << ")\n"
      << "converged: " << (f.converged ? "true" : "false") << "\n";
  if (!s.out.empty()) write_text_file(s.out, write_fit_record(f));
  return 0;
}

inline int cmd_verify(const Settings& s, std::ostream& out, std::ostream&) {
  if (!s.reported) throw ValidationError("verify needs --reported");
  const auto fit = parse_fit_record(read_text_file(s.input));
  const auto v = verdict_for(fit, *s.reported, s.alpha);
  out << "family: " << to_string(fit.dist.family) << "\n"
      << "mu_hat: " << fmt::shortest(v.reported) << "\n"
      << "P_v: " << fmt::shortest(v.p_v) << "\n"
      << "P_d: " << fmt::shortest(v.p_d) << "\n"
      << "combined: " << fmt::shortest(v.combined) << " (" << probability_cell(v.combined, v.decision) << ")\n"
      << "alpha: " << fmt::shortest(v.alpha) << "\n"
      << "decision: " << to_string(v.decision) << "\n"
      << "decision_pv_only: " << to_string(v.decision_pv_only) << "\n";
  return 0;
}

inline int cmd_synth(const Settings& s, std::ostream& out, std::ostream&) {
  const auto seed = require_seed(s, "synth");
  const auto spec = parse_synth_spec(read_text_file(s.input));
  const auto runs = synthesize_runs(spec, seed);
  const fs::path dir(s.out);
  for (const auto& r : runs) {
    write_text_file(dir / (r.run_id + ".csv"), write_run_log(r));
    write_text_file(dir / (r.run_id + ".meta.yaml"), write_run_meta(spec.meta(*r.seed)));
  }
  out << runs.size() << " runs of " << spec.episodes_per_run() << " episodes written to " << s.out << "\n";
  return 0;
}

// ---- entry ---------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Settings s;
  CLI::App app{"Evaluation and reproducibility analysis for episodic learning experiments", "rlrepro"};
  app.set_version_flag("--version", std::string(tool_version));
  app.require_subcommand(1);

  auto add_seed = [&](CLI::App* c) { c->add_option("--seed", s.seed, "Seed for every random draw (required)"); };
  auto add_threads = [&](CLI::App* c) {
    c->add_option("--threads", s.threads, "Worker threads (0 = all cores); output does not depend on it")
        ->capture_default_str();
  };
  auto add_grid = [&](CLI::App* c) {
    c->add_option("--window", s.window, "Smoothing window in steps")->capture_default_str()->check(CLI::PositiveNumber);
    c->add_option("--stride", s.stride, "Evaluation stride in steps")->capture_default_str()->check(CLI::PositiveNumber);
  };

  auto* validate = app.add_subcommand("validate", "Check configuration files and print their digests");
  validate->add_option("configs", s.config_files, "Configuration files")->required();
  validate->add_flag("--table", s.hyper_table, "Also print the tuned-hyperparameter table");

  auto* curves = app.add_subcommand("curves", "Write smoothed learning curves and the mean/SE band");
  curves->add_option("config", s.config_file, "Configuration file")->required();
  curves->add_option("runs", s.run_logs, "Run logs, in run-index order")->required();
  add_grid(curves);
  curves->add_option("--out", s.out, "Output directory")->required();

  auto* analyze = app.add_subcommand("analyze", "Run the full analysis pipeline for one configuration");
  analyze->add_option("config", s.config_file, "Configuration file")->required();
  analyze->add_option("runs", s.run_logs, "Run logs, in run-index order")->required();
  analyze->add_option("--resamples", s.resamples, "Bootstrap resamples")->capture_default_str()->check(CLI::PositiveNumber);
  add_seed(analyze);
  analyze->add_option("--alpha", s.alpha, "Significance level")->capture_default_str();
  analyze->add_option("--confidence", s.confidence, "Confidence level of the bootstrap interval")->capture_default_str();
  analyze->add_option("--reported", s.reported, "Previously reported average return to verify against");
  analyze->add_option("--families", s.families, "Comma-separated families to fit (default: all but normal)");
  analyze->add_option("--ks-mode", s.ks_mode, "KS p-value: exact or asymptotic")->capture_default_str();
  analyze->add_option("--average-mode", s.average_mode, "Per-run average: episodes or curve")->capture_default_str();
  add_grid(analyze);
  add_threads(analyze);
  analyze->add_option("--out", s.out, "Bundle output directory");

  auto* fit = app.add_subcommand("fit", "Fit one family to a column of values by maximum likelihood");
  fit->add_option("means", s.input, "CSV with a header line and one value per line")->required();
  fit->add_option("--family", s.family, "Distribution family")->required();
  add_seed(fit);
  fit->add_option("--ks-mode", s.ks_mode, "KS p-value: exact or asymptotic")->capture_default_str();
  fit->add_option("--out", s.out, "Write the fit record (YAML) here");

  auto* verify = app.add_subcommand("verify", "Verdict for a stored fit against a reported value");
  verify->add_option("fit", s.input, "Fit record (YAML)")->required();
  verify->add_option("--reported", s.reported, "Reported average return")->required();
  verify->add_option("--alpha", s.alpha, "Significance level")->capture_default_str();

  auto* synth = app.add_subcommand("synth", "Generate synthetic run logs");
  synth->add_option("spec", s.input, "Generator settings (YAML)")->required();
  add_seed(synth);
  synth->add_option("--out", s.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);  // --help, --version
    err << "error[validation]: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::validation);
  }

  try {
    if (*validate) return cmd_validate(s, out, err);
    if (*curves) return cmd_curves(s, out, err);
    if (*analyze) return cmd_analyze(s, out, err);
    if (*fit) return cmd_fit(s, out, err);
    if (*verify) return cmd_verify(s, out, err);
    if (*synth) return cmd_synth(s, out, err);
  } catch (const Error& e) {
    err << "error[" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error[io]: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::io);
  } catch (const std::exception& e) {
    err << "error[numeric]: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::numeric);
  }
  return 0;
}

}  // namespace rlrepro::cli
