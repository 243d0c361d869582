#pragma once

// Analysis results, their text tables, and the on-disk bundle.
//
// Bundle layout (all text UTF-8 with LF endings):
//   summary.csv, summary.txt               per-configuration μ̂, μ̄ and CI
//   probabilities.csv, probabilities.txt   verdicts (when μ̂ is given)
//   fits.csv, normality.csv, fits/<config>/<family>.yaml
//   curves/<config>/<run>.csv, bands/<config>.csv
//   bootstrap_means/<config>.csv
//   provenance.yaml
//   manifest.txt                           `<sha256>  <path>` per file
//
// Every number goes through fmt::, so identical inputs give identical bytes.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rlrepro/config.hpp"
#include "rlrepro/distributions.hpp"
#include "rlrepro/error.hpp"
#include "rlrepro/format.hpp"
#include "rlrepro/hash.hpp"
#include "rlrepro/inference.hpp"
#include "rlrepro/ingest.hpp"
#include "rlrepro/metrics.hpp"
#include "rlrepro/resample.hpp"
#include "rlrepro/rng.hpp"
#include "rlrepro/table.hpp"
#include "rlrepro/version.hpp"
#include "rlrepro/yaml_util.hpp"

namespace rlrepro {

struct InputDigest {
  std::string path;
  std::string sha256;
  bool operator==(const InputDigest&) const = default;
};

struct ConfigProvenance {
  std::string name;
  std::string config_hash;
  std::int64_t runs_analyzed = 0;
  std::vector<Exclusion> excluded_runs;
  std::optional<double> reported;
  bool operator==(const ConfigProvenance&) const = default;
};

struct Provenance {
  std::string tool = std::string(tool_name) + " " + std::string(tool_version);
  std::uint64_t seed = 0;
  std::int64_t resamples = static_cast<std::int64_t>(default_resamples);
  double confidence = default_confidence;
  double alpha = default_alpha;
  std::int64_t window = default_window;
  std::int64_t stride = default_stride;
  std::string ci_method = std::string(rlrepro::ci_method);
  std::string ks_mode = "exact";
  std::string empty_window_policy = std::string(rlrepro::empty_window_policy);
  std::string average_mode = "episodes";
  std::string rng = SeededRng::algorithm;
  std::string digest = std::string(digest_algorithm);
  std::vector<std::string> families;
  std::vector<ConfigProvenance> configs;
  std::vector<InputDigest> inputs;
  bool operator==(const Provenance&) const = default;
};

struct ConfigAnalysis {
  std::string name;
  std::string config_hash;
  std::optional<double> reported;
  std::vector<std::string> run_ids;
  std::vector<Exclusion> excluded;
  std::vector<double> run_averages;
  std::vector<LearningCurve> curves;
  std::optional<CurveBand> band;
  BootstrapDistribution boot;
  std::optional<NormalityResult> normality;
  std::vector<FittedDistribution> fits;
  std::vector<ReproducibilityVerdict> verdicts;  // one per fit when μ̂ is known
};

struct AnalysisReport {
  Provenance provenance;
  std::vector<ConfigAnalysis> configs;
};

inline constexpr int table_decimals = 2;
inline constexpr std::string_view placeholder = "-";

// ---- tables --------------------------------------------------------------

inline TextTable render_summary_table(const AnalysisReport& report) {
  if (report.configs.empty()) throw ValidationError("render_summary_table: report has no configurations");
  TextTable t;
  t.header = {"config", "runs", "mu_hat", "mu_bar", "ci_low", "ci_high"};
  for (const auto& c : report.configs)
    t.rows.push_back({c.name, std::to_string(c.run_averages.size()),
                      c.reported ? fmt::fixed(*c.reported, table_decimals) : std::string(placeholder),
                      fmt::fixed(c.boot.empirical_mean, table_decimals),
                      fmt::fixed(c.boot.ci_low, table_decimals), fmt::fixed(c.boot.ci_high, table_decimals)});
  return t;
}

/// The verdict matrix with families as rows and configurations as columns.
inline SignificanceSummary render_probability_table(const AnalysisReport& report) {
  std::vector<const ConfigAnalysis*> cols;
  for (const auto& c : report.configs)
    if (!c.verdicts.empty()) cols.push_back(&c);
  if (cols.empty()) throw ValidationError("render_probability_table: no verdicts to tabulate");
  const auto& ref = cols.front()->verdicts;
  std::vector<std::string> rows, labels;
  for (const auto& v : ref) rows.emplace_back(to_string(v.fit.dist.family));
  std::vector<std::vector<ReproducibilityVerdict>> matrix(ref.size());
  for (const auto* c : cols) {
    if (c->verdicts.size() != ref.size())
      throw ValidationError("render_probability_table: ragged verdict matrix");
    labels.push_back(c->name);
    for (std::size_t r = 0; r < ref.size(); ++r) {
      if (c->verdicts[r].fit.dist.family != ref[r].fit.dist.family)
        throw ValidationError("render_probability_table: configurations fit different families");
      matrix[r].push_back(c->verdicts[r]);
    }
  }
  return significance_summary(matrix, rows, labels);
}

// ---- CSV -----------------------------------------------------------------

inline std::string params_text(const Distribution& d) {
  std::string s;
  for (double p : d.params()) {
    if (!s.empty()) s += ' ';
    s += fmt::shortest(p);
  }
  return s;
}

inline std::string summary_csv(const AnalysisReport& r) {
  std::string out = "config,runs,mu_hat,mu_bar,ci_low,ci_high,confidence,resamples,seed\n";
  for (const auto& c : r.configs)
    out += TextTable::csv_field(c.name) + "," + std::to_string(c.run_averages.size()) + "," +
           (c.reported ? fmt::shortest(*c.reported) : std::string()) + "," +
           fmt::shortest(c.boot.empirical_mean) + "," + fmt::shortest(c.boot.ci_low) + "," +
           fmt::shortest(c.boot.ci_high) + "," + fmt::shortest(c.boot.confidence) + "," +
           std::to_string(c.boot.resample_count) + "," + std::to_string(c.boot.seed) + "\n";
  return out;
}

inline std::string probabilities_csv(const AnalysisReport& r) {
  std::string out = "config,family,mu_hat,p_v,p_d,combined,alpha,decision,decision_pv_only\n";
  for (const auto& c : r.configs)
    for (const auto& v : c.verdicts)
      out += TextTable::csv_field(c.name) + "," + std::string(to_string(v.fit.dist.family)) + "," +
             fmt::shortest(v.reported) + "," + fmt::shortest(v.p_v) + "," + fmt::shortest(v.p_d) + "," +
             fmt::shortest(v.combined) + "," + fmt::shortest(v.alpha) + "," +
             std::string(to_string(v.decision)) + "," + std::string(to_string(v.decision_pv_only)) + "\n";
  return out;
}

inline std::string fits_csv(const AnalysisReport& r) {
  std::string out =
      "config,family,params,log_likelihood,ks_statistic,ks_pvalue,ks_mode,converged,degenerate,n,mean\n";
  for (const auto& c : r.configs)
    for (const auto& f : c.fits)
      out += TextTable::csv_field(c.name) + "," + std::string(to_string(f.dist.family)) + "," +
             params_text(f.dist) + "," + fmt::shortest(f.log_likelihood) + "," +
             fmt::shortest(f.ks_statistic) + "," + fmt::shortest(f.ks_pvalue) + "," +
             std::string(special::to_string(f.ks_mode)) + "," + (f.converged ? "true" : "false") + "," +
             (f.degenerate ? "true" : "false") + "," + std::to_string(f.sample_size) + "," +
             fmt::shortest(mean(f.dist)) + "\n";
  return out;
}

inline std::string normality_csv(const AnalysisReport& r) {
  std::string out = "config,n,statistic,pvalue,z_skew,z_kurt,alpha,decision\n";
  for (const auto& c : r.configs)
    if (c.normality) {
      const auto& nr = *c.normality;
      out += TextTable::csv_field(c.name) + "," + std::to_string(nr.n) + "," + fmt::shortest(nr.statistic) +
             "," + fmt::shortest(nr.pvalue) + "," + fmt::shortest(nr.z_skew) + "," +
             fmt::shortest(nr.z_kurt) + "," + fmt::shortest(nr.alpha) + "," +
             std::string(to_string(nr.decision)) + "\n";
    }
  return out;
}

inline std::string bootstrap_means_csv(const BootstrapDistribution& b) {
  std::string out = "mean\n";
  for (double m : b.means) out += fmt::shortest(m) + "\n";
  return out;
}

/// Read a one-column numeric CSV (header line, then one value per line).
inline std::vector<double> read_value_column(std::string_view text, const std::string& source) {
  std::vector<double> out;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = fmt::trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    if (++line_no == 1 || line.empty()) continue;
    const auto v = fmt::parse_double(line);
    if (!v || !std::isfinite(*v))
      throw ValidationError(source + ":" + std::to_string(line_no) + ": expected a finite number");
    out.push_back(*v);
  }
  if (out.empty()) throw ValidationError(source + ": no values");
  return out;
}

// ---- provenance ----------------------------------------------------------

inline std::string write_provenance(const Provenance& p) {
  std::string o;
  auto kv = [&](std::string_view k, const std::string& v) { o += std::string(k) + ": " + v + "\n"; };
  kv("tool", yaml::quote(p.tool));
  kv("seed", std::to_string(p.seed));
  kv("resamples", std::to_string(p.resamples));
  kv("confidence", fmt::decimal(p.confidence));
  kv("alpha", fmt::decimal(p.alpha));
  kv("window", std::to_string(p.window));
  kv("stride", std::to_string(p.stride));
  kv("ci_method", yaml::quote(p.ci_method));
  kv("ks_mode", yaml::quote(p.ks_mode));
  kv("empty_window_policy", yaml::quote(p.empty_window_policy));
  kv("average_mode", yaml::quote(p.average_mode));
  kv("rng", yaml::quote(p.rng));
  kv("digest", yaml::quote(p.digest));
  std::string fam = "[";
  for (std::size_t i = 0; i < p.families.size(); ++i) fam += (i ? ", " : "") + yaml::quote(p.families[i]);
  kv("families", fam + "]");
  if (p.configs.empty()) {
    o += "configs: []\n";
  } else {
    o += "configs:\n";
    for (const auto& c : p.configs) {
      o += "  - name: " + yaml::quote(c.name) + "\n";
      o += "    config_hash: " + yaml::quote(c.config_hash) + "\n";
      o += "    runs_analyzed: " + std::to_string(c.runs_analyzed) + "\n";
      if (c.reported) o += "    reported: " + fmt::decimal(*c.reported) + "\n";
      if (c.excluded_runs.empty()) {
        o += "    excluded_runs: []\n";
      } else {
        o += "    excluded_runs:\n";
        for (const auto& e : c.excluded_runs)
          o += "      - {index: " + std::to_string(e.index) + ", reason: " + yaml::quote(e.reason) + "}\n";
      }
    }
  }
  if (p.inputs.empty()) {
    o += "inputs: []\n";
  } else {
    o += "inputs:\n";
    for (const auto& in : p.inputs)
      o += "  - {path: " + yaml::quote(in.path) + ", sha256: " + yaml::quote(in.sha256) + "}\n";
  }
  return o;
}

inline Provenance parse_provenance(std::string_view text) {
  const auto root = yaml::load(text);
  if (!root.IsMap()) throw SchemaError("<provenance>", "must be a mapping");
  Provenance p;
  auto str = [&](const char* k) { return yaml::as_string(yaml::require(root, k), k); };
  auto integer = [&](const char* k) { return yaml::as_int(yaml::require(root, k), k); };
  auto real = [&](const char* k) { return yaml::as_double(yaml::require(root, k), k); };
  p.tool = str("tool");
  const auto seed = integer("seed");
  if (seed < 0) throw SchemaError("seed", "must be non-negative");
  p.seed = static_cast<std::uint64_t>(seed);
  p.resamples = integer("resamples");
  p.confidence = real("confidence");
  p.alpha = real("alpha");
  p.window = integer("window");
  p.stride = integer("stride");
  p.ci_method = str("ci_method");
  p.ks_mode = str("ks_mode");
  p.empty_window_policy = str("empty_window_policy");
  p.average_mode = str("average_mode");
  p.rng = str("rng");
  p.digest = str("digest");
  for (const auto& f : yaml::require(root, "families")) p.families.push_back(yaml::as_string(f, "families"));
  for (const auto& c : yaml::require(root, "configs")) {
    ConfigProvenance cp;
    cp.name = yaml::as_string(yaml::require(c, "name"), "name");
    cp.config_hash = yaml::as_string(yaml::require(c, "config_hash"), "config_hash");
    cp.runs_analyzed = yaml::as_int(yaml::require(c, "runs_analyzed"), "runs_analyzed");
    if (c["reported"]) cp.reported = yaml::as_double(c["reported"], "reported");
    for (const auto& e : yaml::require(c, "excluded_runs"))
      cp.excluded_runs.push_back({yaml::as_int(yaml::require(e, "index"), "index"),
                                  yaml::as_string(yaml::require(e, "reason"), "reason")});
    p.configs.push_back(std::move(cp));
  }
  for (const auto& in : yaml::require(root, "inputs"))
    p.inputs.push_back({yaml::as_string(yaml::require(in, "path"), "path"),
                        yaml::as_string(yaml::require(in, "sha256"), "sha256")});
  return p;
}

// ---- fit records ---------------------------------------------------------

/// A stored fit, as written by `fit --out` and read by `verify`.
inline std::string write_fit_record(const FittedDistribution& f) {
  std::string o;
  o += "family: " + yaml::quote(to_string(f.dist.family)) + "\n";
  std::string ps = "[";
  const auto params = f.dist.params();
  for (std::size_t i = 0; i < params.size(); ++i) ps += (i ? ", " : "") + fmt::decimal(params[i]);
  o += "params: " + ps + "]\n";
  o += "log_likelihood: " + fmt::decimal(f.log_likelihood) + "\n";
  o += "ks_statistic: " + fmt::decimal(f.ks_statistic) + "\n";
  o += "ks_pvalue: " + fmt::decimal(f.ks_pvalue) + "\n";
  o += "ks_mode: " + yaml::quote(special::to_string(f.ks_mode)) + "\n";
  o += "sample_size: " + std::to_string(f.sample_size) + "\n";
  o += std::string("converged: ") + (f.converged ? "true" : "false") + "\n";
  return o;
}

inline FittedDistribution parse_fit_record(std::string_view text) {
  const auto root = yaml::load(text);
  if (!root.IsMap()) throw SchemaError("<fit record>", "must be a mapping");
  FittedDistribution f;
  const auto family = family_from_name(yaml::as_string(yaml::require(root, "family"), "family"));
  std::vector<double> params;
  const auto pn = yaml::require(root, "params");
  if (!pn.IsSequence()) throw SchemaError("params", "must be a list of numbers");
  for (const auto& p : pn) params.push_back(yaml::as_double(p, "params"));
  const auto want = static_cast<std::size_t>(info(family).shape_arity) + 2;
  if (params.size() != want)
    throw SchemaError("params", "needs " + std::to_string(want) + " values for " + std::string(to_string(family)));
  try {
    f.dist = make_distribution(family, params);
  } catch (const Error& e) {
    throw SchemaError("params", e.what());
  }
  f.ks_pvalue = yaml::as_double(yaml::require(root, "ks_pvalue"), "ks_pvalue");
  if (!(f.ks_pvalue >= 0.0 && f.ks_pvalue <= 1.0)) throw SchemaError("ks_pvalue", "must lie in [0, 1]");
  if (root["ks_statistic"]) f.ks_statistic = yaml::as_double(root["ks_statistic"], "ks_statistic");
  if (root["log_likelihood"]) f.log_likelihood = yaml::as_double(root["log_likelihood"], "log_likelihood");
  if (root["ks_mode"]) f.ks_mode = special::ks_mode_from_name(yaml::as_string(root["ks_mode"], "ks_mode"));
  if (root["sample_size"]) {
    const auto n = yaml::as_int(root["sample_size"], "sample_size");
    if (n < 0) throw SchemaError("sample_size", "must be non-negative");
    f.sample_size = static_cast<std::size_t>(n);
  }
  if (root["converged"]) f.converged = yaml::as_bool(root["converged"], "converged");
  return f;
}

// ---- bundle --------------------------------------------------------------

struct ManifestEntry {
  std::string path;  // relative, '/'-separated
  std::string sha256;
  bool operator==(const ManifestEntry&) const = default;
};

/// File-name-safe form of a configuration or run name.
inline std::string path_component(std::string_view s) {
  std::string out;
  for (char ch : s) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
                    ch == '-' || ch == '_' || ch == '.';
    out += ok ? ch : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

inline std::string manifest_text(const std::vector<ManifestEntry>& entries) {
  std::string out;
  for (const auto& e : entries) out += e.sha256 + "  " + e.path + "\n";
  return out;
}

/// Write the bundle under `directory`; returns the manifest entries in the
/// order listed in manifest.txt (sorted by path).
inline std::vector<ManifestEntry> emit_bundle(const AnalysisReport& report,
                                              const std::filesystem::path& directory) {
  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("summary.csv", summary_csv(report));
  files.emplace_back("summary.txt", render_summary_table(report).render());
  const bool any_verdicts = std::any_of(report.configs.begin(), report.configs.end(),
                                        [](const auto& c) { return !c.verdicts.empty(); });
  files.emplace_back("probabilities.csv", probabilities_csv(report));
  if (any_verdicts) files.emplace_back("probabilities.txt", render_probability_table(report).table.render());
  files.emplace_back("fits.csv", fits_csv(report));
  files.emplace_back("normality.csv", normality_csv(report));
  for (const auto& c : report.configs) {
    const auto dir = path_component(c.name);
    for (std::size_t i = 0; i < c.curves.size(); ++i)
      files.emplace_back("curves/" + dir + "/" + path_component(c.run_ids.at(i)) + ".csv", curve_csv(c.curves[i]));
    if (c.band) files.emplace_back("bands/" + dir + ".csv", band_csv(*c.band));
    files.emplace_back("bootstrap_means/" + dir + ".csv", bootstrap_means_csv(c.boot));
    for (const auto& f : c.fits)
      files.emplace_back("fits/" + dir + "/" + std::string(to_string(f.dist.family)) + ".yaml", write_fit_record(f));
  }
  files.emplace_back("provenance.yaml", write_provenance(report.provenance));
  std::sort(files.begin(), files.end());
  for (std::size_t i = 1; i < files.size(); ++i)
    if (files[i].first == files[i - 1].first)
      throw ValidationError("emit_bundle: two outputs map to '" + files[i].first + "'");

  std::vector<ManifestEntry> manifest;
  for (const auto& [rel, text] : files) {
    write_text_file(directory / rel, text);
    manifest.push_back({rel, sha256_hex(text)});
  }
  write_text_file(directory / "manifest.txt", manifest_text(manifest));
  return manifest;
}

}  // namespace rlrepro
