#pragma once

// Experiment configuration files.
//
// A configuration documents every parameter of one experiment: which
// algorithm/environment/logger implementations were used (opaque module
// paths), the tuned and fixed hyperparameters, the seeds, the number of
// runs and any runs excluded from analysis together with the reason.
//
// File format (YAML, schema_version 1):
//
//   schema_version: 1
//   name: "trpo-c1"
//   algorithm: "baselines.trpo_mpi"
//   environment: "senseact.envs.ur.reacher_env"
//   logger: "..."
//   tuned_params:    {hidden_layers: 2, ..., delta_kl: 0.02437}
//   fixed_params:    {max_timesteps: 150000, ...}
//   run_count: 10
//   seeds: [...]                                       # optional
//   excluded_runs: [{index: 8, reason: "..."}]         # optional
//   environment_notes: "..."                           # optional
//
// Unknown top-level keys are kept verbatim (as flow YAML) and reported by
// config_warnings(). The canonical form written by canonicalize() is the
// input to config_hash().

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "rlrepro/error.hpp"
#include "rlrepro/format.hpp"
#include "rlrepro/hash.hpp"
#include "rlrepro/table.hpp"
#include "rlrepro/yaml_util.hpp"

namespace rlrepro {

inline constexpr std::int64_t config_schema_version = 1;

/// An integer or decimal parameter value. Integers and decimals never
/// compare equal, so `2` and `2.0` are different documented values.
struct Scalar {
  std::variant<std::int64_t, double> value;

  Scalar() : value(std::int64_t{0}) {}
  Scalar(std::int64_t v) : value(v) {}
  Scalar(int v) : value(std::int64_t{v}) {}
  Scalar(double v) : value(v) {}

  bool is_integer() const { return std::holds_alternative<std::int64_t>(value); }
  std::int64_t as_integer() const { return std::get<std::int64_t>(value); }
  double as_double() const {
    return is_integer() ? static_cast<double>(std::get<std::int64_t>(value))
                        : std::get<double>(value);
  }

  /// Canonical text: integers in decimal, decimals in shortest round-trip
  /// form that always reads back as a decimal.
  std::string text() const {
    return is_integer() ? fmt::integer(as_integer()) : fmt::decimal(std::get<double>(value));
  }

  bool operator==(const Scalar&) const = default;
};

using ParamMap = std::vector<std::pair<std::string, Scalar>>;

struct Exclusion {
  std::int64_t index = 0;
  std::string reason;
  bool operator==(const Exclusion&) const = default;
};

struct ExperimentConfig {
  std::string name;
  std::string algorithm;
  std::string environment;
  std::string logger;
  ParamMap tuned_params;  // kept in canonical parameter order
  ParamMap fixed_params;
  std::int64_t run_count = 1;
  std::vector<std::int64_t> seeds;
  std::vector<Exclusion> excluded_runs;
  std::optional<std::string> environment_notes;
  // Unknown top-level keys → flow-YAML text of their value, sorted by key.
  std::vector<std::pair<std::string, std::string>> extra;

  const Scalar* tuned(std::string_view key) const { return find(tuned_params, key); }
  const Scalar* fixed(std::string_view key) const { return find(fixed_params, key); }

  bool operator==(const ExperimentConfig&) const = default;

 private:
  static const Scalar* find(const ParamMap& m, std::string_view key) {
    for (const auto& [k, v] : m)
      if (k == key) return &v;
    return nullptr;
  }
};

/// Canonical parameter order: the hyperparameter-table columns, then the
/// fixed-value rows, then any other key alphabetically.
inline constexpr std::array<std::string_view, 16> canonical_param_order = {
    "hidden_layers", "hidden_size",   "batch_size",    "step_size",
    "gamma",         "lambda",        "delta_kl",      "optim_batch_size",
    "max_timesteps", "entropy_coef",  "cg_iterations", "cg_damping",
    "vf_iterations", "clip_parameter", "optim_epochs", "adam_epsilon"};

namespace detail {

inline std::size_t param_rank(std::string_view key) {
  const auto it = std::find(canonical_param_order.begin(), canonical_param_order.end(), key);
  return static_cast<std::size_t>(it - canonical_param_order.begin());
}

inline bool param_less(std::string_view a, std::string_view b) {
  const auto ra = param_rank(a), rb = param_rank(b);
  if (ra != rb) return ra < rb;
  return a < b;
}

inline void sort_params(ParamMap& m) {
  std::sort(m.begin(), m.end(),
            [](const auto& x, const auto& y) { return param_less(x.first, y.first); });
}

inline constexpr std::array<std::string_view, 8> positive_integer_params = {
    "hidden_layers", "hidden_size",   "batch_size",    "optim_batch_size",
    "max_timesteps", "cg_iterations", "vf_iterations", "optim_epochs"};

inline void validate_params(const ParamMap& m, const std::string& section) {
  for (const auto& [k, v] : m) {
    if (!v.is_integer() && !std::isfinite(v.as_double()))
      throw SchemaError(k, "must be finite (" + section + ")");
    if (k == "gamma" || k == "lambda") {
      const double x = v.as_double();
      if (!(x >= 0.0 && x <= 1.0)) throw SchemaError(k, "must lie in [0, 1] (" + section + ")");
    }
    if (k == "delta_kl" && !(v.as_double() > 0.0))
      throw SchemaError(k, "must be positive (" + section + ")");
    if (std::find(positive_integer_params.begin(), positive_integer_params.end(), k) !=
        positive_integer_params.end()) {
      if (!v.is_integer() || v.as_integer() <= 0)
        throw SchemaError(k, "must be a positive integer (" + section + ")");
    }
  }
}

inline Scalar parse_scalar(const YAML::Node& node, const std::string& key) {
  const std::string text = yaml::scalar_text(node, key);
  if (auto i = fmt::parse_int(text)) return Scalar(*i);
  if (auto d = fmt::parse_double(text)) return Scalar(*d);
  throw SchemaError(key, "must be an integer or decimal number");
}

inline ParamMap parse_params(const YAML::Node& node, const std::string& section) {
  if (node.IsNull()) return {};
  if (!node.IsMap()) throw SchemaError(section, "must be a mapping of parameter names to numbers");
  ParamMap out;
  for (const auto& kv : node) {
    const std::string k = yaml::scalar_text(kv.first, section);
    out.emplace_back(k, parse_scalar(kv.second, k));
  }
  sort_params(out);
  return out;
}

inline std::string flow_text(const YAML::Node& node) {
  YAML::Emitter e;
  e << YAML::Flow << node;
  return e.c_str();
}

inline constexpr std::array<std::string_view, 11> known_top_level_keys = {
    "schema_version", "name",      "algorithm", "environment",   "logger",           "tuned_params",
    "fixed_params",   "run_count", "seeds",     "excluded_runs", "environment_notes"};

}  // namespace detail

/// Check every ExperimentConfig invariant; throws SchemaError naming the
/// offending field.
inline void validate(const ExperimentConfig& c) {
  if (c.run_count < 1) throw SchemaError("run_count", "must be >= 1");
  if (!c.seeds.empty() && static_cast<std::int64_t>(c.seeds.size()) != c.run_count)
    throw SchemaError("seeds", "must list exactly run_count (" + std::to_string(c.run_count) +
                                   ") seeds, got " + std::to_string(c.seeds.size()));
  std::set<std::int64_t> seen;
  for (const auto& ex : c.excluded_runs) {
    if (ex.index < 0 || ex.index >= c.run_count)
      throw SchemaError("excluded_runs", "index " + std::to_string(ex.index) +
                                             " outside [0, " + std::to_string(c.run_count) + ")");
    if (!seen.insert(ex.index).second)
      throw SchemaError("excluded_runs", "index " + std::to_string(ex.index) + " listed twice");
    if (fmt::trim(ex.reason).empty())
      throw SchemaError("excluded_runs", "entry " + std::to_string(ex.index) +
                                             " needs a non-empty reason");
  }
  detail::validate_params(c.tuned_params, "tuned_params");
  detail::validate_params(c.fixed_params, "fixed_params");
}

/// Parse and validate a configuration document.
inline ExperimentConfig parse_config(std::string_view text) {
  const YAML::Node root = yaml::load(text);
  if (!root.IsMap()) throw SchemaError("<document>", "must be a mapping");

  const auto version = yaml::as_int(yaml::require(root, "schema_version"), "schema_version");
  if (version != config_schema_version)
    throw SchemaError("schema_version", "unsupported version " + std::to_string(version) +
                                            " (expected " + std::to_string(config_schema_version) + ")");

  ExperimentConfig c;
  c.name = yaml::as_string(yaml::require(root, "name"), "name");
  c.algorithm = yaml::as_string(yaml::require(root, "algorithm"), "algorithm");
  c.environment = yaml::as_string(yaml::require(root, "environment"), "environment");
  c.logger = yaml::as_string(yaml::require(root, "logger"), "logger");
  c.tuned_params = detail::parse_params(yaml::require(root, "tuned_params"), "tuned_params");
  c.fixed_params = detail::parse_params(yaml::require(root, "fixed_params"), "fixed_params");
  c.run_count = yaml::as_int(yaml::require(root, "run_count"), "run_count");

  if (const auto seeds = root["seeds"]; seeds && !seeds.IsNull()) {
    if (!seeds.IsSequence()) throw SchemaError("seeds", "must be a list of integers");
    for (const auto& s : seeds) c.seeds.push_back(yaml::as_int(s, "seeds"));
  }
  if (const auto ex = root["excluded_runs"]; ex && !ex.IsNull()) {
    if (!ex.IsSequence()) throw SchemaError("excluded_runs", "must be a list");
    for (const auto& item : ex) {
      if (!item.IsMap()) throw SchemaError("excluded_runs", "entries must be {index, reason} mappings");
      Exclusion e;
      e.index = yaml::as_int(yaml::require(item, "index"), "excluded_runs.index");
      if (!item["reason"]) throw SchemaError("excluded_runs", "entry needs a 'reason'");
      e.reason = yaml::as_string(item["reason"], "excluded_runs.reason");
      for (const auto& kv : item) {
        const auto k = kv.first.Scalar();
        if (k != "index" && k != "reason")
          throw SchemaError("excluded_runs", "unexpected key '" + k + "'");
      }
      c.excluded_runs.push_back(std::move(e));
    }
  }
  if (const auto notes = root["environment_notes"]; notes && !notes.IsNull())
    c.environment_notes = yaml::as_string(notes, "environment_notes");

  for (const auto& kv : root) {
    const std::string k = yaml::scalar_text(kv.first, "<key>");
    if (std::find(detail::known_top_level_keys.begin(), detail::known_top_level_keys.end(), k) ==
        detail::known_top_level_keys.end())
      c.extra.emplace_back(k, detail::flow_text(kv.second));
  }
  std::sort(c.extra.begin(), c.extra.end());

  validate(c);
  return c;
}

/// One warning per preserved unknown key.
inline std::vector<std::string> config_warnings(const ExperimentConfig& c) {
  std::vector<std::string> out;
  for (const auto& [k, v] : c.extra)
    out.push_back("unknown key '" + k + "' preserved but not interpreted");
  return out;
}

/// Deterministic text form: fixed key order, two-space indentation,
/// shortest round-trip numbers, double-quoted strings, LF line endings.
inline std::string canonicalize(const ExperimentConfig& c) {
  std::string out;
  auto line = [&](std::string_view s) {
    out += s;
    out += '\n';
  };
  auto params = [&](std::string_view section, const ParamMap& m) {
    if (m.empty()) {
      line(std::string(section) + ": {}");
      return;
    }
    ParamMap sorted = m;
    detail::sort_params(sorted);
    line(std::string(section) + ":");
    for (const auto& [k, v] : sorted) line("  " + yaml::key(k) + ": " + v.text());
  };

  line("schema_version: " + std::to_string(config_schema_version));
  line("name: " + yaml::quote(c.name));
  line("algorithm: " + yaml::quote(c.algorithm));
  line("environment: " + yaml::quote(c.environment));
  line("logger: " + yaml::quote(c.logger));
  params("tuned_params", c.tuned_params);
  params("fixed_params", c.fixed_params);
  line("run_count: " + std::to_string(c.run_count));

  std::string seeds = "seeds: [";
  for (std::size_t i = 0; i < c.seeds.size(); ++i)
    seeds += (i ? ", " : "") + std::to_string(c.seeds[i]);
  line(seeds + "]");

  if (c.excluded_runs.empty()) {
    line("excluded_runs: []");
  } else {
    auto ex = c.excluded_runs;
    std::sort(ex.begin(), ex.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
    line("excluded_runs:");
    for (const auto& e : ex) {
      line("  - index: " + std::to_string(e.index));
      line("    reason: " + yaml::quote(e.reason));
    }
  }
  if (c.environment_notes) line("environment_notes: " + yaml::quote(*c.environment_notes));
  for (const auto& [k, v] : c.extra) line(yaml::key(k) + ": " + v);
  return out;
}

/// SHA-256 of the canonical text, lowercase hex.
inline std::string config_hash(const ExperimentConfig& c) { return sha256_hex(canonicalize(c)); }

/// Hyperparameter table: one row per configuration, one column per tuned
/// parameter (union over all configurations, canonical order). Decimal
/// columns are padded to a common number of fraction digits; absent values
/// render as `missing_cell`.
inline constexpr std::string_view missing_cell = "-";

inline TextTable hyperparameter_report(const std::vector<ExperimentConfig>& configs) {
  if (configs.empty()) throw ValidationError("hyperparameter_report: no configurations");
  for (const auto& c : configs)
    if (c.algorithm != configs.front().algorithm)
      throw ValidationError("hyperparameter_report: configurations mix algorithms ('" +
                            configs.front().algorithm + "' and '" + c.algorithm + "')");

  std::vector<std::string> keys;
  for (const auto& c : configs)
    for (const auto& [k, v] : c.tuned_params)
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  std::sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) { return detail::param_less(a, b); });

  TextTable t;
  t.header.push_back("config");
  t.header.insert(t.header.end(), keys.begin(), keys.end());
  for (const auto& c : configs) t.rows.push_back({c.name});

  for (const auto& k : keys) {
    std::size_t digits = 0;
    for (const auto& c : configs)
      if (const auto* v = c.tuned(k); v && !v->is_integer()) {
        const auto s = fmt::shortest_fixed(v->as_double());
        const auto dot = s.find('.');
        if (dot != std::string::npos) digits = std::max(digits, s.size() - dot - 1);
      }
    for (std::size_t r = 0; r < configs.size(); ++r) {
      const auto* v = configs[r].tuned(k);
      if (!v)
        t.rows[r].emplace_back(missing_cell);
      else if (v->is_integer())
        t.rows[r].push_back(v->text());
      else
        t.rows[r].push_back(fmt::fixed(v->as_double(), static_cast<int>(digits)));
    }
  }
  return t;
}

}  // namespace rlrepro
