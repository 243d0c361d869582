#pragma once

// Run logs: one CSV per training run with a `step,return` header and one
// row per completed episode, plus an optional `<basename>.meta.yaml`
// sidecar carrying the run seed and configuration digest.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rlrepro/config.hpp"
#include "rlrepro/error.hpp"
#include "rlrepro/format.hpp"
#include "rlrepro/rng.hpp"
#include "rlrepro/yaml_util.hpp"

namespace rlrepro {

struct Episode {
  std::int64_t end_step = 0;
  double episode_return = 0.0;
  bool operator==(const Episode&) const = default;
};

struct RunLog {
  std::string run_id;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> config_hash;
  std::vector<Episode> episodes;

  bool operator==(const RunLog&) const = default;
};

inline constexpr std::string_view run_log_header = "step,return";

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

/// Parse run-log CSV text. Errors carry 1-based line numbers.
inline RunLog read_run_log(std::string_view text, std::string run_id) {
  RunLog log;
  log.run_id = std::move(run_id);
  const auto where = [&](std::size_t line) {
    return log.run_id + ":" + std::to_string(line) + ": ";
  };

  std::size_t pos = 0, line_no = 0;
  bool saw_header = false;
  std::vector<std::pair<std::size_t, std::string_view>> blank_run;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (!saw_header) {
      if (fmt::trim(line) != run_log_header)
        throw ValidationError(where(line_no) + "expected header '" + std::string(run_log_header) + "'");
      saw_header = true;
      continue;
    }
    if (fmt::trim(line).empty()) {
      blank_run.emplace_back(line_no, line);
      continue;
    }
    if (!blank_run.empty())
      throw ValidationError(where(blank_run.front().first) + "blank line inside data");

    const auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos)
      throw ValidationError(where(line_no) + "expected 2 fields");
    const auto step = fmt::parse_int(line.substr(0, comma));
    if (!step || *step < 0)
      throw ValidationError(where(line_no) + "step must be a non-negative integer");
    const auto ret = fmt::parse_double(line.substr(comma + 1));
    if (!ret || !std::isfinite(*ret))
      throw ValidationError(where(line_no) + "return must be a finite number");
    if (!log.episodes.empty() && *step <= log.episodes.back().end_step)
      throw ValidationError(where(line_no) + "steps must be strictly increasing (" +
                            std::to_string(*step) + " after " +
                            std::to_string(log.episodes.back().end_step) + ")");
    log.episodes.push_back({*step, *ret});
  }
  if (!saw_header) throw ValidationError(log.run_id + ": empty run log");
  if (log.episodes.empty()) throw ValidationError(log.run_id + ": run log has no episodes");
  return log;
}

/// Serialize with round-trip number formatting, so reading the result back
/// gives the same values bit for bit.
inline std::string write_run_log(const RunLog& log) {
  std::string out(run_log_header);
  out += '\n';
  for (const auto& e : log.episodes) {
    out += fmt::integer(e.end_step);
    out += ',';
    out += fmt::shortest(e.episode_return);
    out += '\n';
  }
  return out;
}

// ---- sidecar metadata ----------------------------------------------------

struct RunMeta {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> config_hash;
  std::optional<double> step_rate_hz;
  std::optional<double> episode_seconds;
  std::optional<std::int64_t> episode_steps;
  bool operator==(const RunMeta&) const = default;
};

inline std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".meta.yaml");
  return p;
}

inline RunMeta parse_run_meta(std::string_view text) {
  const auto root = yaml::load(text);
  RunMeta m;
  if (!root || root.IsNull()) return m;
  if (!root.IsMap()) throw SchemaError("<metadata>", "must be a mapping");
  for (const auto& kv : root) {
    const auto k = yaml::scalar_text(kv.first, "<key>");
    if (k == "seed") {
      const auto s = yaml::scalar_text(kv.second, k);
      std::uint64_t v = 0;
      const auto t = fmt::trim(s);
      auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
        throw SchemaError(k, "must be a non-negative integer");
      m.seed = v;
    } else if (k == "config_hash") {
      m.config_hash = yaml::as_string(kv.second, k);
    } else if (k == "step_rate_hz") {
      m.step_rate_hz = yaml::as_double(kv.second, k);
    } else if (k == "episode_seconds") {
      m.episode_seconds = yaml::as_double(kv.second, k);
    } else if (k == "episode_steps") {
      m.episode_steps = yaml::as_int(kv.second, k);
    } else {
      throw SchemaError(k, "is not a recognized metadata key");
    }
  }
  return m;
}

inline std::string write_run_meta(const RunMeta& m) {
  std::string out;
  if (m.seed) out += "seed: " + std::to_string(*m.seed) + "\n";
  if (m.config_hash) out += "config_hash: " + yaml::quote(*m.config_hash) + "\n";
  if (m.step_rate_hz) out += "step_rate_hz: " + fmt::decimal(*m.step_rate_hz) + "\n";
  if (m.episode_seconds) out += "episode_seconds: " + fmt::decimal(*m.episode_seconds) + "\n";
  if (m.episode_steps) out += "episode_steps: " + fmt::integer(*m.episode_steps) + "\n";
  return out;
}

/// Read `path` and, when present, its sidecar. The run id is the file stem.
inline RunLog load_run_log(const std::filesystem::path& path) {
  auto log = read_run_log(read_text_file(path), path.stem().string());
  const auto meta_path = sidecar_path(path);
  if (std::filesystem::exists(meta_path)) {
    const auto meta = parse_run_meta(read_text_file(meta_path));
    log.seed = meta.seed;
    log.config_hash = meta.config_hash;
  }
  return log;
}

// ---- trial sets ----------------------------------------------------------

struct TrialSet {
  ExperimentConfig config;
  std::vector<RunLog> runs;
  std::vector<Exclusion> excluded;  // the entries that were removed
  bool exclusions_applied = false;
};

inline TrialSet apply_exclusions(std::vector<RunLog> runs, const ExperimentConfig& config) {
  if (static_cast<std::int64_t>(runs.size()) != config.run_count)
    throw ValidationError("apply_exclusions: config '" + config.name + "' declares " +
                          std::to_string(config.run_count) + " runs, got " + std::to_string(runs.size()));
  std::vector<bool> drop(runs.size(), false);
  for (const auto& ex : config.excluded_runs) {
    if (ex.index < 0 || ex.index >= config.run_count)
      throw ValidationError("apply_exclusions: excluded index " + std::to_string(ex.index) +
                            " out of range for " + std::to_string(config.run_count) + " runs");
    drop[static_cast<std::size_t>(ex.index)] = true;
  }
  TrialSet t;
  t.config = config;
  t.excluded = config.excluded_runs;
  std::sort(t.excluded.begin(), t.excluded.end(),
            [](const auto& a, const auto& b) { return a.index < b.index; });
  for (std::size_t i = 0; i < runs.size(); ++i)
    if (!drop[i]) t.runs.push_back(std::move(runs[i]));
  t.exclusions_applied = true;
  return t;
}

// ---- synthetic runs ------------------------------------------------------

/// Generator settings. Episode length is given either directly in steps or
/// as seconds at a control rate (steps = round(seconds · rate)). The
/// expected return of an episode ending at step t is
///   plateau + (start − plateau) · exp(−t / rise_steps),
/// with per-run offset ~ N(0, run_spread²) and per-episode noise ~ N(0, noise²).
/// rise_steps = 0 means the plateau is reached immediately.
struct SynthSpec {
  std::int64_t run_count = 10;
  std::int64_t total_steps = 150000;
  std::optional<std::int64_t> episode_steps;
  std::optional<double> episode_seconds;
  std::optional<double> step_rate_hz;
  double start = 0.0;
  double plateau = 100.0;
  double rise_steps = 0.0;
  double noise = 0.0;
  double run_spread = 0.0;
  std::optional<std::string> config_hash;

  std::int64_t resolved_episode_steps() const {
    if (episode_steps) return *episode_steps;
    if (episode_seconds && step_rate_hz)
      return static_cast<std::int64_t>(std::llround(*episode_seconds * *step_rate_hz));
    throw SchemaError("episode_steps", "or episode_seconds with step_rate_hz is required");
  }

  void validate() const {
    if (run_count < 1) throw SchemaError("run_count", "must be positive");
    if (total_steps < 1) throw SchemaError("total_steps", "must be positive");
    if (episode_steps && *episode_steps < 1) throw SchemaError("episode_steps", "must be positive");
    if (episode_seconds && !(*episode_seconds > 0.0)) throw SchemaError("episode_seconds", "must be positive");
    if (step_rate_hz && !(*step_rate_hz > 0.0)) throw SchemaError("step_rate_hz", "must be positive");
    if (resolved_episode_steps() < 1) throw SchemaError("episode_steps", "must resolve to at least 1 step");
    if (resolved_episode_steps() > total_steps)
      throw SchemaError("episode_steps", "exceeds total_steps");
    if (!(rise_steps >= 0.0)) throw SchemaError("rise_steps", "must be non-negative");
    if (!(noise >= 0.0)) throw SchemaError("noise", "must be non-negative");
    if (!(run_spread >= 0.0)) throw SchemaError("run_spread", "must be non-negative");
    for (double v : {start, plateau})
      if (!std::isfinite(v)) throw SchemaError("start/plateau", "must be finite");
  }

  std::int64_t episodes_per_run() const { return total_steps / resolved_episode_steps(); }

  RunMeta meta(std::uint64_t seed) const {
    RunMeta m;
    m.seed = seed;
    m.config_hash = config_hash;
    m.step_rate_hz = step_rate_hz;
    m.episode_seconds = episode_seconds;
    m.episode_steps = resolved_episode_steps();
    return m;
  }
};

inline SynthSpec parse_synth_spec(std::string_view text) {
  const auto root = yaml::load(text);
  if (!root.IsMap()) throw SchemaError("<document>", "must be a mapping");
  SynthSpec s;
  for (const auto& kv : root) {
    const auto k = yaml::scalar_text(kv.first, "<key>");
    const auto& v = kv.second;
    if (k == "run_count") s.run_count = yaml::as_int(v, k);
    else if (k == "total_steps") s.total_steps = yaml::as_int(v, k);
    else if (k == "episode_steps") s.episode_steps = yaml::as_int(v, k);
    else if (k == "episode_seconds") s.episode_seconds = yaml::as_double(v, k);
    else if (k == "step_rate_hz") s.step_rate_hz = yaml::as_double(v, k);
    else if (k == "start") s.start = yaml::as_double(v, k);
    else if (k == "plateau") s.plateau = yaml::as_double(v, k);
    else if (k == "rise_steps") s.rise_steps = yaml::as_double(v, k);
    else if (k == "noise") s.noise = yaml::as_double(v, k);
    else if (k == "run_spread") s.run_spread = yaml::as_double(v, k);
    else if (k == "config_hash") s.config_hash = yaml::as_string(v, k);
    else throw SchemaError(k, "is not a recognized generator setting");
  }
  s.validate();
  return s;
}

inline std::string synth_run_id(std::int64_t r) {
  std::string digits = std::to_string(r);
  if (digits.size() < 2) digits.insert(0, 2 - digits.size(), '0');
  return "run_" + digits;
}

/// Run r draws from SeededRng::stream(seed, r); the output is a pure
/// function of (spec, seed).
inline std::vector<RunLog> synthesize_runs(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  const auto ep = spec.resolved_episode_steps();
  const auto count = spec.episodes_per_run();
  std::vector<RunLog> runs;
  runs.reserve(static_cast<std::size_t>(spec.run_count));
  for (std::int64_t r = 0; r < spec.run_count; ++r) {
    auto rng = SeededRng::stream(seed, static_cast<std::uint64_t>(r));
    RunLog log;
    log.run_id = synth_run_id(r);
    log.seed = rng.seed();
    log.config_hash = spec.config_hash;
    const double offset = spec.run_spread > 0.0 ? spec.run_spread * rng.normal() : 0.0;
    log.episodes.reserve(static_cast<std::size_t>(count));
    for (std::int64_t k = 1; k <= count; ++k) {
      const std::int64_t t = k * ep;
      double expected = spec.plateau + offset;
      if (spec.rise_steps > 0.0 && spec.start != spec.plateau)
        expected += (spec.start - spec.plateau) * std::exp(-static_cast<double>(t) / spec.rise_steps);
      const double noise = spec.noise > 0.0 ? spec.noise * rng.normal() : 0.0;
      log.episodes.push_back({t, expected + noise});
    }
    runs.push_back(std::move(log));
  }
  return runs;
}

}  // namespace rlrepro
