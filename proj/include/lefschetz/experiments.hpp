#pragma once
// Named experiment runner: flat key=value configurations, validated with
// field-path diagnostics, dispatched to the library modules, reported as
// versioned JSON ("schema": 1) plus optional CSV tables.  Reports are
// byte-reproducible for a fixed (config, seed) apart from the timing block.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace lefschetz::experiments {

inline constexpr int kSchemaVersion = 1;
inline const char* kToolVersion = "0.1.0";

// Resolved invocation: one experiment, raw string parameters (typed lazily so
// file values and command-line overrides share one code path), destinations.
struct ExperimentConfig {
  std::string experiment;
  std::map<std::string, std::string> params;
  std::optional<std::uint64_t> seed;
  std::string out_path;  // empty = stdout
  std::string csv_path;  // empty = no CSV
  int jobs = 1;
};

// Carries every problem found in one validation pass; each line starts with
// the offending field path, e.g. "bochner.cutoff: expected a positive integer".
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

struct ParamSpec {
  std::string key;
  std::string fallback;  // default value; ignored when `required`
  bool required = false;
  std::string help;
};

struct ExperimentSpec {
  std::string name;     // canonical dashed name ("mis-siu", "suite-smoke", ...)
  std::string summary;  // one-line help text
  std::vector<ParamSpec> params;
  bool sampling = false;  // true = a seed must be supplied
};

const std::vector<ExperimentSpec>& registry();
const ExperimentSpec* find_experiment(const std::string& name);

struct Check {
  std::string name;
  bool pass = false;
};

struct Report {
  std::string experiment;
  nlohmann::ordered_json inputs;   // resolved parameter echo
  nlohmann::ordered_json results;  // experiment-specific payload
  std::vector<Check> checks;
  double seconds = 0.0;
  std::vector<std::vector<std::string>> csv;  // optional; first row = header

  bool passed() const;
  // Top-level reports carry "versions" and "timing"; embedded ones do not.
  nlohmann::ordered_json to_json(bool top_level = true) const;
  std::string csv_text() const;
};

// Flat `key = value` lines, '#' comments, blank lines ignored.  Returns pairs
// in file order; malformed lines raise ValidationError with "<path>:<line>".
std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string& path);

// Merges file-sourced pairs into a partially filled config.  Values already
// present (set on the command line) win; the reserved keys experiment, seed,
// out, csv, jobs address the corresponding config fields.  A file experiment
// that contradicts an already chosen one is a validation error.
void apply_config_pairs(ExperimentConfig& cfg,
                        const std::vector<std::pair<std::string, std::string>>& pairs,
                        const std::map<std::string, std::string>& cli_params);

// Validates (defaults applied, types checked, unknown keys rejected, seed
// demanded for sampling experiments) and dispatches.  Module errors propagate
// unchanged; configuration problems raise ValidationError.
Report run(const ExperimentConfig& cfg);

}  // namespace lefschetz::experiments
