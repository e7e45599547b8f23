#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace flatstep::harness {

using ParamValue = std::variant<double, std::vector<double>, std::string>;

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  std::map<std::string, ParamValue> params;
  std::string out_path = "flatstep_out";
};

enum class ParamKind { number, list, text };

struct ParamSpec {
  ParamKind kind = ParamKind::number;
  bool required = false;
  ParamValue default_value = 0.0;
  std::string help;
};

struct ExperimentInfo {
  std::string name;
  std::string csv_schema;  // "<name>/v1"
  std::map<std::string, ParamSpec> schema;
  std::string help;
  std::vector<std::string> csv_columns;
};

/// Registered experiments in a stable order.
const std::vector<ExperimentInfo>& experiments();

/// Parse a config from JSON text (file contents). Unknown keys are errors.
/// Layout: {"experiment": str, "seed": int, "out": str, "params": {..}}.
ExperimentConfig parse_config_json(const std::string& json_text);

/// Apply one "key=value" override (seed/out/params.* per the schema).
void apply_override(ExperimentConfig& cfg, const std::string& key_eq_value);

/// Fill defaults and validate against the experiment schema; throws Error
/// (InvalidInput) naming the offending parameter.
void validate(ExperimentConfig& cfg);

/// JSON round-trip of the validated inputs (the summary's inputs echo).
std::string config_to_json(const ExperimentConfig& cfg);

double param_number(const ExperimentConfig& cfg, const std::string& key);
std::vector<double> param_list(const ExperimentConfig& cfg, const std::string& key);
std::string param_text(const ExperimentConfig& cfg, const std::string& key);

/// Run a validated config: writes <out>.csv and <out>.json.
/// Returns 0 on success, 2 on validation errors, 3 on numerical errors.
int run(const ExperimentConfig& cfg);

/// Thread cap from FLATSTEP_THREADS (>= 1; default 1).
int thread_cap();

/// Format a double with 17 significant digits (round-trip safe).
std::string fmt17(double v);

}  // namespace flatstep::harness
