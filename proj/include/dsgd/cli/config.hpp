#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dsgd/cli/synthetic.hpp"
#include "dsgd/fed/experiment.hpp"
#include "dsgd/models/model.hpp"

namespace dsgd::cli {

// Where the training data comes from.
//   synthetic        Gaussian clusters (SyntheticSpec), split by `partition`
//   idx              MNIST-layout IDX files, split by `partition`
//   csv              gen-data output (feature columns then label), split by `partition`
//   shared-minimizer softmax problem whose clients share a known minimizer;
//                    enables the Lyapunov columns of the analysis CSV
struct DatasetSpec {
  std::string source = "synthetic";
  SyntheticSpec synthetic;
  std::string train_images, train_labels, test_images, test_labels;
  std::string train_csv, test_csv;
  std::size_t shared_points = 4;
  double shared_client_spread = 0.5;

  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

struct PartitionSpec {
  double alpha = 0.1;
  std::string scheme = "equal";  // equal | unequal
  std::size_t n_min = 100;
  std::size_t n_max = 500;

  friend bool operator==(const PartitionSpec&, const PartitionSpec&) = default;
};

struct ModelSpec {
  ModelKind kind = ModelKind::softmax_regression;
  std::size_t hidden = 32;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct AnalysisSpec {
  bool step_trace = false;
  bool constants = false;
  std::size_t constants_stride = 10;
  std::size_t probe_batch = 1;
  std::size_t probe_draws = 8;
  bool lyapunov = false;

  friend bool operator==(const AnalysisSpec&, const AnalysisSpec&) = default;
};

struct ExperimentConfig {
  std::string name = "run";
  std::string task = "default";
  FLConfig fl;
  DatasetSpec dataset;
  PartitionSpec partition;
  ModelSpec model;
  AnalysisSpec analysis;
  std::string output_dir = "out";

  // Cross-field checks on top of the per-field ones done while parsing.
  void validate() const;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Strict parse: unknown keys and wrong types raise ConfigError.
[[nodiscard]] ExperimentConfig config_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json config_to_json(const ExperimentConfig& c);

[[nodiscard]] SyntheticSpec synthetic_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json synthetic_to_json(const SyntheticSpec& s);

// Reads a JSON document; IoError if unreadable, ConfigError if malformed.
[[nodiscard]] nlohmann::json read_json_file(const std::filesystem::path& path);

// Sets a dotted path ("optimizer.lr") inside a JSON object, creating
// intermediate objects. `raw` is parsed as JSON when possible and kept as a
// string otherwise.
void set_json_path(nlohmann::json& doc, std::string_view dotted_path, std::string_view raw);
void set_json_value(nlohmann::json& doc, std::string_view dotted_path, nlohmann::json value);

inline constexpr std::string_view kEnvPrefix = "DSGD_";

// Overrides from environment entries "DSGD_<PATH>=<value>": the remainder is
// lowercased and "__" separates path components, so DSGD_OPTIMIZER__LR=0.05
// sets optimizer.lr.
[[nodiscard]] std::vector<std::pair<std::string, std::string>> env_overrides(
    const std::map<std::string, std::string>& env);
[[nodiscard]] std::map<std::string, std::string> current_environment();

// File, then environment, then command-line "path=value" overrides.
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path,
                                           const std::map<std::string, std::string>& env,
                                           const std::vector<std::string>& cli_overrides);

}  // namespace dsgd::cli
