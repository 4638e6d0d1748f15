#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dsgd/cli/config.hpp"

namespace dsgd::cli {

struct SweepAxis {
  std::string path;  // dotted config path, e.g. "optimizer.lr"
  std::vector<nlohmann::json> values;
};

// A task to replay the winning configuration on, given as config overrides.
struct ReplayTask {
  std::string task;
  std::vector<std::pair<std::string, nlohmann::json>> overrides;
};

// Sweep document:
//   {
//     "base": { ...config... } or "path/to/config.json",
//     "axes": [ {"path": "optimizer.lr", "values": [0.01, 0.05, 0.1, 0.5]} ],
//     "seeds": [0, 1],
//     "output_dir": "sweep-out",
//     "parallel": 4,
//     "replay": [ {"task": "B", "set": {"dataset.synthetic.feature_scale": 10}} ]
//   }
struct SweepSpec {
  nlohmann::json base = nlohmann::json::object();
  std::vector<SweepAxis> axes;
  std::vector<std::uint64_t> seeds{0};
  std::string output_dir = "sweep";
  std::size_t parallel = 1;
  std::vector<ReplayTask> replay;
};

// Relative "base" paths resolve against `spec_dir`. Strict like configs.
[[nodiscard]] SweepSpec sweep_from_json(const nlohmann::json& j, const std::filesystem::path& spec_dir);

// Cartesian product in declaration order: the first axis varies slowest.
[[nodiscard]] std::vector<std::vector<nlohmann::json>> expand_axes(const std::vector<SweepAxis>& axes);

struct ComboScore {
  std::size_t combo = 0;
  std::vector<nlohmann::json> values;
  double mean_test_acc = 0.0;  // over completed runs; NaN if none completed
  double min_test_acc = 0.0;
  double max_test_acc = 0.0;
  std::size_t runs = 0;
  std::size_t diverged = 0;
  std::size_t failed = 0;      // config or I/O errors at run time
};

struct ReplayScore {
  std::string task;
  ComboScore score;
};

struct SweepResult {
  std::vector<ComboScore> leaderboard;  // ranked, best first
  ExperimentConfig best;
  std::vector<ReplayScore> replays;
};

// Combos where every run completed rank above the rest; then by mean final
// test accuracy, descending; ties keep declaration order.
void rank_scores(std::vector<ComboScore>& scores);

// Builds and validates every child config before any run starts (throws
// ConfigError on the first invalid one), runs all combos x seeds, then
// replays the winner on each replay task. Writes leaderboard.csv,
// best_config.json and, with replay tasks, replay.csv into output_dir.
[[nodiscard]] SweepResult run_sweep(const SweepSpec& spec, std::ostream* log);

}  // namespace dsgd::cli
