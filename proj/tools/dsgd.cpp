// dsgd: command-line front-end for the federated simulator.
//
//   dsgd run <config.json> [--set path=value ...]
//   dsgd sweep <sweep.json> [--parallel N]
//   dsgd report <run-dir|sweep-dir ...> [--csv out.csv]
//   dsgd gen-data <synthetic.json> [--out dir]

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "dsgd/cli/config.hpp"
#include "dsgd/cli/csv.hpp"
#include "dsgd/cli/report.hpp"
#include "dsgd/cli/runner.hpp"
#include "dsgd/cli/sweep.hpp"
#include "dsgd/cli/synthetic.hpp"
#include "dsgd/core/error.hpp"

namespace fs = std::filesystem;
using namespace dsgd;
using namespace dsgd::cli;

namespace {

int run_verb(const std::string& path, const std::vector<std::string>& sets, bool quiet) {
  ExperimentConfig config;
  try {
    config = load_config(path, current_environment(), sets);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  }
  const RunSummary s = execute_run(config, quiet ? nullptr : &std::cout);
  if (s.status != RunStatus::ok && quiet) std::cerr << to_string(s.status) << ": " << s.message << '\n';
  return exit_code(s.status);
}

int sweep_verb(const std::string& path, std::size_t parallel) {
  try {
    SweepSpec spec = sweep_from_json(read_json_file(path), fs::path(path).parent_path());
    if (parallel > 0) spec.parallel = parallel;
    for (const auto& [key, value] : env_overrides(current_environment())) set_json_path(spec.base, key, value);
    const SweepResult r = run_sweep(spec, &std::cout);
    std::cout << "leaderboard: " << (fs::path(spec.output_dir) / "leaderboard.csv").string() << '\n';
    for (const ReplayScore& rs : r.replays) {
      std::cout << "replay " << rs.task << ": mean test_acc " << format_double(rs.score.mean_test_acc) << '\n';
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  }
}

// A directory without run_info.json is searched one level down, so a sweep
// output directory can be passed directly.
std::vector<fs::path> expand_run_dirs(const std::vector<std::string>& args) {
  std::vector<fs::path> out;
  for (const std::string& a : args) {
    const fs::path p = a;
    if (fs::is_directory(p) && !fs::exists(p / "run_info.json")) {
      std::vector<fs::path> children;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_directory() && fs::exists(e.path() / "run_info.json")) children.push_back(e.path());
      }
      std::sort(children.begin(), children.end());
      if (!children.empty()) {
        out.insert(out.end(), children.begin(), children.end());
        continue;
      }
    }
    out.push_back(p);
  }
  return out;
}

int report_verb(const std::vector<std::string>& dirs, const std::string& csv_path) {
  const Report r = build_report(expand_run_dirs(dirs));
  std::cout << render_text(r);
  if (!csv_path.empty()) {
    std::ofstream f(csv_path, std::ios::binary | std::ios::trunc);
    if (!(f << render_csv(r))) {
      std::cerr << "i/o error: cannot write " << csv_path << '\n';
      return kExitIo;
    }
  }
  return r.cells.empty() ? kExitIo : kExitOk;
}

int gen_data_verb(const std::string& path, const std::string& out_dir) {
  try {
    const SyntheticSpec spec = synthetic_from_json(read_json_file(path));
    const SplitDataset d = generate_synthetic(spec);
    fs::create_directories(out_dir);
    write_dataset_csv(fs::path(out_dir) / "train.csv", d.train);
    write_dataset_csv(fs::path(out_dir) / "test.csv", d.test);
    std::cout << "wrote " << d.train.size() << " train / " << d.test.size() << " test samples to " << out_dir << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated optimization simulator with locality-adaptive client step sizes"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--set", sets, "Override a config value: path=value (repeatable)");
  run->add_flag("-q,--quiet", quiet, "Only report failures");

  std::string sweep_path;
  std::size_t parallel = 0;
  auto* sweep = app.add_subcommand("sweep", "Grid search over config values");
  sweep->add_option("spec", sweep_path, "Sweep spec (JSON)")->required();
  sweep->add_option("--parallel", parallel, "Concurrent child runs (overrides the spec)");

  std::vector<std::string> dirs;
  std::string csv_out;
  auto* report = app.add_subcommand("report", "Optimizer x task comparison table");
  report->add_option("dirs", dirs, "Run or sweep directories")->required();
  report->add_option("--csv", csv_out, "Also write the table as CSV");

  std::string gen_path, gen_out = "data";
  auto* gen = app.add_subcommand("gen-data", "Write a synthetic dataset as train.csv/test.csv");
  gen->add_option("spec", gen_path, "Synthetic dataset spec (JSON)")->required();
  gen->add_option("--out", gen_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  if (*run) return run_verb(config_path, sets, quiet);
  if (*sweep) return sweep_verb(sweep_path, parallel);
  if (*report) return report_verb(dirs, csv_out);
  return gen_data_verb(gen_path, gen_out);
}
