#include "dsgd/cli/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "dsgd/cli/csv.hpp"
#include "dsgd/cli/runner.hpp"
#include "dsgd/core/error.hpp"

namespace dsgd::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string value_text(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

struct Job {
  ExperimentConfig config;
  std::size_t group = 0;
};

std::vector<RunSummary> run_jobs(const std::vector<Job>& jobs, std::size_t parallel, std::ostream* log) {
  std::vector<RunSummary> out(jobs.size());
  std::vector<std::string> logs(jobs.size());
  auto one = [&](std::size_t i) {
    std::ostringstream os;
    out[i] = execute_run(jobs[i].config, &os);
    logs[i] = os.str();
  };
  const std::size_t workers = std::min(parallel, jobs.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) one(i);
      });
    }
  }
  if (log) {
    for (const auto& l : logs) *log << l;
  }
  return out;
}

ComboScore score_group(std::size_t combo, std::vector<json> values, const std::vector<RunSummary>& runs) {
  ComboScore s;
  s.combo = combo;
  s.values = std::move(values);
  s.runs = runs.size();
  double sum = 0.0;
  std::size_t done = 0;
  s.min_test_acc = std::numeric_limits<double>::infinity();
  s.max_test_acc = -std::numeric_limits<double>::infinity();
  for (const RunSummary& r : runs) {
    if (r.status == RunStatus::diverged) {
      ++s.diverged;
    } else if (r.status != RunStatus::ok) {
      ++s.failed;
    } else if (std::isfinite(r.final_test_acc)) {
      sum += r.final_test_acc;
      ++done;
      s.min_test_acc = std::min(s.min_test_acc, r.final_test_acc);
      s.max_test_acc = std::max(s.max_test_acc, r.final_test_acc);
    }
  }
  if (done == 0) {
    s.mean_test_acc = s.min_test_acc = s.max_test_acc = kNaN;
  } else {
    s.mean_test_acc = sum / static_cast<double>(done);
  }
  return s;
}

ExperimentConfig child_config(json doc, const std::vector<std::pair<std::string, json>>& sets, std::uint64_t seed,
                              const fs::path& dir) {
  for (const auto& [path, value] : sets) set_json_value(doc, path, value);
  doc["seed"] = seed;
  doc["output_dir"] = dir.string();
  return config_from_json(doc);
}

}  // namespace

SweepSpec sweep_from_json(const json& j, const fs::path& spec_dir) {
  if (!j.is_object()) throw ConfigError("sweep: expected an object");
  SweepSpec s;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const json& v = it.value();
    try {
      if (key == "base") {
        if (v.is_string()) {
          fs::path p = v.get<std::string>();
          if (p.is_relative()) p = spec_dir / p;
          s.base = read_json_file(p);
        } else if (v.is_object()) {
          s.base = v;
        } else {
          throw ConfigError("sweep.base: expected an object or a path");
        }
      } else if (key == "axes") {
        for (const json& a : v) {
          SweepAxis axis;
          for (auto ait = a.begin(); ait != a.end(); ++ait) {
            if (ait.key() == "path") {
              axis.path = ait.value().get<std::string>();
            } else if (ait.key() == "values") {
              axis.values = ait.value().get<std::vector<json>>();
            } else {
              throw ConfigError("sweep.axes: unknown key '" + ait.key() + "'");
            }
          }
          if (axis.path.empty()) throw ConfigError("sweep.axes: missing path");
          if (axis.values.empty()) throw ConfigError("sweep.axes: '" + axis.path + "' has no values");
          s.axes.push_back(std::move(axis));
        }
      } else if (key == "seeds") {
        s.seeds = v.get<std::vector<std::uint64_t>>();
      } else if (key == "output_dir") {
        s.output_dir = v.get<std::string>();
      } else if (key == "parallel") {
        s.parallel = v.get<std::size_t>();
      } else if (key == "replay") {
        for (const json& r : v) {
          ReplayTask t;
          for (auto rit = r.begin(); rit != r.end(); ++rit) {
            if (rit.key() == "task") {
              t.task = rit.value().get<std::string>();
            } else if (rit.key() == "set") {
              for (auto sit = rit.value().begin(); sit != rit.value().end(); ++sit) {
                t.overrides.emplace_back(sit.key(), sit.value());
              }
            } else {
              throw ConfigError("sweep.replay: unknown key '" + rit.key() + "'");
            }
          }
          if (t.task.empty()) throw ConfigError("sweep.replay: missing task");
          s.replay.push_back(std::move(t));
        }
      } else {
        throw ConfigError("sweep: unknown key '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw ConfigError("sweep." + key + ": " + e.what());
    }
  }
  if (s.seeds.empty()) throw ConfigError("sweep.seeds must not be empty");
  if (s.parallel == 0) throw ConfigError("sweep.parallel must be >= 1");
  return s;
}

std::vector<std::vector<json>> expand_axes(const std::vector<SweepAxis>& axes) {
  std::vector<std::vector<json>> combos{{}};
  for (const SweepAxis& a : axes) {
    std::vector<std::vector<json>> next;
    next.reserve(combos.size() * a.values.size());
    for (const auto& prefix : combos) {
      for (const json& v : a.values) {
        next.push_back(prefix);
        next.back().push_back(v);
      }
    }
    combos = std::move(next);
  }
  return combos;
}

void rank_scores(std::vector<ComboScore>& scores) {
  auto key = [](const ComboScore& s) {
    const bool clean = s.diverged == 0 && s.failed == 0 && std::isfinite(s.mean_test_acc);
    return std::pair{clean ? 0 : 1, std::isfinite(s.mean_test_acc) ? -s.mean_test_acc : 1.0};
  };
  std::stable_sort(scores.begin(), scores.end(),
                   [&](const ComboScore& a, const ComboScore& b) { return key(a) < key(b); });
}

SweepResult run_sweep(const SweepSpec& spec, std::ostream* log) {
  const fs::path out = spec.output_dir;
  const auto combos = expand_axes(spec.axes);

  // every child config is built before anything runs
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < combos.size(); ++c) {
    std::vector<std::pair<std::string, json>> sets;
    for (std::size_t a = 0; a < spec.axes.size(); ++a) sets.emplace_back(spec.axes[a].path, combos[c][a]);
    for (std::uint64_t seed : spec.seeds) {
      const fs::path dir = out / ("c" + std::to_string(c) + "_s" + std::to_string(seed));
      try {
        jobs.push_back({child_config(spec.base, sets, seed, dir), c});
      } catch (const ConfigError& e) {
        throw ConfigError("sweep combination " + std::to_string(c) + ": " + e.what());
      }
    }
  }
  for (const ReplayTask& t : spec.replay) {
    json probe = spec.base;
    for (std::size_t a = 0; a < spec.axes.size(); ++a) set_json_value(probe, spec.axes[a].path, combos.front()[a]);
    for (const auto& [path, value] : t.overrides) set_json_value(probe, path, value);
    probe["task"] = t.task;
    try {
      (void)config_from_json(probe);
    } catch (const ConfigError& e) {
      throw ConfigError("sweep replay '" + t.task + "': " + e.what());
    }
  }

  try {
    fs::create_directories(out);
  } catch (const fs::filesystem_error& e) {
    throw IoError(e.what());
  }
  const std::vector<RunSummary> summaries = run_jobs(jobs, spec.parallel, log);

  SweepResult result;
  for (std::size_t c = 0; c < combos.size(); ++c) {
    std::vector<RunSummary> group;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      if (jobs[k].group == c) group.push_back(summaries[k]);
    }
    result.leaderboard.push_back(score_group(c, combos[c], group));
  }
  rank_scores(result.leaderboard);

  {
    std::vector<std::string_view> header{"rank", "combo"};
    for (const SweepAxis& a : spec.axes) header.push_back(a.path);
    for (std::string_view h : {"mean_test_acc", "min_test_acc", "max_test_acc", "runs", "diverged", "failed"}) {
      header.push_back(h);
    }
    std::ofstream f(out / "leaderboard.csv", std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write leaderboard.csv");
    for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
    f << '\n';
    for (std::size_t r = 0; r < result.leaderboard.size(); ++r) {
      const ComboScore& s = result.leaderboard[r];
      f << r + 1 << ',' << s.combo;
      for (const json& v : s.values) f << ',' << value_text(v);
      f << ',' << format_double(s.mean_test_acc) << ',' << format_double(s.min_test_acc) << ','
        << format_double(s.max_test_acc) << ',' << s.runs << ',' << s.diverged << ',' << s.failed << '\n';
    }
  }

  const ComboScore& winner = result.leaderboard.front();
  std::vector<std::pair<std::string, json>> best_sets;
  for (std::size_t a = 0; a < spec.axes.size(); ++a) best_sets.emplace_back(spec.axes[a].path, winner.values[a]);
  result.best = child_config(spec.base, best_sets, spec.seeds.front(), out / "best");
  {
    std::ofstream f(out / "best_config.json", std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write best_config.json");
    f << config_to_json(result.best).dump(2) << '\n';
  }
  if (log) {
    *log << "best: combo " << winner.combo;
    for (std::size_t a = 0; a < spec.axes.size(); ++a) *log << ' ' << spec.axes[a].path << '=' << value_text(winner.values[a]);
    *log << " mean test_acc " << format_double(winner.mean_test_acc) << '\n';
  }

  if (!spec.replay.empty()) {
    std::vector<Job> replay_jobs;
    for (std::size_t t = 0; t < spec.replay.size(); ++t) {
      auto sets = best_sets;
      for (const auto& o : spec.replay[t].overrides) sets.push_back(o);
      sets.emplace_back("task", spec.replay[t].task);
      for (std::uint64_t seed : spec.seeds) {
        const fs::path dir = out / ("replay_" + spec.replay[t].task + "_s" + std::to_string(seed));
        replay_jobs.push_back({child_config(spec.base, sets, seed, dir), t});
      }
    }
    const std::vector<RunSummary> rs = run_jobs(replay_jobs, spec.parallel, log);
    std::ofstream f(out / "replay.csv", std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write replay.csv");
    f << "task,mean_test_acc,min_test_acc,max_test_acc,runs,diverged,failed\n";
    for (std::size_t t = 0; t < spec.replay.size(); ++t) {
      std::vector<RunSummary> group;
      for (std::size_t k = 0; k < replay_jobs.size(); ++k) {
        if (replay_jobs[k].group == t) group.push_back(rs[k]);
      }
      ReplayScore r{spec.replay[t].task, score_group(t, winner.values, group)};
      f << r.task << ',' << format_double(r.score.mean_test_acc) << ',' << format_double(r.score.min_test_acc) << ','
        << format_double(r.score.max_test_acc) << ',' << r.score.runs << ',' << r.score.diverged << ','
        << r.score.failed << '\n';
      result.replays.push_back(std::move(r));
    }
  }
  return result;
}

}  // namespace dsgd::cli
