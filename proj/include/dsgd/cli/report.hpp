#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dsgd::cli {

// One completed (or diverged) run directory, as written by execute_run.
struct RunEntry {
  std::filesystem::path dir;
  std::string optimizer;
  std::string task;
  bool diverged = false;
  double test_acc = 0.0;  // last evaluated test accuracy; NaN when diverged
};

struct FailedRun {
  std::filesystem::path dir;
  std::string reason;
};

// Reads run_info.json and metrics.csv. Returns the reason on failure.
[[nodiscard]] std::optional<RunEntry> load_run(const std::filesystem::path& dir, std::string& reason);

struct ReportCell {
  std::string optimizer;
  std::string task;
  std::size_t runs = 0;
  bool diverged = false;     // any run in the cell diverged
  double test_acc = 0.0;     // mean over the cell's runs; NaN when diverged
  double gap_pp = 0.0;       // percentage points below the task's best; NaN when diverged
  bool best = false;
};

// Optimizer x task comparison. Rows and columns keep first-seen order.
struct Report {
  std::vector<std::string> optimizers;
  std::vector<std::string> tasks;
  std::vector<ReportCell> cells;  // present combinations only
  std::vector<FailedRun> failed;

  [[nodiscard]] const ReportCell* find(const std::string& optimizer, const std::string& task) const;
};

[[nodiscard]] Report build_report(const std::vector<RunEntry>& runs, std::vector<FailedRun> failed = {});
[[nodiscard]] Report build_report(const std::vector<std::filesystem::path>& dirs);

// Accuracy in percent; the task's best is marked '*', others carry their
// gap as "(-x.x)"; diverged cells read "DIV"; failed runs are listed below.
[[nodiscard]] std::string render_text(const Report& report);
// optimizer,task,test_acc,gap_pp,best,status,runs (failed runs appear in the
// text form only)
[[nodiscard]] std::string render_csv(const Report& report);

}  // namespace dsgd::cli
