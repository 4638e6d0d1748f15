#include "dsgd/cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "dsgd/cli/csv.hpp"
#include "dsgd/cli/config.hpp"
#include "dsgd/core/error.hpp"

namespace dsgd::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::optional<RunEntry> load_run(const fs::path& dir, std::string& reason) {
  try {
    const nlohmann::json info = read_json_file(dir / "run_info.json");
    RunEntry e;
    e.dir = dir;
    e.optimizer = info.at("optimizer").get<std::string>();
    e.task = info.at("task").get<std::string>();
    const std::string status = info.at("status").get<std::string>();
    const CsvTable metrics = read_csv(dir / "metrics.csv");
    const std::size_t col = metrics.column("test_acc");
    if (status == "diverged") {
      e.diverged = true;
      e.test_acc = kNaN;
      return e;
    }
    if (status != "ok") {
      reason = "run status " + status;
      return std::nullopt;
    }
    e.test_acc = kNaN;
    for (auto it = metrics.rows.rbegin(); it != metrics.rows.rend(); ++it) {
      const double v = parse_cell((*it)[col]);
      if (std::isfinite(v)) {
        e.test_acc = v;
        break;
      }
    }
    if (std::isnan(e.test_acc)) {
      reason = "no evaluated test accuracy";
      return std::nullopt;
    }
    return e;
  } catch (const Error& ex) {
    reason = ex.what();
  } catch (const nlohmann::json::exception& ex) {
    reason = std::string("run_info.json: ") + ex.what();
  }
  return std::nullopt;
}

const ReportCell* Report::find(const std::string& optimizer, const std::string& task) const {
  for (const ReportCell& c : cells) {
    if (c.optimizer == optimizer && c.task == task) return &c;
  }
  return nullptr;
}

Report build_report(const std::vector<RunEntry>& runs, std::vector<FailedRun> failed) {
  Report r;
  r.failed = std::move(failed);
  for (const RunEntry& e : runs) {
    if (std::find(r.optimizers.begin(), r.optimizers.end(), e.optimizer) == r.optimizers.end()) {
      r.optimizers.push_back(e.optimizer);
    }
    if (std::find(r.tasks.begin(), r.tasks.end(), e.task) == r.tasks.end()) r.tasks.push_back(e.task);
    auto it = std::find_if(r.cells.begin(), r.cells.end(), [&](const ReportCell& c) {
      return c.optimizer == e.optimizer && c.task == e.task;
    });
    if (it == r.cells.end()) {
      r.cells.push_back({e.optimizer, e.task, 0, false, 0.0, 0.0, false});
      it = std::prev(r.cells.end());
    }
    ++it->runs;
    it->diverged = it->diverged || e.diverged;
    if (!e.diverged) it->test_acc += e.test_acc;
  }
  for (ReportCell& c : r.cells) {
    // runs of a diverged cell are not averaged
    c.test_acc = c.diverged ? kNaN : c.test_acc / static_cast<double>(c.runs);
  }
  for (const std::string& task : r.tasks) {
    double best = -std::numeric_limits<double>::infinity();
    for (const ReportCell& c : r.cells) {
      if (c.task == task && !c.diverged) best = std::max(best, c.test_acc);
    }
    for (ReportCell& c : r.cells) {
      if (c.task != task) continue;
      if (c.diverged) {
        c.gap_pp = kNaN;
      } else {
        c.gap_pp = 100.0 * (best - c.test_acc);
        c.best = c.test_acc == best;
      }
    }
  }
  return r;
}

Report build_report(const std::vector<fs::path>& dirs) {
  std::vector<RunEntry> runs;
  std::vector<FailedRun> failed;
  for (const fs::path& d : dirs) {
    std::string reason;
    if (auto e = load_run(d, reason)) {
      runs.push_back(std::move(*e));
    } else {
      failed.push_back({d, reason});
    }
  }
  return build_report(runs, std::move(failed));
}

std::string render_text(const Report& report) {
  std::vector<std::vector<std::string>> grid;
  grid.push_back({"optimizer"});
  for (const std::string& t : report.tasks) grid[0].push_back(t);
  for (const std::string& o : report.optimizers) {
    std::vector<std::string> row{o};
    for (const std::string& t : report.tasks) {
      const ReportCell* c = report.find(o, t);
      if (!c) {
        row.emplace_back("-");
      } else if (c->diverged) {
        row.emplace_back("DIV");
      } else if (c->best) {
        row.push_back(fixed(100.0 * c->test_acc, 2) + " *");
      } else {
        row.push_back(fixed(100.0 * c->test_acc, 2) + " (-" + fixed(c->gap_pp, 1) + ")");
      }
    }
    grid.push_back(std::move(row));
  }
  std::vector<std::size_t> width(grid[0].size(), 0);
  for (const auto& row : grid) {
    for (std::size_t j = 0; j < row.size(); ++j) width[j] = std::max(width[j], row[j].size());
  }
  std::ostringstream os;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < grid[i].size(); ++j) {
      if (j) os << " | ";
      os << grid[i][j] << std::string(width[j] - grid[i][j].size(), ' ');
    }
    os << '\n';
    if (i == 0) {
      for (std::size_t j = 0; j < width.size(); ++j) os << (j ? "-+-" : "") << std::string(width[j], '-');
      os << '\n';
    }
  }
  if (!report.failed.empty()) {
    os << "\nfailed runs:\n";
    for (const FailedRun& f : report.failed) os << "  " << f.dir.string() << ": " << f.reason << '\n';
  }
  return os.str();
}

std::string render_csv(const Report& report) {
  std::ostringstream os;
  os << "optimizer,task,test_acc,gap_pp,best,status,runs\n";
  for (const std::string& o : report.optimizers) {
    for (const std::string& t : report.tasks) {
      const ReportCell* c = report.find(o, t);
      if (!c) continue;
      os << o << ',' << t << ',' << format_double(c->test_acc) << ',' << format_double(c->gap_pp) << ','
         << (c->best ? 1 : 0) << ',' << (c->diverged ? "DIV" : "ok") << ',' << c->runs << '\n';
    }
  }
  return os.str();
}

}  // namespace dsgd::cli
