#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <string>

#include "dsgd/cli/config.hpp"
#include "dsgd/cli/csv.hpp"
#include "dsgd/cli/report.hpp"
#include "dsgd/cli/runner.hpp"
#include "dsgd/cli/sweep.hpp"
#include "dsgd/cli/synthetic.hpp"
#include "dsgd/core/error.hpp"
#include "dsgd/fed/experiment.hpp"
#include "support.hpp"

using namespace dsgd;
using namespace dsgd::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kMetricsHeader =
    "round,wall_ms,train_loss,test_loss,test_acc,grad_norm_sq,eta_mean,eta_max,eta_min,participating_clients,"
    "skipped_steps";

// Small enough to run in milliseconds.
ExperimentConfig tiny_config(const fs::path& out) {
  ExperimentConfig c;
  c.fl.clients = 4;
  c.fl.participation = 0.5;
  c.fl.rounds = 3;
  c.fl.batch_size = 8;
  c.dataset.synthetic.classes = 3;
  c.dataset.synthetic.dim = 4;
  c.dataset.synthetic.per_class = 20;
  c.output_dir = out.string();
  return c;
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream f(p);
  f << j.dump(2);
}

int run_tool(const std::string& args) {
  const std::string cmd = std::string(DSGD_TOOL_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t line_count(const fs::path& p) {
  const std::string s = testing::read_file(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

template <typename T>
T pick(SeededRng& rng, std::initializer_list<T> options) {
  return *(options.begin() + static_cast<std::ptrdiff_t>(rng.below(options.size())));
}

ExperimentConfig random_config(SeededRng& rng) {
  ExperimentConfig c;
  c.name = pick<std::string>(rng, {"a", "run 7", "x\"y"});
  c.task = pick<std::string>(rng, {"default", "B", "steep"});
  c.fl.clients = 1 + rng.below(200);
  c.fl.participation = static_cast<double>(1 + rng.below(c.fl.clients)) / static_cast<double>(c.fl.clients);
  c.fl.rounds = rng.below(1000);
  c.fl.local_epochs = 1 + rng.below(5);
  c.fl.batch_size = 1 + rng.below(256);
  c.fl.server_rule = pick(rng, {ServerRule::fedavg, ServerRule::fedavg_weighted, ServerRule::fedadam});
  c.fl.server_adam.lr = rng.uniform() + 1e-6;
  c.fl.server_adam.beta1 = 0.99 * rng.uniform();
  c.fl.prox_mu = rng.below(2) ? 0.0 : rng.uniform();
  c.fl.seed = rng();
  c.fl.threads = 1 + rng.below(8);
  c.fl.eval_stride = 1 + rng.below(10);
  c.fl.record_wall_time = rng.below(2) == 1;
  OptimizerSpec& o = c.fl.client;
  o.rule = pick(rng, {StepRule::sgd, StepRule::sgd_decay, StepRule::sgdm, StepRule::sgdm_decay, StepRule::adam,
                      StepRule::adagrad, StepRule::sps, StepRule::delta_sgd});
  if (rng.below(2) || o.rule == StepRule::sgd || o.rule == StepRule::sgdm || o.rule == StepRule::sgd_decay ||
      o.rule == StepRule::sgdm_decay) {
    o.lr = 1e-4 + rng.uniform();
  }
  o.momentum = 0.99 * rng.uniform();
  o.sps_c = 0.1 + rng.uniform();
  if (rng.below(2)) o.sps_max_step = 1.0 + rng.uniform();
  if (rng.below(2)) o.gamma_theory_c = 0.5 + rng.uniform();
  o.delta_sgd.gamma = 0.1 + 3.0 * rng.uniform();
  o.delta_sgd.delta = 0.01 + rng.uniform();
  o.delta_sgd.eta0 = 1e-3 + rng.uniform();
  o.delta_sgd.theta0 = 0.1 + rng.uniform();
  c.dataset.synthetic.classes = 2 + rng.below(20);
  c.dataset.synthetic.dim = 1 + rng.below(50);
  c.dataset.synthetic.per_class = 1 + rng.below(1000);
  c.dataset.synthetic.spread = 3.0 * rng.uniform();
  c.dataset.synthetic.feature_scale = 0.1 + 10.0 * rng.uniform();
  c.dataset.synthetic.seed = rng();
  c.partition.alpha = std::pow(10.0, -3.0 + 6.0 * rng.uniform());
  c.partition.scheme = pick<std::string>(rng, {"equal", "unequal"});
  c.partition.n_min = 1 + rng.below(100);
  c.partition.n_max = c.partition.n_min + rng.below(100);
  c.model.kind = pick(rng, {ModelKind::linear_regression, ModelKind::softmax_regression, ModelKind::mlp});
  c.model.hidden = 1 + rng.below(64);
  c.analysis.step_trace = rng.below(2) == 1;
  c.analysis.constants = rng.below(2) == 1;
  c.analysis.constants_stride = 1 + rng.below(20);
  c.output_dir = pick<std::string>(rng, {"out", "/tmp/x y", "runs/ü"});
  return c;
}

}  // namespace

TEST_CASE("config round-trips losslessly") {
  SeededRng rng(1, 1);
  for (int trial = 0; trial < 300; ++trial) {
    const ExperimentConfig c = random_config(rng);
    const json j = config_to_json(c);
    const ExperimentConfig back = config_from_json(json::parse(j.dump()));
    REQUIRE(back == c);
    CHECK(config_to_json(back) == j);
  }
}

TEST_CASE("unknown keys are rejected") {
  json j = config_to_json(ExperimentConfig{});
  j["learning_rate"] = 0.1;
  CHECK_THROWS_AS((void)config_from_json(j), ConfigError);
  j = config_to_json(ExperimentConfig{});
  j["optimizer"]["lr_typo"] = 0.1;
  CHECK_THROWS_AS((void)config_from_json(j), ConfigError);
  j = config_to_json(ExperimentConfig{});
  j["dataset"]["synthetic"]["colour"] = "red";
  CHECK_THROWS_AS((void)config_from_json(j), ConfigError);
  j = config_to_json(ExperimentConfig{});
  j["rounds"] = "ten";
  CHECK_THROWS_AS((void)config_from_json(j), ConfigError);
  j = config_to_json(ExperimentConfig{});
  j["optimizer"]["rule"] = "rmsprop";
  CHECK_THROWS_AS((void)config_from_json(j), ConfigError);
}

TEST_CASE("default delta-sgd config needs no learning rate") {
  const ExperimentConfig c = config_from_json(json::parse(R"({"optimizer": {"rule": "delta-sgd"}})"));
  CHECK(c.fl.client.rule == StepRule::delta_sgd);
  CHECK(!c.fl.client.lr);
  CHECK(c.fl.client.delta_sgd.gamma == 2.0);
  CHECK(c.fl.client.delta_sgd.eta0 == 0.2);
  CHECK(c.fl.client.delta_sgd.theta0 == 1.0);
  CHECK(c.fl.client.delta_sgd.delta == 0.1);
  CHECK_NOTHROW(c.validate());
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"optimizer": {"rule": "sgd"}})")).validate(), ConfigError);
}

TEST_CASE("flags override environment override file") {
  const fs::path dir = testing::temp_dir("precedence");
  write_json(dir / "c.json", json::parse(R"({"rounds": 5, "optimizer": {"gamma": 1.5}})"));
  const std::map<std::string, std::string> env{
      {"DSGD_ROUNDS", "7"}, {"DSGD_OPTIMIZER__GAMMA", "3"}, {"HOME", "/root"}, {"DSGD_NAME", "from env"}};
  ExperimentConfig c = load_config(dir / "c.json", {}, {});
  CHECK(c.fl.rounds == 5);
  CHECK(c.fl.client.delta_sgd.gamma == 1.5);
  c = load_config(dir / "c.json", env, {});
  CHECK(c.fl.rounds == 7);
  CHECK(c.fl.client.delta_sgd.gamma == 3.0);
  CHECK(c.name == "from env");
  c = load_config(dir / "c.json", env, {"rounds=9", "optimizer.gamma=0.5"});
  CHECK(c.fl.rounds == 9);
  CHECK(c.fl.client.delta_sgd.gamma == 0.5);
  CHECK_THROWS_AS((void)load_config(dir / "c.json", {}, {"rounds"}), ConfigError);
  CHECK_THROWS_AS((void)load_config(dir / "missing.json", {}, {}), IoError);
  const auto ov = env_overrides(env);
  CHECK(ov.size() == 3);
}

TEST_CASE("csv cells") {
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()).empty());
  CHECK(std::isnan(parse_cell("")));
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(3.0) == "3");
  SeededRng rng(2, 1);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::ldexp(rng.uniform() - 0.5, static_cast<int>(rng.below(200)) - 100);
    REQUIRE(parse_cell(format_double(v)) == v);
  }
  CHECK(split_csv_line("a,,b") == std::vector<std::string>{"a", "", "b"});
}

TEST_CASE("dataset csv round trip") {
  const fs::path dir = testing::temp_dir("dataset_csv");
  SeededRng rng(3, 1);
  const Dataset d = testing::random_dataset(rng, 15, 4, 3);
  write_dataset_csv(dir / "d.csv", d);
  const Dataset back = read_dataset_csv(dir / "d.csv", 3);
  CHECK(back.features == d.features);
  CHECK(back.labels == d.labels);
}

TEST_CASE("synthetic data") {
  SyntheticSpec s;
  s.classes = 4;
  s.dim = 3;
  s.per_class = 10;
  s.seed = 11;
  const SplitDataset a = generate_synthetic(s), b = generate_synthetic(s);
  CHECK(a.train.features == b.train.features);
  CHECK(a.test.labels == b.test.labels);
  CHECK(a.train.size() == 32);
  CHECK(a.test.size() == 8);
  s.seed = 12;
  CHECK(generate_synthetic(s).train.features != a.train.features);

  SUBCASE("zero spread puts every sample on its centroid") {
    s.spread = 0.0;
    s.centroids = {{1, 0, 0}, {0, 2, 0}, {0, 0, 3}, {-1, -1, -1}};
    const SplitDataset z = generate_synthetic(s);
    for (const Dataset* d : {&z.train, &z.test}) {
      for (std::size_t i = 0; i < d->size(); ++i) {
        const auto& c = s.centroids[static_cast<std::size_t>(d->labels[i])];
        for (std::size_t k = 0; k < 3; ++k) REQUIRE(d->features[i * 3 + k] == c[k]);
      }
    }
  }
  SUBCASE("invalid specs") {
    s.classes = 1;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.classes = 2;
    s.spread = -1.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
  }
}

TEST_CASE("two well-separated clusters are learned almost perfectly") {
  SyntheticSpec s;
  s.classes = 2;
  s.dim = 2;
  s.per_class = 500;
  s.spread = 0.1;
  s.centroids = {{1, 0}, {-1, 0}};
  const SplitDataset data = generate_synthetic(s);
  FederatedData fed;
  fed.clients.push_back(data.train);
  fed.test = data.test;
  FLConfig c;
  c.clients = 1;
  c.participation = 1.0;
  c.rounds = 100;
  c.batch_size = data.train.size();
  c.client.rule = StepRule::sgd;
  c.client.lr = 1.0;
  const ExperimentResult r = run_experiment(c, fed, Model::softmax_regression(2, 2));
  CHECK(r.records.back().test_acc > 0.99);
}

TEST_CASE("zero rounds writes a header-only metrics file") {
  const fs::path out = testing::temp_dir("zero_rounds");
  ExperimentConfig c = tiny_config(out);
  c.fl.rounds = 0;
  const RunSummary s = execute_run(c, nullptr);
  CHECK(s.status == RunStatus::ok);
  CHECK(exit_code(s.status) == 0);
  CHECK(testing::read_file(out / "metrics.csv") == kMetricsHeader + "\n");
  CHECK(fs::exists(out / "final.ckpt"));
}

TEST_CASE("run writes every artefact") {
  const fs::path out = testing::temp_dir("full_run");
  ExperimentConfig c = tiny_config(out);
  c.analysis.step_trace = true;
  c.analysis.constants = true;
  c.analysis.constants_stride = 1;
  REQUIRE(execute_run(c, nullptr).status == RunStatus::ok);
  const CsvTable m = read_csv(out / "metrics.csv");
  CHECK(m.rows.size() == 3);
  CHECK(m.rows[2][m.column("participating_clients")] == "2");
  const CsvTable a = read_csv(out / "analysis.csv");
  CHECK(a.header == std::vector<std::string>{"round", "V", "V_dist", "V_pair", "V_subopt", "Ltilde_hat",
                                             "sigma2_hat", "G_hat", "rho_hat", "slope"});
  CHECK(!a.rows[0][a.column("G_hat")].empty());
  CHECK(read_csv(out / "step_trace.csv").rows.size() > 0);
  const json info = read_json_file(out / "run_info.json");
  CHECK(info["status"] == "ok");
  CHECK(config_from_json(read_json_file(out / "config.json")) == c);
}

TEST_CASE("invalid optimizer exits 2 without a csv") {
  const fs::path dir = testing::temp_dir("bad_optimizer");
  json j = config_to_json(tiny_config(dir / "out"));
  j["optimizer"]["rule"] = "bogus";
  write_json(dir / "c.json", j);
  CHECK(run_tool("run " + (dir / "c.json").string()) == 2);
  CHECK(!fs::exists(dir / "out" / "metrics.csv"));
  CHECK(run_tool("run " + (dir / "c.json").string() + " --set optimizer.rule=sgd") == 2);
  CHECK(run_tool("run " + (dir / "c.json").string() + " --set optimizer.rule=sgd --set optimizer.lr=0.1") == 0);
  CHECK(fs::exists(dir / "out" / "metrics.csv"));
  CHECK(run_tool("run " + (dir / "nope.json").string()) == 4);
  CHECK(run_tool("frobnicate") == 2);
}

TEST_CASE("divergence exits 3 and keeps the rows written") {
  const fs::path dir = testing::temp_dir("diverge");
  ExperimentConfig c = tiny_config(dir / "out");
  c.model.kind = ModelKind::linear_regression;
  c.fl.rounds = 500;
  c.fl.participation = 1.0;
  c.fl.client.rule = StepRule::sgd;
  c.fl.client.lr = 20.0;
  write_json(dir / "c.json", config_to_json(c));
  CHECK(run_tool("run " + (dir / "c.json").string()) == 3);
  const CsvTable m = read_csv(dir / "out" / "metrics.csv");
  CHECK(m.rows.size() > 0);
  CHECK(m.rows.size() < 500);
  CHECK(read_json_file(dir / "out" / "run_info.json")["status"] == "diverged");
}

TEST_CASE("sweep axes expand with the first axis slowest") {
  const std::vector<SweepAxis> axes{{"a", {1, 2}}, {"b", {"x", "y", "z"}}};
  const auto combos = expand_axes(axes);
  REQUIRE(combos.size() == 6);
  CHECK(combos[0] == std::vector<json>{1, "x"});
  CHECK(combos[1] == std::vector<json>{1, "y"});
  CHECK(combos[3] == std::vector<json>{2, "x"});
  CHECK(combos[5] == std::vector<json>{2, "z"});
  CHECK(expand_axes({}).size() == 1);
}

TEST_CASE("ranking puts clean combos first, then accuracy") {
  std::vector<ComboScore> s(4);
  for (std::size_t i = 0; i < 4; ++i) s[i].combo = i;
  s[0].mean_test_acc = 0.5;
  s[1].mean_test_acc = 0.9;
  s[1].diverged = 1;
  s[2].mean_test_acc = 0.7;
  s[3].mean_test_acc = 0.7;
  rank_scores(s);
  CHECK(s[0].combo == 2);
  CHECK(s[1].combo == 3);
  CHECK(s[2].combo == 0);
  CHECK(s[3].combo == 1);
}

TEST_CASE("sgd grid gives a four-row leaderboard") {
  const fs::path dir = testing::temp_dir("sweep_grid");
  ExperimentConfig base = tiny_config(dir);
  base.fl.client.rule = StepRule::sgd;
  json spec{{"base", config_to_json(base)},
            {"axes", json::array({{{"path", "optimizer.lr"}, {"values", {0.01, 0.05, 0.1, 0.5}}}})},
            {"seeds", {0, 1}},
            {"output_dir", (dir / "sweep").string()},
            {"parallel", 2}};
  const SweepResult r = run_sweep(sweep_from_json(spec, dir), nullptr);
  CHECK(r.leaderboard.size() == 4);
  CHECK(line_count(dir / "sweep" / "leaderboard.csv") == 5);
  for (const ComboScore& s : r.leaderboard) CHECK(s.runs == 2);
  CHECK(r.best.fl.client.lr == r.leaderboard[0].values[0].get<double>());
  CHECK(fs::exists(dir / "sweep" / "best_config.json"));
}

TEST_CASE("a single-value sweep is the plain run") {
  const fs::path dir = testing::temp_dir("sweep_single");
  ExperimentConfig base = tiny_config(dir / "direct");
  json spec{{"base", config_to_json(base)},
            {"axes", json::array({{{"path", "optimizer.delta"}, {"values", {0.1}}}})},
            {"output_dir", (dir / "sweep").string()}};
  (void)run_sweep(sweep_from_json(spec, dir), nullptr);
  REQUIRE(execute_run(base, nullptr).status == RunStatus::ok);
  CHECK(testing::read_file(dir / "sweep" / "c0_s0" / "metrics.csv") ==
        testing::read_file(dir / "direct" / "metrics.csv"));
}

TEST_CASE("an invalid child config aborts the sweep before any run") {
  const fs::path dir = testing::temp_dir("sweep_invalid");
  ExperimentConfig base = tiny_config(dir);
  base.fl.client.rule = StepRule::sgd;
  json spec{{"base", config_to_json(base)},
            {"axes", json::array({{{"path", "optimizer.lr"}, {"values", {0.1, -1.0}}}})},
            {"output_dir", (dir / "sweep").string()}};
  CHECK_THROWS_AS((void)run_sweep(sweep_from_json(spec, dir), nullptr), ConfigError);
  CHECK(!fs::exists(dir / "sweep" / "c0_s0"));
  spec["axes"][0]["values"] = {0.1};
  spec["replay"] = json::array({{{"task", "B"}, {"set", {{"partition.scheme", "triangular"}}}}});
  CHECK_THROWS_AS((void)run_sweep(sweep_from_json(spec, dir), nullptr), ConfigError);
  CHECK(!fs::exists(dir / "sweep" / "c0_s0"));
}

TEST_CASE("replay runs the winner on other tasks") {
  const fs::path dir = testing::temp_dir("sweep_replay");
  ExperimentConfig base = tiny_config(dir);
  base.fl.client.rule = StepRule::sgd;
  json spec{{"base", config_to_json(base)},
            {"axes", json::array({{{"path", "optimizer.lr"}, {"values", {0.05, 0.5}}}})},
            {"output_dir", (dir / "sweep").string()},
            {"replay", json::array({{{"task", "steep"}, {"set", {{"dataset.synthetic.feature_scale", 5.0}}}}})}};
  const SweepResult r = run_sweep(sweep_from_json(spec, dir), nullptr);
  REQUIRE(r.replays.size() == 1);
  CHECK(r.replays[0].task == "steep");
  CHECK(r.replays[0].score.runs == 1);
  CHECK(line_count(dir / "sweep" / "replay.csv") == 2);
  const json replayed = read_json_file(dir / "sweep" / "replay_steep_s0" / "config.json");
  CHECK(replayed["dataset"]["synthetic"]["feature_scale"] == 5.0);
  CHECK(replayed["optimizer"]["lr"] == r.leaderboard[0].values[0]);
}

TEST_CASE("report gaps") {
  const Report r = build_report(std::vector<RunEntry>{{"a", "sgd", "T", false, 0.90}, {"b", "adam", "T", false, 0.88}});
  REQUIRE(r.cells.size() == 2);
  CHECK(r.find("sgd", "T")->gap_pp == doctest::Approx(0.0));
  CHECK(r.find("sgd", "T")->best);
  CHECK(r.find("adam", "T")->gap_pp == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(!r.find("adam", "T")->best);
  const std::string text = render_text(r);
  CHECK(text.find("90.00 *") != std::string::npos);
  CHECK(text.find("88.00 (-2.0)") != std::string::npos);
  const std::string csv = render_csv(r);
  CHECK(csv.rfind("optimizer,task,test_acc,gap_pp,best,status,runs\n", 0) == 0);
}

TEST_CASE("report single run, means and divergence") {
  const Report one = build_report(std::vector<RunEntry>{{"a", "delta-sgd", "T", false, 0.5}});
  CHECK(one.cells.size() == 1);
  CHECK(one.cells[0].gap_pp == 0.0);
  CHECK(one.cells[0].best);

  const Report r = build_report(std::vector<RunEntry>{{"a", "sgd", "A", false, 0.8},
                                                      {"b", "sgd", "A", false, 0.6},
                                                      {"c", "sgd", "B", true, std::nan("")},
                                                      {"d", "adam", "B", false, 0.4},
                                                      {"e", "adam", "A", false, 0.75}});
  CHECK(r.optimizers == std::vector<std::string>{"sgd", "adam"});
  CHECK(r.tasks == std::vector<std::string>{"A", "B"});
  CHECK(r.find("sgd", "A")->test_acc == doctest::Approx(0.7));
  CHECK(r.find("adam", "A")->best);
  CHECK(r.find("sgd", "B")->diverged);
  CHECK(r.find("adam", "B")->best);
  CHECK(render_text(r).find("DIV") != std::string::npos);
}

TEST_CASE("report lists failed runs and keeps the rest") {
  const fs::path dir = testing::temp_dir("report_dirs");
  ExperimentConfig c = tiny_config(dir / "good");
  REQUIRE(execute_run(c, nullptr).status == RunStatus::ok);
  fs::create_directories(dir / "broken");
  std::ofstream(dir / "broken" / "run_info.json") << "{ not json";
  const Report r = build_report(std::vector<fs::path>{dir / "good", dir / "broken", dir / "absent"});
  CHECK(r.cells.size() == 1);
  CHECK(r.failed.size() == 2);
  CHECK(render_text(r).find("broken") != std::string::npos);
  CHECK(run_tool("report " + (dir / "good").string() + " --csv " + (dir / "r.csv").string()) == 0);
  CHECK(line_count(dir / "r.csv") == 2);
  CHECK(run_tool("report " + (dir / "absent").string()) == 4);
}
