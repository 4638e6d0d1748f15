#include "dsgd/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "dsgd/core/error.hpp"

extern char** environ;

namespace dsgd::cli {

using nlohmann::json;

namespace {

// Reads fields from one JSON object and rejects anything it did not consume.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  ~ObjectReader() = default;

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  void get_size(const char* key, std::size_t& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    if (!it->is_number_integer() || it->template get<long long>() < 0) {
      throw ConfigError(where_ + "." + key + ": expected a non-negative integer");
    }
    out = it->template get<std::size_t>();
  }

  void get_number(const char* key, double& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    if (!it->is_number()) throw ConfigError(where_ + "." + key + ": expected a number");
    out = it->template get<double>();
  }

  void get_optional_number(const char* key, std::optional<double>& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return;
    if (!it->is_number()) throw ConfigError(where_ + "." + key + ": expected a number");
    out = it->template get<double>();
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

OptimizerSpec optimizer_from_json(const json& j) {
  ObjectReader r(j, "optimizer");
  OptimizerSpec o;
  std::string rule = std::string(to_string(o.rule));
  r.get("rule", rule);
  o.rule = parse_step_rule(rule);
  r.get_optional_number("lr", o.lr);
  r.get_number("momentum", o.momentum);
  r.get_number("beta1", o.beta1);
  r.get_number("beta2", o.beta2);
  r.get_number("adam_eps", o.adam_eps);
  r.get_number("adagrad_eps", o.adagrad_eps);
  r.get_number("sps_c", o.sps_c);
  r.get_number("sps_fstar", o.sps_fstar);
  r.get_optional_number("sps_max_step", o.sps_max_step);
  r.get_optional_number("gamma_theory_c", o.gamma_theory_c);
  r.get_number("gamma", o.delta_sgd.gamma);
  r.get_number("delta", o.delta_sgd.delta);
  r.get_number("eta0", o.delta_sgd.eta0);
  r.get_number("theta0", o.delta_sgd.theta0);
  r.finish();
  o.validate();
  return o;
}

json optimizer_to_json(const OptimizerSpec& o) {
  json j;
  j["rule"] = std::string(to_string(o.rule));
  if (o.lr) j["lr"] = *o.lr;
  j["momentum"] = o.momentum;
  j["beta1"] = o.beta1;
  j["beta2"] = o.beta2;
  j["adam_eps"] = o.adam_eps;
  j["adagrad_eps"] = o.adagrad_eps;
  j["sps_c"] = o.sps_c;
  j["sps_fstar"] = o.sps_fstar;
  if (o.sps_max_step) j["sps_max_step"] = *o.sps_max_step;
  if (o.gamma_theory_c) j["gamma_theory_c"] = *o.gamma_theory_c;
  j["gamma"] = o.delta_sgd.gamma;
  j["delta"] = o.delta_sgd.delta;
  j["eta0"] = o.delta_sgd.eta0;
  j["theta0"] = o.delta_sgd.theta0;
  return j;
}

}  // namespace

SyntheticSpec synthetic_from_json(const json& j) {
  ObjectReader r(j, "dataset.synthetic");
  SyntheticSpec s;
  r.get_size("classes", s.classes);
  r.get_size("dim", s.dim);
  r.get_size("per_class", s.per_class);
  r.get_number("spread", s.spread);
  r.get_number("separation", s.separation);
  r.get_number("feature_scale", s.feature_scale);
  r.get("seed", s.seed);
  r.get("centroids", s.centroids);
  r.finish();
  s.validate();
  return s;
}

json synthetic_to_json(const SyntheticSpec& s) {
  json j{{"classes", s.classes}, {"dim", s.dim},   {"per_class", s.per_class},
         {"spread", s.spread},   {"separation", s.separation},
         {"feature_scale", s.feature_scale},       {"seed", s.seed}};
  if (!s.centroids.empty()) j["centroids"] = s.centroids;
  return j;
}

void ExperimentConfig::validate() const {
  fl.validate();
  static const std::set<std::string> sources{"synthetic", "idx", "csv", "shared-minimizer"};
  if (!sources.count(dataset.source)) throw ConfigError("dataset.source: unknown source '" + dataset.source + "'");
  if (dataset.source == "idx" && (dataset.train_images.empty() || dataset.train_labels.empty())) {
    throw ConfigError("dataset: idx source needs train_images and train_labels");
  }
  if (dataset.source == "csv" && dataset.train_csv.empty()) throw ConfigError("dataset: csv source needs train_csv");
  if (dataset.source == "shared-minimizer") {
    if (model.kind != ModelKind::softmax_regression) {
      throw ConfigError("dataset: shared-minimizer problems use softmax-regression");
    }
    if (dataset.shared_points == 0) throw ConfigError("dataset.shared_points must be >= 1");
  }
  if (partition.scheme != "equal" && partition.scheme != "unequal") {
    throw ConfigError("partition.scheme must be 'equal' or 'unequal'");
  }
  if (!(partition.alpha > 0.0)) throw ConfigError("partition.alpha must be > 0");
  if (partition.scheme == "unequal" && (partition.n_min == 0 || partition.n_min > partition.n_max)) {
    throw ConfigError("partition: need 1 <= n_min <= n_max");
  }
  if (model.kind == ModelKind::mlp && model.hidden == 0) throw ConfigError("model.hidden must be >= 1");
  if (analysis.constants && (analysis.constants_stride == 0 || analysis.probe_batch == 0)) {
    throw ConfigError("analysis: constants_stride and probe_batch must be >= 1");
  }
  if (analysis.lyapunov) {
    if (dataset.source != "shared-minimizer") {
      throw ConfigError("analysis.lyapunov needs the shared-minimizer dataset (a known minimizer)");
    }
    if (!fl.persistent_client_state) {
      throw ConfigError("analysis.lyapunov needs persistent_client_state");
    }
  }
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

ExperimentConfig config_from_json(const json& j) {
  ObjectReader r(j, "config");
  ExperimentConfig c;
  r.get("name", c.name);
  r.get("task", c.task);
  r.get("output_dir", c.output_dir);
  r.get("seed", c.fl.seed);
  r.get_size("rounds", c.fl.rounds);
  r.get_size("clients", c.fl.clients);
  r.get_number("participation", c.fl.participation);
  r.get_size("local_epochs", c.fl.local_epochs);
  r.get_size("batch_size", c.fl.batch_size);
  r.get_number("prox_mu", c.fl.prox_mu);
  r.get_size("threads", c.fl.threads);
  r.get_size("eval_stride", c.fl.eval_stride);
  r.get("persistent_client_state", c.fl.persistent_client_state);
  r.get("record_wall_time", c.fl.record_wall_time);

  if (const json* s = r.child("server")) {
    ObjectReader sr(*s, "server");
    std::string rule = std::string(to_string(c.fl.server_rule));
    sr.get("rule", rule);
    c.fl.server_rule = parse_server_rule(rule);
    sr.get_number("lr", c.fl.server_adam.lr);
    sr.get_number("beta1", c.fl.server_adam.beta1);
    sr.get_number("beta2", c.fl.server_adam.beta2);
    sr.get_number("eps", c.fl.server_adam.eps);
    sr.finish();
  }
  if (const json* o = r.child("optimizer")) c.fl.client = optimizer_from_json(*o);

  if (const json* d = r.child("dataset")) {
    ObjectReader dr(*d, "dataset");
    dr.get("source", c.dataset.source);
    if (const json* s = dr.child("synthetic")) c.dataset.synthetic = synthetic_from_json(*s);
    dr.get("train_images", c.dataset.train_images);
    dr.get("train_labels", c.dataset.train_labels);
    dr.get("test_images", c.dataset.test_images);
    dr.get("test_labels", c.dataset.test_labels);
    dr.get("train_csv", c.dataset.train_csv);
    dr.get("test_csv", c.dataset.test_csv);
    dr.get_size("shared_points", c.dataset.shared_points);
    dr.get_number("shared_client_spread", c.dataset.shared_client_spread);
    dr.finish();
  }
  if (const json* p = r.child("partition")) {
    ObjectReader pr(*p, "partition");
    pr.get_number("alpha", c.partition.alpha);
    pr.get("scheme", c.partition.scheme);
    pr.get_size("n_min", c.partition.n_min);
    pr.get_size("n_max", c.partition.n_max);
    pr.finish();
  }
  if (const json* m = r.child("model")) {
    ObjectReader mr(*m, "model");
    std::string kind = std::string(to_string(c.model.kind));
    mr.get("kind", kind);
    c.model.kind = parse_model_kind(kind);
    mr.get_size("hidden", c.model.hidden);
    mr.finish();
  }
  if (const json* a = r.child("analysis")) {
    ObjectReader ar(*a, "analysis");
    ar.get("step_trace", c.analysis.step_trace);
    ar.get("constants", c.analysis.constants);
    ar.get_size("constants_stride", c.analysis.constants_stride);
    ar.get_size("probe_batch", c.analysis.probe_batch);
    ar.get_size("probe_draws", c.analysis.probe_draws);
    ar.get("lyapunov", c.analysis.lyapunov);
    ar.finish();
  }
  r.finish();
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["task"] = c.task;
  j["output_dir"] = c.output_dir;
  j["seed"] = c.fl.seed;
  j["rounds"] = c.fl.rounds;
  j["clients"] = c.fl.clients;
  j["participation"] = c.fl.participation;
  j["local_epochs"] = c.fl.local_epochs;
  j["batch_size"] = c.fl.batch_size;
  j["prox_mu"] = c.fl.prox_mu;
  j["threads"] = c.fl.threads;
  j["eval_stride"] = c.fl.eval_stride;
  j["persistent_client_state"] = c.fl.persistent_client_state;
  j["record_wall_time"] = c.fl.record_wall_time;
  j["server"] = {{"rule", std::string(to_string(c.fl.server_rule))},
                 {"lr", c.fl.server_adam.lr},
                 {"beta1", c.fl.server_adam.beta1},
                 {"beta2", c.fl.server_adam.beta2},
                 {"eps", c.fl.server_adam.eps}};
  j["optimizer"] = optimizer_to_json(c.fl.client);
  j["dataset"] = {{"source", c.dataset.source},
                  {"synthetic", synthetic_to_json(c.dataset.synthetic)},
                  {"train_images", c.dataset.train_images},
                  {"train_labels", c.dataset.train_labels},
                  {"test_images", c.dataset.test_images},
                  {"test_labels", c.dataset.test_labels},
                  {"train_csv", c.dataset.train_csv},
                  {"test_csv", c.dataset.test_csv},
                  {"shared_points", c.dataset.shared_points},
                  {"shared_client_spread", c.dataset.shared_client_spread}};
  j["partition"] = {{"alpha", c.partition.alpha},
                    {"scheme", c.partition.scheme},
                    {"n_min", c.partition.n_min},
                    {"n_max", c.partition.n_max}};
  j["model"] = {{"kind", std::string(to_string(c.model.kind))}, {"hidden", c.model.hidden}};
  j["analysis"] = {{"step_trace", c.analysis.step_trace},
                   {"constants", c.analysis.constants},
                   {"constants_stride", c.analysis.constants_stride},
                   {"probe_batch", c.analysis.probe_batch},
                   {"probe_draws", c.analysis.probe_draws},
                   {"lyapunov", c.analysis.lyapunov}};
  return j;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void set_json_path(json& doc, std::string_view dotted_path, std::string_view raw) {
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = std::string(raw);
  }
  set_json_value(doc, dotted_path, std::move(value));
}

void set_json_value(json& doc, std::string_view dotted_path, json value) {
  if (dotted_path.empty()) throw ConfigError("override: empty key");
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted_path.find('.', start);
    const std::string key(dotted_path.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
    if (key.empty()) throw ConfigError("override: malformed key '" + std::string(dotted_path) + "'");
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError("override: '" + std::string(dotted_path) + "' descends into a non-object");
      *node = json::object();
    }
    if (dot == std::string_view::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

std::vector<std::pair<std::string, std::string>> env_overrides(const std::map<std::string, std::string>& env) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [name, value] : env) {
    if (name.size() <= kEnvPrefix.size() || name.compare(0, kEnvPrefix.size(), kEnvPrefix) != 0) continue;
    std::string path;
    const std::string rest = name.substr(kEnvPrefix.size());
    for (std::size_t i = 0; i < rest.size(); ++i) {
      if (rest[i] == '_' && i + 1 < rest.size() && rest[i + 1] == '_') {
        path.push_back('.');
        ++i;
      } else {
        path.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(rest[i]))));
      }
    }
    out.emplace_back(std::move(path), value);
  }
  return out;
}

std::map<std::string, std::string> current_environment() {
  std::map<std::string, std::string> env;
  for (char** e = environ; e && *e; ++e) {
    const std::string entry(*e);
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    env.emplace(entry.substr(0, eq), entry.substr(eq + 1));
  }
  return env;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::map<std::string, std::string>& env,
                             const std::vector<std::string>& cli_overrides) {
  json doc = read_json_file(path);
  if (!doc.is_object()) throw ConfigError(path.string() + ": top level must be an object");
  for (const auto& [key, value] : env_overrides(env)) set_json_path(doc, key, value);
  for (const std::string& kv : cli_overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + kv + "' is not key=value");
    set_json_path(doc, std::string_view(kv).substr(0, eq), std::string_view(kv).substr(eq + 1));
  }
  return config_from_json(doc);
}

}  // namespace dsgd::cli
