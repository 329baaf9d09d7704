#include "sgap/json_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "sgap/errors.hpp"

namespace sgap {

Json to_json(const std::optional<GraphAggregator>& ga) {
  if (!ga) return "unused";
  switch (ga->kind) {
    case GraphAggregatorKind::AugNA: return "aug_na";
    case GraphAggregatorKind::TriangleIA: return "triangle_ia";
    case GraphAggregatorKind::PPR: return Json{{"ppr", ga->alpha}};
  }
  return nullptr;
}

std::optional<GraphAggregator> graph_aggregator_from_json(const Json& j) {
  if (j.is_null()) return std::nullopt;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "unused") return std::nullopt;
    if (s == "aug_na") return GraphAggregator::aug_na();
    if (s == "triangle_ia") return GraphAggregator::triangle_ia();
    throw ConfigError("unknown graph aggregator \"" + s + "\" (expected aug_na, triangle_ia, {\"ppr\": a}, unused)");
  }
  if (j.is_object() && j.size() == 1 && j.contains("ppr") && j["ppr"].is_number()) {
    return GraphAggregator::ppr(j["ppr"].get<double>());
  }
  throw ConfigError("malformed graph aggregator " + j.dump());
}

Json to_json(const ArchitectureConfig& arch) {
  Json j;
  j["k_pre"] = arch.k_pre;
  j["ga_pre"] = to_json(arch.ga_pre);
  j["ma"] = std::string(to_string(arch.ma));
  j["k_trans"] = arch.k_trans;
  j["k_post"] = arch.k_post;
  j["ga_post"] = to_json(arch.ga_post);
  return j;
}

namespace {

void reject_unknown_keys(const Json& j, const std::set<std::string>& allowed, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError(std::string("unknown ") + what + " key \"" + key + "\"");
  }
}

template <typename T>
void read_field(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value for \"") + key + "\": " + e.what());
  }
}

}  // namespace

ArchitectureConfig architecture_from_json(const Json& j) {
  reject_unknown_keys(j, {"k_pre", "ga_pre", "ma", "k_trans", "k_post", "ga_post"}, "architecture");
  ArchitectureConfig arch;
  read_field(j, "k_pre", arch.k_pre);
  read_field(j, "k_trans", arch.k_trans);
  read_field(j, "k_post", arch.k_post);
  if (j.contains("ga_pre")) arch.ga_pre = graph_aggregator_from_json(j["ga_pre"]);
  if (j.contains("ga_post")) arch.ga_post = graph_aggregator_from_json(j["ga_post"]);
  if (j.contains("ma")) {
    if (!j["ma"].is_string()) throw ConfigError("\"ma\" must be a string");
    arch.ma = parse_message_aggregator(j["ma"].get<std::string>());
  }
  return canonicalize(arch);
}

Json to_json(const TrainConfig& cfg) {
  Json j;
  j["learning_rate"] = cfg.learning_rate;
  j["max_epochs"] = cfg.max_epochs;
  j["patience"] = cfg.patience;
  j["weight_decay"] = cfg.weight_decay;
  j["hidden_dim"] = cfg.hidden_dim;
  j["dropout"] = cfg.dropout;
  j["weighted_beta"] = cfg.weighted_beta;
  j["adam_beta1"] = cfg.adam_beta1;
  j["adam_beta2"] = cfg.adam_beta2;
  j["adam_eps"] = cfg.adam_eps;
  j["seed"] = cfg.seed;
  return j;
}

TrainConfig train_config_from_json(const Json& j) {
  reject_unknown_keys(j,
                      {"learning_rate", "max_epochs", "patience", "weight_decay", "hidden_dim", "dropout",
                       "weighted_beta", "adam_beta1", "adam_beta2", "adam_eps", "seed"},
                      "training config");
  TrainConfig cfg;
  read_field(j, "learning_rate", cfg.learning_rate);
  read_field(j, "max_epochs", cfg.max_epochs);
  read_field(j, "patience", cfg.patience);
  read_field(j, "weight_decay", cfg.weight_decay);
  read_field(j, "hidden_dim", cfg.hidden_dim);
  read_field(j, "dropout", cfg.dropout);
  read_field(j, "weighted_beta", cfg.weighted_beta);
  read_field(j, "adam_beta1", cfg.adam_beta1);
  read_field(j, "adam_beta2", cfg.adam_beta2);
  read_field(j, "adam_eps", cfg.adam_eps);
  read_field(j, "seed", cfg.seed);
  cfg.validate();
  return cfg;
}

Json to_json(const EvalResult& r, bool include_timings) {
  Json j;
  j["config"] = to_json(r.config);
  j["val_error"] = r.val_error;
  j["test_accuracy"] = r.test_accuracy;
  j["inference_cost"] = r.inference_cost;
  j["normalized_cost"] = r.normalized_cost;
  j["best_epoch"] = r.best_epoch;
  if (r.gate_heatmap) {
    Json h = Json::array();
    for (std::size_t b = 0; b < r.gate_heatmap->buckets.size(); ++b) {
      h.push_back(Json{{"degree", r.gate_heatmap->buckets[b]}, {"mean_gate", r.gate_heatmap->mean_gate[b]}});
    }
    j["gate_heatmap"] = h;
  }
  if (include_timings) {
    j["wall_times"] = Json{{"pre", r.wall_times.pre}, {"train", r.wall_times.train}, {"post", r.wall_times.post}};
  }
  return j;
}

Json to_json(const Observation& obs, bool include_timings) {
  Json j;
  j["config"] = to_json(obs.config);
  j["objectives"] = obs.objectives;
  j["test_accuracy"] = obs.test_accuracy;
  j["inference_cost"] = obs.inference_cost;
  j["failed"] = obs.failed;
  if (include_timings) j["eval_seconds"] = obs.eval_seconds;
  return j;
}

Json to_json(const SearchResult& result, const Objectives& ref, bool include_timings) {
  Json j;
  j["ref"] = ref;
  Json front = Json::array();
  for (const Observation& o : result.front.members()) {
    front.push_back(Json{{"config", to_json(o.config)}, {"objectives", o.objectives}, {"test_accuracy", o.test_accuracy}});
  }
  j["front"] = front;
  Json history = Json::array();
  for (const Observation& o : result.history) history.push_back(to_json(o, include_timings));
  j["history"] = history;
  j["hv_trace"] = result.hv_trace;
  return j;
}

std::string front_csv(const ParetoFront& front) {
  std::ostringstream os;
  os.precision(17);
  os << "val_error,normalized_cost,test_accuracy,k_pre,ga_pre,ma,k_trans,k_post,ga_post\n";
  auto ga = [](const std::optional<GraphAggregator>& g) { return g ? to_string(*g) : std::string("Unused"); };
  for (const Observation& o : front.members()) {
    os << o.objectives[0] << ',' << o.objectives[1] << ',' << o.test_accuracy << ',' << o.config.k_pre << ','
       << ga(o.config.ga_pre) << ',' << to_string(o.config.ma) << ',' << o.config.k_trans << ','
       << o.config.k_post << ',' << ga(o.config.ga_post) << '\n';
  }
  return os.str();
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw RuntimeFailure("cannot write " + path.string());
}

}  // namespace sgap
