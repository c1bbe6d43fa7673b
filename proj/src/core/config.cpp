#include "pfednet/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "pfednet/error.hpp"

namespace pfednet {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& what) {
  throw Error(ErrorCode::kParse, "config: " + what);
}

// Reads typed keys from one config section and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& root, const std::string& name) : name_(name) {
    if (!root.contains(name)) return;
    node_ = &root.at(name);
    if (!node_->is_object()) schema_error("section '" + name + "' must be an object");
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    known_.insert(key);
    if (!node_ || !node_->contains(key)) return;
    const json& v = node_->at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) schema_error(path(key) + " must be a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) schema_error(path(key) + " must be an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0) {
          schema_error(path(key) + " must be non-negative");
        }
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) schema_error(path(key) + " must be a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) schema_error(path(key) + " must be a string");
    }
    out = v.get<T>();
  }

  void read_int_list(const std::string& key, std::vector<int>& out, int offset) {
    known_.insert(key);
    if (!node_ || !node_->contains(key)) return;
    const json& v = node_->at(key);
    if (!v.is_array()) schema_error(path(key) + " must be an array of integers");
    out.clear();
    for (const auto& e : v) {
      if (!e.is_number_integer()) schema_error(path(key) + " must be an array of integers");
      out.push_back(e.get<int>() - offset);
    }
  }

  bool has(const std::string& key) const { return node_ && node_->contains(key); }
  const json* raw(const std::string& key) {
    known_.insert(key);
    return has(key) ? &node_->at(key) : nullptr;
  }

  void finish() const {
    if (!node_) return;
    for (const auto& [key, value] : node_->items()) {
      if (!known_.count(key)) schema_error("unknown key " + path(key));
    }
  }

 private:
  std::string path(const std::string& key) const { return name_ + "." + key; }

  std::string name_;
  const json* node_ = nullptr;
  std::set<std::string> known_;
};

const std::set<std::string> kSections = {"federation", "graph", "partition",
                                         "train",      "cer",   "codec"};

}  // namespace

void TrainConfig::validate() const {
  if (rounds < 1) throw_invalid("train.rounds must be >= 1");
  if (shared_iters < 0) throw_invalid("train.shared_iters must be >= 0");
  if (personal_iters < 0) throw_invalid("train.personal_iters must be >= 0");
  if (shared_iters + personal_iters < 1) {
    throw_invalid("train.shared_iters + train.personal_iters must be >= 1");
  }
  if (batch_size < 0) throw_invalid("train.batch_size must be >= 0 (0 = full batch)");
  if (eval_every < 1) throw_invalid("train.eval_every must be >= 1");
  server_hyper().validate();
}

ServerHyper TrainConfig::server_hyper() const {
  ServerHyper h;
  h.lambda = lambda;
  h.rho = rho;
  h.eta = eta;
  h.p = p;
  h.admm_iters = admm_iters;
  return h;
}

ModelPartition PartitionConfig::make(int d) const {
  if (split_at) return ModelPartition::split_at(d, *split_at);
  return ModelPartition::from_rows(d, shared, personal);
}

void RunConfig::validate() const {
  federation.validate();
  if (graph_k < 1 || graph_k > federation.n_clients - 1) {
    throw_invalid("graph.k must lie in [1, n_clients - 1]");
  }
  train.validate();
  cer.validate();
  if (!(codec.tol >= 0.0) || !std::isfinite(codec.tol)) throw_invalid("codec.tol must be >= 0");
  partition.make(federation.d_features);
}

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) schema_error("top level must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!kSections.count(key)) schema_error("unknown section '" + key + "'");
  }
  RunConfig cfg;

  Section fed(j, "federation");
  auto& f = cfg.federation;
  fed.read("n_clients", f.n_clients);
  fed.read("samples_per_client", f.samples_per_client);
  fed.read("d_features", f.d_features);
  f.shared_features = f.d_features / 2;
  fed.read("shared_features", f.shared_features);
  fed.read("delta", f.delta);
  fed.read("n_clusters", f.n_clusters);
  fed.read_int_list("cluster_assignment", f.cluster_assignment, 0);
  fed.read("noise_std", f.noise_std);
  fed.read("weight_scale", f.weight_scale);
  fed.read("test_fraction", f.test_fraction);
  fed.read("seed", f.seed);
  fed.finish();

  Section graph(j, "graph");
  graph.read("k", cfg.graph_k);
  graph.finish();

  Section part(j, "partition");
  if (part.has("split_at") && (part.has("shared") || part.has("personal"))) {
    schema_error("partition takes either split_at or shared/personal lists, not both");
  }
  if (part.has("shared") || part.has("personal")) {
    part.read_int_list("shared", cfg.partition.shared, 1);
    part.read_int_list("personal", cfg.partition.personal, 1);
  } else {
    int split = f.shared_features;
    part.read("split_at", split);
    cfg.partition.split_at = split;
  }
  part.finish();

  Section tr(j, "train");
  auto& t = cfg.train;
  tr.read("rounds", t.rounds);
  tr.read("shared_iters", t.shared_iters);
  tr.read("personal_iters", t.personal_iters);
  tr.read("admm_iters", t.admm_iters);
  tr.read("lambda", t.lambda);
  tr.read("rho", t.rho);
  tr.read("eta", t.eta);
  if (const json* p = tr.raw("p")) {
    if (p->is_number_integer()) {
      t.p = parse_norm_order(std::to_string(p->get<long long>()));
    } else if (p->is_string()) {
      t.p = parse_norm_order(p->get<std::string>());
    } else {
      schema_error("train.p must be 1 or 2");
    }
  }
  tr.read("batch_size", t.batch_size);
  tr.read("eval_every", t.eval_every);
  tr.read("seed", t.seed);
  std::string loss = std::string(loss_kind_name(t.loss));
  tr.read("loss", loss);
  t.loss = parse_loss_kind(loss);
  tr.read("warm_start", t.warm_start);
  tr.finish();

  Section cer(j, "cer");
  cer.read("gamma", cfg.cer.gamma);
  cer.read("rho", cfg.cer.rho);
  cer.read("inner_iters", cfg.cer.inner_iters);
  cer.finish();
  cfg.cer.eta = t.eta;

  Section codec(j, "codec");
  codec.read("tol", cfg.codec.tol);
  codec.finish();

  cfg.validate();
  return cfg;
}

json RunConfig::to_json() const {
  json j;
  const auto& f = federation;
  j["federation"] = {{"n_clients", f.n_clients},
                     {"samples_per_client", f.samples_per_client},
                     {"d_features", f.d_features},
                     {"shared_features", f.shared_features},
                     {"delta", f.delta},
                     {"n_clusters", f.n_clusters},
                     {"cluster_assignment", f.resolved_assignment()},
                     {"noise_std", f.noise_std},
                     {"weight_scale", f.weight_scale},
                     {"test_fraction", f.test_fraction},
                     {"seed", f.seed}};
  j["graph"] = {{"k", graph_k}};
  if (partition.split_at) {
    j["partition"] = {{"split_at", *partition.split_at}};
  } else {
    json shared = json::array();
    json personal = json::array();
    for (int r : partition.shared) shared.push_back(r + 1);
    for (int r : partition.personal) personal.push_back(r + 1);
    j["partition"] = {{"shared", shared}, {"personal", personal}};
  }
  j["train"] = {{"rounds", train.rounds},
                {"shared_iters", train.shared_iters},
                {"personal_iters", train.personal_iters},
                {"admm_iters", train.admm_iters},
                {"lambda", train.lambda},
                {"rho", train.rho},
                {"eta", train.eta},
                {"p", norm_order_value(train.p)},
                {"batch_size", train.batch_size},
                {"eval_every", train.eval_every},
                {"seed", train.seed},
                {"loss", std::string(loss_kind_name(train.loss))},
                {"warm_start", train.warm_start}};
  j["cer"] = {{"gamma", cer.gamma}, {"rho", cer.rho}, {"inner_iters", cer.inner_iters}};
  j["codec"] = {{"tol", codec.tol}};
  return j;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, "invalid JSON in '" + path + "': " + e.what());
  }
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw_invalid("override '" + assignment + "' must look like section.key=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);

  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }

  json* node = &config;
  std::stringstream parts(path);
  std::string part;
  std::vector<std::string> keys;
  while (std::getline(parts, part, '.')) {
    if (part.empty()) throw_invalid("override path '" + path + "' has an empty component");
    keys.push_back(part);
  }
  if (keys.size() < 2) throw_invalid("override path '" + path + "' must be section.key");
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    if (!node->is_object()) throw_invalid("override path '" + path + "' crosses a non-object");
    node = &(*node)[keys[i]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object()) throw_invalid("override path '" + path + "' crosses a non-object");
  (*node)[keys.back()] = std::move(value);
}

}  // namespace pfednet
