#include "pfednet/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "pfednet/error.hpp"

namespace pfednet {

using nlohmann::json;

namespace {

[[noreturn]] void format_error(const std::string& what) { throw Error(ErrorCode::kParse, what); }

const json& field(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) format_error(where + ": missing field '" + key + "'");
  return j.at(key);
}

int int_field(const json& j, const std::string& key, const std::string& where) {
  const json& v = field(j, key, where);
  if (!v.is_number_integer()) format_error(where + ": field '" + key + "' must be an integer");
  return v.get<int>();
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from(const json& j, const std::string& where) {
  if (!j.is_array()) format_error(where + " must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) format_error(where + " must be an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

// {"rows": r, "cols": c, "data": [row-major]}
json matrix_json(const Matrix& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from(const json& j, const std::string& where) {
  const int rows = int_field(j, "rows", where);
  const int cols = int_field(j, "cols", where);
  if (rows < 0 || cols < 0) format_error(where + ": negative matrix shape");
  const Vector data = vector_from(field(j, "data", where), where + ".data");
  if (data.size() != static_cast<Eigen::Index>(rows) * cols) {
    format_error(where + ": data has " + std::to_string(data.size()) + " entries, expected " +
                 std::to_string(static_cast<long>(rows) * cols));
  }
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = data[static_cast<Eigen::Index>(r) * cols + c];
  }
  return m;
}

json dataset_json(const LocalDataset& d) {
  json rows = json::array();
  for (int i = 0; i < d.size(); ++i) rows.push_back(vector_json(d.features.row(i).transpose()));
  return {{"features", rows}, {"labels", vector_json(d.labels)}};
}

LocalDataset dataset_from(const json& j, int dim, const std::string& where) {
  const json& rows = field(j, "features", where);
  if (!rows.is_array()) format_error(where + ".features must be an array of rows");
  LocalDataset d;
  d.labels = vector_from(field(j, "labels", where), where + ".labels");
  if (d.labels.size() != static_cast<Eigen::Index>(rows.size())) {
    format_error(where + ": " + std::to_string(rows.size()) + " feature rows but " +
                 std::to_string(d.labels.size()) + " labels");
  }
  d.features.resize(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Vector row = vector_from(rows[i], where + ".features[" + std::to_string(i) + "]");
    if (row.size() != dim) {
      format_error(where + ".features[" + std::to_string(i) + "] has " +
                   std::to_string(row.size()) + " entries, expected " + std::to_string(dim));
    }
    d.features.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return d;
}

}  // namespace

json network_to_json(const SimilarityNetwork& network) {
  json edges = json::array();
  for (const auto& [i, j] : network.edges) edges.push_back({i + 1, j + 1});
  return {{"n_nodes", network.n_nodes}, {"k", network.k}, {"edges", edges}};
}

SimilarityNetwork network_from_json(const json& j) {
  const std::string where = "graph";
  SimilarityNetwork net;
  net.n_nodes = int_field(j, "n_nodes", where);
  net.k = int_field(j, "k", where);
  const json& edges = field(j, "edges", where);
  if (!edges.is_array()) format_error("graph: 'edges' must be an array of [i, j] pairs");
  for (std::size_t m = 0; m < edges.size(); ++m) {
    const json& e = edges[m];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
        !e[1].is_number_integer()) {
      format_error("graph: edges[" + std::to_string(m) + "] must be a pair of integers");
    }
    net.edges.emplace_back(e[0].get<int>() - 1, e[1].get<int>() - 1);
  }
  try {
    validate_network(net);
  } catch (const Error& e) {
    format_error(std::string("graph: ") + e.what());
  }
  return net;
}

json federation_to_json(const Federation& federation) {
  const auto& s = federation.spec;
  json j;
  j["spec"] = {{"n_clients", s.n_clients},
               {"samples_per_client", s.samples_per_client},
               {"d_features", s.d_features},
               {"shared_features", s.shared_features},
               {"delta", s.delta},
               {"n_clusters", s.n_clusters},
               {"cluster_assignment", s.resolved_assignment()},
               {"noise_std", s.noise_std},
               {"weight_scale", s.weight_scale},
               {"test_fraction", s.test_fraction},
               {"seed", s.seed}};
  j["dim"] = federation.dim();
  json clients = json::array();
  for (const auto& c : federation.clients) {
    clients.push_back({{"id", c.id + 1},
                       {"cluster", c.cluster},
                       {"true_weights", vector_json(c.true_weights)},
                       {"train", dataset_json(c.train)},
                       {"test", dataset_json(c.test)}});
  }
  j["clients"] = clients;
  return j;
}

Federation federation_from_json(const json& j) {
  Federation fed;
  const json& spec = field(j, "spec", "federation");
  try {
    auto& s = fed.spec;
    s.n_clients = spec.at("n_clients").get<int>();
    s.samples_per_client = spec.at("samples_per_client").get<int>();
    s.d_features = spec.at("d_features").get<int>();
    s.shared_features = spec.at("shared_features").get<int>();
    s.delta = spec.at("delta").get<double>();
    s.n_clusters = spec.at("n_clusters").get<int>();
    s.cluster_assignment = spec.at("cluster_assignment").get<std::vector<int>>();
    s.noise_std = spec.at("noise_std").get<double>();
    s.weight_scale = spec.at("weight_scale").get<double>();
    s.test_fraction = spec.at("test_fraction").get<double>();
    s.seed = spec.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    format_error(std::string("federation.spec: ") + e.what());
  }
  const int dim = int_field(j, "dim", "federation");
  if (dim < 1) format_error("federation: dim must be positive");
  const json& clients = field(j, "clients", "federation");
  if (!clients.is_array() || clients.size() < 2) {
    format_error("federation: 'clients' must be an array with at least 2 entries");
  }
  for (std::size_t n = 0; n < clients.size(); ++n) {
    const std::string where = "federation.clients[" + std::to_string(n) + "]";
    const json& cj = clients[n];
    ClientData c;
    c.id = int_field(cj, "id", where) - 1;
    if (c.id != static_cast<int>(n)) format_error(where + ": ids must be 1..N in order");
    c.cluster = int_field(cj, "cluster", where);
    c.true_weights = vector_from(field(cj, "true_weights", where), where + ".true_weights");
    c.train = dataset_from(field(cj, "train", where), dim, where + ".train");
    c.test = dataset_from(field(cj, "test", where), dim, where + ".test");
    if (c.train.size() < 1) format_error(where + ": empty training split");
    fed.clients.push_back(std::move(c));
  }
  return fed;
}

json checkpoint_to_json(const FederatedState& state, const RunConfig& config) {
  json j;
  j["round"] = state.round;
  j["x"] = vector_json(state.x);
  j["z"] = matrix_json(state.z);
  if (state.admm.initialized()) {
    j["admm"] = {{"w", matrix_json(state.admm.w())}, {"omega", matrix_json(state.admm.omega())}};
  } else {
    j["admm"] = nullptr;
  }
  j["hyper"] = {{"lambda", config.train.lambda},
                {"rho", config.train.rho},
                {"eta", config.train.eta},
                {"p", norm_order_value(config.train.p)},
                {"admm_iters", config.train.admm_iters},
                {"gamma", config.cer.gamma},
                {"cer_rho", config.cer.rho},
                {"cer_inner_iters", config.cer.inner_iters}};
  j["seeds"] = {{"federation", config.federation.seed}, {"train", config.train.seed}};
  return j;
}

FederatedState checkpoint_from_json(const json& j) {
  FederatedState state;
  state.round = int_field(j, "round", "checkpoint");
  state.x = vector_from(field(j, "x", "checkpoint"), "checkpoint.x");
  state.z = matrix_from(field(j, "z", "checkpoint"), "checkpoint.z");
  const json& admm = field(j, "admm", "checkpoint");
  if (!admm.is_null()) {
    const Matrix w = matrix_from(field(admm, "w", "checkpoint.admm"), "checkpoint.admm.w");
    state.admm.initialize(state.z, Matrix::Zero(state.z.cols(), w.cols()));
    state.admm.w() = w;
    state.admm.omega() =
        matrix_from(field(admm, "omega", "checkpoint.admm"), "checkpoint.admm.omega");
  }
  return state;
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_metrics_csv(std::ostream& out, const std::vector<RoundMetrics>& metrics) {
  out << "round,client_id,accuracy,objective,uplink_bytes,downlink_bytes\n";
  for (const auto& m : metrics) {
    const std::string round = m.final ? "final" : std::to_string(m.round);
    std::uint64_t up_total = 0;
    std::uint64_t down_total = 0;
    for (std::size_t c = 0; c < m.client_accuracy.size(); ++c) {
      out << round << ',' << c + 1 << ',' << fmt_double(m.client_accuracy[c]) << ','
          << fmt_double(m.objective) << ',' << m.uplink_bytes[c] << ',' << m.downlink_bytes[c]
          << '\n';
      up_total += m.uplink_bytes[c];
      down_total += m.downlink_bytes[c];
    }
    out << round << ",mean," << fmt_double(m.mean_accuracy) << ',' << fmt_double(m.objective)
        << ',' << up_total << ',' << down_total << '\n';
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out << contents;
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path + "' failed");
}

void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace pfednet
