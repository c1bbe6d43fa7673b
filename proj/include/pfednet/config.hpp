#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pfednet/client.hpp"
#include "pfednet/federation.hpp"
#include "pfednet/partition.hpp"
#include "pfednet/server.hpp"

namespace pfednet {

struct TrainConfig {
  int rounds = 20;           // T
  int shared_iters = 1;      // I
  int personal_iters = 1;    // J
  int admm_iters = 50;       // K
  double lambda = 0.1;
  double rho = 1.0;
  double eta = 0.5;
  NormOrder p = NormOrder::kL2;
  int batch_size = 0;  // 0 = full batch
  int eval_every = 5;
  std::uint64_t seed = 1;
  LossKind loss = LossKind::kLogistic;
  bool warm_start = true;

  void validate() const;
  ServerHyper server_hyper() const;
};

struct PartitionConfig {
  std::optional<int> split_at;
  std::vector<int> shared;    // 0-based
  std::vector<int> personal;  // 0-based

  ModelPartition make(int d) const;
};

struct CodecConfig {
  double tol = 1e-6;
};

// One run, as read from the JSON config sections
// {federation, graph, partition, train, cer, codec}.
struct RunConfig {
  FederationSpec federation;
  int graph_k = 3;
  PartitionConfig partition;
  TrainConfig train;
  CerConfig cer;  // eta is ignored; training uses train.eta
  CodecConfig codec;

  void validate() const;

  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

nlohmann::json load_json_file(const std::string& path);

// Applies "section.key=value"; value is parsed as JSON, falling back to a
// plain string.
void apply_override(nlohmann::json& config, const std::string& assignment);

}  // namespace pfednet
