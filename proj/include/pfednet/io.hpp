#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "pfednet/config.hpp"
#include "pfednet/federation.hpp"
#include "pfednet/graph.hpp"
#include "pfednet/train.hpp"

namespace pfednet {

// {"n_nodes": N, "k": k, "edges": [[i, j], ...]}, 1-based.
nlohmann::json network_to_json(const SimilarityNetwork& network);
SimilarityNetwork network_from_json(const nlohmann::json& j);

nlohmann::json federation_to_json(const Federation& federation);
Federation federation_from_json(const nlohmann::json& j);

// x, Z (row-major), ADMM warm-start state, hyperparameters, round, seeds.
nlohmann::json checkpoint_to_json(const FederatedState& state, const RunConfig& config);
FederatedState checkpoint_from_json(const nlohmann::json& j);

// round,client_id,accuracy,objective,uplink_bytes,downlink_bytes
void write_metrics_csv(std::ostream& out, const std::vector<RoundMetrics>& metrics);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);
void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace pfednet
