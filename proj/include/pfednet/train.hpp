#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pfednet/config.hpp"
#include "pfednet/federation.hpp"
#include "pfednet/graph.hpp"
#include "pfednet/partition.hpp"
#include "pfednet/server.hpp"

namespace pfednet {

struct FederatedState {
  Vector x;  // d1
  Matrix z;  // d2 x N
  int round = 0;
  AdmmZState admm;
};

struct RoundMetrics {
  int round = 0;
  bool final = false;
  std::vector<double> client_accuracy;
  double mean_accuracy = 0.0;
  double objective = 0.0;
  // Cumulative per client.
  std::vector<std::uint64_t> uplink_bytes;
  std::vector<std::uint64_t> downlink_bytes;
  double wall_seconds = 0.0;
};

struct TrainResult {
  FederatedState state;
  std::vector<RoundMetrics> metrics;
  std::uint64_t uplink_messages = 0;
  std::uint64_t downlink_messages = 0;
};

using MetricsSink = std::function<void(const RoundMetrics&)>;

FederatedState initial_state(const ModelPartition& partition, int n_clients);

TrainResult train(const RunConfig& config, const Federation& federation,
                  const SimilarityNetwork& network, const ModelPartition& partition,
                  const MetricsSink& sink = {});

// Fraction of rows where sign(a^T w) matches the label (margin 0 predicts +1).
double accuracy(const Vector& w, const LocalDataset& data);

struct Evaluation {
  std::vector<double> client_accuracy;
  double mean_accuracy = 0.0;
};

// Accuracy of each client's composed model on its held-out split.
Evaluation evaluate(const FederatedState& state, const ModelPartition& partition,
                    const Federation& federation);

// (1/N) sum_n f_n(Mx + N z_n; train_n) + lambda ||ZQ||_{1,p}
double federated_objective(const FederatedState& state, const ModelPartition& partition,
                           const Federation& federation, const Matrix& q, double lambda,
                           NormOrder p, LossKind loss);

// max_{i<j} ||z_i - z_j||_inf over columns of z.
double max_pairwise_gap(const Matrix& z);

}  // namespace pfednet
