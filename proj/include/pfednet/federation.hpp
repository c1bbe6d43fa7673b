#pragma once

#include <cstdint>
#include <vector>

#include "pfednet/client.hpp"
#include "pfednet/graph.hpp"

namespace pfednet {

// Synthetic heterogeneous federation. Each latent cluster owns a ground-truth
// logistic weight vector whose first `shared_features` entries are common to
// all clusters.
struct FederationSpec {
  int n_clients = 5;
  int samples_per_client = 200;
  int d_features = 10;
  int shared_features = 5;
  double delta = 1.0;  // n_negative / n_positive
  int n_clusters = 2;
  std::vector<int> cluster_assignment;  // empty: round-robin over n_clusters
  double noise_std = 0.0;
  double weight_scale = 3.0;
  double test_fraction = 0.2;
  std::uint64_t seed = 1;

  void validate() const;
  std::vector<int> resolved_assignment() const;
};

struct ClientData {
  int id = 0;
  int cluster = 0;
  LocalDataset train;
  LocalDataset test;
  Vector true_weights;
};

struct Federation {
  FederationSpec spec;
  std::vector<ClientData> clients;

  int n_clients() const { return static_cast<int>(clients.size()); }
  int dim() const { return clients.empty() ? 0 : clients.front().train.dim(); }
};

Federation generate_federation(const FederationSpec& spec);

// Rows y_i * a_i. Sketching this table captures how labels co-vary with
// features without exposing either.
Matrix signed_feature_table(const LocalDataset& data);

std::vector<SketchVector> federation_sketches(const Federation& federation);

}  // namespace pfednet
