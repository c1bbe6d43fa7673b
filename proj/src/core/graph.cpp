#include "pfednet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "pfednet/error.hpp"

namespace pfednet {

SketchVector compute_sketch(const Matrix& table, int client_id) {
  if (table.rows() == 0) throw_invalid("empty client dataset");
  if (!table.allFinite()) throw_invalid("client dataset contains non-finite values");

  const auto n = static_cast<double>(table.rows());
  const auto d = table.cols();
  SketchVector sketch;
  sketch.client_id = client_id;
  sketch.values.resize(2 * d);
  for (Eigen::Index c = 0; c < d; ++c) {
    const double mean = table.col(c).sum() / n;
    const double var = (table.col(c).array() - mean).square().sum() / n;
    sketch.values[c] = mean;
    sketch.values[d + c] = std::sqrt(var);
  }
  return sketch;
}

SimilarityNetwork build_knn_graph(std::span<const SketchVector> sketches, int k) {
  const int n = static_cast<int>(sketches.size());
  if (n < 2) throw_invalid("similarity network needs at least 2 clients, got " + std::to_string(n));
  if (k < 1 || k > n - 1) {
    throw_invalid("k must lie in [1, " + std::to_string(n - 1) + "], got " + std::to_string(k));
  }
  const auto len = sketches.front().values.size();
  for (const auto& s : sketches) {
    if (s.values.size() != len) throw_invalid("sketch lengths differ across clients");
    if (!s.values.allFinite()) throw_invalid("sketch contains non-finite values");
  }

  std::set<std::pair<int, int>> edges;
  std::vector<std::pair<double, int>> candidates;
  candidates.reserve(n - 1);
  for (int i = 0; i < n; ++i) {
    candidates.clear();
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      candidates.emplace_back((sketches[i].values - sketches[j].values).squaredNorm(), j);
    }
    // Pair ordering gives (distance, index), i.e. ties go to the lower index.
    std::partial_sort(candidates.begin(), candidates.begin() + k, candidates.end());
    for (int m = 0; m < k; ++m) {
      const int j = candidates[m].second;
      edges.emplace(std::min(i, j), std::max(i, j));
    }
  }

  SimilarityNetwork network;
  network.n_nodes = n;
  network.k = k;
  network.edges.assign(edges.begin(), edges.end());
  return network;
}

void validate_network(const SimilarityNetwork& network) {
  if (network.n_nodes < 1) throw_invalid("network must have at least one node");
  std::set<std::pair<int, int>> seen;
  for (const auto& [i, j] : network.edges) {
    if (i < 0 || j < 0 || i >= network.n_nodes || j >= network.n_nodes) {
      throw_invalid("edge (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
                    ") references a node outside [1, " + std::to_string(network.n_nodes) + "]");
    }
    if (i == j) throw_invalid("self-loop at node " + std::to_string(i + 1));
    if (i > j) {
      throw_invalid("edge (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
                    ") must be listed with i < j");
    }
    if (!seen.emplace(i, j).second) {
      throw_invalid("duplicate edge (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
                    ")");
    }
  }
}

Matrix incidence_matrix(const SimilarityNetwork& network) {
  validate_network(network);
  Matrix q = Matrix::Zero(network.n_nodes, network.n_edges());
  for (int m = 0; m < network.n_edges(); ++m) {
    q(network.edges[m].first, m) = 1.0;
    q(network.edges[m].second, m) = -1.0;
  }
  return q;
}

Matrix graph_laplacian(const SimilarityNetwork& network) {
  validate_network(network);
  Matrix lap = Matrix::Zero(network.n_nodes, network.n_nodes);
  for (const auto& [i, j] : network.edges) {
    lap(i, i) += 1.0;
    lap(j, j) += 1.0;
    lap(i, j) -= 1.0;
    lap(j, i) -= 1.0;
  }
  return lap;
}

}  // namespace pfednet
