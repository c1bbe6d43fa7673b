#pragma once

#include <span>
#include <utility>
#include <vector>

#include "pfednet/types.hpp"

namespace pfednet {

// Per-client data summary: column means followed by population standard
// deviations of the table it was computed from.
struct SketchVector {
  int client_id = 0;
  Vector values;
};

// Undirected client-similarity graph. Node indices are 0-based internally and
// 1-based in the JSON form. Edges are stored with first < second, sorted.
struct SimilarityNetwork {
  int n_nodes = 0;
  int k = 0;
  std::vector<std::pair<int, int>> edges;

  int n_edges() const { return static_cast<int>(edges.size()); }
};

// Rows of `table` are samples, columns are features.
SketchVector compute_sketch(const Matrix& table, int client_id = 0);

// Symmetrized (union) k-nearest-neighbour graph under Euclidean distance.
// Distance ties go to the lower client index.
SimilarityNetwork build_knn_graph(std::span<const SketchVector> sketches, int k);

// Throws if the network violates its invariants (self-loops, duplicates,
// out-of-range nodes, unordered pairs).
void validate_network(const SimilarityNetwork& network);

// N x M incidence matrix: column m has +1 at the lower endpoint of edge m and
// -1 at the upper one.
Matrix incidence_matrix(const SimilarityNetwork& network);

// Degree minus adjacency.
Matrix graph_laplacian(const SimilarityNetwork& network);

}  // namespace pfednet
