#include "pfednet/federation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "pfednet/error.hpp"

namespace pfednet {

void FederationSpec::validate() const {
  if (n_clients < 2) throw_invalid("federation needs n_clients >= 2");
  if (samples_per_client < 2) throw_invalid("samples_per_client must be >= 2");
  if (d_features < 1) throw_invalid("d_features must be >= 1");
  if (shared_features < 0 || shared_features > d_features) {
    throw_invalid("shared_features must lie in [0, d_features]");
  }
  if (!(delta > 0.0) || !std::isfinite(delta)) throw_invalid("delta must be finite and > 0");
  if (n_clusters < 1) throw_invalid("n_clusters must be >= 1");
  if (!cluster_assignment.empty()) {
    if (static_cast<int>(cluster_assignment.size()) != n_clients) {
      throw_invalid("cluster_assignment must list one cluster per client");
    }
    for (int c : cluster_assignment) {
      if (c < 0 || c >= n_clusters) throw_invalid("cluster_assignment entry out of range");
    }
  }
  if (!(noise_std >= 0.0)) throw_invalid("noise_std must be >= 0");
  if (!(weight_scale >= 0.0)) throw_invalid("weight_scale must be >= 0");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw_invalid("test_fraction must lie in [0, 1)");
  }
}

std::vector<int> FederationSpec::resolved_assignment() const {
  if (!cluster_assignment.empty()) return cluster_assignment;
  std::vector<int> out(n_clients);
  for (int n = 0; n < n_clients; ++n) out[n] = n % n_clusters;
  return out;
}

namespace {

Vector gaussian(int size, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(size);
  for (int i = 0; i < size; ++i) v[i] = scale * normal(rng);
  return v;
}

LocalDataset take_rows(const LocalDataset& src, int begin, int count) {
  LocalDataset out;
  out.features = src.features.middleRows(begin, count);
  out.labels = src.labels.segment(begin, count);
  return out;
}

}  // namespace

Federation generate_federation(const FederationSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const int d = spec.d_features;
  const int s = spec.shared_features;
  const int n = spec.samples_per_client;

  const Vector shared_block = gaussian(s, spec.weight_scale, rng);
  std::vector<Vector> cluster_blocks(spec.n_clusters);
  for (int c = 0; c < spec.n_clusters; ++c) {
    cluster_blocks[c] = c % 2 == 1 ? Vector(-cluster_blocks[c - 1])
                                   : gaussian(d - s, spec.weight_scale, rng);
  }

  const auto n_pos = static_cast<int>(std::llround(n / (1.0 + spec.delta)));
  const int n_neg = n - n_pos;
  if (n_pos < 1 || n_neg < 1) {
    throw_invalid("infeasible label unbalance: delta=" + std::to_string(spec.delta) + " with " +
                  std::to_string(n) + " samples leaves an empty class");
  }
  const auto n_test = static_cast<int>(std::llround(spec.test_fraction * n));
  if (n - n_test < 1) throw_invalid("test_fraction leaves no training rows");

  Federation federation;
  federation.spec = spec;
  const auto assignment = spec.resolved_assignment();
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const long max_attempts = 1000L * n;

  for (int client = 0; client < spec.n_clients; ++client) {
    ClientData cd;
    cd.id = client;
    cd.cluster = assignment[client];
    cd.true_weights.resize(d);
    cd.true_weights.head(s) = shared_block;
    cd.true_weights.tail(d - s) = cluster_blocks[cd.cluster];
    if (spec.noise_std > 0.0) cd.true_weights.tail(d - s) += gaussian(d - s, spec.noise_std, rng);

    LocalDataset all;
    all.features.resize(n, d);
    all.labels.resize(n);
    int pos = 0;
    int neg = 0;
    long attempts = 0;
    Vector a(d);
    while (pos + neg < n) {
      if (++attempts > max_attempts) {
        throw_invalid("infeasible label unbalance: could not draw " + std::to_string(n_pos) +
                      " positives and " + std::to_string(n_neg) + " negatives for client " +
                      std::to_string(client + 1));
      }
      for (int j = 0; j < d; ++j) a[j] = unit(rng);
      const double margin = a.dot(cd.true_weights);
      const double p_pos = 1.0 / (1.0 + std::exp(-margin));
      const bool positive = coin(rng) < p_pos;
      if (positive ? pos >= n_pos : neg >= n_neg) continue;
      const int row = pos + neg;
      all.features.row(row) = a.transpose();
      all.labels[row] = positive ? 1.0 : -1.0;
      (positive ? pos : neg) += 1;
    }

    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    LocalDataset shuffled;
    shuffled.features.resize(n, d);
    shuffled.labels.resize(n);
    for (int i = 0; i < n; ++i) {
      shuffled.features.row(i) = all.features.row(perm[i]);
      shuffled.labels[i] = all.labels[perm[i]];
    }
    cd.train = take_rows(shuffled, 0, n - n_test);
    cd.test = take_rows(shuffled, n - n_test, n_test);
    federation.clients.push_back(std::move(cd));
  }
  return federation;
}

Matrix signed_feature_table(const LocalDataset& data) {
  return data.features.array().colwise() * data.labels.array();
}

std::vector<SketchVector> federation_sketches(const Federation& federation) {
  std::vector<SketchVector> sketches;
  sketches.reserve(federation.clients.size());
  for (const auto& c : federation.clients) {
    sketches.push_back(compute_sketch(signed_feature_table(c.train), c.id));
  }
  return sketches;
}

}  // namespace pfednet
