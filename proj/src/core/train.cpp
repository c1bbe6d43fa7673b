#include "pfednet/train.hpp"

#include <chrono>
#include <random>
#include <string>

#include "pfednet/client.hpp"
#include "pfednet/codec.hpp"
#include "pfednet/error.hpp"

namespace pfednet {

FederatedState initial_state(const ModelPartition& partition, int n_clients) {
  FederatedState state;
  state.x = Vector::Zero(partition.shared_dim());
  state.z = Matrix::Zero(partition.personal_dim(), n_clients);
  return state;
}

namespace {

class Simulation {
 public:
  Simulation(const RunConfig& config, const Federation& federation,
             const SimilarityNetwork& network, const ModelPartition& partition)
      : cfg_(config),
        fed_(federation),
        partition_(partition),
        q_(incidence_matrix(network)),
        n_(federation.n_clients()),
        uplink_(n_, 0),
        downlink_(n_, 0) {
    if (fed_.dim() != partition_.dim()) {
      throw_invalid("partition dimension " + std::to_string(partition_.dim()) +
                    " does not match data dimension " + std::to_string(fed_.dim()));
    }
    if (network.n_nodes != n_) {
      throw_invalid("network has " + std::to_string(network.n_nodes) + " nodes but federation has " +
                    std::to_string(n_) + " clients");
    }
    cer_ = cfg_.cer;
    cer_.eta = cfg_.train.eta;
    if (cer_.gamma > 0.0) workspace_ = CerWorkspace::for_dimension(partition_.dim());
    for (int c = 0; c < n_; ++c) {
      std::seed_seq seq{cfg_.train.seed, static_cast<std::uint64_t>(c)};
      batch_rng_.emplace_back(seq);
    }
  }

  TrainResult run(const MetricsSink& sink) {
    const auto start = std::chrono::steady_clock::now();
    TrainResult result;
    result.state = initial_state(partition_, n_);
    auto& state = result.state;
    const auto hyper = cfg_.train.server_hyper();

    for (int t = 1; t <= cfg_.train.rounds; ++t) {
      state.round = t;
      for (int i = 0; i < cfg_.train.shared_iters; ++i) {
        with_context(t, "shared iteration", i, [&] {
          const Matrix updates = collect_updates(state, result);
          state.x = update_shared(state.x, updates, partition_, cfg_.train.eta);
        });
      }
      for (int j = 0; j < cfg_.train.personal_iters; ++j) {
        with_context(t, "personal iteration", j, [&] {
          const Matrix updates = collect_updates(state, result);
          if (!cfg_.train.warm_start) state.admm.reset();
          state.z = update_personalized(state.z, updates, partition_, q_, hyper, state.admm);
        });
      }
      if (t % cfg_.train.eval_every == 0) emit(state, t, false, start, result, sink);
    }
    emit(state, cfg_.train.rounds, true, start, result, sink);
    return result;
  }

 private:
  template <typename Fn>
  void with_context(int round, const char* phase, int iter, Fn&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      throw Error(e.code(), "round " + std::to_string(round) + ", " + phase + " " +
                                std::to_string(iter) + ": " + e.what());
    }
  }

  // One broadcast + client-update exchange; returns the d x N update matrix
  // as reconstructed by the server.
  Matrix collect_updates(const FederatedState& state, TrainResult& result) {
    Matrix updates(partition_.dim(), n_);
    for (int c = 0; c < n_; ++c) {
      const Vector y = partition_.compose(state.x, state.z.col(c));
      downlink_[c] += encode(cluster_quantize(y, 0.0)).size();
      ++result.downlink_messages;

      const auto& data = fed_.clients[c].train;
      const Vector g = gradient(y, data, c);
      // gamma = 0 makes the CER subproblem a plain gradient step, whose
      // update is g itself.
      const Vector delta = workspace_ ? cer_solve(y, g, cer_, *workspace_).delta : g;

      const auto bytes = encode(cluster_quantize(delta, cfg_.codec.tol));
      uplink_[c] += bytes.size();
      ++result.uplink_messages;
      updates.col(c) = reconstruct(decode(bytes));
    }
    return updates;
  }

  Vector gradient(const Vector& y, const LocalDataset& data, int client) {
    if (cfg_.train.batch_size == 0) return local_gradient(y, data, cfg_.train.loss);
    std::uniform_int_distribution<int> pick(0, data.size() - 1);
    std::vector<int> batch(cfg_.train.batch_size);
    for (int& b : batch) b = pick(batch_rng_[client]);
    return local_gradient(y, data, batch, cfg_.train.loss);
  }

  void emit(const FederatedState& state, int round, bool final,
            std::chrono::steady_clock::time_point start, TrainResult& result,
            const MetricsSink& sink) {
    RoundMetrics m;
    m.round = round;
    m.final = final;
    const auto eval = evaluate(state, partition_, fed_);
    m.client_accuracy = eval.client_accuracy;
    m.mean_accuracy = eval.mean_accuracy;
    m.objective = federated_objective(state, partition_, fed_, q_, cfg_.train.lambda,
                                      cfg_.train.p, cfg_.train.loss);
    m.uplink_bytes = uplink_;
    m.downlink_bytes = downlink_;
    m.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (sink) sink(m);
    result.metrics.push_back(std::move(m));
  }

  const RunConfig& cfg_;
  CerConfig cer_;
  const Federation& fed_;
  const ModelPartition& partition_;
  Matrix q_;
  int n_;
  std::shared_ptr<const CerWorkspace> workspace_;
  std::vector<std::mt19937_64> batch_rng_;
  std::vector<std::uint64_t> uplink_;
  std::vector<std::uint64_t> downlink_;
};

}  // namespace

TrainResult train(const RunConfig& config, const Federation& federation,
                  const SimilarityNetwork& network, const ModelPartition& partition,
                  const MetricsSink& sink) {
  config.validate();
  Simulation sim(config, federation, network, partition);
  return sim.run(sink);
}

double accuracy(const Vector& w, const LocalDataset& data) {
  if (data.size() == 0) throw_invalid("cannot compute accuracy on an empty split");
  if (w.size() != data.dim()) throw_invalid("accuracy: model/data dimension mismatch");
  const Vector scores = data.features * w;
  int correct = 0;
  for (int i = 0; i < data.size(); ++i) {
    const double predicted = scores[i] >= 0.0 ? 1.0 : -1.0;
    if (predicted == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / data.size();
}

Evaluation evaluate(const FederatedState& state, const ModelPartition& partition,
                    const Federation& federation) {
  Evaluation e;
  const int n = federation.n_clients();
  if (state.z.cols() != n) throw_invalid("state has a different client count than the federation");
  for (int c = 0; c < n; ++c) {
    const auto& client = federation.clients[c];
    const auto& split = client.test.size() > 0 ? client.test : client.train;
    e.client_accuracy.push_back(accuracy(partition.compose(state.x, state.z.col(c)), split));
    e.mean_accuracy += e.client_accuracy.back();
  }
  e.mean_accuracy /= n;
  return e;
}

double federated_objective(const FederatedState& state, const ModelPartition& partition,
                           const Federation& federation, const Matrix& q, double lambda,
                           NormOrder p, LossKind loss) {
  const int n = federation.n_clients();
  double total = 0.0;
  for (int c = 0; c < n; ++c) {
    total += local_loss(partition.compose(state.x, state.z.col(c)), federation.clients[c].train,
                        loss);
  }
  return total / n + lambda * fused_norm(state.z, q, p);
}

double max_pairwise_gap(const Matrix& z) {
  double gap = 0.0;
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    for (Eigen::Index j = i + 1; j < z.cols(); ++j) {
      if (z.rows() > 0) gap = std::max(gap, (z.col(i) - z.col(j)).cwiseAbs().maxCoeff());
    }
  }
  return gap;
}

}  // namespace pfednet
