#include "pfednet/pfednet.h"

#include <cstring>
#include <filesystem>
#include <iostream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "pfednet/client.hpp"
#include "pfednet/codec.hpp"
#include "pfednet/config.hpp"
#include "pfednet/error.hpp"
#include "pfednet/federation.hpp"
#include "pfednet/graph.hpp"
#include "pfednet/io.hpp"
#include "pfednet/report.hpp"
#include "pfednet/server.hpp"
#include "pfednet/train.hpp"

struct pfn_config {
  nlohmann::json raw;
  pfednet::RunConfig resolved;
};

struct pfn_federation {
  pfednet::Federation federation;
};

struct pfn_graph {
  pfednet::SimilarityNetwork network;
};

struct pfn_run {
  pfednet::ModelPartition partition;
  pfednet::TrainResult result;
};

namespace {

thread_local std::string g_last_error;

pfn_status fail(pfn_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

pfn_status map_code(pfednet::ErrorCode code) {
  switch (code) {
    case pfednet::ErrorCode::kInvalidArgument: return PFN_ERR_INVALID_ARGUMENT;
    case pfednet::ErrorCode::kIo: return PFN_ERR_IO;
    case pfednet::ErrorCode::kParse: return PFN_ERR_PARSE;
    case pfednet::ErrorCode::kNumeric: return PFN_ERR_NUMERIC;
    case pfednet::ErrorCode::kInternal: return PFN_ERR_INTERNAL;
  }
  return PFN_ERR_INTERNAL;
}

// Runs fn and converts any exception into a status code.
template <typename Fn>
pfn_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const pfednet::Error& e) {
    return fail(map_code(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(PFN_ERR_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PFN_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PFN_ERR_INTERNAL, e.what());
  }
}

#define PFN_REQUIRE(cond, message) \
  do {                             \
    if (!(cond)) return fail(PFN_ERR_INVALID_ARGUMENT, message); \
  } while (0)

Eigen::Map<const pfednet::Vector> view(const double* p, size_t d) {
  return {p, static_cast<Eigen::Index>(d)};
}

}  // namespace

extern "C" {

const char* pfn_version(void) { return "0.1.0"; }

const char* pfn_last_error(void) { return g_last_error.c_str(); }

const char* pfn_status_name(pfn_status status) {
  switch (status) {
    case PFN_OK: return "ok";
    case PFN_ERR_INVALID_ARGUMENT: return "invalid argument";
    case PFN_ERR_IO: return "i/o error";
    case PFN_ERR_PARSE: return "parse error";
    case PFN_ERR_NUMERIC: return "numeric error";
    case PFN_ERR_INTERNAL: return "internal error";
    case PFN_ERR_BUFFER_TOO_SMALL: return "buffer too small";
  }
  return "unknown status";
}

pfn_status pfn_config_parse(const char* json_text, pfn_config** out) {
  PFN_REQUIRE(json_text && out, "pfn_config_parse: null argument");
  return guarded([&] {
    nlohmann::json raw;
    try {
      raw = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
      return fail(PFN_ERR_PARSE, std::string("invalid config JSON: ") + e.what());
    }
    auto cfg = pfednet::RunConfig::from_json(raw);
    *out = new pfn_config{std::move(raw), std::move(cfg)};
    return PFN_OK;
  });
}

pfn_status pfn_config_load(const char* path, pfn_config** out) {
  PFN_REQUIRE(path && out, "pfn_config_load: null argument");
  return guarded([&] {
    auto raw = pfednet::load_json_file(path);
    auto cfg = pfednet::RunConfig::from_json(raw);
    *out = new pfn_config{std::move(raw), std::move(cfg)};
    return PFN_OK;
  });
}

pfn_status pfn_config_override(pfn_config* config, const char* assignment) {
  PFN_REQUIRE(config && assignment, "pfn_config_override: null argument");
  return guarded([&] {
    nlohmann::json raw = config->raw;
    pfednet::apply_override(raw, assignment);
    auto cfg = pfednet::RunConfig::from_json(raw);
    config->raw = std::move(raw);
    config->resolved = std::move(cfg);
    return PFN_OK;
  });
}

pfn_status pfn_config_to_json(const pfn_config* config, char* buf, size_t cap, size_t* len) {
  PFN_REQUIRE(config && len, "pfn_config_to_json: null argument");
  return guarded([&] {
    const std::string text = config->resolved.to_json().dump(2);
    *len = text.size();
    if (!buf) return PFN_OK;
    if (cap < text.size() + 1) return fail(PFN_ERR_BUFFER_TOO_SMALL, "config buffer too small");
    std::memcpy(buf, text.c_str(), text.size() + 1);
    return PFN_OK;
  });
}

int pfn_config_graph_k(const pfn_config* config) {
  return config ? config->resolved.graph_k : 0;
}

void pfn_config_free(pfn_config* config) { delete config; }

pfn_status pfn_federation_generate(const pfn_config* config, pfn_federation** out) {
  PFN_REQUIRE(config && out, "pfn_federation_generate: null argument");
  return guarded([&] {
    *out = new pfn_federation{pfednet::generate_federation(config->resolved.federation)};
    return PFN_OK;
  });
}

pfn_status pfn_federation_load(const char* path, pfn_federation** out) {
  PFN_REQUIRE(path && out, "pfn_federation_load: null argument");
  return guarded([&] {
    auto fed = pfednet::federation_from_json(pfednet::load_json_file(path));
    *out = new pfn_federation{std::move(fed)};
    return PFN_OK;
  });
}

pfn_status pfn_federation_save(const pfn_federation* federation, const char* path) {
  PFN_REQUIRE(federation && path, "pfn_federation_save: null argument");
  return guarded([&] {
    pfednet::write_text_file(path, pfednet::federation_to_json(federation->federation).dump() + "\n");
    return PFN_OK;
  });
}

int pfn_federation_num_clients(const pfn_federation* federation) {
  return federation ? federation->federation.n_clients() : 0;
}

int pfn_federation_dim(const pfn_federation* federation) {
  return federation ? federation->federation.dim() : 0;
}

void pfn_federation_free(pfn_federation* federation) { delete federation; }

pfn_status pfn_graph_build(const pfn_federation* federation, int k, pfn_graph** out) {
  PFN_REQUIRE(federation && out, "pfn_graph_build: null argument");
  return guarded([&] {
    const auto sketches = pfednet::federation_sketches(federation->federation);
    *out = new pfn_graph{pfednet::build_knn_graph(sketches, k)};
    return PFN_OK;
  });
}

pfn_status pfn_graph_load(const char* path, pfn_graph** out) {
  PFN_REQUIRE(path && out, "pfn_graph_load: null argument");
  return guarded([&] {
    *out = new pfn_graph{pfednet::network_from_json(pfednet::load_json_file(path))};
    return PFN_OK;
  });
}

pfn_status pfn_graph_save(const pfn_graph* graph, const char* path) {
  PFN_REQUIRE(graph && path, "pfn_graph_save: null argument");
  return guarded([&] {
    pfednet::write_json_file(path, pfednet::network_to_json(graph->network));
    return PFN_OK;
  });
}

int pfn_graph_num_nodes(const pfn_graph* graph) { return graph ? graph->network.n_nodes : 0; }

int pfn_graph_num_edges(const pfn_graph* graph) { return graph ? graph->network.n_edges() : 0; }

pfn_status pfn_graph_edge(const pfn_graph* graph, int m, int* i, int* j) {
  PFN_REQUIRE(graph && i && j, "pfn_graph_edge: null argument");
  PFN_REQUIRE(m >= 1 && m <= graph->network.n_edges(), "pfn_graph_edge: edge index out of range");
  *i = graph->network.edges[m - 1].first + 1;
  *j = graph->network.edges[m - 1].second + 1;
  return PFN_OK;
}

void pfn_graph_free(pfn_graph* graph) { delete graph; }

pfn_status pfn_train(const pfn_config* config, const pfn_federation* federation,
                     const pfn_graph* graph, const char* out_dir, pfn_run** out) {
  PFN_REQUIRE(config && federation && graph, "pfn_train: null argument");
  return guarded([&] {
    const auto& cfg = config->resolved;
    const auto& fed = federation->federation;
    auto run = std::make_unique<pfn_run>();
    run->partition = cfg.partition.make(fed.dim());
    run->result = pfednet::train(cfg, fed, graph->network, run->partition);

    if (out_dir) {
      namespace fs = std::filesystem;
      std::error_code ec;
      fs::create_directories(out_dir, ec);
      if (ec) {
        return fail(PFN_ERR_IO, std::string("cannot create '") + out_dir + "': " + ec.message());
      }
      const fs::path dir(out_dir);
      pfednet::write_json_file((dir / "checkpoint.json").string(),
                               pfednet::checkpoint_to_json(run->result.state, cfg));
      std::ostringstream csv;
      pfednet::write_metrics_csv(csv, run->result.metrics);
      pfednet::write_text_file((dir / "metrics.csv").string(), csv.str());
      nlohmann::json meta = {
          {"config", cfg.to_json()},
          {"metadata",
           {{"uplink_messages", run->result.uplink_messages},
            {"downlink_messages", run->result.downlink_messages},
            {"wall_seconds", run->result.metrics.back().wall_seconds},
            {"seeds", {{"federation", fed.spec.seed}, {"train", cfg.train.seed}}}}}};
      pfednet::write_json_file((dir / "run.json").string(), meta);
    }
    if (out) *out = run.release();
    return PFN_OK;
  });
}

double pfn_run_mean_accuracy(const pfn_run* run) {
  return run ? run->result.metrics.back().mean_accuracy : 0.0;
}

double pfn_run_max_pairwise_gap(const pfn_run* run) {
  return run ? pfednet::max_pairwise_gap(run->result.state.z) : 0.0;
}

uint64_t pfn_run_uplink_bytes(const pfn_run* run) {
  if (!run) return 0;
  uint64_t total = 0;
  for (auto b : run->result.metrics.back().uplink_bytes) total += b;
  return total;
}

uint64_t pfn_run_downlink_bytes(const pfn_run* run) {
  if (!run) return 0;
  uint64_t total = 0;
  for (auto b : run->result.metrics.back().downlink_bytes) total += b;
  return total;
}

uint64_t pfn_run_uplink_messages(const pfn_run* run) {
  return run ? run->result.uplink_messages : 0;
}

uint64_t pfn_run_downlink_messages(const pfn_run* run) {
  return run ? run->result.downlink_messages : 0;
}

pfn_status pfn_run_client_model(const pfn_run* run, int client, double* out, size_t cap) {
  PFN_REQUIRE(run && out, "pfn_run_client_model: null argument");
  const auto& z = run->result.state.z;
  PFN_REQUIRE(client >= 1 && client <= z.cols(), "pfn_run_client_model: client out of range");
  const auto d = static_cast<size_t>(run->partition.dim());
  if (cap < d) return fail(PFN_ERR_BUFFER_TOO_SMALL, "client model buffer too small");
  return guarded([&] {
    const pfednet::Vector y = run->partition.compose(run->result.state.x, z.col(client - 1));
    std::memcpy(out, y.data(), d * sizeof(double));
    return PFN_OK;
  });
}

void pfn_run_free(pfn_run* run) { delete run; }

pfn_status pfn_report(const char* const* run_dirs, size_t n_runs, const char* key,
                      const char* out_path) {
  PFN_REQUIRE(run_dirs && key && n_runs > 0, "pfn_report: need at least one run directory");
  return guarded([&] {
    const auto report_key = pfednet::parse_report_key(key);
    std::vector<pfednet::RunSummary> runs;
    for (size_t i = 0; i < n_runs; ++i) {
      PFN_REQUIRE(run_dirs[i], "pfn_report: null run directory");
      runs.push_back(pfednet::summarize_run(run_dirs[i]));
    }
    const std::string csv = pfednet::report_csv(std::move(runs), report_key);
    if (out_path) {
      pfednet::write_text_file(out_path, csv);
    } else {
      std::cout << csv << std::flush;
    }
    return PFN_OK;
  });
}

pfn_status pfn_cer_update(const double* y_anchor, const double* g, size_t d, double gamma,
                          double rho, double eta, int inner_iters, double* delta_out) {
  PFN_REQUIRE(y_anchor && g && delta_out && d > 0, "pfn_cer_update: null argument or d == 0");
  return guarded([&] {
    pfednet::CerConfig cfg{gamma, rho, eta, inner_iters};
    const pfednet::Vector delta =
        pfednet::cer_update(view(y_anchor, d), view(g, d), cfg);
    std::memcpy(delta_out, delta.data(), d * sizeof(double));
    return PFN_OK;
  });
}

pfn_status pfn_group_prox(const double* u, size_t d, double threshold, int p, double* out) {
  PFN_REQUIRE(u && out, "pfn_group_prox: null argument");
  return guarded([&] {
    const auto order = pfednet::parse_norm_order(std::to_string(p));
    const pfednet::Vector r = pfednet::group_prox(view(u, d), threshold, order);
    std::memcpy(out, r.data(), d * sizeof(double));
    return PFN_OK;
  });
}

pfn_status pfn_codec_encode(const double* delta, size_t d, double tol, uint8_t* buf, size_t cap,
                            size_t* written) {
  PFN_REQUIRE((delta || d == 0) && written, "pfn_codec_encode: null argument");
  return guarded([&] {
    const auto bytes = pfednet::encode(pfednet::cluster_quantize(view(delta, d), tol));
    *written = bytes.size();
    if (!buf) return PFN_OK;
    if (cap < bytes.size()) return fail(PFN_ERR_BUFFER_TOO_SMALL, "encode buffer too small");
    std::memcpy(buf, bytes.data(), bytes.size());
    return PFN_OK;
  });
}

pfn_status pfn_codec_decode(const uint8_t* bytes, size_t n_bytes, double* out, size_t cap,
                            size_t* d_out) {
  PFN_REQUIRE((bytes || n_bytes == 0) && d_out, "pfn_codec_decode: null argument");
  return guarded([&] {
    const auto cu = pfednet::decode({bytes, n_bytes});
    *d_out = static_cast<size_t>(cu.d);
    if (!out) return PFN_OK;
    if (cap < cu.d) return fail(PFN_ERR_BUFFER_TOO_SMALL, "decode buffer too small");
    const pfednet::Vector v = pfednet::reconstruct(cu);
    std::memcpy(out, v.data(), cu.d * sizeof(double));
    return PFN_OK;
  });
}

pfn_status pfn_size_report(const double* delta_baseline, const double* delta_cer, size_t d,
                           double tol, uint64_t* bytes_baseline, uint64_t* bytes_cer,
                           double* reduction_pct) {
  PFN_REQUIRE(delta_baseline && delta_cer && bytes_baseline && bytes_cer && reduction_pct,
              "pfn_size_report: null argument");
  return guarded([&] {
    const auto r = pfednet::size_report(view(delta_baseline, d), view(delta_cer, d), tol);
    *bytes_baseline = r.bytes_baseline;
    *bytes_cer = r.bytes_cer;
    *reduction_pct = r.reduction_pct;
    return PFN_OK;
  });
}

}  // extern "C"
