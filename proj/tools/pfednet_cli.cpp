// pfednet command-line driver. Talks to the engine only through the C API.
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pfednet/pfednet.h"

namespace {

struct Handles {
  pfn_config* config = nullptr;
  pfn_federation* federation = nullptr;
  pfn_graph* graph = nullptr;
  pfn_run* run = nullptr;

  ~Handles() {
    pfn_run_free(run);
    pfn_graph_free(graph);
    pfn_federation_free(federation);
    pfn_config_free(config);
  }
};

int check(pfn_status status, const std::string& what) {
  if (status == PFN_OK) return 0;
  std::fprintf(stderr, "pfednet: %s: %s (%s)\n", what.c_str(), pfn_last_error(),
               pfn_status_name(status));
  return 1;
}

int load_config(const std::string& path, const std::vector<std::string>& overrides,
                pfn_config** out) {
  pfn_status st = path.empty() ? pfn_config_parse("{}", out) : pfn_config_load(path.c_str(), out);
  if (int rc = check(st, path.empty() ? "default config" : path)) return rc;
  for (const auto& o : overrides) {
    if (int rc = check(pfn_config_override(*out, o.c_str()), "--set " + o)) return rc;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pfednet: personalized federated learning over a client-similarity network"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pfn_version()));

  std::string config_path;
  std::vector<std::string> overrides;

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic federation file");
  std::string gen_out;
  gen->add_option("-c,--config", config_path, "Run config JSON");
  gen->add_option("--set", overrides, "Override a config key, e.g. federation.delta=4");
  gen->add_option("-o,--out", gen_out, "Output federation JSON")->required();

  auto* graph = app.add_subcommand("build-graph", "Build the KNN similarity network");
  std::string graph_fed, graph_out;
  int graph_k = 0;
  graph->add_option("-c,--config", config_path, "Run config JSON (graph.k)");
  graph->add_option("--set", overrides, "Override a config key");
  graph->add_option("-f,--federation", graph_fed, "Federation JSON")->required();
  graph->add_option("-k", graph_k, "Neighbour count (overrides graph.k)");
  graph->add_option("-o,--out", graph_out, "Output network JSON")->required();

  auto* tr = app.add_subcommand("train", "Train pFedNet and write checkpoint + metrics");
  std::string train_fed, train_graph, train_out;
  tr->add_option("-c,--config", config_path, "Run config JSON")->required();
  tr->add_option("--set", overrides, "Override a config key, e.g. train.lambda=0.5");
  tr->add_option("-f,--federation", train_fed, "Federation JSON")->required();
  tr->add_option("-g,--graph", train_graph, "Network JSON")->required();
  tr->add_option("-o,--out-dir", train_out, "Output directory")->required();

  auto* rep = app.add_subcommand("report", "Aggregate train output directories");
  std::vector<std::string> run_dirs;
  std::string report_key = "gamma";
  std::string report_out;
  rep->add_option("--by", report_key, "Sweep key")->check(CLI::IsMember({"gamma", "lambda"}));
  rep->add_option("-o,--out", report_out, "Output CSV (default stdout)");
  rep->add_option("runs", run_dirs, "Train output directories")->required();

  CLI11_PARSE(app, argc, argv);

  Handles h;
  if (*gen) {
    if (int rc = load_config(config_path, overrides, &h.config)) return rc;
    if (int rc = check(pfn_federation_generate(h.config, &h.federation), "gen-data")) return rc;
    if (int rc = check(pfn_federation_save(h.federation, gen_out.c_str()), gen_out)) return rc;
    std::printf("wrote %d clients (dim %d) to %s\n", pfn_federation_num_clients(h.federation),
                pfn_federation_dim(h.federation), gen_out.c_str());
    return 0;
  }
  if (*graph) {
    if (int rc = check(pfn_federation_load(graph_fed.c_str(), &h.federation), graph_fed)) return rc;
    int k = graph_k;
    if (k == 0) {
      if (config_path.empty() && overrides.empty()) {
        k = 3;
      } else {
        if (int rc = load_config(config_path, overrides, &h.config)) return rc;
        k = pfn_config_graph_k(h.config);
      }
    }
    if (int rc = check(pfn_graph_build(h.federation, k, &h.graph), "build-graph")) return rc;
    if (int rc = check(pfn_graph_save(h.graph, graph_out.c_str()), graph_out)) return rc;
    std::printf("wrote %d nodes, %d edges to %s\n", pfn_graph_num_nodes(h.graph),
                pfn_graph_num_edges(h.graph), graph_out.c_str());
    return 0;
  }
  if (*tr) {
    if (int rc = load_config(config_path, overrides, &h.config)) return rc;
    if (int rc = check(pfn_federation_load(train_fed.c_str(), &h.federation), train_fed)) return rc;
    if (int rc = check(pfn_graph_load(train_graph.c_str(), &h.graph), train_graph)) return rc;
    if (int rc = check(pfn_train(h.config, h.federation, h.graph, train_out.c_str(), &h.run),
                       "train")) {
      return rc;
    }
    std::printf("mean accuracy %.4f, uplink %llu bytes, downlink %llu bytes -> %s\n",
                pfn_run_mean_accuracy(h.run),
                static_cast<unsigned long long>(pfn_run_uplink_bytes(h.run)),
                static_cast<unsigned long long>(pfn_run_downlink_bytes(h.run)), train_out.c_str());
    return 0;
  }
  if (*rep) {
    std::vector<const char*> dirs;
    for (const auto& d : run_dirs) dirs.push_back(d.c_str());
    return check(pfn_report(dirs.data(), dirs.size(), report_key.c_str(),
                            report_out.empty() ? nullptr : report_out.c_str()),
                 "report");
  }
  return 0;
}
