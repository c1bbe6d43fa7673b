/* C interface to the pfednet personalized federated learning engine.
 *
 * All functions return a pfn_status; on failure pfn_last_error() returns a
 * thread-local message describing the most recent error on the calling
 * thread. Objects are opaque handles released with their *_free function.
 * Node and client indices are 1-based at this boundary. */
#ifndef PFEDNET_PFEDNET_H
#define PFEDNET_PFEDNET_H

#include <stddef.h>
#include <stdint.h>

#if defined(PFEDNET_BUILDING_LIBRARY)
#define PFEDNET_API __attribute__((visibility("default")))
#else
#define PFEDNET_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pfn_status {
  PFN_OK = 0,
  PFN_ERR_INVALID_ARGUMENT = 1,
  PFN_ERR_IO = 2,
  PFN_ERR_PARSE = 3,
  PFN_ERR_NUMERIC = 4,
  PFN_ERR_INTERNAL = 5,
  PFN_ERR_BUFFER_TOO_SMALL = 6
} pfn_status;

typedef struct pfn_config pfn_config;
typedef struct pfn_federation pfn_federation;
typedef struct pfn_graph pfn_graph;
typedef struct pfn_run pfn_run;

PFEDNET_API const char* pfn_version(void);
PFEDNET_API const char* pfn_last_error(void);
PFEDNET_API const char* pfn_status_name(pfn_status status);

/* Run configuration: JSON with sections federation, graph, partition, train,
 * cer, codec. Missing keys take defaults; unknown keys are rejected. */
PFEDNET_API pfn_status pfn_config_load(const char* path, pfn_config** out);
PFEDNET_API pfn_status pfn_config_parse(const char* json_text, pfn_config** out);
/* "section.key=value"; the value is parsed as JSON, else taken as a string.
 * The config is re-validated and left unchanged on failure. */
PFEDNET_API pfn_status pfn_config_override(pfn_config* config, const char* assignment);
/* Resolved config as JSON. With buf == NULL only *len is set. */
PFEDNET_API pfn_status pfn_config_to_json(const pfn_config* config, char* buf, size_t cap,
                                          size_t* len);
/* Neighbour count from the graph section. */
PFEDNET_API int pfn_config_graph_k(const pfn_config* config);
PFEDNET_API void pfn_config_free(pfn_config* config);

PFEDNET_API pfn_status pfn_federation_generate(const pfn_config* config, pfn_federation** out);
PFEDNET_API pfn_status pfn_federation_load(const char* path, pfn_federation** out);
PFEDNET_API pfn_status pfn_federation_save(const pfn_federation* federation, const char* path);
PFEDNET_API int pfn_federation_num_clients(const pfn_federation* federation);
PFEDNET_API int pfn_federation_dim(const pfn_federation* federation);
PFEDNET_API void pfn_federation_free(pfn_federation* federation);

/* KNN similarity network over per-client sketches. */
PFEDNET_API pfn_status pfn_graph_build(const pfn_federation* federation, int k, pfn_graph** out);
PFEDNET_API pfn_status pfn_graph_load(const char* path, pfn_graph** out);
PFEDNET_API pfn_status pfn_graph_save(const pfn_graph* graph, const char* path);
PFEDNET_API int pfn_graph_num_nodes(const pfn_graph* graph);
PFEDNET_API int pfn_graph_num_edges(const pfn_graph* graph);
PFEDNET_API pfn_status pfn_graph_edge(const pfn_graph* graph, int m, int* i, int* j);
PFEDNET_API void pfn_graph_free(pfn_graph* graph);

/* Trains and, when out_dir is non-NULL, writes checkpoint.json, metrics.csv
 * and run.json there (the directory is created if needed). `out` may be
 * NULL. */
PFEDNET_API pfn_status pfn_train(const pfn_config* config, const pfn_federation* federation,
                                 const pfn_graph* graph, const char* out_dir, pfn_run** out);
PFEDNET_API double pfn_run_mean_accuracy(const pfn_run* run);
PFEDNET_API double pfn_run_max_pairwise_gap(const pfn_run* run);
PFEDNET_API uint64_t pfn_run_uplink_bytes(const pfn_run* run);
PFEDNET_API uint64_t pfn_run_downlink_bytes(const pfn_run* run);
PFEDNET_API uint64_t pfn_run_uplink_messages(const pfn_run* run);
PFEDNET_API uint64_t pfn_run_downlink_messages(const pfn_run* run);
/* Client model y = Mx + Nz for client `client` (1-based); cap >= dim. */
PFEDNET_API pfn_status pfn_run_client_model(const pfn_run* run, int client, double* out,
                                            size_t cap);
PFEDNET_API void pfn_run_free(pfn_run* run);

/* Aggregates train output directories into a CSV keyed by "gamma" or
 * "lambda". Writes to out_path, or to stdout when out_path is NULL. */
PFEDNET_API pfn_status pfn_report(const char* const* run_dirs, size_t n_runs, const char* key,
                                  const char* out_path);

/* Communication-efficient client update: returns (y_anchor - v) / eta. */
PFEDNET_API pfn_status pfn_cer_update(const double* y_anchor, const double* g, size_t d,
                                      double gamma, double rho, double eta, int inner_iters,
                                      double* delta_out);
/* p in {1, 2}. */
PFEDNET_API pfn_status pfn_group_prox(const double* u, size_t d, double threshold, int p,
                                      double* out);

/* Cluster-quantizes and encodes an update. With buf == NULL only *written is
 * set; a short buffer yields PFN_ERR_BUFFER_TOO_SMALL with the needed size. */
PFEDNET_API pfn_status pfn_codec_encode(const double* delta, size_t d, double tol, uint8_t* buf,
                                        size_t cap, size_t* written);
/* Decodes into out (reconstructed values); *d_out receives the dimension. */
PFEDNET_API pfn_status pfn_codec_decode(const uint8_t* bytes, size_t n_bytes, double* out,
                                        size_t cap, size_t* d_out);
PFEDNET_API pfn_status pfn_size_report(const double* delta_baseline, const double* delta_cer,
                                       size_t d, double tol, uint64_t* bytes_baseline,
                                       uint64_t* bytes_cer, double* reduction_pct);

#ifdef __cplusplus
}
#endif

#endif /* PFEDNET_PFEDNET_H */
