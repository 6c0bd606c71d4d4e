#ifndef SEPNE_H
#define SEPNE_H

/* C interface to the sepne embedding library. All entry points return a
 * status code; on failure sepne_last_error() describes what went wrong for
 * the calling thread. Objects are opaque handles created into an out
 * parameter (left untouched on failure) and released with their _free
 * function; NULL is safe to free. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sepne_status {
  SEPNE_OK = 0,
  SEPNE_ERROR_INVALID_ARGUMENT = 1,
  SEPNE_ERROR_DATA = 2,
  SEPNE_ERROR_NUMERIC = 3,
  SEPNE_ERROR_INTERNAL = 4
} sepne_status;

typedef struct sepne_graph sepne_graph;
typedef struct sepne_landmarks sepne_landmarks;
typedef struct sepne_partition sepne_partition;
typedef struct sepne_result sepne_result;

/* Message of the last failure on this thread; empty string if none. */
const char* sepne_last_error(void);

/* ---- graph ---- */

/* Parses a "src dst" edge list ('#' comments; an optional third token must
 * equal 1). symmetrize forces an undirected view of a directed list. */
sepne_status sepne_graph_load(const char* path, int directed, int symmetrize,
                              sepne_graph** out);
void sepne_graph_free(sepne_graph* graph);
uint32_t sepne_graph_node_count(const sepne_graph* graph);
uint64_t sepne_graph_edge_count(const sepne_graph* graph);

/* ---- landmark selection ---- */

/* strategy: "dd" (top degrees), "dp" (degree-weighted sample),
 * "uf" (uniform sample), "gds" (greedy dominating set; may select fewer
 * than k nodes). */
sepne_status sepne_landmarks_select(const sepne_graph* graph, const char* strategy, size_t k,
                                    uint64_t seed, sepne_landmarks** out);
/* One node label per line. */
sepne_status sepne_landmarks_load(const sepne_graph* graph, const char* path,
                                  sepne_landmarks** out);
sepne_status sepne_landmarks_write(const sepne_graph* graph, const sepne_landmarks* landmarks,
                                   const char* path);
size_t sepne_landmarks_count(const sepne_landmarks* landmarks);
void sepne_landmarks_free(sepne_landmarks* landmarks);

/* ---- partition ---- */

sepne_status sepne_partition_louvain(const sepne_graph* graph, const sepne_landmarks* landmarks,
                                     uint64_t seed, size_t max_set_size, sepne_partition** out);
sepne_status sepne_partition_random(const sepne_graph* graph, const sepne_landmarks* landmarks,
                                    size_t num_sets, uint64_t seed, sepne_partition** out);
/* requested_path: one node label per line; only those nodes are embedded. */
sepne_status sepne_partition_interested(const sepne_graph* graph,
                                        const sepne_landmarks* landmarks,
                                        const char* requested_path, size_t max_set_size,
                                        sepne_partition** out);
/* path: "node_label set_index" lines. */
sepne_status sepne_partition_load(const sepne_graph* graph, const sepne_landmarks* landmarks,
                                  const char* path, sepne_partition** out);
size_t sepne_partition_set_count(const sepne_partition* partition);
size_t sepne_partition_node_count(const sepne_partition* partition);
size_t sepne_partition_dropped_count(const sepne_partition* partition);
void sepne_partition_free(sepne_partition* partition);

/* ---- parameters ---- */

typedef struct sepne_params {
  size_t d;          /* embedding dimension */
  size_t k;          /* landmark count; must match the landmark set */
  double lambda;     /* weight of the complement-coupling terms */
  double eta;        /* ridge weight, must be positive */
  size_t iters;      /* alternating iterations */
  int second_order;  /* nonzero: M = T + T^2; zero: M = I + T */
  int early_stop;    /* stop a section when relative improvement < 1e-7 */
  size_t workers;    /* concurrent sections; 0 means single-threaded */
  int best_effort;   /* drop failing sections instead of aborting */
} sepne_params;

/* Document-network defaults: d=128, k=200, lambda=0.4, eta=0.1, iters=100,
 * second-order proximity, 1 worker. */
void sepne_params_init(sepne_params* params);

/* ---- embedding pipeline ---- */

sepne_status sepne_embed(const sepne_graph* graph, const sepne_partition* partition,
                         const sepne_landmarks* landmarks, const sepne_params* params,
                         sepne_result** out);
size_t sepne_result_rows(const sepne_result* result);
size_t sepne_result_dim(const sepne_result* result);
const char* sepne_result_label(const sepne_result* result, size_t row);
/* Copies one embedding (or context) row into out[0..dim). */
sepne_status sepne_result_vector(const sepne_result* result, size_t row, double* out);
sepne_status sepne_result_context_vector(const sepne_result* result, size_t row, double* out);
double sepne_result_preparation_seconds(const sepne_result* result);
double sepne_result_optimization_seconds(const sepne_result* result);

/* Writers record their paths so a later manifest reflects them. */
sepne_status sepne_result_write_text(sepne_result* result, const char* path, int context);
sepne_status sepne_result_write_binary(sepne_result* result, const char* path, int context);
sepne_status sepne_result_write_manifest(const sepne_result* result, const char* path);
void sepne_result_free(sepne_result* result);

/* ---- evaluation ---- */

/* method: "sepne" (louvain partition over the same seed), "nystrom", or
 * "svd" (exact rank-d oracle; refuses graphs beyond 20,000 nodes). Scores
 * the reconstruction of the full proximity matrix. */
sepne_status sepne_eval_reconstruction(const sepne_graph* graph, const sepne_params* params,
                                       const char* method, const char* landmark_strategy,
                                       uint64_t seed, double* r_all, double* r_nz);

/* Embeddings from a file written by this library; binary_format selects the
 * reader. Labels: "node_label class_id" lines. Returns micro-F1 on the test
 * side of a stratified split, averaged over 10 seeded runs. */
sepne_status sepne_classify(const char* embeddings_path, int binary_format,
                            const char* labels_path, double train_fraction, uint64_t seed,
                            double* micro_f1);

#ifdef __cplusplus
}
#endif

#endif /* SEPNE_H */
