#ifndef QKDNET_H
#define QKDNET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum QkdStatus {
  QKD_STATUS_OK = 0,
  QKD_STATUS_NULL_POINTER = 1,
  QKD_STATUS_INVALID_ARGUMENT = 2,
  QKD_STATUS_DISCONNECTED = 3,
  QKD_STATUS_IO = 4,
  QKD_STATUS_PARSE = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  QKD_STATUS_INTERNAL = 6,
} QkdStatus;

typedef enum QkdProfile {
  QKD_PROFILE_HOT = 0,
  QKD_PROFILE_COLD = 1,
} QkdProfile;

typedef enum QkdSolution {
  QKD_SOLUTION_BB84_UNCOOLED = 0,
  QKD_SOLUTION_BB84_COOLED = 1,
  QKD_SOLUTION_TF_UNCOOLED = 2,
  QKD_SOLUTION_TF_COOLED = 3,
} QkdSolution;

/**
 * Capacities of the four solutions on one graph.
 */
typedef struct QkdAnalysis QkdAnalysis;

typedef struct QkdGraph QkdGraph;

/**
 * Twin-field rate evaluator with a private memo table.
 */
typedef struct QkdTfModel QkdTfModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *qkd_version(void);

/**
 * Message for the last failed call on this thread, or NULL. Valid until the
 * next call into the library from the same thread.
 */
const char *qkd_last_error(void);

/**
 * Release a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void qkd_string_free(char *s);

/**
 * Decoy BB84 secret key rate in bits/s for `loss_db` of channel loss.
 *
 * # Safety
 * `out_bits_per_s` must be NULL or valid for writes.
 */
enum QkdStatus qkd_bb84_rate(double loss_db, enum QkdProfile profile, double *out_bits_per_s);

/**
 * # Safety
 * `out_model` must be NULL or valid for writes.
 */
enum QkdStatus qkd_tf_model_new(enum QkdProfile profile, struct QkdTfModel **out_model);

/**
 * Twin-field secret key rate in bits/s for the two arm losses in dB.
 * Losses are rounded to 0.01 dB.
 *
 * # Safety
 * `model` must be a live handle; `out_bits_per_s` must be NULL or valid for
 * writes.
 */
enum QkdStatus qkd_tf_model_rate(const struct QkdTfModel *model,
                                 double loss_a_db,
                                 double loss_b_db,
                                 double *out_bits_per_s);

/**
 * # Safety
 * `model` must be NULL or a live handle; it is invalid afterwards.
 */
void qkd_tf_model_free(struct QkdTfModel *model);

/**
 * Random network in a square box. Node ids below `n_sources` are sources.
 *
 * # Safety
 * `out_graph` must be NULL or valid for writes.
 */
enum QkdStatus qkd_graph_generate(double box_km,
                                  size_t n_sources,
                                  size_t n_candidates,
                                  double mean_degree,
                                  uint64_t seed,
                                  struct QkdGraph **out_graph);

/**
 * # Safety
 * `json` must be NULL or a NUL-terminated string; `out_graph` must be NULL or
 * valid for writes.
 */
enum QkdStatus qkd_graph_from_json(const char *json, struct QkdGraph **out_graph);

/**
 * Serialise a graph. The string is released with [`qkd_string_free`].
 *
 * # Safety
 * `graph` must be a live handle; `out_json` must be NULL or valid for writes.
 */
enum QkdStatus qkd_graph_to_json(const struct QkdGraph *graph, char **out_json);

/**
 * Number of nodes, or 0 for NULL.
 *
 * # Safety
 * `graph` must be NULL or a live handle.
 */
size_t qkd_graph_node_count(const struct QkdGraph *graph);

/**
 * Number of edges, or 0 for NULL.
 *
 * # Safety
 * `graph` must be NULL or a live handle.
 */
size_t qkd_graph_edge_count(const struct QkdGraph *graph);

/**
 * # Safety
 * `graph` must be NULL or a live handle; it is invalid afterwards.
 */
void qkd_graph_free(struct QkdGraph *graph);

/**
 * Capacities of all four solutions with `n_bob` cooled detector sites and
 * `switch_db` of loss per switch traversal. Fibre loss is 0.2 dB/km.
 *
 * # Safety
 * `graph` must be a live handle; `out_analysis` must be NULL or valid for
 * writes.
 */
enum QkdStatus qkd_analysis_new(const struct QkdGraph *graph,
                                double switch_db,
                                size_t n_bob,
                                struct QkdAnalysis **out_analysis);

/**
 * Network capacity of one solution in bits/s.
 *
 * # Safety
 * `analysis` must be a live handle; `out_bits_per_s` must be NULL or valid
 * for writes.
 */
enum QkdStatus qkd_analysis_capacity(const struct QkdAnalysis *analysis,
                                     enum QkdSolution solution,
                                     double *out_bits_per_s);

/**
 * Number of source pairs with zero capacity under one solution.
 *
 * # Safety
 * `analysis` must be a live handle; `out_count` must be NULL or valid for
 * writes.
 */
enum QkdStatus qkd_analysis_zero_pairs(const struct QkdAnalysis *analysis,
                                       enum QkdSolution solution,
                                       size_t *out_count);

/**
 * Copy the chosen detector node ids into `buf`. `out_len` receives the full
 * count even when `capacity` is too small, in which case nothing is copied
 * and the status is `QKD_STATUS_INVALID_ARGUMENT`.
 *
 * # Safety
 * `analysis` must be a live handle; `buf` must be valid for `capacity`
 * writes (or NULL when `capacity` is 0); `out_len` must be valid for writes.
 */
enum QkdStatus qkd_analysis_detectors(const struct QkdAnalysis *analysis,
                                      size_t *buf,
                                      size_t capacity,
                                      size_t *out_len);

/**
 * # Safety
 * `analysis` must be NULL or a live handle; it is invalid afterwards.
 */
void qkd_analysis_free(struct QkdAnalysis *analysis);

/**
 * Run a full sweep and write `results.json`, `fractions.csv` and
 * `ratios.csv` into the existing directory `out_dir`. A NULL `config_json`
 * uses the defaults.
 *
 * # Safety
 * Both arguments must be NULL or NUL-terminated strings.
 */
enum QkdStatus qkd_simulate(const char *config_json, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QKDNET_H */
