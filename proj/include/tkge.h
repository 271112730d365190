#ifndef TKGE_H
#define TKGE_H

/* C interface to the tkge shared library: knowledge-graph embeddings on
 * the torus (plus the flat translation baseline), margin-loss SGD
 * training, and filtered link-prediction evaluation.
 *
 * Every fallible call returns a tkge_status; on anything but TKGE_OK a
 * human-readable message is available from tkge_last_error() until the
 * next failing call on the same thread. Objects returned through **out
 * parameters are owned by the caller and released with the matching
 * _free function. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tkge_status {
  TKGE_OK = 0,
  TKGE_INVALID_ARGUMENT = 1, /* bad parameter or inconsistent inputs */
  TKGE_IO_ERROR = 2,         /* missing/unreadable/unwritable file */
  TKGE_PARSE_ERROR = 3,      /* malformed text input */
  TKGE_FORMAT_ERROR = 4,     /* binary/structured file layout mismatch */
  TKGE_STATE_ERROR = 5,      /* operation invalid for the object's state */
  TKGE_INTERNAL_ERROR = 6    /* anything else; should not happen */
} tkge_status;

/* Numeric values match the model file encoding. */
typedef enum tkge_model_kind {
  TKGE_MODEL_TORUSE = 0,
  TKGE_MODEL_TRANSE = 1
} tkge_model_kind;

typedef enum tkge_score_kind {
  TKGE_SCORE_L1 = 0,
  TKGE_SCORE_L2 = 1,
  TKGE_SCORE_EL2 = 2,
  TKGE_SCORE_L2SQ = 3
} tkge_score_kind;

/* Library version, e.g. "0.1.0". Static storage; never freed. */
const char* tkge_version(void);

/* Message for the most recent failure on the calling thread; empty
 * string if none. The pointer stays valid until the next failing call
 * on the same thread. */
const char* tkge_last_error(void);

typedef struct tkge_dataset tkge_dataset;
typedef struct tkge_model tkge_model;
typedef struct tkge_report tkge_report;

/* -------- datasets -------- */

/* Loads the three tab-separated split files (head, relation, tail per
 * line). Vocabulary ids follow first appearance across train, valid and
 * test, in that order. */
tkge_status tkge_dataset_load(const char* train_path, const char* valid_path,
                              const char* test_path, tkge_dataset** out);
void tkge_dataset_free(tkge_dataset* dataset);

size_t tkge_dataset_num_entities(const tkge_dataset* dataset);
size_t tkge_dataset_num_relations(const tkge_dataset* dataset);
size_t tkge_dataset_num_train(const tkge_dataset* dataset);
size_t tkge_dataset_num_valid(const tkge_dataset* dataset);
size_t tkge_dataset_num_test(const tkge_dataset* dataset);

/* Writes the vocabulary (entity and relation names, id order) as JSON. */
tkge_status tkge_dataset_write_vocabulary(const tkge_dataset* dataset,
                                          const char* path);

/* -------- training -------- */

typedef struct tkge_train_config {
  tkge_model_kind model_kind;
  tkge_score_kind score_kind;
  uint32_t dimension;
  double margin;
  double learning_rate;
  uint32_t epochs;
  uint32_t groups;          /* triple groups per epoch */
  uint64_t seed;            /* fixes the whole run, byte for byte */
  int filter_negatives;     /* nonzero: redraw negatives that collide
                             * with a training triple (bounded retries) */
} tkge_train_config;

/* The library defaults: torus model, L1 score, dimension 50, margin 2,
 * learning rate 0.01, 100 epochs, 100 groups, seed 0, no filtering. */
tkge_train_config tkge_train_config_default(void);

typedef struct tkge_epoch_stats {
  uint64_t epoch;      /* 0-based */
  double loss;         /* summed hinge terms over the epoch */
  uint64_t violations; /* steps with a positive hinge */
  double seconds;      /* wall clock for the epoch, excluding loading */
} tkge_epoch_stats;

/* Fires once per finished epoch, in order, on the training thread. */
typedef void (*tkge_epoch_callback)(const tkge_epoch_stats* stats, void* user);

tkge_status tkge_train(const tkge_dataset* dataset,
                       const tkge_train_config* config,
                       tkge_epoch_callback callback, void* user,
                       tkge_model** out);

/* One metrics line, {"epoch":..,"loss":..,"violations":..,"seconds":..}.
 * Thread-local buffer, overwritten by the next call on the same thread. */
const char* tkge_epoch_stats_json(const tkge_epoch_stats* stats);

/* -------- models -------- */

tkge_status tkge_model_save(const tkge_model* model, const char* path);
tkge_status tkge_model_load(const char* path, tkge_model** out);
void tkge_model_free(tkge_model* model);

tkge_model_kind tkge_model_get_kind(const tkge_model* model);
tkge_score_kind tkge_model_get_score_kind(const tkge_model* model);
size_t tkge_model_dimension(const tkge_model* model);
size_t tkge_model_num_entities(const tkge_model* model);
size_t tkge_model_num_relations(const tkge_model* model);

/* Borrowed pointer to one embedding row (length == dimension), valid as
 * long as the model lives. NULL when the id is out of range. */
const double* tkge_model_entity_row(const tkge_model* model, size_t id);
const double* tkge_model_relation_row(const tkge_model* model, size_t id);

/* -------- evaluation -------- */

/* Ranks head and tail replacements for every test triple. Pass NULL/0
 * cutoffs for the default HITS@{1,3,10}. num_threads spreads the ranking
 * work; the report is identical for any thread count. The model and
 * dataset must agree on entity and relation counts. */
tkge_status tkge_evaluate(const tkge_model* model, const tkge_dataset* dataset,
                          const int* hits_cutoffs, size_t num_cutoffs,
                          size_t num_threads, tkge_report** out);
void tkge_report_free(tkge_report* report);

double tkge_report_mrr_raw(const tkge_report* report);
double tkge_report_mrr_filtered(const tkge_report* report);
size_t tkge_report_num_predictions(const tkge_report* report);
/* TKGE_INVALID_ARGUMENT when the cutoff was not requested. */
tkge_status tkge_report_hits(const tkge_report* report, int cutoff,
                             double* out);

/* Serialized reports; the dataset supplies relation names. A zero
 * include_per_relation drops the per-relation breakdown. The returned
 * string is heap-allocated; release it with tkge_string_free. */
tkge_status tkge_report_json(const tkge_report* report,
                             const tkge_dataset* dataset,
                             int include_per_relation, char** out);
tkge_status tkge_report_text(const tkge_report* report,
                             const tkge_dataset* dataset,
                             int include_per_relation, char** out);
void tkge_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif /* TKGE_H */
