/*
 * congr.h - C interface to the consensus graph library.
 *
 * All objects are opaque handles created and released through this API.
 * Functions return a congr_status; on failure congr_last_error() gives a
 * message for the calling thread. Strings handed out by the library must be
 * released with congr_string_free().
 */
#ifndef CONGR_H
#define CONGR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CONGR_BUILDING_LIBRARY)
#    define CONGR_API __declspec(dllexport)
#  else
#    define CONGR_API __declspec(dllimport)
#  endif
#elif defined(__GNUC__) || defined(__clang__)
#  define CONGR_API __attribute__((visibility("default")))
#else
#  define CONGR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum congr_status {
  CONGR_OK = 0,
  CONGR_ERR_INVALID_ARGUMENT = 1,
  CONGR_ERR_EMPTY_RESPONSE = 2,
  CONGR_ERR_EMPTY_SEQUENCE = 3,
  CONGR_ERR_DUPLICATE_RESPONSE = 4,
  CONGR_ERR_JUDGE_PARSE = 5,
  CONGR_ERR_JUDGE_TRANSPORT = 6,
  CONGR_ERR_TOO_SHORT = 7,
  CONGR_ERR_FORMAT = 8,
  CONGR_ERR_IO = 9,
  CONGR_ERR_INTERNAL = 10
} congr_status;

typedef enum congr_judge_kind {
  CONGR_JUDGE_OFFLINE = 0,
  CONGR_JUDGE_REMOTE = 1
} congr_judge_kind;

typedef enum congr_task_kind {
  CONGR_TASK_TEXT = 0,
  CONGR_TASK_MATH = 1
} congr_task_kind;

typedef struct congr_response_set congr_response_set;
typedef struct congr_judge congr_judge;
typedef struct congr_graph congr_graph;

typedef struct congr_scoring {
  int match;
  int mismatch;
  int gap_open;
  int gap_extend;
} congr_scoring;

typedef struct congr_judge_options {
  congr_judge_kind kind;
  const char* base_url;   /* remote only; NULL for the default */
  const char* model;      /* remote only; NULL for the default */
  const char* api_key;    /* remote only; NULL reads CONGR_API_KEY */
  const char* cache_path; /* NULL keeps verdicts in memory */
  int max_retries;
  int backoff_ms;
} congr_judge_options;

typedef struct congr_judge_counters {
  size_t equivalence;
  size_t edit;
  size_t verify;
  size_t synthesize;
  size_t cache_hits;
  size_t provider_calls;
  size_t transport_calls;
} congr_judge_counters;

/*
 * Replacement transport for remote judges. Receives the request URL and JSON
 * body; fills *status and *reply (allocated with malloc, freed by the
 * library). Returning nonzero reports the service as unreachable.
 */
typedef int (*congr_transport_fn)(const char* url, const char* body, int* status, char** reply,
                                  void* user_data);

CONGR_API const char* congr_version(void);
CONGR_API const char* congr_last_error(void);
CONGR_API const char* congr_status_name(congr_status status);
CONGR_API void congr_string_free(char* s);

CONGR_API void congr_scoring_default(congr_scoring* out);
CONGR_API void congr_judge_options_default(congr_judge_options* out);

/* Corpus */
CONGR_API congr_status congr_tokenize(const char* text, char** tokens_json);
CONGR_API congr_status congr_response_set_from_json(const char* json_line, congr_response_set** out);
CONGR_API congr_status congr_response_set_create(const char* prompt_id, const char* prompt,
                                                 const char* const* responses, size_t count,
                                                 congr_response_set** out);
CONGR_API void congr_response_set_free(congr_response_set* rs);
CONGR_API const char* congr_response_set_prompt_id(const congr_response_set* rs);
CONGR_API size_t congr_response_set_size(const congr_response_set* rs);

/* Judge */
CONGR_API congr_status congr_judge_create(const congr_judge_options* options, congr_judge** out);
CONGR_API congr_status congr_judge_create_with_transport(const congr_judge_options* options,
                                                         congr_transport_fn transport,
                                                         void* user_data, congr_judge** out);
CONGR_API void congr_judge_free(congr_judge* judge);
CONGR_API congr_status congr_judge_counters_get(const congr_judge* judge, congr_judge_counters* out);
CONGR_API congr_status congr_judge_equivalent(congr_judge* judge, const char* a, const char* b,
                                              congr_task_kind task, int* equivalent);
CONGR_API congr_status congr_cache_info(const char* cache_path, char** info_json);

/* Graph construction and I/O */
CONGR_API congr_status congr_graph_build(const congr_response_set* rs, const congr_scoring* scoring,
                                         congr_judge* judge, congr_task_kind task,
                                         congr_graph** out);
CONGR_API congr_status congr_graph_from_json(const char* json, congr_graph** out);
CONGR_API void congr_graph_free(congr_graph* graph);
CONGR_API const char* congr_graph_prompt_id(const congr_graph* graph);
CONGR_API size_t congr_graph_response_count(const congr_graph* graph);
CONGR_API congr_status congr_graph_to_json(const congr_graph* graph, char** json);
CONGR_API congr_status congr_graph_to_dot(const congr_graph* graph, char** dot);
CONGR_API congr_status congr_graph_reconstruct(const congr_graph* graph, size_t response_index,
                                               char** text);
/* Returns CONGR_OK when all invariants hold; otherwise CONGR_ERR_FORMAT with
 * the violations in congr_last_error(). */
CONGR_API congr_status congr_graph_validate(const congr_graph* graph);

/* Decoding; results are one JSON object each. */
CONGR_API congr_status congr_consensus_decode(const congr_graph* graph, double tau,
                                              congr_judge* judge, const char* task_label,
                                              char** result_json);
CONGR_API congr_status congr_guided_verify(const congr_graph* graph, double kappa,
                                           congr_judge* judge, const char* problem,
                                           char** result_json);

/* Statistics */
CONGR_API congr_status congr_graph_stats(const congr_graph* graph, char** stats_json);
CONGR_API congr_status congr_stats_table(const congr_graph* const* graphs, size_t count,
                                         char** table);
CONGR_API congr_status congr_overlap_profile(const congr_response_set* rs, size_t n_quantiles,
                                             int shuffle_baseline, uint64_t seed, double* out,
                                             size_t out_len);

#ifdef __cplusplus
}
#endif

#endif /* CONGR_H */
