/* Exercises the shared library through its C header only. */
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "congr/congr.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

static int transport_calls = 0;

static int always_down(const char* url, const char* body, int* status, char** reply, void* user) {
  (void)url;
  (void)body;
  (void)status;
  (void)reply;
  (void)user;
  ++transport_calls;
  return 1;
}

static int always_equivalent(const char* url, const char* body, int* status, char** reply, void* user) {
  static const char answer[] = "{\"choices\":[{\"message\":{\"role\":\"assistant\",\"content\":\"Equivalent\"}}]}";
  (void)url;
  (void)body;
  (void)user;
  ++transport_calls;
  *status = 200;
  *reply = malloc(sizeof answer);
  memcpy(*reply, answer, sizeof answer);
  return 0;
}

static void test_tokenize(void) {
  char* json = NULL;
  EXPECT(congr_tokenize("Born on January 27, 1982.", &json) == CONGR_OK);
  EXPECT(strcmp(json, "[\"Born\",\"on\",\"January\",\"27\",\",\",\"1982\",\".\"]") == 0);
  congr_string_free(json);
  EXPECT(congr_tokenize("   ", &json) == CONGR_ERR_EMPTY_RESPONSE);
  EXPECT(strlen(congr_last_error()) > 0);
  EXPECT(congr_tokenize(NULL, &json) == CONGR_ERR_INVALID_ARGUMENT);
}

static void test_pipeline(void) {
  const char* texts[] = {"a b c", "a b c", "a b c", "a b c", "a z b c"};
  congr_response_set* rs = NULL;
  congr_judge* judge = NULL;
  congr_graph* graph = NULL;
  congr_graph* copy = NULL;
  char* json = NULL;
  char* again = NULL;
  char* text = NULL;
  char* result = NULL;
  congr_scoring scoring;
  congr_judge_counters counters;

  EXPECT(congr_response_set_create("p1", "prompt", texts, 5, &rs) == CONGR_OK);
  EXPECT(congr_response_set_size(rs) == 5);
  EXPECT(strcmp(congr_response_set_prompt_id(rs), "p1") == 0);
  EXPECT(congr_judge_create(NULL, &judge) == CONGR_OK);
  congr_scoring_default(&scoring);
  EXPECT(scoring.mismatch == -2);
  EXPECT(congr_graph_build(rs, &scoring, judge, CONGR_TASK_TEXT, &graph) == CONGR_OK);
  EXPECT(congr_graph_validate(graph) == CONGR_OK);
  EXPECT(congr_graph_response_count(graph) == 5);

  EXPECT(congr_graph_reconstruct(graph, 4, &text) == CONGR_OK);
  EXPECT(strcmp(text, "a z b c") == 0);
  congr_string_free(text);
  EXPECT(congr_graph_reconstruct(graph, 5, &text) == CONGR_ERR_INVALID_ARGUMENT);

  EXPECT(congr_graph_to_json(graph, &json) == CONGR_OK);
  EXPECT(congr_graph_from_json(json, &copy) == CONGR_OK);
  EXPECT(congr_graph_to_json(copy, &again) == CONGR_OK);
  EXPECT(strcmp(json, again) == 0);
  congr_string_free(json);
  congr_string_free(again);
  EXPECT(congr_graph_from_json("{\"format\":\"nope\"}", &copy) == CONGR_ERR_FORMAT);
  EXPECT(congr_graph_from_json("not json", &copy) == CONGR_ERR_FORMAT);

  EXPECT(congr_consensus_decode(graph, 0.5, judge, "list", &result) == CONGR_OK);
  EXPECT(strstr(result, "\"outcome\":\"abstain\"") != NULL);
  congr_string_free(result);
  EXPECT(congr_consensus_decode(graph, 2.0, judge, "list", &result) == CONGR_ERR_INVALID_ARGUMENT);

  EXPECT(congr_guided_verify(graph, 0.2, judge, "problem", &result) == CONGR_OK);
  EXPECT(strstr(result, "\"method\":\"guided\"") != NULL);
  congr_string_free(result);

  EXPECT(congr_graph_stats(graph, &json) == CONGR_OK);
  EXPECT(strstr(json, "\"n_nodes\":3") != NULL);
  congr_string_free(json);
  {
    const congr_graph* graphs[] = {graph};
    EXPECT(congr_stats_table(graphs, 1, &json) == CONGR_OK);
    EXPECT(strstr(json, "p1") != NULL);
    congr_string_free(json);
  }
  EXPECT(congr_graph_to_dot(graph, &json) == CONGR_OK);
  EXPECT(strncmp(json, "digraph", 7) == 0);
  congr_string_free(json);

  EXPECT(congr_judge_counters_get(judge, &counters) == CONGR_OK);
  EXPECT(counters.edit == 1);
  EXPECT(counters.transport_calls == 0);

  congr_graph_free(copy);
  congr_graph_free(graph);
  congr_judge_free(judge);
  congr_response_set_free(rs);
}

static void test_errors(void) {
  const char* blank[] = {"fine", " "};
  congr_response_set* rs = NULL;
  double profile[2];
  EXPECT(congr_response_set_create("p", "", blank, 2, &rs) == CONGR_ERR_EMPTY_RESPONSE);
  EXPECT(congr_response_set_from_json("{bad", &rs) == CONGR_ERR_FORMAT);
  EXPECT(congr_response_set_from_json("{\"prompt_id\":\"x\",\"prompt\":\"\",\"responses\":[\"a b\",\"a c\"]}", &rs) ==
         CONGR_OK);
  EXPECT(congr_overlap_profile(rs, 1, 0, 0, profile, 2) == CONGR_OK);
  EXPECT(profile[0] > 0.333 && profile[0] < 0.334);
  EXPECT(congr_overlap_profile(rs, 3, 0, 0, profile, 3) == CONGR_ERR_TOO_SHORT);
  EXPECT(congr_overlap_profile(rs, 3, 0, 0, profile, 2) == CONGR_ERR_INVALID_ARGUMENT);
  congr_response_set_free(rs);
  EXPECT(strcmp(congr_status_name(CONGR_ERR_JUDGE_TRANSPORT), "judge_transport") == 0);
}

static void test_remote_transport(void) {
  congr_judge_options opts;
  congr_judge* judge = NULL;
  congr_response_set* rs = NULL;
  congr_graph* graph = NULL;
  congr_judge_counters counters;
  int eq = 0;
  const char* texts[] = {"s born in Moscow e", "s born in Omsk e"};

  congr_judge_options_default(&opts);
  opts.kind = CONGR_JUDGE_REMOTE;
  opts.api_key = "k";
  opts.backoff_ms = 0;
  EXPECT(congr_judge_create_with_transport(&opts, always_equivalent, NULL, &judge) == CONGR_OK);
  EXPECT(congr_judge_equivalent(judge, "x y", "y z", CONGR_TASK_TEXT, &eq) == CONGR_OK);
  EXPECT(eq == 1);
  EXPECT(congr_judge_equivalent(judge, "forward", "forward", CONGR_TASK_TEXT, &eq) == CONGR_OK);
  EXPECT(congr_judge_counters_get(judge, &counters) == CONGR_OK);
  EXPECT(counters.transport_calls == 1);
  congr_judge_free(judge);

  transport_calls = 0;
  EXPECT(congr_judge_create_with_transport(&opts, always_down, NULL, &judge) == CONGR_OK);
  EXPECT(congr_response_set_create("r", "", texts, 2, &rs) == CONGR_OK);
  EXPECT(congr_graph_build(rs, NULL, judge, CONGR_TASK_TEXT, &graph) == CONGR_ERR_JUDGE_TRANSPORT);
  EXPECT(strstr(congr_last_error(), "region 0") != NULL);
  EXPECT(transport_calls == 4);
  congr_response_set_free(rs);
  congr_judge_free(judge);
}

int main(void) {
  EXPECT(strlen(congr_version()) > 0);
  test_tokenize();
  test_pipeline();
  test_errors();
  test_remote_transport();
  if (failures) {
    fprintf(stderr, "%d failure(s)\n", failures);
    return 1;
  }
  printf("capi: all checks passed\n");
  return 0;
}
