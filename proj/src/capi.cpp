#include "congr/congr.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "congr/decode.hpp"
#include "congr/error.hpp"
#include "congr/serialize.hpp"
#include "congr/stats.hpp"

struct congr_response_set {
  congr::ResponseSet value;
};

struct congr_judge {
  std::unique_ptr<congr::Judge> judge;
  std::shared_ptr<congr::RemoteProvider> remote;
};

struct congr_graph {
  congr::ConsensusGraph value;
};

namespace {

thread_local std::string last_error;

congr_status code_of(congr::ErrorCode code) {
  using congr::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return CONGR_ERR_INVALID_ARGUMENT;
    case ErrorCode::EmptyResponse: return CONGR_ERR_EMPTY_RESPONSE;
    case ErrorCode::EmptySequence: return CONGR_ERR_EMPTY_SEQUENCE;
    case ErrorCode::DuplicateResponse: return CONGR_ERR_DUPLICATE_RESPONSE;
    case ErrorCode::JudgeParse: return CONGR_ERR_JUDGE_PARSE;
    case ErrorCode::JudgeTransport: return CONGR_ERR_JUDGE_TRANSPORT;
    case ErrorCode::RegionJudge: return CONGR_ERR_JUDGE_TRANSPORT;
    case ErrorCode::TooShort: return CONGR_ERR_TOO_SHORT;
    case ErrorCode::Format: return CONGR_ERR_FORMAT;
    case ErrorCode::Io: return CONGR_ERR_IO;
  }
  return CONGR_ERR_INTERNAL;
}

template <class F>
congr_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return CONGR_OK;
  } catch (const congr::RegionJudgeError& e) {
    last_error = e.what();
    return code_of(e.cause());
  } catch (const congr::Error& e) {
    last_error = e.what();
    return code_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return CONGR_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return CONGR_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return CONGR_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw congr::Error(congr::ErrorCode::InvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

congr::TaskKind task_of(congr_task_kind task) {
  return task == CONGR_TASK_MATH ? congr::TaskKind::Math : congr::TaskKind::Text;
}

class CallbackTransport : public congr::Transport {
 public:
  CallbackTransport(congr_transport_fn fn, void* user) : fn_(fn), user_(user) {}

  congr::HttpReply post(const std::string& url, const std::string& body,
                        const std::vector<std::pair<std::string, std::string>>&) override {
    int status = 0;
    char* reply = nullptr;
    int rc = fn_(url.c_str(), body.c_str(), &status, &reply, user_);
    std::string text = reply ? reply : "";
    std::free(reply);
    if (rc != 0) throw congr::Error(congr::ErrorCode::JudgeTransport, "transport callback reported failure");
    return {status, std::move(text)};
  }

 private:
  congr_transport_fn fn_;
  void* user_;
};

void make_judge(const congr_judge_options* options, std::shared_ptr<congr::Transport> transport,
                congr_judge** out) {
  require(out != nullptr, "out is null");
  congr_judge_options opts;
  congr_judge_options_default(&opts);
  if (options) opts = *options;
  auto cache = opts.cache_path && *opts.cache_path ? std::make_shared<congr::VerdictCache>(opts.cache_path)
                                                   : std::make_shared<congr::VerdictCache>();
  auto handle = std::make_unique<congr_judge>();
  std::shared_ptr<congr::Provider> provider;
  if (opts.kind == CONGR_JUDGE_REMOTE) {
    congr::RemoteConfig config;
    if (opts.base_url) config.base_url = opts.base_url;
    if (opts.model) config.model = opts.model;
    if (opts.api_key) {
      config.api_key = opts.api_key;
    } else if (const char* env = std::getenv("CONGR_API_KEY")) {
      config.api_key = env;
    }
    require(opts.max_retries >= 0 && opts.backoff_ms >= 0, "retry settings must be non-negative");
    config.max_retries = opts.max_retries;
    config.backoff_ms = opts.backoff_ms;
    if (!transport) transport = std::make_shared<congr::HttpTransport>();
    handle->remote = std::make_shared<congr::RemoteProvider>(config, transport);
    provider = handle->remote;
  } else {
    require(opts.kind == CONGR_JUDGE_OFFLINE, "unknown judge kind");
    provider = std::make_shared<congr::OfflineProvider>();
  }
  handle->judge = std::make_unique<congr::Judge>(provider, cache);
  *out = handle.release();
}

}  // namespace

extern "C" {

const char* congr_version(void) { return "1.0.0"; }

const char* congr_last_error(void) { return last_error.c_str(); }

const char* congr_status_name(congr_status status) {
  switch (status) {
    case CONGR_OK: return "ok";
    case CONGR_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case CONGR_ERR_EMPTY_RESPONSE: return "empty_response";
    case CONGR_ERR_EMPTY_SEQUENCE: return "empty_sequence";
    case CONGR_ERR_DUPLICATE_RESPONSE: return "duplicate_response";
    case CONGR_ERR_JUDGE_PARSE: return "judge_parse";
    case CONGR_ERR_JUDGE_TRANSPORT: return "judge_transport";
    case CONGR_ERR_TOO_SHORT: return "too_short";
    case CONGR_ERR_FORMAT: return "format";
    case CONGR_ERR_IO: return "io";
    case CONGR_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void congr_string_free(char* s) { std::free(s); }

void congr_scoring_default(congr_scoring* out) {
  if (!out) return;
  congr::ScoringParams p;
  *out = {p.match, p.mismatch, p.gap_open, p.gap_extend};
}

void congr_judge_options_default(congr_judge_options* out) {
  if (!out) return;
  congr::RemoteConfig c;
  *out = {CONGR_JUDGE_OFFLINE, nullptr, nullptr, nullptr, nullptr, c.max_retries, c.backoff_ms};
}

congr_status congr_tokenize(const char* text, char** tokens_json) {
  return guarded([&] {
    require(text && tokens_json, "null argument");
    *tokens_json = dup_string(nlohmann::json(congr::tokenize(text)).dump());
  });
}

congr_status congr_response_set_from_json(const char* json_line, congr_response_set** out) {
  return guarded([&] {
    require(json_line && out, "null argument");
    *out = new congr_response_set{congr::ResponseSet::from_json_line(json_line)};
  });
}

congr_status congr_response_set_create(const char* prompt_id, const char* prompt, const char* const* responses,
                                       size_t count, congr_response_set** out) {
  return guarded([&] {
    require(out && (responses || count == 0), "null argument");
    std::vector<std::string> texts;
    for (size_t i = 0; i < count; ++i) {
      require(responses[i] != nullptr, "null response");
      texts.emplace_back(responses[i]);
    }
    *out = new congr_response_set{
        congr::ResponseSet::make(prompt_id ? prompt_id : "", prompt ? prompt : "", std::move(texts))};
  });
}

void congr_response_set_free(congr_response_set* rs) { delete rs; }

const char* congr_response_set_prompt_id(const congr_response_set* rs) {
  return rs ? rs->value.prompt_id.c_str() : nullptr;
}

size_t congr_response_set_size(const congr_response_set* rs) { return rs ? rs->value.m() : 0; }

congr_status congr_judge_create(const congr_judge_options* options, congr_judge** out) {
  return guarded([&] { make_judge(options, nullptr, out); });
}

congr_status congr_judge_create_with_transport(const congr_judge_options* options, congr_transport_fn transport,
                                               void* user_data, congr_judge** out) {
  return guarded([&] {
    require(transport != nullptr, "transport is null");
    make_judge(options, std::make_shared<CallbackTransport>(transport, user_data), out);
  });
}

void congr_judge_free(congr_judge* judge) { delete judge; }

congr_status congr_judge_counters_get(const congr_judge* judge, congr_judge_counters* out) {
  return guarded([&] {
    require(judge && out, "null argument");
    auto c = judge->judge->counters();
    *out = {c.equivalence, c.edit, c.verify, c.synthesize, c.cache_hits, c.provider_calls,
            judge->remote ? judge->remote->transport_calls() : 0};
  });
}

congr_status congr_judge_equivalent(congr_judge* judge, const char* a, const char* b, congr_task_kind task,
                                    int* equivalent) {
  return guarded([&] {
    require(judge && a && b && equivalent, "null argument");
    *equivalent = judge->judge->equivalent(a, b, task_of(task)) ? 1 : 0;
  });
}

congr_status congr_cache_info(const char* cache_path, char** info_json) {
  return guarded([&] {
    require(cache_path && info_json, "null argument");
    *info_json = dup_string(congr::VerdictCache::summarize(cache_path).dump());
  });
}

congr_status congr_graph_build(const congr_response_set* rs, const congr_scoring* scoring, congr_judge* judge,
                               congr_task_kind task, congr_graph** out) {
  return guarded([&] {
    require(rs && judge && out, "null argument");
    congr::ScoringParams params;
    if (scoring) params = {scoring->match, scoring->mismatch, scoring->gap_open, scoring->gap_extend};
    params.validate();
    *out = new congr_graph{congr::build_consensus_graph(rs->value, params, *judge->judge, task_of(task))};
  });
}

congr_status congr_graph_from_json(const char* json, congr_graph** out) {
  return guarded([&] {
    require(json && out, "null argument");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(json);
    } catch (const std::exception& e) {
      throw congr::Error(congr::ErrorCode::Format, std::string("graph is not valid JSON: ") + e.what());
    }
    *out = new congr_graph{congr::graph_from_json(doc)};
  });
}

void congr_graph_free(congr_graph* graph) { delete graph; }

const char* congr_graph_prompt_id(const congr_graph* graph) {
  return graph ? graph->value.prompt_id.c_str() : nullptr;
}

size_t congr_graph_response_count(const congr_graph* graph) { return graph ? graph->value.m : 0; }

congr_status congr_graph_to_json(const congr_graph* graph, char** json) {
  return guarded([&] {
    require(graph && json, "null argument");
    *json = dup_string(congr::graph_to_json(graph->value).dump());
  });
}

congr_status congr_graph_to_dot(const congr_graph* graph, char** dot) {
  return guarded([&] {
    require(graph && dot, "null argument");
    *dot = dup_string(congr::graph_to_dot(graph->value));
  });
}

congr_status congr_graph_reconstruct(const congr_graph* graph, size_t response_index, char** text) {
  return guarded([&] {
    require(graph && text, "null argument");
    require(response_index < graph->value.m, "response index out of range");
    *text = dup_string(graph->value.reconstruct(response_index));
  });
}

congr_status congr_graph_validate(const congr_graph* graph) {
  return guarded([&] {
    require(graph != nullptr, "null argument");
    auto problems = graph->value.check_invariants();
    if (!problems.empty()) {
      std::string msg;
      for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
      throw congr::Error(congr::ErrorCode::Format, msg);
    }
  });
}

congr_status congr_consensus_decode(const congr_graph* graph, double tau, congr_judge* judge, const char* task_label,
                                    char** result_json) {
  return guarded([&] {
    require(graph && judge && result_json, "null argument");
    require(tau >= 0.0 && tau <= 1.0, "tau must lie in [0, 1]");
    auto r = congr::consensus_decode(graph->value, tau, *judge->judge, task_label ? task_label : "");
    *result_json = dup_string(congr::result_to_json(r, graph->value.prompt_id).dump());
  });
}

congr_status congr_guided_verify(const congr_graph* graph, double kappa, congr_judge* judge, const char* problem,
                                 char** result_json) {
  return guarded([&] {
    require(graph && judge && problem && result_json, "null argument");
    require(kappa > 0.0 && kappa <= 1.0, "kappa must lie in (0, 1]");
    auto r = congr::guided_self_verify(graph->value, kappa, *judge->judge, problem);
    *result_json = dup_string(congr::result_to_json(r, graph->value.prompt_id).dump());
  });
}

congr_status congr_graph_stats(const congr_graph* graph, char** stats_json) {
  return guarded([&] {
    require(graph && stats_json, "null argument");
    auto j = congr::stats_to_json(congr::graph_stats(graph->value));
    j["prompt_id"] = graph->value.prompt_id;
    *stats_json = dup_string(j.dump());
  });
}

congr_status congr_stats_table(const congr_graph* const* graphs, size_t count, char** table) {
  return guarded([&] {
    require((graphs || count == 0) && table, "null argument");
    std::vector<std::pair<std::string, congr::GraphStats>> rows;
    for (size_t i = 0; i < count; ++i) {
      require(graphs[i] != nullptr, "null graph");
      rows.emplace_back(graphs[i]->value.prompt_id, congr::graph_stats(graphs[i]->value));
    }
    *table = dup_string(congr::format_stats_table(rows));
  });
}

congr_status congr_overlap_profile(const congr_response_set* rs, size_t n_quantiles, int shuffle_baseline,
                                   uint64_t seed, double* out, size_t out_len) {
  return guarded([&] {
    require(rs && out, "null argument");
    require(out_len >= n_quantiles, "output buffer too small");
    auto profile = congr::lexical_overlap_profile(rs->value, n_quantiles, shuffle_baseline != 0, seed);
    std::copy(profile.begin(), profile.end(), out);
  });
}

}  // extern "C"
