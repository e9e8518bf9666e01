#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "congr/align.hpp"
#include "congr/corpus.hpp"
#include "congr/error.hpp"
#include "congr/graph.hpp"
#include "congr/judge.hpp"

namespace testing {

using congr::Tokens;

// Best score over every global alignment of a and b, found by walking all of
// them. Gap runs are scored open + L * extend; a run ends when the column
// type changes.
inline long exhaustive_alignment_score(const Tokens& a, const Tokens& b, const congr::ScoringParams& p) {
  long best = std::numeric_limits<long>::min();
  // prev: 0 none/diag, 1 gap consuming a, 2 gap consuming b
  std::function<void(std::size_t, std::size_t, int, long)> walk = [&](std::size_t i, std::size_t j, int prev,
                                                                      long score) {
    if (i == a.size() && j == b.size()) {
      best = std::max(best, score);
      return;
    }
    if (i < a.size() && j < b.size()) walk(i + 1, j + 1, 0, score + (a[i] == b[j] ? p.match : p.mismatch));
    if (i < a.size()) walk(i + 1, j, 1, score + p.gap_extend + (prev == 1 ? 0 : p.gap_open));
    if (j < b.size()) walk(i, j + 1, 2, score + p.gap_extend + (prev == 2 ? 0 : p.gap_open));
  };
  walk(0, 0, 0, 0);
  return best;
}

inline Tokens random_tokens(std::mt19937_64& rng, std::size_t max_len, const std::vector<std::string>& alphabet,
                            std::size_t min_len = 0) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  Tokens out(len(rng));
  for (auto& t : out) t = alphabet[pick(rng)];
  return out;
}

// Responses that share a common skeleton with local edits, so graphs have
// both consensus and disagreement. At most `max_m` responses of at most
// `max_tokens` tokens.
inline congr::ResponseSet random_response_set(std::mt19937_64& rng, std::size_t index, std::size_t max_m = 6,
                                              std::size_t max_tokens = 40) {
  static const std::vector<std::string> words = {"the", "The", "cat", "sat", "on", "mat", "a",  "dog",
                                                 "ran", "to",  "it",  "was", "big", "red", "and", "home"};
  static const std::vector<std::string> punct = {".", ",", "!", "?", ";"};
  std::uniform_int_distribution<std::size_t> m_dist(1, max_m);
  std::uniform_int_distribution<std::size_t> word(0, words.size() - 1);
  std::uniform_int_distribution<std::size_t> mark(0, punct.size() - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  auto draw = [&] { return coin(rng) < 0.15 ? punct[mark(rng)] : words[word(rng)]; };
  Tokens base = random_tokens(rng, 30, words, 1);
  for (auto& t : base) t = draw();

  std::size_t m = m_dist(rng);
  std::vector<std::string> texts;
  for (std::size_t r = 0; r < m; ++r) {
    Tokens seq;
    for (const auto& t : base) {
      double u = coin(rng);
      if (u < 0.1) continue;
      if (u < 0.2) {
        seq.push_back(draw());
        continue;
      }
      seq.push_back(t);
      if (coin(rng) < 0.08) seq.push_back(draw());
    }
    if (seq.size() > max_tokens) seq.resize(max_tokens);
    if (congr::word_tokens(seq).empty()) seq.insert(seq.begin(), words[word(rng)]);
    texts.push_back(congr::detokenize(seq));
  }
  return congr::ResponseSet::make("rand-" + std::to_string(index), "random prompt", texts);
}

// Equivalence and edit like the offline provider; verify answers come from
// `score`, which sees both partial responses.
class ScriptedProvider : public congr::Provider {
 public:
  using Scorer = std::function<congr::ScorePair(const std::string&, const std::string&)>;

  explicit ScriptedProvider(Scorer score) : score_(std::move(score)) {}

  std::string tag() const override { return "scripted"; }
  bool is_remote() const override { return false; }

  bool equivalent(std::string_view a, std::string_view b, congr::TaskKind kind) override {
    ++equivalence_calls;
    return base_.equivalent(a, b, kind);
  }
  congr::EditOutcome edit(std::string_view draft, std::string_view label) override {
    return base_.edit(draft, label);
  }
  congr::ScorePair verify(std::string_view, std::string_view a, std::string_view b) override {
    ++verify_calls;
    seen.emplace_back(std::string(a), std::string(b));
    return score_(std::string(a), std::string(b));
  }
  std::string synthesize(std::string_view problem, const std::vector<std::string>& candidates) override {
    synthesis_inputs = candidates;
    return base_.synthesize(problem, candidates);
  }

  std::atomic<std::size_t> equivalence_calls{0};
  std::atomic<std::size_t> verify_calls{0};
  std::vector<std::pair<std::string, std::string>> seen;
  std::vector<std::string> synthesis_inputs;

 private:
  Scorer score_;
  congr::OfflineProvider base_;
};

inline std::string chat_reply(const std::string& content) {
  nlohmann::json j = {{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}};
  return j.dump();
}

// Answers chat-completion requests locally. `answer` receives the prompt.
class FakeTransport : public congr::Transport {
 public:
  explicit FakeTransport(std::function<std::string(const std::string&)> answer) : answer_(std::move(answer)) {}

  congr::HttpReply post(const std::string& url, const std::string& body,
                        const std::vector<std::pair<std::string, std::string>>& headers) override {
    ++calls;
    last_url = url;
    last_headers = headers;
    last_body = nlohmann::json::parse(body);
    if (!statuses.empty()) {
      int status = statuses.front();
      statuses.erase(statuses.begin());
      if (status < 0) throw congr::Error(congr::ErrorCode::JudgeTransport, "scripted outage");
      if (status != 200) return {status, "{}"};
    }
    std::string prompt = last_body["messages"][0]["content"].get<std::string>();
    return {200, chat_reply(answer_(prompt))};
  }

  std::atomic<std::size_t> calls{0};
  std::vector<int> statuses;  // consumed first; -1 simulates an unreachable host
  std::string last_url;
  nlohmann::json last_body;
  std::vector<std::pair<std::string, std::string>> last_headers;

 private:
  std::function<std::string(const std::string&)> answer_;
};

class FailingTransport : public congr::Transport {
 public:
  congr::HttpReply post(const std::string&, const std::string&,
                        const std::vector<std::pair<std::string, std::string>>&) override {
    ++calls;
    throw congr::Error(congr::ErrorCode::JudgeTransport, "service unavailable");
  }
  std::atomic<std::size_t> calls{0};
};

// Deterministic remote-style verdicts for the fake service: judges
// equivalence by word overlap of the two quoted texts.
inline std::string fake_service_answer(const std::string& prompt) {
  auto grab = [&](const std::string& key) {
    auto at = prompt.rfind(key);
    if (at == std::string::npos) return std::string();
    auto start = at + key.size();
    auto stop = prompt.find('\n', start);
    return prompt.substr(start, stop == std::string::npos ? std::string::npos : stop - start);
  };
  if (prompt.find("Text 1: ") != std::string::npos) {
    return congr::word_jaccard(grab("Text 1: "), grab("Text 2: ")) >= 0.5 ? "Equivalent" : "Not Equivalent";
  }
  if (prompt.find("Final score:") != std::string::npos) return "Looks fine.\nFinal score: (1, 1)";
  return "abstain";
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("congr-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

// Kahn's algorithm over an explicit edge list; true when every node is sorted.
inline bool acyclic(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::size_t> indeg(n, 0);
  std::vector<std::vector<std::size_t>> out(n);
  for (auto [a, b] : edges) {
    out[a].push_back(b);
    ++indeg[b];
  }
  std::vector<std::size_t> ready;
  for (std::size_t v = 0; v < n; ++v) {
    if (indeg[v] == 0) ready.push_back(v);
  }
  std::size_t seen = 0;
  while (!ready.empty()) {
    auto v = ready.back();
    ready.pop_back();
    ++seen;
    for (auto w : out[v]) {
      if (--indeg[w] == 0) ready.push_back(w);
    }
  }
  return seen == n;
}

// Flow conservation checked from the raw edge supports: for every
// non-sentinel node, the responses entering equal those leaving and equal
// the node's own support.
inline bool flow_conserved(const congr::ConsensusGraph& g) {
  std::vector<std::multiset<std::size_t>> in(g.nodes.size()), out(g.nodes.size());
  for (const auto& e : g.edges) {
    for (auto i : e.support) {
      out[e.from].insert(i);
      in[e.to].insert(i);
    }
  }
  for (const auto& n : g.nodes) {
    std::multiset<std::size_t> own(n.support.begin(), n.support.end());
    if (n.kind != congr::NodeKind::Start && in[n.id] != own) return false;
    if (n.kind != congr::NodeKind::End && out[n.id] != own) return false;
  }
  return true;
}

// Enumerates every start-to-end path and keeps those whose nodes and edges
// all carry response i. Meant for small graphs.
inline std::vector<std::vector<std::size_t>> paths_carrying(const congr::ConsensusGraph& g, std::size_t i) {
  std::vector<std::vector<std::size_t>> found;
  std::vector<std::size_t> path{g.start()};
  std::function<void(std::size_t)> walk = [&](std::size_t v) {
    if (v == g.end()) {
      found.push_back(path);
      return;
    }
    for (auto e : g.out_edges(v)) {
      const auto& edge = g.edges[e];
      if (!edge.support.contains(i) || !g.nodes[edge.to].support.contains(i)) continue;
      path.push_back(edge.to);
      walk(edge.to);
      path.pop_back();
    }
  };
  walk(g.start());
  return found;
}

}  // namespace testing
