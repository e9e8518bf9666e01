#include "congr/decode.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "congr/error.hpp"

namespace congr {

const char* to_string(DecodeMethod method) {
  return method == DecodeMethod::Consensus ? "consensus" : "guided";
}

namespace {

constexpr double kEps = 1e-9;

void check_threshold(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, std::string(name) + " must lie in [0, 1]");
  }
}

// count / m >= threshold, without rounding surprises at exact fractions.
bool reaches(std::size_t count, std::size_t m, double threshold) {
  return static_cast<double>(count) + kEps >= threshold * static_cast<double>(m);
}

std::string segment_for(const ConsensusGraph& g, std::size_t v, std::size_t response) {
  const auto& n = g.nodes[v];
  if (n.kind == NodeKind::Disagreement) {
    auto it = n.phrasings.find(response);
    return it != n.phrasings.end() ? it->second : n.text;
  }
  return n.text;
}

// Response text from the start up to and including node `through`.
std::string prefix_through(const ConsensusGraph& g, std::size_t response, std::size_t through) {
  std::vector<std::string> segments;
  for (std::size_t v : g.path_of(response)) {
    segments.push_back(segment_for(g, v, response));
    if (v == through) break;
  }
  return join_segments(segments);
}

}  // namespace

std::vector<std::size_t> select_nodes(const ConsensusGraph& graph, double tau) {
  check_threshold(tau, "tau");
  std::vector<std::size_t> out;
  for (const auto& n : graph.nodes) {
    if (n.kind == NodeKind::Start || n.kind == NodeKind::End) continue;
    if (reaches(n.support.size(), graph.m, tau)) out.push_back(n.id);
  }
  return out;
}

SynthesisResult consensus_decode(const ConsensusGraph& graph, double tau, Judge& judge,
                                 std::string_view task_label) {
  SynthesisResult result;
  result.method = DecodeMethod::Consensus;
  result.threshold = tau;
  result.selected_nodes = select_nodes(graph, tau);
  std::vector<std::string> texts;
  for (std::size_t v : result.selected_nodes) texts.push_back(graph.nodes[v].text);
  result.draft = join_segments(texts);
  auto edited = judge.edit_and_finalize(result.draft, task_label);
  result.judge_calls = 1;
  result.text = edited.text;
  return result;
}

std::vector<std::size_t> marked_anchors(const ConsensusGraph& graph, double kappa) {
  check_threshold(kappa, "kappa");
  std::vector<std::size_t> out;
  for (const auto& n : graph.nodes) {
    if (n.kind != NodeKind::Consensus && n.kind != NodeKind::Start) continue;
    auto branches = graph.disagreement_successors(n.id);
    if (!branches.empty() && reaches(branches.size(), graph.m, kappa)) out.push_back(n.id);
  }
  return out;
}

SynthesisResult guided_self_verify(const ConsensusGraph& graph, double kappa, Judge& judge,
                                   std::string_view problem) {
  if (problem.empty()) throw Error(ErrorCode::InvalidArgument, "guided self-verification needs the problem text");
  SynthesisResult result;
  result.method = DecodeMethod::Guided;
  result.threshold = kappa;
  result.marked_anchors = marked_anchors(graph, kappa);

  std::set<std::size_t> candidates;
  for (std::size_t i = 0; i < graph.m; ++i) candidates.insert(i);
  // Branch nodes on which a response's side was scored 0.
  std::map<std::size_t, std::set<std::size_t>> flagged;

  for (std::size_t anchor : result.marked_anchors) {
    auto branches = graph.disagreement_successors(anchor);
    std::stable_sort(branches.begin(), branches.end(), [&](std::size_t a, std::size_t b) {
      return graph.nodes[a].support.size() > graph.nodes[b].support.size();
    });
    std::map<std::size_t, std::vector<std::size_t>> alive;
    for (std::size_t v : branches) {
      for (std::size_t i : graph.nodes[v].support) {
        if (candidates.count(i)) alive[v].push_back(i);
      }
    }

    // Verdicts for the whole region are collected before anything is pruned.
    std::vector<VerifyRecord> region;
    for (std::size_t x = 0; x < branches.size(); ++x) {
      for (std::size_t y = x + 1; y < branches.size(); ++y) {
        const auto& side_a = alive[branches[x]];
        const auto& side_b = alive[branches[y]];
        if (side_a.empty() || side_b.empty()) continue;
        VerifyRecord rec;
        rec.anchor = anchor;
        rec.branch_a = branches[x];
        rec.branch_b = branches[y];
        rec.representative_a = side_a.front();
        rec.representative_b = side_b.front();
        rec.score = judge.verify_pair(problem, prefix_through(graph, rec.representative_a, rec.branch_a),
                                      prefix_through(graph, rec.representative_b, rec.branch_b));
        region.push_back(rec);
      }
    }
    for (const auto& rec : region) {
      if (rec.score.first == 0) {
        for (std::size_t i : alive[rec.branch_a]) {
          candidates.erase(i);
          flagged[i].insert(rec.branch_a);
        }
      }
      if (rec.score.second == 0) {
        for (std::size_t i : alive[rec.branch_b]) {
          candidates.erase(i);
          flagged[i].insert(rec.branch_b);
        }
      }
    }
    result.verifications.insert(result.verifications.end(), region.begin(), region.end());
  }

  for (std::size_t i = 0; i < graph.m; ++i) {
    if (!candidates.count(i)) result.pruned.push_back(i);
  }
  std::vector<std::size_t> pool(candidates.begin(), candidates.end());
  if (pool.empty()) {
    result.all_pruned = true;
    for (std::size_t i = 0; i < graph.m; ++i) pool.push_back(i);
  } else {
    result.survivors = pool;
  }

  const std::set<std::size_t> marked(result.marked_anchors.begin(), result.marked_anchors.end());
  std::vector<std::string> masked;
  for (std::size_t i : pool) {
    std::vector<std::string> segments;
    std::size_t previous = graph.start();
    for (std::size_t v : graph.path_of(i)) {
      std::string text = segment_for(graph, v, i);
      if (graph.nodes[v].kind == NodeKind::Disagreement && marked.count(previous)) {
        bool suspect = flagged.count(i) && flagged[i].count(v);
        auto open = suspect ? markers::kStartPossibleError : markers::kStartUncertain;
        auto close = suspect ? markers::kEndPossibleError : markers::kEndUncertain;
        text = std::string(open) + " " + text + " " + std::string(close);
      }
      segments.push_back(std::move(text));
      previous = v;
    }
    masked.push_back(join_segments(segments));
  }

  result.text = judge.synthesize_final(problem, masked);
  result.answer = extract_boxed(*result.text);
  result.judge_calls = result.verifications.size() + 1;
  return result;
}

}  // namespace congr
