#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "congr/align.hpp"
#include "congr/corpus.hpp"
#include "congr/judge.hpp"
#include "congr/support_set.hpp"

namespace congr {

enum class NodeKind { Start, End, Consensus, Disagreement, Token };

const char* to_string(NodeKind kind);
NodeKind parse_node_kind(std::string_view name);

/// Lexical dag after full-agreement chains are collapsed. Node ids follow a
/// topological order: 0 is the start sentinel, the last id is the end.
struct AnchoredGraph {
  struct Node {
    NodeKind kind = NodeKind::Token;
    Tokens tokens;
    SupportSet support;
  };
  struct Edge {
    std::size_t from;
    std::size_t to;
    SupportSet support;
  };

  std::size_t m = 0;
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::size_t case_near_misses = 0;

  bool is_anchor(std::size_t id) const;
  std::vector<std::size_t> anchors() const;
  std::vector<std::size_t> path_of(std::size_t response_index) const;
};

/// Collapses every maximal run of full-support nodes joined by full-support
/// edges into one consensus node. Sentinels stay separate anchors.
AnchoredGraph merge_consensus(const LexicalDag& dag);

/// How the responses travel between two consecutive anchors.
struct Region {
  std::size_t left = 0;
  std::size_t right = 0;
  std::vector<Tokens> paths;  // indexed by response; empty when it goes straight across

  std::string text(std::size_t response_index) const { return detokenize(paths[response_index]); }
};

/// Regions between consecutive anchors where at least one response has
/// tokens; fully shared stretches produce none.
std::vector<Region> extract_regions(const AnchoredGraph& graph);

/// The finished consensus graph. Node ids are topologically ordered.
class ConsensusGraph {
 public:
  struct Node {
    std::size_t id = 0;
    NodeKind kind = NodeKind::Consensus;
    std::string text;
    SupportSet support;
    std::map<std::size_t, std::string> phrasings;  // disagreement nodes only
  };
  struct Edge {
    std::size_t from;
    std::size_t to;
    SupportSet support;
  };
  struct RegionInfo {
    std::size_t left = 0;
    std::size_t right = 0;
    std::size_t distinct_texts = 0;
    std::size_t equivalence_queries = 0;
    std::size_t classes = 0;
  };

  std::string prompt_id;
  std::string prompt;
  std::size_t m = 0;
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::vector<RegionInfo> regions;
  ScoringParams scoring;
  std::string judge_provider;
  TaskKind task_kind = TaskKind::Text;
  std::size_t case_near_misses = 0;

  /// Rebuilds adjacency; call after editing nodes or edges.
  void index();

  std::size_t start() const noexcept { return 0; }
  std::size_t end() const noexcept { return nodes.size() - 1; }
  double weighted_degree(std::size_t id) const;
  const std::vector<std::size_t>& out_edges(std::size_t id) const { return out_[id]; }
  const std::vector<std::size_t>& in_edges(std::size_t id) const { return in_[id]; }

  /// Disagreement nodes reached directly from `id`.
  std::vector<std::size_t> disagreement_successors(std::size_t id) const;

  /// Text segments of response i in order: consensus texts and i's phrasing
  /// of each disagreement node on its path.
  std::vector<std::string> segments_of(std::size_t response_index) const;
  std::vector<std::size_t> path_of(std::size_t response_index) const;
  std::string reconstruct(std::size_t response_index) const;
  std::vector<std::string> reconstruct_all() const;

  /// Empty when acyclic, supports are consistent, flow is conserved and the
  /// consensus/disagreement alternation holds. With `responses`, also checks
  /// that every response is recovered exactly (after whitespace normalization).
  std::vector<std::string> check_invariants(const std::vector<std::string>* responses = nullptr) const;

 private:
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
};

/// Clusters each region's distinct non-empty texts with the judge and
/// installs one disagreement node per class. Throws RegionJudgeError when a
/// judge call fails.
ConsensusGraph install_disagreement_nodes(const AnchoredGraph& graph,
                                          const std::vector<Region>& regions, Judge& judge,
                                          TaskKind task_kind);

/// Full construction: lexical dag, consensus merge, regions, disagreement nodes.
ConsensusGraph build_consensus_graph(const ResponseSet& rs, const ScoringParams& params,
                                     Judge& judge, TaskKind task_kind = TaskKind::Text);

}  // namespace congr
