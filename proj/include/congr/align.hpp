#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "congr/corpus.hpp"
#include "congr/support_set.hpp"

namespace congr {

/// Alignment scores. A gap run of length L scores gap_open + L * gap_extend.
struct ScoringParams {
  int match = 1;
  int mismatch = -2;
  int gap_open = -1;
  int gap_extend = -1;

  /// Throws Error(InvalidArgument) unless match > 0, mismatch < 0 and both
  /// gap penalties are <= 0.
  void validate() const;

  bool operator==(const ScoringParams&) const = default;
};

/// One alignment column; an empty side is a gap.
struct AlignedColumn {
  std::optional<std::size_t> a;
  std::optional<std::size_t> b;

  bool operator==(const AlignedColumn&) const = default;
};

struct PairAlignment {
  std::vector<AlignedColumn> columns;
  long score = 0;
};

/// Global affine-gap alignment of two token sequences.
/// Ties prefer match, then mismatch, then a gap in `a`, then a gap in `b`.
PairAlignment align_pair(const Tokens& a, const Tokens& b, const ScoringParams& params);

/// Scores an explicit alignment under the affine model.
long score_alignment(const Tokens& a, const Tokens& b, const std::vector<AlignedColumn>& columns,
                     const ScoringParams& params);

/// Partial-order graph of word tokens. Node 0 is the start sentinel and node 1
/// the end sentinel; both carry empty text and full support.
class LexicalDag {
 public:
  static constexpr std::size_t kStart = 0;
  static constexpr std::size_t kEnd = 1;

  struct Node {
    std::string token;
    SupportSet support;
  };

  struct Edge {
    std::size_t from;
    std::size_t to;
    SupportSet support;
  };

  /// Dag holding a single response as a chain.
  LexicalDag(const Tokens& first, std::size_t response_index, const ScoringParams& params);

  /// Aligns `seq` against the graph and threads it through as response
  /// `response_index`. Returns the optimal alignment score.
  long add_sequence(const Tokens& seq, std::size_t response_index);

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<std::size_t>& out_edges(std::size_t node) const { return out_[node]; }
  const std::vector<std::size_t>& in_edges(std::size_t node) const { return in_[node]; }
  const ScoringParams& params() const noexcept { return params_; }

  /// Number of responses threaded so far.
  std::size_t m() const noexcept { return responses_.size(); }
  const SupportSet& responses() const noexcept { return responses_; }

  /// Mismatch columns whose tokens differ only by letter case. These are
  /// never fused; the count is kept for reporting.
  std::size_t case_near_misses() const noexcept { return near_misses_; }

  double node_weight(std::size_t node) const;
  double edge_weight(std::size_t edge) const;

  /// Kahn order, smallest id first among ready nodes.
  std::vector<std::size_t> topological_order() const;

  /// Node ids on response i's start-to-end path, sentinels included.
  std::vector<std::size_t> path_of(std::size_t response_index) const;

  /// Tokens along response i's path.
  Tokens tokens_of(std::size_t response_index) const;

  /// Empty when every structural invariant holds: acyclic, sentinel degrees,
  /// one path per response, per-node flow conservation.
  std::vector<std::string> check_invariants() const;

 private:
  std::size_t add_node(std::string token);
  void add_support(std::size_t from, std::size_t to, std::size_t response_index);
  void thread_path(const std::vector<std::size_t>& interior, std::size_t response_index);

  ScoringParams params_;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
  SupportSet responses_;
  std::size_t near_misses_ = 0;
};

/// Returns a copy of `dag` with `seq` added as `response_index`.
/// Throws Error(DuplicateResponse) if the index is already present.
LexicalDag align_to_graph(const LexicalDag& dag, const Tokens& seq, std::size_t response_index);

/// Chain from token_seqs[0], then each later response folded in input order.
LexicalDag build_lexical_dag(const ResponseSet& rs, const ScoringParams& params);

}  // namespace congr
