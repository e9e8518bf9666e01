#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "congr/graph.hpp"
#include "congr/judge.hpp"

namespace congr {

enum class DecodeMethod { Consensus, Guided };

const char* to_string(DecodeMethod method);

/// One pairwise verification issued by guided self-verification.
struct VerifyRecord {
  std::size_t anchor = 0;
  std::size_t branch_a = 0;
  std::size_t branch_b = 0;
  std::size_t representative_a = 0;  // response whose prefix was shown
  std::size_t representative_b = 0;
  ScorePair score;
};

struct SynthesisResult {
  DecodeMethod method = DecodeMethod::Consensus;
  double threshold = 0.0;
  std::optional<std::string> text;  // nullopt means abstain
  std::size_t judge_calls = 0;

  // consensus decoding
  std::vector<std::size_t> selected_nodes;
  std::string draft;

  // guided self-verification
  std::vector<std::size_t> marked_anchors;
  std::vector<VerifyRecord> verifications;
  std::vector<std::size_t> survivors;
  std::vector<std::size_t> pruned;
  bool all_pruned = false;
  std::optional<std::string> answer;

  bool abstained() const noexcept { return !text.has_value(); }
};

/// Non-sentinel nodes with weighted degree >= tau, in topological order.
std::vector<std::size_t> select_nodes(const ConsensusGraph& graph, double tau);

/// Joins the selected node texts and hands the draft to the judge's edit
/// step, which may abstain. Issues exactly one judge call.
SynthesisResult consensus_decode(const ConsensusGraph& graph, double tau, Judge& judge,
                                 std::string_view task_label);

/// Anchors whose count of following disagreement branches, over m, is >= kappa.
std::vector<std::size_t> marked_anchors(const ConsensusGraph& graph, double kappa);

/// Pairwise verification of the branches after each marked anchor, pruning
/// candidates whose side scores 0, then a synthesis call over the survivors
/// with their uncertain and suspect regions marked.
SynthesisResult guided_self_verify(const ConsensusGraph& graph, double kappa, Judge& judge,
                                   std::string_view problem);

}  // namespace congr
