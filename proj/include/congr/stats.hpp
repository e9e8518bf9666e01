#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "congr/corpus.hpp"
#include "congr/graph.hpp"

namespace congr {

/// Fixed English stopword list (lowercase).
const std::vector<std::string_view>& stopwords();
bool is_stopword(std::string_view lowercase_word);

/// True when every word token of `text` is a stopword. Text with no words
/// (punctuation only) also counts.
bool stopword_only(std::string_view text);

struct GraphStats {
  std::size_t n_nodes = 0;
  std::size_t n_consensus = 0;
  std::size_t n_disagreement = 0;
  double pct_consensus = 0.0;
  double pct_disagreement = 0.0;
  double mean_words_consensus = 0.0;
  double mean_words_disagreement = 0.0;
  double mean_branches_after_consensus = 0.0;
  double pct_stopword_only_consensus = 0.0;
  double pct_stopword_only_disagreement = 0.0;
  std::size_t case_near_misses = 0;
  bool degenerate = false;
};

/// Counts exclude the sentinels. Branches of a consensus node are its
/// disagreement successors.
GraphStats graph_stats(const ConsensusGraph& graph);

/// Means of each field across graphs (degenerate becomes the fraction of
/// degenerate graphs in `pct_degenerate`).
struct StatsSummary {
  GraphStats mean;
  double pct_degenerate = 0.0;
  std::size_t graphs = 0;
};
StatsSummary summarize_stats(const std::vector<GraphStats>& rows);

/// Aligned-column table with one row per graph plus a mean row.
std::string format_stats_table(const std::vector<std::pair<std::string, GraphStats>>& rows);

/// Mean pairwise word-set Jaccard similarity per ordered segment quantile.
/// With `shuffle_baseline`, each response's sentences are first shuffled with
/// a generator seeded by `seed`. Throws Error(TooShort) if a response has
/// fewer word tokens than `n_quantiles`.
std::vector<double> lexical_overlap_profile(const ResponseSet& rs, std::size_t n_quantiles,
                                            bool shuffle_baseline, std::uint64_t seed);

/// Splits `count` items into `parts` contiguous near-equal segments; the
/// remainder goes to the earliest segments. Returns segment start offsets
/// plus the final end.
std::vector<std::size_t> quantile_bounds(std::size_t count, std::size_t parts);

}  // namespace congr
