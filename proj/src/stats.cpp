#include "congr/stats.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <set>

#include "congr/error.hpp"

namespace congr {

const std::vector<std::string_view>& stopwords() {
  // NLTK English list.
  static const std::vector<std::string_view> words = {
      "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're", "you've",
      "you'll", "you'd", "your", "yours", "yourself", "yourselves", "he", "him", "his", "himself",
      "she", "she's", "her", "hers", "herself", "it", "it's", "its", "itself", "they", "them",
      "their", "theirs", "themselves", "what", "which", "who", "whom", "this", "that", "that'll",
      "these", "those", "am", "is", "are", "was", "were", "be", "been", "being", "have", "has",
      "had", "having", "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if", "or",
      "because", "as", "until", "while", "of", "at", "by", "for", "with", "about", "against",
      "between", "into", "through", "during", "before", "after", "above", "below", "to", "from",
      "up", "down", "in", "out", "on", "off", "over", "under", "again", "further", "then", "once",
      "here", "there", "when", "where", "why", "how", "all", "any", "both", "each", "few", "more",
      "most", "other", "some", "such", "no", "nor", "not", "only", "own", "same", "so", "than",
      "too", "very", "s", "t", "can", "will", "just", "don", "don't", "should", "should've", "now",
      "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "aren't", "couldn", "couldn't", "didn",
      "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't", "haven", "haven't", "isn",
      "isn't", "ma", "mightn", "mightn't", "mustn", "mustn't", "needn", "needn't", "shan",
      "shan't", "shouldn", "shouldn't", "wasn", "wasn't", "weren", "weren't", "won", "won't",
      "wouldn", "wouldn't"};
  return words;
}

bool is_stopword(std::string_view lowercase_word) {
  static const std::set<std::string_view> lookup(stopwords().begin(), stopwords().end());
  return lookup.count(lowercase_word) > 0;
}

namespace {

Tokens words_of(std::string_view text) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return {};
  return word_tokens(tokenize(text));
}

double pct(std::size_t part, std::size_t whole) {
  return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t common = 0;
  for (const auto& w : a) common += b.count(w);
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

Tokens shuffled_sentences(const Tokens& tokens, std::mt19937_64& rng) {
  std::vector<Tokens> sentences(1);
  for (const auto& t : tokens) {
    sentences.back().push_back(t);
    if (t == "." || t == "!" || t == "?") sentences.emplace_back();
  }
  if (sentences.back().empty()) sentences.pop_back();
  // Fisher-Yates with an explicit draw so results do not depend on the
  // standard library's shuffle.
  for (std::size_t i = sentences.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(sentences[i - 1], sentences[j]);
  }
  Tokens out;
  for (auto& s : sentences) out.insert(out.end(), s.begin(), s.end());
  return out;
}

}  // namespace

bool stopword_only(std::string_view text) {
  for (const auto& w : words_of(text)) {
    if (!is_stopword(to_lower(w))) return false;
  }
  return true;
}

GraphStats graph_stats(const ConsensusGraph& graph) {
  GraphStats s;
  std::size_t words_c = 0, words_d = 0, branches = 0, stop_c = 0, stop_d = 0;
  for (const auto& n : graph.nodes) {
    if (n.kind == NodeKind::Consensus) {
      ++s.n_consensus;
      words_c += words_of(n.text).size();
      branches += graph.disagreement_successors(n.id).size();
      stop_c += stopword_only(n.text);
    } else if (n.kind == NodeKind::Disagreement) {
      ++s.n_disagreement;
      words_d += words_of(n.text).size();
      stop_d += stopword_only(n.text);
    }
  }
  s.n_nodes = s.n_consensus + s.n_disagreement;
  s.pct_consensus = pct(s.n_consensus, s.n_nodes);
  s.pct_disagreement = pct(s.n_disagreement, s.n_nodes);
  auto mean = [](std::size_t total, std::size_t n) { return n == 0 ? 0.0 : double(total) / double(n); };
  s.mean_words_consensus = mean(words_c, s.n_consensus);
  s.mean_words_disagreement = mean(words_d, s.n_disagreement);
  s.mean_branches_after_consensus = mean(branches, s.n_consensus);
  s.pct_stopword_only_consensus = pct(stop_c, s.n_consensus);
  s.pct_stopword_only_disagreement = pct(stop_d, s.n_disagreement);
  s.case_near_misses = graph.case_near_misses;
  s.degenerate = s.n_consensus == 0;
  return s;
}

StatsSummary summarize_stats(const std::vector<GraphStats>& rows) {
  StatsSummary out;
  out.graphs = rows.size();
  if (rows.empty()) return out;
  double n = static_cast<double>(rows.size());
  double nodes = 0, nc = 0, nd = 0, near = 0, degenerate = 0;
  auto& m = out.mean;
  for (const auto& r : rows) {
    nodes += double(r.n_nodes);
    nc += double(r.n_consensus);
    nd += double(r.n_disagreement);
    near += double(r.case_near_misses);
    degenerate += r.degenerate ? 1.0 : 0.0;
    m.pct_consensus += r.pct_consensus / n;
    m.pct_disagreement += r.pct_disagreement / n;
    m.mean_words_consensus += r.mean_words_consensus / n;
    m.mean_words_disagreement += r.mean_words_disagreement / n;
    m.mean_branches_after_consensus += r.mean_branches_after_consensus / n;
    m.pct_stopword_only_consensus += r.pct_stopword_only_consensus / n;
    m.pct_stopword_only_disagreement += r.pct_stopword_only_disagreement / n;
  }
  m.n_nodes = static_cast<std::size_t>(nodes / n + 0.5);
  m.n_consensus = static_cast<std::size_t>(nc / n + 0.5);
  m.n_disagreement = static_cast<std::size_t>(nd / n + 0.5);
  m.case_near_misses = static_cast<std::size_t>(near / n + 0.5);
  out.pct_degenerate = 100.0 * degenerate / n;
  return out;
}

std::string format_stats_table(const std::vector<std::pair<std::string, GraphStats>>& rows) {
  std::size_t name_width = 5;
  for (const auto& [name, s] : rows) name_width = std::max(name_width, name.size());
  std::string out;
  char line[512];
  std::snprintf(line, sizeof line, "%-*s %8s %7s %7s %9s %9s %11s\n", int(name_width), "graph", "# Nodes", "%C",
                "%D", "# Words C", "# Words D", "# Branches C");
  out += line;
  auto row = [&](const std::string& name, double nodes, const GraphStats& s) {
    std::snprintf(line, sizeof line, "%-*s %8.2f %7.2f %7.2f %9.2f %9.2f %11.2f\n", int(name_width), name.c_str(),
                  nodes, s.pct_consensus, s.pct_disagreement, s.mean_words_consensus, s.mean_words_disagreement,
                  s.mean_branches_after_consensus);
    out += line;
  };
  std::vector<GraphStats> all;
  double nodes_total = 0;
  for (const auto& [name, s] : rows) {
    row(name, double(s.n_nodes), s);
    all.push_back(s);
    nodes_total += double(s.n_nodes);
  }
  if (!rows.empty()) {
    auto summary = summarize_stats(all);
    row("mean", nodes_total / double(rows.size()), summary.mean);
  }
  return out;
}

std::vector<std::size_t> quantile_bounds(std::size_t count, std::size_t parts) {
  std::vector<std::size_t> bounds{0};
  std::size_t base = count / parts;
  std::size_t extra = count % parts;
  for (std::size_t q = 0; q < parts; ++q) bounds.push_back(bounds.back() + base + (q < extra ? 1 : 0));
  return bounds;
}

std::vector<double> lexical_overlap_profile(const ResponseSet& rs, std::size_t n_quantiles, bool shuffle_baseline,
                                            std::uint64_t seed) {
  if (n_quantiles == 0) throw Error(ErrorCode::InvalidArgument, "need at least one quantile");
  if (rs.m() < 2) throw Error(ErrorCode::InvalidArgument, "overlap needs at least two responses");
  std::mt19937_64 rng(seed);
  std::vector<Tokens> words;
  for (std::size_t i = 0; i < rs.m(); ++i) {
    Tokens tokens = shuffle_baseline ? shuffled_sentences(rs.token_seqs[i], rng) : rs.token_seqs[i];
    Tokens w = word_tokens(tokens);
    for (auto& t : w) t = to_lower(t);
    if (w.size() < n_quantiles) {
      throw Error(ErrorCode::TooShort, "response " + std::to_string(i) + " has " + std::to_string(w.size()) +
                                           " words, fewer than " + std::to_string(n_quantiles) + " quantiles");
    }
    words.push_back(std::move(w));
  }

  std::vector<std::vector<std::set<std::string>>> segments(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    auto bounds = quantile_bounds(words[i].size(), n_quantiles);
    for (std::size_t q = 0; q < n_quantiles; ++q) {
      segments[i].emplace_back(words[i].begin() + long(bounds[q]), words[i].begin() + long(bounds[q + 1]));
    }
  }
  std::vector<double> profile(n_quantiles, 0.0);
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < words.size(); ++a) {
    for (std::size_t b = a + 1; b < words.size(); ++b) {
      ++pairs;
      for (std::size_t q = 0; q < n_quantiles; ++q) profile[q] += jaccard(segments[a][q], segments[b][q]);
    }
  }
  for (auto& v : profile) v /= double(pairs);
  return profile;
}

}  // namespace congr
