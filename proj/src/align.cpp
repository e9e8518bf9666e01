#include "congr/align.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <queue>
#include <tuple>

#include "congr/error.hpp"

namespace congr {
namespace {

constexpr long kNeg = std::numeric_limits<long>::min() / 4;

// Traceback states. Diagonal = token against node/token, GapInA = sequence
// token with nothing opposite, GapInB = graph node with nothing opposite.
enum State : int { kDiag = 0, kGapInA = 1, kGapInB = 2 };

bool reachable(long v) { return v > kNeg / 2; }

// Lower is preferred: match, mismatch, gap in the graph side, gap in the
// sequence side.
int tie_rank(State s, bool is_match) {
  switch (s) {
    case kDiag: return is_match ? 0 : 1;
    case kGapInA: return 2;
    case kGapInB: return 3;
  }
  return 4;
}

// Affine DP tables laid out row-major: rows are graph positions, columns are
// sequence prefixes.
struct Tables {
  std::size_t cols;
  std::array<std::vector<long>, 3> score;

  Tables(std::size_t rows, std::size_t c) : cols(c) {
    for (auto& s : score) s.assign(rows * c, kNeg);
  }
  long& at(State s, std::size_t row, std::size_t col) { return score[s][row * cols + col]; }
  long at(State s, std::size_t row, std::size_t col) const { return score[s][row * cols + col]; }
  long best(std::size_t row, std::size_t col) const {
    return std::max({at(kDiag, row, col), at(kGapInA, row, col), at(kGapInB, row, col)});
  }
};

long open_cost(const ScoringParams& p) { return static_cast<long>(p.gap_open) + p.gap_extend; }

long sub_score(const std::string& x, const std::string& y, const ScoringParams& p) {
  return x == y ? p.match : p.mismatch;
}

// Generic POA-style DP over rows given in topological order. Row 0 is a
// virtual origin with no label; `preds[r]` lists predecessor rows of row r.
// Columns returned use row numbers for the `a` side.
struct RowGraph {
  std::vector<const std::string*> labels;      // labels[0] is unused
  std::vector<std::vector<std::size_t>> preds;  // preds[0] is empty
  std::vector<std::size_t> final_preds;         // rows that may end the alignment
};

struct RowAlignment {
  std::vector<AlignedColumn> columns;
  long score = 0;
};

RowAlignment align_rows(const RowGraph& g, const Tokens& seq, const ScoringParams& params) {
  const std::size_t rows = g.labels.size();
  const std::size_t n = seq.size();
  const long open = open_cost(params);
  const long ext = params.gap_extend;
  Tables t(rows, n + 1);

  t.at(kDiag, 0, 0) = 0;
  for (std::size_t j = 1; j <= n; ++j) {
    t.at(kGapInA, 0, j) = std::max(t.at(kGapInA, 0, j - 1) + ext, t.at(kDiag, 0, j - 1) + open);
  }
  for (std::size_t r = 1; r < rows; ++r) {
    const std::string& label = *g.labels[r];
    for (std::size_t j = 0; j <= n; ++j) {
      long diag = kNeg;
      long del = kNeg;
      for (std::size_t p : g.preds[r]) {
        if (j >= 1) {
          long prev = t.best(p, j - 1);
          if (reachable(prev)) diag = std::max(diag, prev + sub_score(label, seq[j - 1], params));
        }
        del = std::max({del, t.at(kGapInB, p, j) + ext, t.at(kDiag, p, j) + open,
                        t.at(kGapInA, p, j) + open});
      }
      t.at(kDiag, r, j) = diag;
      t.at(kGapInB, r, j) = reachable(del) ? del : kNeg;
      if (j >= 1) {
        long ins = std::max({t.at(kGapInA, r, j - 1) + ext, t.at(kDiag, r, j - 1) + open,
                             t.at(kGapInB, r, j - 1) + open});
        t.at(kGapInA, r, j) = reachable(ins) ? ins : kNeg;
      }
    }
  }

  auto rank_of = [&](State s, std::size_t row, std::size_t col) {
    bool is_match = s == kDiag && row > 0 && col > 0 && *g.labels[row] == seq[col - 1];
    if (s == kDiag && row == 0) is_match = true;
    return tie_rank(s, is_match);
  };

  // (rank, row, state) ordering picks the preferred predecessor on ties.
  using Cand = std::tuple<int, std::size_t, int>;
  auto pick = [](std::vector<Cand>& c) {
    std::sort(c.begin(), c.end());
    return c.front();
  };

  long best = kNeg;
  for (std::size_t p : g.final_preds) best = std::max(best, t.best(p, n));
  std::vector<Cand> cands;
  for (std::size_t p : g.final_preds) {
    for (State s : {kDiag, kGapInA, kGapInB}) {
      if (t.at(s, p, n) == best) cands.emplace_back(rank_of(s, p, n), p, s);
    }
  }
  auto [rank0, row, st] = pick(cands);
  (void)rank0;
  std::size_t col = n;
  State state = static_cast<State>(st);

  RowAlignment out;
  out.score = best;
  while (!(row == 0 && col == 0 && state == kDiag)) {
    cands.clear();
    const long here = t.at(state, row, col);
    if (state == kDiag) {
      out.columns.push_back({row, col - 1});
      long s = sub_score(*g.labels[row], seq[col - 1], params);
      for (std::size_t p : g.preds[row]) {
        for (State ps : {kDiag, kGapInA, kGapInB}) {
          long v = t.at(ps, p, col - 1);
          if (reachable(v) && v + s == here) cands.emplace_back(rank_of(ps, p, col - 1), p, ps);
        }
      }
      col -= 1;
    } else if (state == kGapInB) {
      out.columns.push_back({row, std::nullopt});
      for (std::size_t p : g.preds[row]) {
        for (State ps : {kDiag, kGapInA, kGapInB}) {
          long v = t.at(ps, p, col);
          long step = ps == kGapInB ? ext : open;
          if (reachable(v) && v + step == here) cands.emplace_back(rank_of(ps, p, col), p, ps);
        }
      }
    } else {
      out.columns.push_back({std::nullopt, col - 1});
      for (State ps : {kDiag, kGapInA, kGapInB}) {
        long v = t.at(ps, row, col - 1);
        long step = ps == kGapInA ? ext : open;
        if (reachable(v) && v + step == here) cands.emplace_back(rank_of(ps, row, col - 1), row, ps);
      }
      col -= 1;
    }
    if (cands.empty()) throw std::logic_error("alignment traceback lost its path");
    auto [r2, prow, ps] = pick(cands);
    (void)r2;
    row = prow;
    state = static_cast<State>(ps);
  }
  std::reverse(out.columns.begin(), out.columns.end());
  return out;
}

}  // namespace

void ScoringParams::validate() const {
  if (match <= 0) throw Error(ErrorCode::InvalidArgument, "match score must be positive");
  if (mismatch >= 0) throw Error(ErrorCode::InvalidArgument, "mismatch score must be negative");
  if (gap_open > 0 || gap_extend > 0) {
    throw Error(ErrorCode::InvalidArgument, "gap penalties must be <= 0");
  }
}

PairAlignment align_pair(const Tokens& a, const Tokens& b, const ScoringParams& params) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptySequence, "cannot align an empty sequence");
  params.validate();
  RowGraph g;
  g.labels.push_back(nullptr);
  g.preds.emplace_back();
  for (std::size_t i = 0; i < a.size(); ++i) {
    g.labels.push_back(&a[i]);
    g.preds.push_back({i});
  }
  g.final_preds = {a.size()};
  auto rows = align_rows(g, b, params);
  PairAlignment out;
  out.score = rows.score;
  out.columns.reserve(rows.columns.size());
  for (const auto& c : rows.columns) {
    AlignedColumn col;
    if (c.a) col.a = *c.a - 1;
    col.b = c.b;
    out.columns.push_back(col);
  }
  return out;
}

long score_alignment(const Tokens& a, const Tokens& b, const std::vector<AlignedColumn>& columns,
                     const ScoringParams& params) {
  long score = 0;
  int prev = -1;  // 0 diag, 1 gap in a, 2 gap in b
  for (const auto& c : columns) {
    if (c.a && c.b) {
      score += a[*c.a] == b[*c.b] ? params.match : params.mismatch;
      prev = 0;
    } else if (c.b) {
      score += prev == 1 ? params.gap_extend : params.gap_open + params.gap_extend;
      prev = 1;
    } else {
      score += prev == 2 ? params.gap_extend : params.gap_open + params.gap_extend;
      prev = 2;
    }
  }
  return score;
}

LexicalDag::LexicalDag(const Tokens& first, std::size_t response_index, const ScoringParams& params)
    : params_(params) {
  params_.validate();
  if (first.empty()) throw Error(ErrorCode::EmptySequence, "cannot build a graph from an empty sequence");
  add_node("");
  add_node("");
  std::vector<std::size_t> interior;
  for (const auto& token : first) interior.push_back(add_node(token));
  thread_path(interior, response_index);
}

std::size_t LexicalDag::add_node(std::string token) {
  nodes_.push_back({std::move(token), {}});
  out_.emplace_back();
  in_.emplace_back();
  return nodes_.size() - 1;
}

void LexicalDag::add_support(std::size_t from, std::size_t to, std::size_t response_index) {
  for (std::size_t e : out_[from]) {
    if (edges_[e].to == to) {
      edges_[e].support.insert(response_index);
      return;
    }
  }
  edges_.push_back({from, to, SupportSet{response_index}});
  out_[from].push_back(edges_.size() - 1);
  in_[to].push_back(edges_.size() - 1);
}

void LexicalDag::thread_path(const std::vector<std::size_t>& interior, std::size_t response_index) {
  std::size_t prev = kStart;
  nodes_[kStart].support.insert(response_index);
  for (std::size_t v : interior) {
    nodes_[v].support.insert(response_index);
    add_support(prev, v, response_index);
    prev = v;
  }
  add_support(prev, kEnd, response_index);
  nodes_[kEnd].support.insert(response_index);
  responses_.insert(response_index);
}

long LexicalDag::add_sequence(const Tokens& seq, std::size_t response_index) {
  if (responses_.contains(response_index)) {
    throw Error(ErrorCode::DuplicateResponse,
                "response " + std::to_string(response_index) + " is already in the graph");
  }
  if (seq.empty()) throw Error(ErrorCode::EmptySequence, "cannot align an empty sequence");

  std::vector<std::size_t> order;
  for (std::size_t v : topological_order()) {
    if (v != kStart && v != kEnd) order.push_back(v);
  }
  std::vector<std::size_t> row_of(nodes_.size(), 0);
  for (std::size_t r = 0; r < order.size(); ++r) row_of[order[r]] = r + 1;

  RowGraph g;
  g.labels.push_back(nullptr);
  g.preds.emplace_back();
  for (std::size_t v : order) {
    g.labels.push_back(&nodes_[v].token);
    std::vector<std::size_t> preds;
    for (std::size_t e : in_[v]) preds.push_back(row_of[edges_[e].from]);
    std::sort(preds.begin(), preds.end());
    g.preds.push_back(std::move(preds));
  }
  for (std::size_t e : in_[kEnd]) g.final_preds.push_back(row_of[edges_[e].from]);
  std::sort(g.final_preds.begin(), g.final_preds.end());

  auto aligned = align_rows(g, seq, params_);

  std::vector<std::size_t> interior;
  for (const auto& c : aligned.columns) {
    if (!c.b) continue;
    const std::string& token = seq[*c.b];
    if (c.a) {
      std::size_t v = order[*c.a - 1];
      if (nodes_[v].token == token) {
        interior.push_back(v);
        continue;
      }
      if (to_lower(nodes_[v].token) == to_lower(token)) ++near_misses_;
    }
    interior.push_back(add_node(token));
  }
  thread_path(interior, response_index);
  return aligned.score;
}

double LexicalDag::node_weight(std::size_t node) const {
  return static_cast<double>(nodes_[node].support.size()) / static_cast<double>(m());
}

double LexicalDag::edge_weight(std::size_t edge) const {
  return static_cast<double>(edges_[edge].support.size()) / static_cast<double>(m());
}

std::vector<std::size_t> LexicalDag::topological_order() const {
  std::vector<std::size_t> indegree(nodes_.size(), 0);
  for (const auto& e : edges_) ++indegree[e.to];
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t v = 0; v < nodes_.size(); ++v) {
    if (indegree[v] == 0) ready.push(v);
  }
  std::vector<std::size_t> order;
  order.reserve(nodes_.size());
  while (!ready.empty()) {
    std::size_t v = ready.top();
    ready.pop();
    order.push_back(v);
    for (std::size_t e : out_[v]) {
      if (--indegree[edges_[e].to] == 0) ready.push(edges_[e].to);
    }
  }
  return order;
}

std::vector<std::size_t> LexicalDag::path_of(std::size_t response_index) const {
  std::vector<std::size_t> path{kStart};
  std::size_t v = kStart;
  while (v != kEnd) {
    std::size_t next = nodes_.size();
    for (std::size_t e : out_[v]) {
      if (edges_[e].support.contains(response_index)) {
        if (next != nodes_.size()) {
          throw std::logic_error("response " + std::to_string(response_index) + " branches at node " +
                                 std::to_string(v));
        }
        next = edges_[e].to;
      }
    }
    if (next == nodes_.size() || path.size() > nodes_.size()) {
      throw std::logic_error("response " + std::to_string(response_index) + " has no path past node " +
                             std::to_string(v));
    }
    path.push_back(next);
    v = next;
  }
  return path;
}

Tokens LexicalDag::tokens_of(std::size_t response_index) const {
  Tokens out;
  for (std::size_t v : path_of(response_index)) {
    if (v != kStart && v != kEnd) out.push_back(nodes_[v].token);
  }
  return out;
}

std::vector<std::string> LexicalDag::check_invariants() const {
  std::vector<std::string> problems;
  if (!in_[kStart].empty()) problems.push_back("start sentinel has incoming edges");
  if (!out_[kEnd].empty()) problems.push_back("end sentinel has outgoing edges");
  if (topological_order().size() != nodes_.size()) problems.push_back("graph has a cycle");

  for (std::size_t v = 0; v < nodes_.size(); ++v) {
    std::size_t out_sum = 0;
    std::size_t in_sum = 0;
    for (std::size_t e : out_[v]) out_sum += edges_[e].support.size();
    for (std::size_t e : in_[v]) in_sum += edges_[e].support.size();
    std::size_t support = nodes_[v].support.size();
    if (v != kEnd && out_sum != support) {
      problems.push_back("flow not conserved leaving node " + std::to_string(v));
    }
    if (v != kStart && in_sum != support) {
      problems.push_back("flow not conserved entering node " + std::to_string(v));
    }
    if (support == 0) problems.push_back("node " + std::to_string(v) + " has no support");
  }
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (edges_[e].support.empty()) problems.push_back("edge " + std::to_string(e) + " has no support");
  }
  for (std::size_t i : responses_) {
    try {
      for (std::size_t v : path_of(i)) {
        if (!nodes_[v].support.contains(i)) {
          problems.push_back("response " + std::to_string(i) + " path uses unsupported node " +
                             std::to_string(v));
        }
      }
    } catch (const std::logic_error& e) {
      problems.push_back(e.what());
    }
  }
  return problems;
}

LexicalDag align_to_graph(const LexicalDag& dag, const Tokens& seq, std::size_t response_index) {
  LexicalDag out = dag;
  out.add_sequence(seq, response_index);
  return out;
}

LexicalDag build_lexical_dag(const ResponseSet& rs, const ScoringParams& params) {
  if (rs.token_seqs.empty()) throw Error(ErrorCode::InvalidArgument, "response set has no responses");
  LexicalDag dag(rs.token_seqs[0], 0, params);
  for (std::size_t i = 1; i < rs.token_seqs.size(); ++i) dag.add_sequence(rs.token_seqs[i], i);
  return dag;
}

}  // namespace congr
