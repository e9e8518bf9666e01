#include <doctest.h>

#include <random>

#include "congr/align.hpp"
#include "congr/error.hpp"
#include "../support.hpp"

using namespace congr;

namespace {

// Indices used on one side of an alignment, in column order.
std::vector<std::size_t> project(const PairAlignment& aln, bool left) {
  std::vector<std::size_t> out;
  for (const auto& c : aln.columns) {
    const auto& side = left ? c.a : c.b;
    if (side) out.push_back(*side);
  }
  return out;
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

}  // namespace

TEST_CASE("single mismatch scores -2") {
  auto aln = align_pair({"a"}, {"b"}, {});
  CHECK(aln.score == -2);
  REQUIRE(aln.columns.size() == 1);
  CHECK(aln.columns[0] == AlignedColumn{0, 0});
}

TEST_CASE("identical sequences align column by column") {
  auto aln = align_pair({"a", "b"}, {"a", "b"}, {});
  CHECK(aln.score == 2);
  CHECK(aln.columns.size() == 2);
}

TEST_CASE("one deletion between matches scores 0") {
  auto aln = align_pair({"a", "b", "c"}, {"a", "c"}, {});
  CHECK(aln.score == 0);
  REQUIRE(aln.columns.size() == 3);
  CHECK(aln.columns[1] == AlignedColumn{1, std::nullopt});
}

TEST_CASE("gap runs pay the opening cost once") {
  ScoringParams p;
  CHECK(align_pair({"a", "x", "y", "b"}, {"a", "b"}, p).score == 1 + 1 + (p.gap_open + 2 * p.gap_extend));
  CHECK(align_pair({"q"}, {"a", "b", "c"}, p).score == p.mismatch + p.gap_open + 2 * p.gap_extend);
  try {
    align_pair({}, {"a"}, p);
    FAIL("empty sequence accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptySequence);
  }
}

TEST_CASE("align_pair matches the exhaustive optimum") {
  std::mt19937_64 rng(11);
  const std::vector<std::string> alphabet = {"w", "x", "y", "z"};
  ScoringParams p;
  for (int trial = 0; trial < 200; ++trial) {
    auto a = testing::random_tokens(rng, 5, alphabet, 1);
    auto b = testing::random_tokens(rng, 5, alphabet, 1);
    auto aln = align_pair(a, b, p);
    CHECK(aln.score == testing::exhaustive_alignment_score(a, b, p));
    CHECK(score_alignment(a, b, aln.columns, p) == aln.score);
    CHECK(project(aln, true) == iota(a.size()));
    CHECK(project(aln, false) == iota(b.size()));
  }
}

TEST_CASE("other scoring parameters are honored") {
  ScoringParams p{2, -1, -3, -1};
  std::mt19937_64 rng(5);
  const std::vector<std::string> alphabet = {"w", "x", "y"};
  for (int trial = 0; trial < 100; ++trial) {
    auto a = testing::random_tokens(rng, 5, alphabet, 1);
    auto b = testing::random_tokens(rng, 5, alphabet, 1);
    CHECK(align_pair(a, b, p).score == testing::exhaustive_alignment_score(a, b, p));
  }
}

TEST_CASE("scoring parameters are validated") {
  CHECK_NOTHROW(ScoringParams{}.validate());
  CHECK_THROWS_AS((ScoringParams{0, -2, -1, -1}.validate()), Error);
  CHECK_THROWS_AS((ScoringParams{1, 2, -1, -1}.validate()), Error);
  CHECK_THROWS_AS((ScoringParams{1, -2, 1, -1}.validate()), Error);
}

TEST_CASE("the first response becomes a chain") {
  LexicalDag dag({"a", "b"}, 0, {});
  CHECK(dag.nodes().size() == 4);
  CHECK(dag.path_of(0) == std::vector<std::size_t>{LexicalDag::kStart, 2, 3, LexicalDag::kEnd});
  CHECK(dag.check_invariants().empty());
}

TEST_CASE("matching tokens share nodes and edge weights count responses") {
  Tokens base{"a", "b", "c"};
  LexicalDag dag(base, 0, {});
  dag.add_sequence(base, 1);
  dag.add_sequence(base, 2);
  dag.add_sequence(base, 3);
  dag.add_sequence({"a", "z", "b", "c"}, 4);
  CHECK(dag.check_invariants().empty());
  CHECK(dag.m() == 5);
  // a, b, c, z plus sentinels.
  CHECK(dag.nodes().size() == 6);
  for (std::size_t e = 0; e < dag.edges().size(); ++e) {
    const auto& edge = dag.edges()[e];
    const auto& from = dag.nodes()[edge.from].token;
    const auto& to = dag.nodes()[edge.to].token;
    if (from == "a" && to == "b") CHECK(dag.edge_weight(e) == doctest::Approx(0.8));
    if (from == "a" && to == "z") CHECK(dag.edge_weight(e) == doctest::Approx(0.2));
  }
  for (std::size_t v = 2; v < dag.nodes().size(); ++v) {
    double expected = dag.nodes()[v].token == "z" ? 0.2 : 1.0;
    CHECK(dag.node_weight(v) == doctest::Approx(expected));
  }
}

TEST_CASE("add_sequence returns the alignment score against a chain") {
  LexicalDag dag({"a", "b", "c"}, 0, {});
  CHECK(dag.add_sequence({"a", "c"}, 1) == 0);
}

TEST_CASE("graph alignment of a second response is pairwise optimal") {
  std::mt19937_64 rng(17);
  const std::vector<std::string> alphabet = {"w", "x", "y", "z"};
  for (int trial = 0; trial < 200; ++trial) {
    auto a = testing::random_tokens(rng, 6, alphabet, 1);
    auto b = testing::random_tokens(rng, 6, alphabet, 1);
    LexicalDag dag(a, 0, {});
    CHECK(dag.add_sequence(b, 1) == testing::exhaustive_alignment_score(a, b, {}));
  }
}

TEST_CASE("tokens of each path reproduce the inputs") {
  std::mt19937_64 rng(3);
  const std::vector<std::string> alphabet = {"w", "x", "y", "z", "."};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Tokens> seqs;
    std::size_t m = 1 + rng() % 5;
    for (std::size_t i = 0; i < m; ++i) seqs.push_back(testing::random_tokens(rng, 8, alphabet, 1));
    LexicalDag dag(seqs[0], 0, {});
    for (std::size_t i = 1; i < m; ++i) dag.add_sequence(seqs[i], i);
    REQUIRE(dag.check_invariants().empty());
    for (std::size_t i = 0; i < m; ++i) CHECK(dag.tokens_of(i) == seqs[i]);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (const auto& e : dag.edges()) edges.emplace_back(e.from, e.to);
    CHECK(testing::acyclic(dag.nodes().size(), edges));
  }
}

TEST_CASE("align_to_graph leaves the input untouched") {
  LexicalDag dag({"a", "b"}, 0, {});
  auto bigger = align_to_graph(dag, {"a", "c"}, 1);
  CHECK(dag.m() == 1);
  CHECK(bigger.m() == 2);
  try {
    align_to_graph(bigger, {"q"}, 1);
    FAIL("duplicate index accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicateResponse);
  }
  try {
    align_to_graph(dag, {}, 2);
    FAIL("empty sequence accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptySequence);
  }
}

TEST_CASE("case variants stay apart and are counted") {
  LexicalDag dag({"The", "cat"}, 0, {});
  dag.add_sequence({"the", "cat"}, 1);
  CHECK(dag.case_near_misses() == 1);
  CHECK(dag.nodes().size() == 5);
}

TEST_CASE("topological order starts at the start sentinel and ends at the end") {
  auto rs = ResponseSet::make("p", "", {"a b c", "a x c", "b c"});
  auto dag = build_lexical_dag(rs, {});
  auto order = dag.topological_order();
  CHECK(order.front() == LexicalDag::kStart);
  CHECK(order.back() == LexicalDag::kEnd);
  CHECK(order.size() == dag.nodes().size());
}
