#include <doctest.h>

#include <random>
#include <set>

#include "congr/graph.hpp"
#include "congr/stats.hpp"
#include "../support.hpp"

using namespace congr;

namespace {

class PairJudge : public OfflineProvider {
 public:
  explicit PairJudge(std::set<std::pair<std::string, std::string>> equal) : equal_(std::move(equal)) {}
  std::string tag() const override { return "pairs"; }
  bool equivalent(std::string_view a, std::string_view b, TaskKind) override {
    ++calls;
    return equal_.count({std::string(a), std::string(b)}) || equal_.count({std::string(b), std::string(a)});
  }
  std::size_t calls = 0;

 private:
  std::set<std::pair<std::string, std::string>> equal_;
};

ConsensusGraph build(const std::vector<std::string>& texts) {
  auto judge = Judge::offline();
  return build_consensus_graph(ResponseSet::make("t", "prompt", texts), {}, judge);
}

std::vector<std::size_t> kinds(const ConsensusGraph& g, NodeKind kind) {
  std::vector<std::size_t> out;
  for (const auto& n : g.nodes) {
    if (n.kind == kind) out.push_back(n.id);
  }
  return out;
}

}  // namespace

TEST_CASE("a single response is one consensus node") {
  auto g = build({"Just one answer."});
  REQUIRE(g.nodes.size() == 3);
  CHECK(g.nodes[1].kind == NodeKind::Consensus);
  CHECK(g.nodes[1].text == "Just one answer.");
  CHECK(g.regions.empty());
  CHECK(g.check_invariants().empty());
}

TEST_CASE("identical responses fuse completely") {
  auto g = build({"a b c", "a b c", "a b c"});
  CHECK(g.nodes.size() == 3);
  CHECK(g.weighted_degree(1) == doctest::Approx(1.0));
}

TEST_CASE("one inserted token gives a minority branch and a direct edge") {
  auto g = build({"a b c", "a b c", "a b c", "a b c", "a z b c"});
  REQUIRE(g.check_invariants().empty());
  REQUIRE(g.nodes.size() == 5);
  CHECK(g.nodes[1].text == "a");
  CHECK(g.nodes[2].kind == NodeKind::Disagreement);
  CHECK(g.nodes[2].text == "z");
  CHECK(g.nodes[3].text == "b c");
  bool direct = false;
  for (const auto& e : g.edges) {
    if (e.from == 1 && e.to == 3) {
      direct = true;
      CHECK(e.support.size() == 4);
    }
    if (e.from == 1 && e.to == 2) CHECK(e.support == SupportSet{4});
  }
  CHECK(direct);
}

TEST_CASE("three middles make an hourglass") {
  auto g = build({"start red end", "start green end", "start blue end"});
  REQUIRE(g.check_invariants().empty());
  CHECK(kinds(g, NodeKind::Consensus).size() == 2);
  CHECK(kinds(g, NodeKind::Disagreement).size() == 3);
  REQUIRE(g.regions.size() == 1);
  CHECK(g.regions[0].distinct_texts == 3);
  CHECK(g.regions[0].classes == 3);
  CHECK(g.disagreement_successors(1).size() == 3);
}

TEST_CASE("regions record empty paths for responses that skip the middle") {
  auto rs = ResponseSet::make("p", "", {"a x b", "a b", "a y y b", "a b", "a x b"});
  auto anchored = merge_consensus(build_lexical_dag(rs, {}));
  auto regions = extract_regions(anchored);
  REQUIRE(regions.size() == 1);
  std::size_t empty = 0;
  for (const auto& p : regions[0].paths) empty += p.empty();
  CHECK(empty == 2);
  CHECK(regions[0].text(2) == "y y");
}

TEST_CASE("a fully merged chain has no regions") {
  auto rs = ResponseSet::make("p", "", {"same words here", "same words here"});
  CHECK(extract_regions(merge_consensus(build_lexical_dag(rs, {}))).empty());
}

TEST_CASE("identical region texts need no judge call") {
  auto provider = std::make_shared<PairJudge>(std::set<std::pair<std::string, std::string>>{});
  Judge judge(provider, std::make_shared<VerdictCache>());
  auto g = build_consensus_graph(ResponseSet::make("p", "", {"x alpha y", "x beta y", "x beta y"}), {}, judge);
  CHECK(provider->calls == 1);
  REQUIRE(g.regions.size() == 1);
  CHECK(g.regions[0].distinct_texts == 2);
}

TEST_CASE("equivalent phrasings share a node named by the longest member") {
  auto provider = std::make_shared<PairJudge>(
      std::set<std::pair<std::string, std::string>>{{"the 3pm meeting", "The meeting starts at 3pm"}});
  Judge judge(provider, std::make_shared<VerdictCache>());
  auto rs = ResponseSet::make("p", "", {"Note: the 3pm meeting .", "Note: The meeting starts at 3pm .",
                                        "Note: canceled ."});
  auto g = build_consensus_graph(rs, {}, judge);
  REQUIRE(g.check_invariants().empty());
  auto dis = kinds(g, NodeKind::Disagreement);
  REQUIRE(dis.size() == 2);
  const auto& merged = g.nodes[dis[0]];
  CHECK(merged.text == "The meeting starts at 3pm");
  CHECK(merged.support == SupportSet{0, 1});
  CHECK(merged.phrasings.at(0) == "the 3pm meeting");
  CHECK(g.nodes[dis[1]].text == "canceled");
  CHECK(g.reconstruct(0) == "Note: the 3pm meeting.");
}

TEST_CASE("equal-length phrasings resolve to the lowest response") {
  auto provider = std::make_shared<PairJudge>(std::set<std::pair<std::string, std::string>>{{"cat", "dog"}});
  Judge judge(provider, std::make_shared<VerdictCache>());
  auto g = build_consensus_graph(ResponseSet::make("p", "", {"a dog b", "a cat b"}), {}, judge);
  auto dis = kinds(g, NodeKind::Disagreement);
  REQUIRE(dis.size() == 1);
  CHECK(g.nodes[dis[0]].text == "dog");
}

TEST_CASE("responses with nothing in common form one degenerate region") {
  auto g = build({"alpha beta", "gamma delta"});
  REQUIRE(g.check_invariants().empty());
  CHECK(kinds(g, NodeKind::Consensus).empty());
  CHECK(g.regions.size() == 1);
  CHECK(graph_stats(g).degenerate);
  CHECK(g.reconstruct(1) == "gamma delta");
}

TEST_CASE("judge failures name the region") {
  struct Broken : OfflineProvider {
    bool equivalent(std::string_view, std::string_view, TaskKind) override {
      throw Error(ErrorCode::JudgeTransport, "down");
    }
  };
  Judge judge(std::make_shared<Broken>(), std::make_shared<VerdictCache>());
  try {
    build_consensus_graph(ResponseSet::make("p", "", {"a x b", "a y b"}), {}, judge);
    FAIL("judge failure swallowed");
  } catch (const RegionJudgeError& e) {
    CHECK(e.code() == ErrorCode::RegionJudge);
    CHECK(e.cause() == ErrorCode::JudgeTransport);
    CHECK(e.region_index() == 0);
  }
}

TEST_CASE("Appendix D opener is a consensus node and birthdates are singletons") {
  auto sets = read_response_sets(CONGR_FIXTURES "/appendix_d.jsonl");
  REQUIRE(sets.size() == 1);
  auto judge = Judge::offline();
  auto g = build_consensus_graph(sets[0], {}, judge);
  REQUIRE(g.check_invariants(&sets[0].responses).empty());
  CHECK(g.nodes[1].kind == NodeKind::Consensus);
  CHECK(g.nodes[1].text == "Roman Pavlyuchenko is a former Russian professional footballer who played as a");
  for (const char* date : {"January 27", "October 15", "December 10", "July 27", "December 14"}) {
    bool found = false;
    for (const auto& n : g.nodes) {
      if (n.text.find(date) != std::string::npos) {
        found = true;
        CHECK(n.kind == NodeKind::Disagreement);
        CHECK(n.support.size() == 1);
      }
    }
    CHECK_MESSAGE(found, date);
  }
}

TEST_CASE("every response path is the unique one carrying it") {
  std::mt19937_64 rng(23);
  for (std::size_t trial = 0; trial < 60; ++trial) {
    auto rs = testing::random_response_set(rng, trial, 4, 12);
    auto judge = Judge::offline();
    auto g = build_consensus_graph(rs, {}, judge);
    REQUIRE(g.check_invariants(&rs.responses).empty());
    for (std::size_t i = 0; i < rs.m(); ++i) {
      auto paths = testing::paths_carrying(g, i);
      REQUIRE(paths.size() == 1);
      CHECK(paths[0] == g.path_of(i));
      CHECK(g.reconstruct(i) == normalize_text(rs.responses[i]));
    }
    CHECK(testing::flow_conserved(g));
  }
}

TEST_CASE("invariant checker reports damage") {
  auto g = build({"a x b", "a y b"});
  REQUIRE(g.check_invariants().empty());
  auto broken = g;
  broken.edges.pop_back();
  broken.index();
  CHECK_FALSE(broken.check_invariants().empty());
  auto wrong_text = g;
  std::vector<std::string> other{"a x b", "a q b"};
  CHECK_FALSE(wrong_text.check_invariants(&other).empty());
}
