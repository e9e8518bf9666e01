#include "congr/graph.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "congr/error.hpp"

namespace congr {

const char* to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Start: return "start";
    case NodeKind::End: return "end";
    case NodeKind::Consensus: return "consensus";
    case NodeKind::Disagreement: return "disagreement";
    case NodeKind::Token: return "token";
  }
  return "unknown";
}

NodeKind parse_node_kind(std::string_view name) {
  if (name == "start") return NodeKind::Start;
  if (name == "end") return NodeKind::End;
  if (name == "consensus") return NodeKind::Consensus;
  if (name == "disagreement") return NodeKind::Disagreement;
  if (name == "token") return NodeKind::Token;
  throw Error(ErrorCode::Format, "unknown node kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Consensus merge

bool AnchoredGraph::is_anchor(std::size_t id) const {
  auto k = nodes[id].kind;
  return k == NodeKind::Start || k == NodeKind::End || k == NodeKind::Consensus;
}

std::vector<std::size_t> AnchoredGraph::anchors() const {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < nodes.size(); ++v) {
    if (is_anchor(v)) out.push_back(v);
  }
  return out;
}

std::vector<std::size_t> AnchoredGraph::path_of(std::size_t response_index) const {
  // Ids are topological, so the supported nodes in id order form the path.
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < nodes.size(); ++v) {
    if (nodes[v].support.contains(response_index)) out.push_back(v);
  }
  return out;
}

AnchoredGraph merge_consensus(const LexicalDag& dag) {
  const std::size_t m = dag.m();
  const auto& lnodes = dag.nodes();
  const auto& ledges = dag.edges();
  auto full_node = [&](std::size_t v) {
    return v != LexicalDag::kStart && v != LexicalDag::kEnd && lnodes[v].support.size() == m;
  };
  // A full node continues its predecessor's chain when its only entry is a
  // full edge from another full node.
  auto continues_chain = [&](std::size_t v) {
    if (!full_node(v)) return false;
    const auto& in = dag.in_edges(v);
    return in.size() == 1 && ledges[in[0]].support.size() == m && full_node(ledges[in[0]].from);
  };

  AnchoredGraph g;
  g.m = m;
  g.case_near_misses = dag.case_near_misses();
  std::vector<std::size_t> merged_id(lnodes.size(), 0);

  for (std::size_t v : dag.topological_order()) {
    if (v == LexicalDag::kEnd) continue;
    if (continues_chain(v)) {
      std::size_t chain = merged_id[ledges[dag.in_edges(v)[0]].from];
      merged_id[v] = chain;
      g.nodes[chain].tokens.push_back(lnodes[v].token);
      continue;
    }
    AnchoredGraph::Node node;
    if (v == LexicalDag::kStart) {
      node.kind = NodeKind::Start;
    } else {
      node.kind = full_node(v) ? NodeKind::Consensus : NodeKind::Token;
      node.tokens.push_back(lnodes[v].token);
    }
    node.support = lnodes[v].support;
    merged_id[v] = g.nodes.size();
    g.nodes.push_back(std::move(node));
  }
  merged_id[LexicalDag::kEnd] = g.nodes.size();
  g.nodes.push_back({NodeKind::End, {}, lnodes[LexicalDag::kEnd].support});

  for (const auto& e : ledges) {
    std::size_t from = merged_id[e.from];
    std::size_t to = merged_id[e.to];
    if (from == to) continue;
    g.edges.push_back({from, to, e.support});
  }
  std::sort(g.edges.begin(), g.edges.end(),
            [](const auto& a, const auto& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); });
  return g;
}

// ---------------------------------------------------------------------------
// Regions

std::vector<Region> extract_regions(const AnchoredGraph& graph) {
  const auto anchors = graph.anchors();
  std::vector<std::size_t> anchor_rank(graph.nodes.size(), anchors.size());
  for (std::size_t k = 0; k < anchors.size(); ++k) anchor_rank[anchors[k]] = k;

  // paths[k][i]: tokens of response i between anchors k and k+1.
  std::vector<std::vector<Tokens>> gaps(anchors.size() - 1, std::vector<Tokens>(graph.m));
  for (std::size_t i = 0; i < graph.m; ++i) {
    std::size_t current = 0;
    for (std::size_t v : graph.path_of(i)) {
      if (graph.is_anchor(v)) {
        current = anchor_rank[v];
        continue;
      }
      auto& dst = gaps[current][i];
      dst.insert(dst.end(), graph.nodes[v].tokens.begin(), graph.nodes[v].tokens.end());
    }
  }

  std::vector<Region> out;
  for (std::size_t k = 0; k + 1 < anchors.size(); ++k) {
    bool any = std::any_of(gaps[k].begin(), gaps[k].end(), [](const Tokens& t) { return !t.empty(); });
    if (!any) continue;
    out.push_back({anchors[k], anchors[k + 1], std::move(gaps[k])});
  }
  return out;
}

// ---------------------------------------------------------------------------
// ConsensusGraph

void ConsensusGraph::index() {
  out_.assign(nodes.size(), {});
  in_.assign(nodes.size(), {});
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].from >= nodes.size() || edges[e].to >= nodes.size()) {
      throw Error(ErrorCode::Format, "edge " + std::to_string(e) + " refers to a missing node");
    }
    out_[edges[e].from].push_back(e);
    in_[edges[e].to].push_back(e);
  }
}

double ConsensusGraph::weighted_degree(std::size_t id) const {
  return m == 0 ? 0.0 : static_cast<double>(nodes[id].support.size()) / static_cast<double>(m);
}

std::vector<std::size_t> ConsensusGraph::disagreement_successors(std::size_t id) const {
  std::vector<std::size_t> out;
  for (std::size_t e : out_[id]) {
    if (nodes[edges[e].to].kind == NodeKind::Disagreement) out.push_back(edges[e].to);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::size_t> ConsensusGraph::path_of(std::size_t response_index) const {
  std::vector<std::size_t> out;
  for (const auto& n : nodes) {
    if (n.support.contains(response_index)) out.push_back(n.id);
  }
  return out;
}

std::vector<std::string> ConsensusGraph::segments_of(std::size_t response_index) const {
  std::vector<std::string> out;
  for (std::size_t v : path_of(response_index)) {
    const auto& n = nodes[v];
    if (n.kind == NodeKind::Consensus) {
      out.push_back(n.text);
    } else if (n.kind == NodeKind::Disagreement) {
      auto it = n.phrasings.find(response_index);
      out.push_back(it != n.phrasings.end() ? it->second : n.text);
    }
  }
  return out;
}

std::string ConsensusGraph::reconstruct(std::size_t response_index) const {
  return join_segments(segments_of(response_index));
}

std::vector<std::string> ConsensusGraph::reconstruct_all() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < m; ++i) out.push_back(reconstruct(i));
  return out;
}

std::vector<std::string> ConsensusGraph::check_invariants(const std::vector<std::string>* responses) const {
  std::vector<std::string> problems;
  auto fail = [&](std::string msg) { problems.push_back(std::move(msg)); };
  if (nodes.size() < 2) {
    fail("graph lacks sentinels");
    return problems;
  }
  if (out_.size() != nodes.size()) {
    fail("graph is not indexed");
    return problems;
  }
  if (nodes.front().kind != NodeKind::Start) fail("node 0 is not the start sentinel");
  if (nodes.back().kind != NodeKind::End) fail("last node is not the end sentinel");
  if (!in_[start()].empty()) fail("start sentinel has incoming edges");
  if (!out_[end()].empty()) fail("end sentinel has outgoing edges");

  for (std::size_t v = 0; v < nodes.size(); ++v) {
    const auto& n = nodes[v];
    if (n.id != v) fail("node id mismatch at position " + std::to_string(v));
    if ((n.kind == NodeKind::Consensus || n.kind == NodeKind::Start || n.kind == NodeKind::End) &&
        n.support.size() != m) {
      fail("anchor " + std::to_string(v) + " lacks full support");
    }
    if (n.kind == NodeKind::Disagreement) {
      if (n.phrasings.size() != n.support.size()) fail("node " + std::to_string(v) + " phrasings/support mismatch");
      std::size_t best = 0;
      const std::string* longest = nullptr;
      for (const auto& [i, text] : n.phrasings) {
        if (!n.support.contains(i)) fail("node " + std::to_string(v) + " has a phrasing for an unsupported response");
        if (!longest || text.size() > best) {
          best = text.size();
          longest = &text;
        }
      }
      if (longest && *longest != n.text) fail("node " + std::to_string(v) + " text is not its longest phrasing");
    }
    std::size_t out_sum = 0;
    std::size_t in_sum = 0;
    SupportSet out_union;
    for (std::size_t e : out_[v]) {
      out_sum += edges[e].support.size();
      out_union.merge(edges[e].support);
    }
    for (std::size_t e : in_[v]) in_sum += edges[e].support.size();
    if (v != end() && (out_sum != n.support.size() || !(out_union == n.support))) {
      fail("flow not conserved leaving node " + std::to_string(v));
    }
    if (v != start() && in_sum != n.support.size()) fail("flow not conserved entering node " + std::to_string(v));
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].from >= edges[e].to) fail("edge " + std::to_string(e) + " breaks topological id order");
    if (edges[e].support.empty()) fail("edge " + std::to_string(e) + " has no support");
  }

  for (std::size_t i = 0; i < m; ++i) {
    // Walk the edges carrying i; they must reach the end without branching
    // and visit exactly the nodes that list i.
    std::vector<std::size_t> walked{start()};
    std::size_t v = start();
    bool ok = true;
    while (v != end() && ok) {
      std::size_t next = nodes.size();
      for (std::size_t e : out_[v]) {
        if (!edges[e].support.contains(i)) continue;
        if (next != nodes.size()) ok = false;
        next = edges[e].to;
      }
      if (next == nodes.size()) ok = false;
      if (ok) {
        walked.push_back(next);
        v = next;
      }
    }
    if (!ok || walked != path_of(i)) {
      fail("response " + std::to_string(i) + " does not trace a single start-to-end path");
      continue;
    }
    // Alternation: no two disagreement nodes in a row.
    for (std::size_t k = 1; k < walked.size(); ++k) {
      if (nodes[walked[k]].kind == NodeKind::Disagreement && nodes[walked[k - 1]].kind == NodeKind::Disagreement) {
        fail("response " + std::to_string(i) + " crosses two disagreement nodes in a row");
      }
    }
    if (responses && i < responses->size()) {
      if (reconstruct(i) != normalize_text((*responses)[i])) {
        fail("response " + std::to_string(i) + " is not recovered from its path");
      }
    }
  }
  return problems;
}

// ---------------------------------------------------------------------------
// Disagreement nodes

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

struct EquivalenceClass {
  SupportSet members;
  std::map<std::size_t, std::string> phrasings;
};

// Classes ordered by their lowest member; exact duplicates are clustered
// before the judge sees anything, and empty paths are left out.
std::vector<EquivalenceClass> cluster_region(const Region& region, Judge& judge, TaskKind task_kind,
                                             ConsensusGraph::RegionInfo& info) {
  std::vector<std::string> distinct;
  std::vector<SupportSet> holders;
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < region.paths.size(); ++i) {
    if (region.paths[i].empty()) continue;
    std::string text = region.text(i);
    auto [it, inserted] = slot.emplace(text, distinct.size());
    if (inserted) {
      distinct.push_back(text);
      holders.emplace_back();
    }
    holders[it->second].insert(i);
  }
  info.distinct_texts = distinct.size();

  DisjointSets sets(distinct.size());
  for (std::size_t a = 0; a < distinct.size(); ++a) {
    for (std::size_t b = a + 1; b < distinct.size(); ++b) {
      if (sets.find(a) == sets.find(b)) continue;
      ++info.equivalence_queries;
      if (judge.equivalent(distinct[a], distinct[b], task_kind)) sets.unite(a, b);
    }
  }

  std::map<std::size_t, EquivalenceClass> by_root;
  for (std::size_t d = 0; d < distinct.size(); ++d) {
    auto& cls = by_root[sets.find(d)];
    for (std::size_t i : holders[d]) {
      cls.members.insert(i);
      cls.phrasings[i] = distinct[d];
    }
  }
  std::vector<EquivalenceClass> out;
  for (auto& [root, cls] : by_root) out.push_back(std::move(cls));
  std::sort(out.begin(), out.end(),
            [](const auto& x, const auto& y) { return x.members.front() < y.members.front(); });
  info.classes = out.size();
  return out;
}

std::string longest_phrasing(const std::map<std::size_t, std::string>& phrasings) {
  const std::string* best = nullptr;
  for (const auto& [i, text] : phrasings) {
    if (!best || text.size() > best->size()) best = &text;
  }
  return best ? *best : std::string();
}

}  // namespace

ConsensusGraph install_disagreement_nodes(const AnchoredGraph& graph, const std::vector<Region>& regions,
                                          Judge& judge, TaskKind task_kind) {
  ConsensusGraph out;
  out.m = graph.m;
  out.task_kind = task_kind;
  out.judge_provider = judge.provider_tag();
  out.case_near_misses = graph.case_near_misses;

  std::vector<std::vector<EquivalenceClass>> classes(regions.size());
  std::vector<ConsensusGraph::RegionInfo> infos(regions.size());
  for (std::size_t r = 0; r < regions.size(); ++r) {
    infos[r].left = regions[r].left;
    infos[r].right = regions[r].right;
    try {
      classes[r] = cluster_region(regions[r], judge, task_kind, infos[r]);
    } catch (const Error& e) {
      throw RegionJudgeError(r, regions[r].left, regions[r].right, e.code(), e.what());
    }
  }

  std::map<std::size_t, std::size_t> region_after;  // left anchor -> region
  for (std::size_t r = 0; r < regions.size(); ++r) region_after[regions[r].left] = r;

  const auto anchors = graph.anchors();
  std::vector<std::size_t> new_id(graph.nodes.size(), 0);
  auto add_node = [&](NodeKind kind, std::string text, SupportSet support) {
    ConsensusGraph::Node n;
    n.id = out.nodes.size();
    n.kind = kind;
    n.text = std::move(text);
    n.support = std::move(support);
    out.nodes.push_back(std::move(n));
    return out.nodes.back().id;
  };

  for (std::size_t k = 0; k < anchors.size(); ++k) {
    const auto& anchor = graph.nodes[anchors[k]];
    std::size_t left = add_node(anchor.kind, detokenize(anchor.tokens), anchor.support);
    new_id[anchors[k]] = left;
    if (k + 1 == anchors.size()) break;

    const std::size_t right = out.nodes.size();  // placeholder until classes are added
    auto it = region_after.find(anchors[k]);
    if (it == region_after.end()) {
      out.edges.push_back({left, right, SupportSet::all(out.m)});
      continue;
    }
    const Region& region = regions[it->second];
    auto& region_classes = classes[it->second];
    infos[it->second].left = left;

    SupportSet direct;
    for (std::size_t i = 0; i < region.paths.size(); ++i) {
      if (region.paths[i].empty()) direct.insert(i);
    }
    std::vector<std::size_t> class_nodes;
    for (auto& cls : region_classes) {
      std::size_t v = add_node(NodeKind::Disagreement, longest_phrasing(cls.phrasings), cls.members);
      out.nodes[v].phrasings = std::move(cls.phrasings);
      class_nodes.push_back(v);
    }
    const std::size_t right_id = out.nodes.size();
    infos[it->second].right = right_id;
    if (!direct.empty()) out.edges.push_back({left, right_id, direct});
    for (std::size_t v : class_nodes) {
      out.edges.push_back({left, v, out.nodes[v].support});
      out.edges.push_back({v, right_id, out.nodes[v].support});
    }
  }
  out.regions = std::move(infos);
  std::sort(out.edges.begin(), out.edges.end(),
            [](const auto& a, const auto& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); });
  out.index();
  return out;
}

ConsensusGraph build_consensus_graph(const ResponseSet& rs, const ScoringParams& params, Judge& judge,
                                     TaskKind task_kind) {
  auto dag = build_lexical_dag(rs, params);
  auto anchored = merge_consensus(dag);
  auto regions = extract_regions(anchored);
  auto graph = install_disagreement_nodes(anchored, regions, judge, task_kind);
  graph.prompt_id = rs.prompt_id;
  graph.prompt = rs.prompt;
  graph.scoring = params;
  return graph;
}

}  // namespace congr
