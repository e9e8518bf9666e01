#include "congr/serialize.hpp"

#include <sstream>

#include "congr/error.hpp"

namespace congr {

using nlohmann::json;

namespace {

json support_json(const SupportSet& s) { return json(s.items()); }

SupportSet support_from(const json& j) {
  SupportSet s;
  for (const auto& v : j) s.insert(v.get<std::size_t>());
  return s;
}

std::string dot_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out;
}

}  // namespace

json graph_to_json(const ConsensusGraph& graph) {
  json nodes = json::array();
  for (const auto& n : graph.nodes) {
    json node = {{"id", n.id}, {"kind", to_string(n.kind)}, {"text", n.text}, {"support", support_json(n.support)}};
    if (n.kind == NodeKind::Disagreement) {
      json phrasings = json::object();
      for (const auto& [i, t] : n.phrasings) phrasings[std::to_string(i)] = t;
      node["phrasings"] = phrasings;
    }
    nodes.push_back(std::move(node));
  }
  json edges = json::array();
  for (const auto& e : graph.edges) {
    edges.push_back({{"from", e.from}, {"to", e.to}, {"support", support_json(e.support)}});
  }
  json regions = json::array();
  for (const auto& r : graph.regions) {
    regions.push_back({{"left", r.left},
                       {"right", r.right},
                       {"distinct_texts", r.distinct_texts},
                       {"equivalence_queries", r.equivalence_queries},
                       {"classes", r.classes}});
  }
  const auto& s = graph.scoring;
  return {{"format", kGraphFormat},
          {"prompt_id", graph.prompt_id},
          {"prompt", graph.prompt},
          {"m", graph.m},
          {"config",
           {{"scoring",
             {{"match", s.match}, {"mismatch", s.mismatch}, {"gap_open", s.gap_open}, {"gap_extend", s.gap_extend}}},
            {"judge_provider", graph.judge_provider},
            {"task_kind", to_string(graph.task_kind)}}},
          {"case_near_misses", graph.case_near_misses},
          {"nodes", nodes},
          {"edges", edges},
          {"regions", regions}};
}

ConsensusGraph graph_from_json(const json& doc) {
  try {
    if (!doc.is_object() || doc.value("format", "") != kGraphFormat) {
      throw Error(ErrorCode::Format, "not a " + std::string(kGraphFormat) + " document");
    }
    ConsensusGraph g;
    g.prompt_id = doc.at("prompt_id").get<std::string>();
    g.prompt = doc.value("prompt", "");
    g.m = doc.at("m").get<std::size_t>();
    const auto& config = doc.at("config");
    const auto& s = config.at("scoring");
    g.scoring.match = s.at("match").get<int>();
    g.scoring.mismatch = s.at("mismatch").get<int>();
    g.scoring.gap_open = s.at("gap_open").get<int>();
    g.scoring.gap_extend = s.at("gap_extend").get<int>();
    g.judge_provider = config.value("judge_provider", "");
    g.task_kind = parse_task_kind(config.value("task_kind", "text"));
    g.case_near_misses = doc.value("case_near_misses", std::size_t{0});
    for (const auto& jn : doc.at("nodes")) {
      ConsensusGraph::Node n;
      n.id = jn.at("id").get<std::size_t>();
      if (n.id != g.nodes.size()) throw Error(ErrorCode::Format, "node ids must be dense and ordered");
      n.kind = parse_node_kind(jn.at("kind").get<std::string>());
      n.text = jn.at("text").get<std::string>();
      n.support = support_from(jn.at("support"));
      if (jn.contains("phrasings")) {
        for (const auto& [key, value] : jn.at("phrasings").items()) {
          n.phrasings[std::stoul(key)] = value.get<std::string>();
        }
      }
      g.nodes.push_back(std::move(n));
    }
    if (g.nodes.size() < 2) throw Error(ErrorCode::Format, "graph needs both sentinels");
    for (const auto& je : doc.at("edges")) {
      ConsensusGraph::Edge e{je.at("from").get<std::size_t>(), je.at("to").get<std::size_t>(),
                             support_from(je.at("support"))};
      if (e.from >= g.nodes.size() || e.to >= g.nodes.size()) throw Error(ErrorCode::Format, "edge out of range");
      g.edges.push_back(std::move(e));
    }
    for (const auto& jr : doc.value("regions", json::array())) {
      g.regions.push_back({jr.at("left").get<std::size_t>(), jr.at("right").get<std::size_t>(),
                           jr.value("distinct_texts", std::size_t{0}), jr.value("equivalence_queries", std::size_t{0}),
                           jr.value("classes", std::size_t{0})});
    }
    g.index();
    return g;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::Format, std::string("malformed graph: ") + e.what());
  }
}

std::string graph_to_dot(const ConsensusGraph& graph) {
  std::ostringstream out;
  out << "digraph congr {\n  rankdir=LR;\n  node [shape=box, style=filled];\n";
  for (const auto& n : graph.nodes) {
    std::string label;
    const char* color = "lightgray";
    switch (n.kind) {
      case NodeKind::Start: label = "START"; break;
      case NodeKind::End: label = "END"; break;
      case NodeKind::Consensus: label = n.text; color = "palegreen"; break;
      default: label = n.text; color = "lightblue"; break;
    }
    out << "  n" << n.id << " [label=\"" << dot_escape(label) << "\\n(" << n.support.size() << "/" << graph.m
        << ")\", fillcolor=" << color << "];\n";
  }
  for (const auto& e : graph.edges) {
    out << "  n" << e.from << " -> n" << e.to << " [label=\"" << e.support.size() << "\", penwidth="
        << 1 + e.support.size() << "];\n";
  }
  out << "}\n";
  return out.str();
}

json stats_to_json(const GraphStats& s) {
  return {{"n_nodes", s.n_nodes},
          {"n_consensus", s.n_consensus},
          {"n_disagreement", s.n_disagreement},
          {"pct_consensus", s.pct_consensus},
          {"pct_disagreement", s.pct_disagreement},
          {"mean_words_consensus", s.mean_words_consensus},
          {"mean_words_disagreement", s.mean_words_disagreement},
          {"mean_branches_after_consensus", s.mean_branches_after_consensus},
          {"pct_stopword_only_consensus", s.pct_stopword_only_consensus},
          {"pct_stopword_only_disagreement", s.pct_stopword_only_disagreement},
          {"case_near_misses", s.case_near_misses},
          {"degenerate", s.degenerate}};
}

json result_to_json(const SynthesisResult& r, std::string_view prompt_id) {
  json out = {{"prompt_id", prompt_id}, {"method", to_string(r.method)}, {"judge_calls", r.judge_calls}};
  if (r.text) {
    out["outcome"] = "text";
    out["text"] = *r.text;
  } else {
    out["outcome"] = "abstain";
  }
  if (r.method == DecodeMethod::Consensus) {
    out["tau"] = r.threshold;
    out["selected_nodes"] = r.selected_nodes;
    out["draft"] = r.draft;
  } else {
    out["kappa"] = r.threshold;
    out["marked_anchors"] = r.marked_anchors;
    json verifications = json::array();
    for (const auto& v : r.verifications) {
      verifications.push_back({{"anchor", v.anchor},
                               {"branch_a", v.branch_a},
                               {"branch_b", v.branch_b},
                               {"representative_a", v.representative_a},
                               {"representative_b", v.representative_b},
                               {"score", {v.score.first, v.score.second}}});
    }
    out["verifications"] = verifications;
    out["survivors"] = r.survivors;
    out["pruned"] = r.pruned;
    out["all_pruned"] = r.all_pruned;
    out["answer"] = r.answer ? json(*r.answer) : json(nullptr);
  }
  return out;
}

}  // namespace congr
