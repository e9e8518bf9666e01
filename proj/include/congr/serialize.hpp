#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "congr/decode.hpp"
#include "congr/graph.hpp"
#include "congr/stats.hpp"

namespace congr {

inline constexpr std::string_view kGraphFormat = "congr-graph/1";

nlohmann::json graph_to_json(const ConsensusGraph& graph);
/// Throws Error(Format) on a malformed document.
ConsensusGraph graph_from_json(const nlohmann::json& doc);

/// Graphviz digraph; consensus nodes green, disagreement nodes blue.
std::string graph_to_dot(const ConsensusGraph& graph);

nlohmann::json stats_to_json(const GraphStats& stats);

/// Result row; an abstention serializes as "outcome": "abstain".
nlohmann::json result_to_json(const SynthesisResult& result, std::string_view prompt_id);

}  // namespace congr
