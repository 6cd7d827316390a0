#pragma once

#include "cogspeech/common.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace cogspeech::speechgraph {

/// Directed word-adjacency multigraph. Nodes are indexed in order of first
/// appearance; `edges` maps (from, to) to multiplicity.
struct WordGraph {
    std::vector<std::string> nodes;
    std::map<std::pair<std::size_t, std::size_t>, int> edges;

    std::size_t node_count() const noexcept { return nodes.size(); }
    int total_multiplicity() const;
};

WordGraph build_graph(const std::vector<std::string>& tokens);

inline constexpr std::size_t kGraphFeatureCount = 13;
std::vector<std::string> graph_feature_names();

/// N, E, RE, PE, L1, L2, L3, LCC, LSC, ATD, density, diameter, ASP.
FeatureBlock graph_features(const WordGraph& g);

}  // namespace cogspeech::speechgraph
