#include "cogspeech/speechgraph.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <numeric>
#include <set>
#include <unordered_map>

namespace cogspeech::speechgraph {
namespace {

using Adjacency = std::vector<std::set<std::size_t>>;

std::vector<std::size_t> weak_component_of_largest(const Adjacency& undirected) {
    const std::size_t n = undirected.size();
    std::vector<int> comp(n, -1);
    std::vector<std::size_t> best;
    for (std::size_t s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<std::size_t> members{s};
        comp[s] = static_cast<int>(s);
        for (std::size_t i = 0; i < members.size(); ++i)
            for (auto v : undirected[members[i]])
                if (comp[v] < 0) {
                    comp[v] = static_cast<int>(s);
                    members.push_back(v);
                }
        if (members.size() > best.size()) best = std::move(members);
    }
    return best;
}

// Tarjan's strongly connected components; returns the largest size.
std::size_t largest_scc(const Adjacency& out) {
    const std::size_t n = out.size();
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    int counter = 0;
    std::size_t best = 0;
    std::function<void(std::size_t)> visit = [&](std::size_t v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
        for (auto w : out[v]) {
            if (index[w] < 0) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            std::size_t size = 0;
            for (;;) {
                const auto w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
                ++size;
                if (w == v) break;
            }
            best = std::max(best, size);
        }
    };
    for (std::size_t v = 0; v < n; ++v)
        if (index[v] < 0) visit(v);
    return best;
}

}  // namespace

int WordGraph::total_multiplicity() const {
    int total = 0;
    for (const auto& [e, m] : edges) total += m;
    return total;
}

WordGraph build_graph(const std::vector<std::string>& tokens) {
    WordGraph g;
    std::unordered_map<std::string, std::size_t> ids;
    std::vector<std::size_t> seq;
    seq.reserve(tokens.size());
    for (const auto& t : tokens) {
        auto [it, inserted] = ids.emplace(t, g.nodes.size());
        if (inserted) g.nodes.push_back(t);
        seq.push_back(it->second);
    }
    for (std::size_t i = 1; i < seq.size(); ++i) ++g.edges[{seq[i - 1], seq[i]}];
    return g;
}

std::vector<std::string> graph_feature_names() {
    return {"graph_N",   "graph_E",   "graph_RE",  "graph_PE",  "graph_L1",      "graph_L2",      "graph_L3",
            "graph_LCC", "graph_LSC", "graph_ATD", "graph_density", "graph_diameter", "graph_ASP"};
}

FeatureBlock graph_features(const WordGraph& g) {
    const std::size_t n = g.node_count();
    Adjacency out(n), undirected(n);
    double loops = 0;
    for (const auto& [e, m] : g.edges) {
        out[e.first].insert(e.second);
        if (e.first == e.second) {
            loops += 1;
        } else {
            undirected[e.first].insert(e.second);
            undirected[e.second].insert(e.first);
        }
    }
    const double E = static_cast<double>(g.edges.size());
    const double RE = static_cast<double>(g.total_multiplicity()) - E;

    double pe = 0;
    for (std::size_t u = 0; u < n; ++u)
        for (auto v : out[u])
            if (u < v && out[v].contains(u)) pe += 1;

    // Directed 3-cycles over distinct nodes; each cycle is found 3 times.
    double l3 = 0;
    for (std::size_t u = 0; u < n; ++u)
        for (auto v : out[u]) {
            if (v == u) continue;
            for (auto w : out[v])
                if (w != u && w != v && out[w].contains(u)) l3 += 1;
        }
    l3 /= 3.0;

    const auto lcc = weak_component_of_largest(undirected);
    const double lsc = static_cast<double>(largest_scc(out));

    MaybeValue density, diameter, asp, atd;
    if (n > 0) atd = 2.0 * E / static_cast<double>(n);
    if (n > 1) {
        density = E / (static_cast<double>(n) * static_cast<double>(n - 1));
        // Undirected BFS distances inside the largest weakly connected component.
        std::vector<int> local(n, -1);
        for (std::size_t i = 0; i < lcc.size(); ++i) local[lcc[i]] = static_cast<int>(i);
        double diam = 0, total = 0, pairs = 0;
        for (auto s : lcc) {
            std::vector<int> dist(n, -1);
            std::deque<std::size_t> q{s};
            dist[s] = 0;
            while (!q.empty()) {
                const auto u = q.front();
                q.pop_front();
                for (auto v : undirected[u])
                    if (dist[v] < 0) {
                        dist[v] = dist[u] + 1;
                        q.push_back(v);
                    }
            }
            for (auto t : lcc)
                if (t != s) {
                    diam = std::max(diam, static_cast<double>(dist[t]));
                    total += dist[t];
                    pairs += 1;
                }
        }
        if (pairs > 0) {
            diameter = diam;
            asp = total / pairs;
        }
    }

    const auto names = graph_feature_names();
    return {{names[0], static_cast<double>(n)},
            {names[1], E},
            {names[2], RE},
            {names[3], pe},
            {names[4], loops},
            {names[5], pe},
            {names[6], l3},
            {names[7], static_cast<double>(lcc.size())},
            {names[8], lsc},
            {names[9], atd},
            {names[10], density},
            {names[11], diameter},
            {names[12], asp}};
}

}  // namespace cogspeech::speechgraph
