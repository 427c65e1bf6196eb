#include "acdgcl/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace acdgcl {

std::string to_string(AugmentKind k) {
    switch (k) {
        case AugmentKind::NodeDrop: return "node_drop";
        case AugmentKind::EdgePerturb: return "edge_perturb";
        case AugmentKind::AttributeMask: return "attribute_mask";
        case AugmentKind::Subgraph: return "subgraph";
    }
    throw std::logic_error("unknown augmentation kind");
}

AugmentKind augment_kind_from_string(const std::string& s) {
    if (s == "node_drop") return AugmentKind::NodeDrop;
    if (s == "edge_perturb") return AugmentKind::EdgePerturb;
    if (s == "attribute_mask") return AugmentKind::AttributeMask;
    if (s == "subgraph") return AugmentKind::Subgraph;
    throw std::invalid_argument("unknown augmentation kind: " + s);
}

namespace {

void check_ratio(double ratio, bool exclusive_zero) {
    if (ratio < 0.0 || ratio > 1.0)
        throw std::invalid_argument("augmentation ratio " + std::to_string(ratio) +
                                    " outside [0, 1]");
    if (exclusive_zero && ratio == 0.0)
        throw std::invalid_argument("subgraph ratio must be in (0, 1]");
}

/// m distinct values from [0, n), uniform without replacement.
std::vector<Index> sample_indices(Index n, Index m, Rng& rng) {
    std::vector<Index> all(n);
    std::iota(all.begin(), all.end(), Index{0});
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(m);
    return all;
}

Graph induced_subgraph(const Graph& g, const std::vector<Index>& keep_sorted) {
    std::vector<Index> new_id(g.num_nodes, -1);
    for (Index i = 0; i < static_cast<Index>(keep_sorted.size()); ++i) new_id[keep_sorted[i]] = i;
    Graph out;
    out.num_nodes = static_cast<Index>(keep_sorted.size());
    out.label = g.label;
    out.node_labels.reserve(keep_sorted.size());
    for (Index v : keep_sorted) out.node_labels.push_back(g.node_labels[v]);
    for (auto [u, v] : g.edges)
        if (new_id[u] >= 0 && new_id[v] >= 0) out.edges.emplace_back(new_id[u], new_id[v]);
    return out;
}

}  // namespace

Graph node_drop(const Graph& g, double ratio, Rng& rng) {
    check_ratio(ratio, false);
    Index drop = static_cast<Index>(std::floor(ratio * double(g.num_nodes)));
    drop = std::min(drop, g.num_nodes - 1);  // at least one survivor
    if (drop == 0) return g;
    std::vector<Index> dropped = sample_indices(g.num_nodes, drop, rng);
    std::vector<uint8_t> is_dropped(g.num_nodes, 0);
    for (Index v : dropped) is_dropped[v] = 1;
    std::vector<Index> keep;
    keep.reserve(g.num_nodes - drop);
    for (Index v = 0; v < g.num_nodes; ++v)
        if (!is_dropped[v]) keep.push_back(v);
    return induced_subgraph(g, keep);
}

Graph edge_perturb(const Graph& g, double ratio, Rng& rng) {
    check_ratio(ratio, false);
    const Index num_edges = static_cast<Index>(g.edges.size());
    Index m = static_cast<Index>(std::floor(ratio * double(num_edges)));
    if (m == 0) return g;

    std::vector<Index> removed = sample_indices(num_edges, m, rng);
    std::vector<uint8_t> is_removed(num_edges, 0);
    for (Index e : removed) is_removed[e] = 1;

    std::set<std::pair<Index, Index>> original;
    for (auto [u, v] : g.edges) original.insert({std::min(u, v), std::max(u, v)});
    std::vector<std::pair<Index, Index>> complement;
    for (Index u = 0; u < g.num_nodes; ++u)
        for (Index v = u + 1; v < g.num_nodes; ++v)
            if (!original.count({u, v})) complement.emplace_back(u, v);

    Graph out;
    out.num_nodes = g.num_nodes;
    out.label = g.label;
    out.node_labels = g.node_labels;
    for (Index e = 0; e < num_edges; ++e)
        if (!is_removed[e]) out.edges.push_back(g.edges[e]);
    const Index additions = std::min<Index>(m, static_cast<Index>(complement.size()));
    if (additions > 0) {
        std::shuffle(complement.begin(), complement.end(), rng);
        for (Index i = 0; i < additions; ++i) out.edges.push_back(complement[i]);
    }
    return out;
}

GraphView attribute_mask(const Graph& g, double ratio, Rng& rng) {
    check_ratio(ratio, false);
    GraphView view = GraphView::of(g);
    Index m = static_cast<Index>(std::floor(ratio * double(g.num_nodes)));
    if (m == 0) return view;
    view.masked.assign(g.num_nodes, 0);
    for (Index v : sample_indices(g.num_nodes, m, rng)) view.masked[v] = 1;
    return view;
}

Graph subgraph_sample(const Graph& g, double ratio, Rng& rng) {
    check_ratio(ratio, true);
    const Index target = static_cast<Index>(std::ceil(ratio * double(g.num_nodes)));
    std::vector<std::vector<Index>> adj(g.num_nodes);
    for (auto [u, v] : g.edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    std::uniform_int_distribution<Index> node_dist(0, g.num_nodes - 1);
    std::set<Index> visited;
    Index cur = node_dist(rng);
    visited.insert(cur);
    const Index max_steps = 10 * g.num_nodes;
    for (Index step = 0; step < max_steps && static_cast<Index>(visited.size()) < target; ++step) {
        if (adj[cur].empty()) {
            cur = node_dist(rng);  // stranded: jump
        } else {
            std::uniform_int_distribution<Index> nb(0, static_cast<Index>(adj[cur].size()) - 1);
            cur = adj[cur][nb(rng)];
        }
        visited.insert(cur);
    }
    if (static_cast<Index>(visited.size()) < target) {
        std::vector<Index> unvisited;
        for (Index v = 0; v < g.num_nodes; ++v)
            if (!visited.count(v)) unvisited.push_back(v);
        std::shuffle(unvisited.begin(), unvisited.end(), rng);
        for (Index i = 0; static_cast<Index>(visited.size()) < target; ++i) visited.insert(unvisited[i]);
    }
    std::vector<Index> keep(visited.begin(), visited.end());
    return induced_subgraph(g, keep);
}

GraphView apply_augmentation(const Graph& g, const AugmentationSpec& spec, Rng& rng) {
    switch (spec.kind) {
        case AugmentKind::NodeDrop: return GraphView::of(node_drop(g, spec.ratio, rng));
        case AugmentKind::EdgePerturb: return GraphView::of(edge_perturb(g, spec.ratio, rng));
        case AugmentKind::AttributeMask: return attribute_mask(g, spec.ratio, rng);
        case AugmentKind::Subgraph: return GraphView::of(subgraph_sample(g, spec.ratio, rng));
    }
    throw std::logic_error("unknown augmentation kind");
}

ViewPair sample_view_pair(const Graph& g, std::span<const AugmentationSpec> family, Rng& rng) {
    if (family.empty()) throw std::invalid_argument("empty augmentation family");
    std::uniform_int_distribution<size_t> pick(0, family.size() - 1);
    ViewPair pair;
    pair.spec1 = family[pick(rng)];
    pair.spec2 = family[pick(rng)];
    pair.view1 = apply_augmentation(g, pair.spec1, rng);
    pair.view2 = apply_augmentation(g, pair.spec2, rng);
    return pair;
}

}  // namespace acdgcl
