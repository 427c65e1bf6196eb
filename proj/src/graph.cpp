#include "acdgcl/graph.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

namespace acdgcl {

void Graph::validate() const {
    if (num_nodes < 1) throw std::invalid_argument("graph must have at least one node");
    if (static_cast<Index>(node_labels.size()) != num_nodes)
        throw std::invalid_argument("node label count " + std::to_string(node_labels.size()) +
                                    " != num_nodes " + std::to_string(num_nodes));
    for (auto [u, v] : edges) {
        if (u < 0 || u >= num_nodes || v < 0 || v >= num_nodes)
            throw std::invalid_argument("edge endpoint out of range: (" + std::to_string(u) + "," +
                                        std::to_string(v) + ") with " + std::to_string(num_nodes) +
                                        " nodes");
        if (u == v) throw std::invalid_argument("self-loop at node " + std::to_string(u));
    }
}

void GraphDataset::validate() const {
    for (const Graph& g : graphs) {
        g.validate();
        if (g.label < 0 || g.label >= num_graph_classes)
            throw std::invalid_argument("graph label " + std::to_string(g.label) + " out of range");
        for (Index l : g.node_labels)
            if (l < 0 || l >= num_node_label_classes)
                throw std::invalid_argument("node label " + std::to_string(l) + " out of range");
    }
}

GraphBatch to_batch(std::span<const GraphView> views, Index num_node_label_classes) {
    if (views.empty()) throw std::invalid_argument("to_batch: empty graph list");
    const Index c = num_node_label_classes;
    Index total = 0;
    for (const GraphView& v : views) total += v.graph.num_nodes;

    GraphBatch batch;
    batch.num_graphs = static_cast<Index>(views.size());
    batch.node_features = Tensor::zeros({total, c});
    batch.segment_ids.reserve(total);

    Index offset = 0;
    for (Index gi = 0; gi < batch.num_graphs; ++gi) {
        const Graph& g = views[gi].graph;
        const auto& masked = views[gi].masked;
        if (!masked.empty() && static_cast<Index>(masked.size()) != g.num_nodes)
            throw std::invalid_argument("mask overlay size mismatch");
        for (Index v = 0; v < g.num_nodes; ++v) {
            Index label = g.node_labels[v];
            if (label < 0 || label >= c)
                throw std::invalid_argument("node label " + std::to_string(label) +
                                            " out of range [0, " + std::to_string(c) + ")");
            if (!masked.empty() && masked[v]) {
                for (Index j = 0; j < c; ++j) batch.node_features(offset + v, j) = 1.0 / double(c);
            } else {
                batch.node_features(offset + v, label) = 1.0;
            }
            batch.segment_ids.push_back(gi);
        }
        for (auto [u, v] : g.edges) {
            batch.edge_index.emplace_back(offset + u, offset + v);
            batch.edge_index.emplace_back(offset + v, offset + u);
        }
        offset += g.num_nodes;
    }
    return batch;
}

GraphBatch to_batch(std::span<const Graph> graphs, Index num_node_label_classes) {
    std::vector<GraphView> views;
    views.reserve(graphs.size());
    for (const Graph& g : graphs) views.push_back(GraphView::of(g));
    return to_batch(views, num_node_label_classes);
}

FoldSplit kfold_split(Index n, Index k, uint64_t seed) {
    if (k < 2) throw std::invalid_argument("kfold_split: k must be >= 2");
    if (n < k)
        throw std::invalid_argument("kfold_split: n=" + std::to_string(n) + " < k=" + std::to_string(k));
    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    FoldSplit split;
    split.folds.resize(k);
    for (Index i = 0; i < n; ++i) split.folds[i % k].push_back(order[i]);
    return split;
}

}  // namespace acdgcl
