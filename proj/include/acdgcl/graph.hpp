#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "acdgcl/tensor.hpp"

namespace acdgcl {

using Rng = std::mt19937_64;

/// One undirected graph with categorical node labels and a class label.
struct Graph {
    Index num_nodes = 0;
    std::vector<std::pair<Index, Index>> edges;  // undirected, no self-loops, no duplicates
    std::vector<Index> node_labels;
    Index label = 0;

    void validate() const;
};

struct GraphDataset {
    std::vector<Graph> graphs;
    Index num_node_label_classes = 0;
    Index num_graph_classes = 0;
    std::string name;

    Index size() const { return static_cast<Index>(graphs.size()); }
    void validate() const;
};

/// A graph plus an optional per-node feature-mask overlay (masked rows are
/// replaced by the uniform distribution when batched).
struct GraphView {
    Graph graph;
    std::vector<uint8_t> masked;  // empty or one flag per node

    static GraphView of(Graph g) { return GraphView{std::move(g), {}}; }
};

/// Disjoint union of graphs ready for an encoder forward pass.
struct GraphBatch {
    Tensor node_features;                          // total_nodes x feature_dim, rows sum to 1
    std::vector<std::pair<Index, Index>> edge_index;  // directed, both directions per edge
    std::vector<Index> segment_ids;                // node -> graph, non-decreasing
    Index num_graphs = 0;

    Index total_nodes() const { return static_cast<Index>(segment_ids.size()); }
};

struct FoldSplit {
    std::vector<std::vector<Index>> folds;

    Index k() const { return static_cast<Index>(folds.size()); }
};

GraphBatch to_batch(std::span<const GraphView> views, Index num_node_label_classes);
GraphBatch to_batch(std::span<const Graph> graphs, Index num_node_label_classes);

/// Deterministic shuffled round-robin split of [0, n) into k folds.
FoldSplit kfold_split(Index n, Index k, uint64_t seed);

}  // namespace acdgcl
