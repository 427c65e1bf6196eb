#pragma once

#include "acdgcl/eval.hpp"
#include "acdgcl/gradcheck.hpp"

namespace acdgcl {

/// Erdos-Renyi style random graph with categorical node labels.
Graph make_random_graph(Index min_nodes, Index max_nodes, double edge_prob, Index num_node_classes,
                        Index num_graph_classes, Rng& rng);

GraphDataset make_random_dataset(Index num_graphs, Index num_node_classes, Index num_graph_classes,
                                 uint64_t seed, Index min_nodes = 4, Index max_nodes = 10,
                                 double edge_prob = 0.4);

/// Relabels the nodes of `g` by `perm` (new index of old node v is perm[v]).
Graph permute_graph(const Graph& g, const std::vector<Index>& perm);

struct LossCheck {
    std::string name;
    FiniteDiffReport report;
};

/// Finite-difference verification of every loss term (l_inv, l_recon, l_adv,
/// joint) on a small deterministic fixture, differentiating through all
/// parameter groups.
std::vector<LossCheck> loss_gradcheck_suite(double tol, long max_coords);

}  // namespace acdgcl
