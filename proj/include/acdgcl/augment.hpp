#pragma once

#include <span>
#include <string>

#include "acdgcl/graph.hpp"

namespace acdgcl {

enum class AugmentKind { NodeDrop, EdgePerturb, AttributeMask, Subgraph };

std::string to_string(AugmentKind k);
AugmentKind augment_kind_from_string(const std::string& s);

struct AugmentationSpec {
    AugmentKind kind = AugmentKind::NodeDrop;
    double ratio = 0.0;
};

/// Two independently augmented views of the same source graph.
struct ViewPair {
    GraphView view1;
    GraphView view2;
    AugmentationSpec spec1;
    AugmentationSpec spec2;
};

/// Drops floor(ratio*n) uniformly chosen nodes (at least one node survives);
/// survivors are re-indexed contiguously preserving relative order.
Graph node_drop(const Graph& g, double ratio, Rng& rng);

/// Removes floor(ratio*|E|) edges and adds the same count of edges absent from
/// the original graph (fewer if the complement is exhausted).
Graph edge_perturb(const Graph& g, double ratio, Rng& rng);

/// Marks floor(ratio*n) node feature rows for replacement by the uniform
/// distribution; topology untouched.
GraphView attribute_mask(const Graph& g, double ratio, Rng& rng);

/// Random-walk induced subgraph with ceil(ratio*n) nodes, padded with uniform
/// unvisited nodes if the walk stalls.
Graph subgraph_sample(const Graph& g, double ratio, Rng& rng);

GraphView apply_augmentation(const Graph& g, const AugmentationSpec& spec, Rng& rng);

/// Two IID draws from the augmentation family, each applied to `g`.
ViewPair sample_view_pair(const Graph& g, std::span<const AugmentationSpec> family, Rng& rng);

}  // namespace acdgcl
