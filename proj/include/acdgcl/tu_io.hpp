#pragma once

#include <filesystem>
#include <string>

#include "acdgcl/graph.hpp"

namespace acdgcl {

/// Parses a TU-format dataset directory (<DS>_A.txt, <DS>_graph_indicator.txt,
/// <DS>_graph_labels.txt and optional <DS>_node_labels.txt). Node ids are
/// remapped to 0-based per-graph indices, labels to contiguous 0-based classes;
/// self-loops and duplicate undirected edges are dropped.
GraphDataset parse_tu_dataset(const std::filesystem::path& directory);

/// Writes a dataset back out in TU format under `directory` with prefix `name`.
void write_tu_dataset(const GraphDataset& dataset, const std::filesystem::path& directory,
                      const std::string& name);

}  // namespace acdgcl
