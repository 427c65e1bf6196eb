#include "acdgcl/tu_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace acdgcl {

namespace fs = std::filesystem;

namespace {

std::vector<std::vector<long>> read_int_lines(const fs::path& file, size_t per_line) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    std::vector<std::vector<long>> rows;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        std::vector<long> vals;
        long v;
        while (ls >> v) vals.push_back(v);
        if (vals.empty()) continue;  // blank line
        if (vals.size() != per_line)
            throw std::runtime_error(file.string() + ":" + std::to_string(lineno) + ": expected " +
                                     std::to_string(per_line) + " integers, got " +
                                     std::to_string(vals.size()));
        rows.push_back(std::move(vals));
    }
    return rows;
}

std::string detect_prefix(const fs::path& directory) {
    std::vector<std::string> candidates;
    if (!fs::is_directory(directory))
        throw std::runtime_error("dataset directory not found: " + directory.string());
    for (const auto& entry : fs::directory_iterator(directory)) {
        std::string f = entry.path().filename().string();
        if (f.size() > 6 && f.ends_with("_A.txt")) candidates.push_back(f.substr(0, f.size() - 6));
    }
    if (candidates.empty())
        throw std::runtime_error("no <DS>_A.txt file in " + directory.string());
    if (candidates.size() > 1) {
        std::string all;
        for (const auto& c : candidates) all += c + " ";
        throw std::runtime_error("multiple TU datasets in " + directory.string() + ": " + all);
    }
    return candidates[0];
}

std::map<long, Index> contiguous_remap(const std::vector<long>& raw) {
    std::set<long> uniq(raw.begin(), raw.end());
    std::map<long, Index> remap;
    Index next = 0;
    for (long v : uniq) remap[v] = next++;
    return remap;
}

}  // namespace

GraphDataset parse_tu_dataset(const fs::path& directory) {
    const std::string prefix = detect_prefix(directory);
    const fs::path a_file = directory / (prefix + "_A.txt");
    const fs::path ind_file = directory / (prefix + "_graph_indicator.txt");
    const fs::path glab_file = directory / (prefix + "_graph_labels.txt");
    const fs::path nlab_file = directory / (prefix + "_node_labels.txt");
    for (const fs::path* f : {&a_file, &ind_file, &glab_file})
        if (!fs::exists(*f)) throw std::runtime_error("missing mandatory file: " + f->string());

    // graph indicator: 1-based graph id per node
    auto ind_rows = read_int_lines(ind_file, 1);
    const Index total_nodes = static_cast<Index>(ind_rows.size());
    if (total_nodes == 0) throw std::runtime_error("empty graph indicator file: " + ind_file.string());
    long num_graphs_raw = 0;
    for (const auto& r : ind_rows) num_graphs_raw = std::max(num_graphs_raw, r[0]);
    std::vector<Index> node_graph(total_nodes);
    std::vector<Index> node_local(total_nodes);
    std::vector<Index> graph_sizes(num_graphs_raw, 0);
    for (Index v = 0; v < total_nodes; ++v) {
        long gid = ind_rows[v][0];
        if (gid < 1 || gid > num_graphs_raw)
            throw std::runtime_error(ind_file.string() + ": graph id " + std::to_string(gid) +
                                     " out of range");
        node_graph[v] = static_cast<Index>(gid - 1);
        node_local[v] = graph_sizes[gid - 1]++;
    }
    for (long g = 0; g < num_graphs_raw; ++g)
        if (graph_sizes[g] == 0)
            throw std::runtime_error("empty graph " + std::to_string(g + 1) + " in " + ind_file.string());

    // graph labels, remapped to contiguous 0-based classes
    auto glab_rows = read_int_lines(glab_file, 1);
    if (static_cast<long>(glab_rows.size()) != num_graphs_raw)
        throw std::runtime_error(glab_file.string() + ": " + std::to_string(glab_rows.size()) +
                                 " labels for " + std::to_string(num_graphs_raw) + " graphs");
    std::vector<long> glab_raw;
    glab_raw.reserve(glab_rows.size());
    for (const auto& r : glab_rows) glab_raw.push_back(r[0]);
    auto glab_map = contiguous_remap(glab_raw);

    // node labels (optional; constant label 0 when absent)
    std::vector<Index> node_labels(total_nodes, 0);
    Index num_node_classes = 1;
    if (fs::exists(nlab_file)) {
        auto nlab_rows = read_int_lines(nlab_file, 1);
        if (static_cast<Index>(nlab_rows.size()) != total_nodes)
            throw std::runtime_error(nlab_file.string() + ": " + std::to_string(nlab_rows.size()) +
                                     " labels for " + std::to_string(total_nodes) + " nodes");
        std::vector<long> nlab_raw;
        nlab_raw.reserve(nlab_rows.size());
        for (const auto& r : nlab_rows) nlab_raw.push_back(r[0]);
        auto nlab_map = contiguous_remap(nlab_raw);
        for (Index v = 0; v < total_nodes; ++v) node_labels[v] = nlab_map.at(nlab_raw[v]);
        num_node_classes = static_cast<Index>(nlab_map.size());
    }

    GraphDataset ds;
    ds.name = prefix;
    ds.num_node_label_classes = num_node_classes;
    ds.num_graph_classes = static_cast<Index>(glab_map.size());
    ds.graphs.resize(num_graphs_raw);
    for (long g = 0; g < num_graphs_raw; ++g) {
        ds.graphs[g].num_nodes = graph_sizes[g];
        ds.graphs[g].node_labels.resize(graph_sizes[g]);
        ds.graphs[g].label = glab_map.at(glab_raw[g]);
    }
    for (Index v = 0; v < total_nodes; ++v)
        ds.graphs[node_graph[v]].node_labels[node_local[v]] = node_labels[v];

    // edges: 1-based global node ids, deduplicated as undirected, self-loops dropped
    std::ifstream ain(a_file);
    if (!ain) throw std::runtime_error("cannot open " + a_file.string());
    std::vector<std::set<std::pair<Index, Index>>> edge_sets(num_graphs_raw);
    std::string line;
    size_t lineno = 0;
    while (std::getline(ain, line)) {
        ++lineno;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        long u, v;
        if (!(ls >> u)) continue;  // blank line
        if (!(ls >> v))
            throw std::runtime_error(a_file.string() + ":" + std::to_string(lineno) +
                                     ": expected two node ids");
        if (u < 1 || u > total_nodes || v < 1 || v > total_nodes)
            throw std::runtime_error(a_file.string() + ":" + std::to_string(lineno) + ": edge (" +
                                     std::to_string(u) + "," + std::to_string(v) +
                                     ") references unknown node (have " +
                                     std::to_string(total_nodes) + " nodes)");
        Index ui = static_cast<Index>(u - 1), vi = static_cast<Index>(v - 1);
        if (node_graph[ui] != node_graph[vi])
            throw std::runtime_error(a_file.string() + ":" + std::to_string(lineno) +
                                     ": edge crosses graphs " +
                                     std::to_string(node_graph[ui] + 1) + " and " +
                                     std::to_string(node_graph[vi] + 1));
        if (ui == vi) continue;  // self-loop
        Index lu = node_local[ui], lv = node_local[vi];
        edge_sets[node_graph[ui]].insert({std::min(lu, lv), std::max(lu, lv)});
    }
    for (long g = 0; g < num_graphs_raw; ++g)
        ds.graphs[g].edges.assign(edge_sets[g].begin(), edge_sets[g].end());

    ds.validate();
    return ds;
}

void write_tu_dataset(const GraphDataset& dataset, const fs::path& directory,
                      const std::string& name) {
    fs::create_directories(directory);
    std::ofstream a(directory / (name + "_A.txt"));
    std::ofstream ind(directory / (name + "_graph_indicator.txt"));
    std::ofstream glab(directory / (name + "_graph_labels.txt"));
    std::ofstream nlab(directory / (name + "_node_labels.txt"));
    if (!a || !ind || !glab || !nlab)
        throw std::runtime_error("cannot write TU files under " + directory.string());
    Index offset = 1;  // 1-based global ids
    Index gid = 1;
    for (const Graph& g : dataset.graphs) {
        for (Index v = 0; v < g.num_nodes; ++v) {
            ind << gid << "\n";
            nlab << g.node_labels[v] << "\n";
        }
        for (auto [u, v] : g.edges) {
            a << (offset + u) << ", " << (offset + v) << "\n";
            a << (offset + v) << ", " << (offset + u) << "\n";
        }
        glab << g.label << "\n";
        offset += g.num_nodes;
        ++gid;
    }
}

}  // namespace acdgcl
