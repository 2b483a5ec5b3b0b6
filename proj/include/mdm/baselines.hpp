#pragma once

// Baseline feature families: consecutive-relation bigram counts, and
// per-relation graph metrics over the directed interaction graphs.

#include "mdm/ingest.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace mdm {

// ---------------------------------------------------------------------------
// Sequential bigrams

/// Counts of consecutive pairs; bigram (a, b) lives at (a-1)*M + (b-1).
std::vector<std::uint32_t> kgram_features(std::span<const int> items,
                                          int relations = kDefaultRelationCount);

std::vector<std::string> kgram_column_names(int relations = kDefaultRelationCount);

// ---------------------------------------------------------------------------
// Relation graphs

struct GraphEdge {
  std::size_t src;  // local node index
  std::size_t dst;
  std::uint32_t multiplicity;
};

/// Directed multigraph of one relation. Parallel edges are collapsed into one
/// edge carrying its multiplicity. Nodes are sorted by user id.
struct RelationGraph {
  int relation = 0;
  std::vector<UserId> nodes;
  std::vector<GraphEdge> edges;  // sorted by (src, dst)

  std::size_t size() const { return nodes.size(); }
};

/// One graph per relation id 1..M, index r-1.
std::vector<RelationGraph> build_relation_graphs(std::span<const Event> events,
                                                 int relations = kDefaultRelationCount);

/// Builds a graph from (src, dst) user pairs, one entry per interaction.
RelationGraph make_graph(std::span<const std::pair<UserId, UserId>> interactions, int relation = 0);

using Adjacency = std::vector<std::vector<std::size_t>>;

/// Undirected simple projection: no self loops, no duplicates, sorted lists.
Adjacency undirected_projection(const RelationGraph& g);

std::vector<std::uint64_t> triangle_counts(const Adjacency& adj);
/// Core numbers by bucketed minimum-degree peeling.
std::vector<std::uint32_t> core_numbers(const Adjacency& adj);
/// Greedy colouring visiting nodes by decreasing degree (ties: lower index).
std::vector<std::uint32_t> greedy_coloring(const Adjacency& adj);

struct PageRankOptions {
  double damping = 0.85;
  double tolerance = 1e-8;  // L1 change between sweeps
  int max_iterations = 10000;
};

/// Multiplicity-weighted PageRank; dangling mass is spread uniformly.
std::vector<double> pagerank(const RelationGraph& g, const PageRankOptions& opts = {});

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    std::size_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const std::size_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

  std::size_t component_size(std::size_t x) { return size_[find(x)]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

struct WeakComponents {
  std::vector<std::uint32_t> id;    // numbered 0.. in order of each component's smallest node
  std::vector<std::uint32_t> size;  // size of the node's component
};

/// Weakly connected components of the directed graph.
WeakComponents weakly_connected_components(const RelationGraph& g);

// ---------------------------------------------------------------------------
// Per-user graph feature rows

inline constexpr int kGraphFeatureCount = 8;
inline constexpr std::array<const char*, kGraphFeatureCount> kGraphFeatureNames = {
    "triangle_count", "core_number", "color_id", "pagerank",
    "in_degree",      "out_degree",  "wcc_id",   "wcc_size"};

using GraphFeatureRow = std::vector<double>;  // M * 8 values, relation-major

/// Feature rows for every user in any graph; users missing from a relation's
/// graph have zeros in that block.
std::map<UserId, GraphFeatureRow> compute_graph_features(const std::vector<RelationGraph>& graphs);

std::vector<std::string> graph_column_names(int relations = kDefaultRelationCount);

}  // namespace mdm
