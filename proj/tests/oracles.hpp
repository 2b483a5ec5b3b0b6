#pragma once

// Brute-force graph references used by the unit tests and the acceptance run.

#include "mdm/baselines.hpp"
#include "mdm/numerics.hpp"

#include <climits>
#include <random>

namespace oracles {

using namespace mdm;


inline RelationGraph random_graph(std::mt19937_64& rng, std::size_t max_nodes) {
  const std::size_t n = 2 + uniform_index(rng, max_nodes - 1);
  const std::size_t m = uniform_index(rng, 3 * n);
  std::vector<std::pair<UserId, UserId>> edges;
  for (std::size_t i = 0; i < m; ++i)
    edges.emplace_back(UserId(10 + uniform_index(rng, n)), UserId(10 + uniform_index(rng, n)));
  edges.emplace_back(10, 11);
  return make_graph(edges);
}

inline std::vector<std::vector<bool>> dense(const Adjacency& adj) {
  std::vector<std::vector<bool>> a(adj.size(), std::vector<bool>(adj.size(), false));
  for (std::size_t v = 0; v < adj.size(); ++v)
    for (std::size_t u : adj[v]) a[v][u] = true;
  return a;
}

inline std::vector<std::uint64_t> brute_triangles(const Adjacency& adj) {
  const auto a = dense(adj);
  std::vector<std::uint64_t> t(adj.size(), 0);
  for (std::size_t i = 0; i < adj.size(); ++i)
    for (std::size_t j = i + 1; j < adj.size(); ++j)
      for (std::size_t k = j + 1; k < adj.size(); ++k)
        if (a[i][j] && a[j][k] && a[i][k]) ++t[i], ++t[j], ++t[k];
  return t;
}

// Largest k such that v survives in the k-core, by repeated pruning.
inline std::vector<std::uint32_t> brute_cores(const Adjacency& adj) {
  const std::size_t n = adj.size();
  std::vector<std::uint32_t> core(n, 0);
  for (std::uint32_t k = 1; k <= n; ++k) {
    std::vector<bool> alive(n, true);
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t v = 0; v < n; ++v) {
        if (!alive[v]) continue;
        std::uint32_t deg = 0;
        for (std::size_t u : adj[v]) deg += alive[u];
        if (deg < k) alive[v] = false, changed = true;
      }
    }
    for (std::size_t v = 0; v < n; ++v)
      if (alive[v]) core[v] = k;
  }
  return core;
}

inline std::vector<std::size_t> brute_components(const RelationGraph& g) {
  const Adjacency adj = undirected_projection(g);
  std::vector<std::size_t> label(g.size(), SIZE_MAX);
  std::size_t next = 0;
  for (std::size_t s = 0; s < g.size(); ++s) {
    if (label[s] != SIZE_MAX) continue;
    std::vector<std::size_t> stack = {s};
    label[s] = next;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t u : adj[v])
        if (label[u] == SIZE_MAX) label[u] = next, stack.push_back(u);
    }
    ++next;
  }
  return label;
}

inline VectorXd dense_pagerank(const RelationGraph& g, double damping) {
  const auto n = static_cast<Eigen::Index>(g.size());
  MatrixXd P = MatrixXd::Zero(n, n);
  for (const auto& e : g.edges) P(Eigen::Index(e.dst), Eigen::Index(e.src)) += e.multiplicity;
  for (Eigen::Index c = 0; c < n; ++c) {
    const double s = P.col(c).sum();
    if (s == 0) P.col(c).setConstant(1.0 / double(n));
    else P.col(c) /= s;
  }
  // Solve (I - dP) r = (1-d)/N.
  const MatrixXd A = MatrixXd::Identity(n, n) - damping * P;
  return A.fullPivLu().solve(VectorXd::Constant(n, (1.0 - damping) / double(n)));
}


/// Number of nodes on which any fast metric disagrees with its reference.
inline std::size_t graph_mismatches(const RelationGraph& g) {
  const Adjacency adj = undirected_projection(g);
  const auto tri = triangle_counts(adj), tri_ref = brute_triangles(adj);
  const auto core = core_numbers(adj), core_ref = brute_cores(adj);
  const auto wcc = weakly_connected_components(g);
  const auto wcc_ref = brute_components(g);
  const auto pr = pagerank(g);
  const VectorXd pr_ref = dense_pagerank(g, 0.85);
  std::size_t bad = 0;
  for (std::size_t v = 0; v < g.size(); ++v) {
    const auto size_ref = std::count(wcc_ref.begin(), wcc_ref.end(), wcc_ref[v]);
    bad += tri[v] != tri_ref[v] || core[v] != core_ref[v] || wcc.id[v] != wcc_ref[v] ||
           wcc.size[v] != std::uint32_t(size_ref) ||
           std::abs(pr[v] - pr_ref(Eigen::Index(v))) > 1e-6;
  }
  return bad;
}

}  // namespace oracles
