#include "mdm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mdm {

std::vector<std::uint32_t> kgram_features(std::span<const int> items, int relations) {
  const auto M = static_cast<std::size_t>(relations);
  std::vector<std::uint32_t> counts(M * M, 0);
  for (std::size_t i = 1; i < items.size(); ++i) {
    const int a = items[i - 1], b = items[i];
    if (a < 1 || a > relations || b < 1 || b > relations)
      throw std::out_of_range("kgram_features: relation id out of range");
    ++counts[static_cast<std::size_t>(a - 1) * M + static_cast<std::size_t>(b - 1)];
  }
  return counts;
}

std::vector<std::string> kgram_column_names(int relations) {
  std::vector<std::string> names;
  for (int a = 1; a <= relations; ++a)
    for (int b = 1; b <= relations; ++b)
      names.push_back("bigram_" + std::to_string(a) + "_" + std::to_string(b));
  return names;
}

RelationGraph make_graph(std::span<const std::pair<UserId, UserId>> interactions, int relation) {
  RelationGraph g;
  g.relation = relation;
  for (const auto& [s, d] : interactions) {
    g.nodes.push_back(s);
    g.nodes.push_back(d);
  }
  std::sort(g.nodes.begin(), g.nodes.end());
  g.nodes.erase(std::unique(g.nodes.begin(), g.nodes.end()), g.nodes.end());
  auto index = [&](UserId u) {
    return static_cast<std::size_t>(std::lower_bound(g.nodes.begin(), g.nodes.end(), u) - g.nodes.begin());
  };

  std::map<std::pair<std::size_t, std::size_t>, std::uint32_t> multiplicity;
  for (const auto& [s, d] : interactions) ++multiplicity[{index(s), index(d)}];
  for (const auto& [key, m] : multiplicity) g.edges.push_back({key.first, key.second, m});
  return g;
}

std::vector<RelationGraph> build_relation_graphs(std::span<const Event> events, int relations) {
  std::vector<std::vector<std::pair<UserId, UserId>>> per(static_cast<std::size_t>(relations));
  for (const auto& e : events) {
    if (e.relation < 1 || e.relation > relations)
      throw std::out_of_range("build_relation_graphs: relation id out of range");
    per[static_cast<std::size_t>(e.relation - 1)].emplace_back(e.src, e.dst);
  }
  std::vector<RelationGraph> graphs;
  for (int r = 1; r <= relations; ++r) graphs.push_back(make_graph(per[static_cast<std::size_t>(r - 1)], r));
  return graphs;
}

Adjacency undirected_projection(const RelationGraph& g) {
  Adjacency adj(g.size());
  for (const auto& e : g.edges) {
    if (e.src == e.dst) continue;
    adj[e.src].push_back(e.dst);
    adj[e.dst].push_back(e.src);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

std::vector<std::uint64_t> triangle_counts(const Adjacency& adj) {
  // Each triangle {a < b < c} is found once from its lowest node and credited
  // to all three corners.
  std::vector<std::uint64_t> count(adj.size(), 0);
  for (std::size_t a = 0; a < adj.size(); ++a) {
    for (std::size_t b : adj[a]) {
      if (b <= a) continue;
      auto ia = std::upper_bound(adj[a].begin(), adj[a].end(), b);
      auto ib = std::upper_bound(adj[b].begin(), adj[b].end(), b);
      while (ia != adj[a].end() && ib != adj[b].end()) {
        if (*ia < *ib) {
          ++ia;
        } else if (*ib < *ia) {
          ++ib;
        } else {
          ++count[a];
          ++count[b];
          ++count[*ia];
          ++ia;
          ++ib;
        }
      }
    }
  }
  return count;
}

std::vector<std::uint32_t> core_numbers(const Adjacency& adj) {
  // Batagelj-Zaversnik bucket peeling.
  const std::size_t n = adj.size();
  std::vector<std::uint32_t> degree(n);
  std::size_t max_degree = 0;
  for (std::size_t v = 0; v < n; ++v) {
    degree[v] = static_cast<std::uint32_t>(adj[v].size());
    max_degree = std::max<std::size_t>(max_degree, degree[v]);
  }
  std::vector<std::size_t> bin(max_degree + 1, 0);
  for (std::size_t v = 0; v < n; ++v) ++bin[degree[v]];
  std::size_t start = 0;
  for (auto& b : bin) {
    const std::size_t count = b;
    b = start;
    start += count;
  }
  std::vector<std::size_t> order(n), pos(n);
  for (std::size_t v = 0; v < n; ++v) {
    pos[v] = bin[degree[v]]++;
    order[pos[v]] = v;
  }
  for (std::size_t d = max_degree; d > 0; --d) bin[d] = bin[d - 1];
  if (!bin.empty()) bin[0] = 0;

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t v = order[i];
    for (std::size_t u : adj[v]) {
      if (degree[u] > degree[v]) {
        const std::size_t du = degree[u];
        const std::size_t pu = pos[u];
        const std::size_t pw = bin[du];
        const std::size_t w = order[pw];
        if (u != w) {
          std::swap(order[pu], order[pw]);
          pos[u] = pw;
          pos[w] = pu;
        }
        ++bin[du];
        --degree[u];
      }
    }
  }
  return degree;
}

std::vector<std::uint32_t> greedy_coloring(const Adjacency& adj) {
  const std::size_t n = adj.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return adj[a].size() > adj[b].size(); });

  constexpr std::uint32_t kUncolored = ~std::uint32_t{0};
  std::vector<std::uint32_t> color(n, kUncolored);
  std::vector<bool> taken;
  for (std::size_t v : order) {
    taken.assign(adj[v].size() + 1, false);
    for (std::size_t u : adj[v])
      if (color[u] != kUncolored && color[u] < taken.size()) taken[color[u]] = true;
    std::uint32_t c = 0;
    while (taken[c]) ++c;
    color[v] = c;
  }
  return color;
}

std::vector<double> pagerank(const RelationGraph& g, const PageRankOptions& opts) {
  const std::size_t n = g.size();
  if (n == 0) return {};
  std::vector<double> out_weight(n, 0.0);
  for (const auto& e : g.edges) out_weight[e.src] += e.multiplicity;

  const double N = double(n);
  std::vector<double> rank(n, 1.0 / N), next(n);
  for (int it = 0; it < opts.max_iterations; ++it) {
    double dangling = 0;
    for (std::size_t v = 0; v < n; ++v)
      if (out_weight[v] == 0) dangling += rank[v];
    const double base = (1.0 - opts.damping) / N + opts.damping * dangling / N;
    std::fill(next.begin(), next.end(), base);
    for (const auto& e : g.edges)
      next[e.dst] += opts.damping * rank[e.src] * e.multiplicity / out_weight[e.src];
    double delta = 0;
    for (std::size_t v = 0; v < n; ++v) delta += std::abs(next[v] - rank[v]);
    rank.swap(next);
    if (delta < opts.tolerance) break;
  }
  return rank;
}

WeakComponents weakly_connected_components(const RelationGraph& g) {
  const std::size_t n = g.size();
  UnionFind uf(n);
  for (const auto& e : g.edges) uf.unite(e.src, e.dst);

  WeakComponents out{std::vector<std::uint32_t>(n), std::vector<std::uint32_t>(n)};
  // Nodes are sorted by user id, so the first time a root shows up is at its
  // component's smallest member.
  std::map<std::size_t, std::uint32_t> numbering;
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t root = uf.find(v);
    auto [it, inserted] = numbering.try_emplace(root, static_cast<std::uint32_t>(numbering.size()));
    out.id[v] = it->second;
    out.size[v] = static_cast<std::uint32_t>(uf.component_size(v));
  }
  return out;
}

std::map<UserId, GraphFeatureRow> compute_graph_features(const std::vector<RelationGraph>& graphs) {
  const std::size_t width = graphs.size() * kGraphFeatureCount;
  std::map<UserId, GraphFeatureRow> rows;
  for (const auto& g : graphs)
    for (UserId u : g.nodes) rows.try_emplace(u, GraphFeatureRow(width, 0.0));

  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const RelationGraph& g = graphs[gi];
    const Adjacency adj = undirected_projection(g);
    const auto triangles = triangle_counts(adj);
    const auto cores = core_numbers(adj);
    const auto colors = greedy_coloring(adj);
    const auto ranks = pagerank(g);
    const auto wcc = weakly_connected_components(g);
    std::vector<double> in_deg(g.size(), 0), out_deg(g.size(), 0);
    for (const auto& e : g.edges) {
      out_deg[e.src] += e.multiplicity;
      in_deg[e.dst] += e.multiplicity;
    }
    for (std::size_t v = 0; v < g.size(); ++v) {
      double* block = rows.at(g.nodes[v]).data() + gi * kGraphFeatureCount;
      block[0] = double(triangles[v]);
      block[1] = double(cores[v]);
      block[2] = double(colors[v]);
      block[3] = ranks[v];
      block[4] = in_deg[v];
      block[5] = out_deg[v];
      block[6] = double(wcc.id[v]);
      block[7] = double(wcc.size[v]);
    }
  }
  return rows;
}

std::vector<std::string> graph_column_names(int relations) {
  std::vector<std::string> names;
  for (int r = 1; r <= relations; ++r)
    for (const char* f : kGraphFeatureNames) names.push_back("r" + std::to_string(r) + "_" + f);
  return names;
}

}  // namespace mdm
