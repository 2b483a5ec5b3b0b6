#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

using namespace mdm;
using namespace oracles;

TEST_CASE("kgram counts on a worked sequence") {
  const std::vector<int> items = {5, 5, 5, 4, 4, 3, 5, 4, 4};
  const auto c = kgram_features(items);
  REQUIRE(c.size() == 49);
  CHECK(c[4 * 7 + 4] == 2);  // 5 -> 5
  CHECK(c[4 * 7 + 3] == 2);  // 5 -> 4
  CHECK(c[3 * 7 + 3] == 2);  // 4 -> 4
  CHECK(c[3 * 7 + 2] == 1);
  CHECK(c[2 * 7 + 4] == 1);
  CHECK(std::accumulate(c.begin(), c.end(), 0u) == 8);
  CHECK(kgram_column_names()[4 * 7 + 3] == "bigram_5_4");
  const auto single = kgram_features(std::vector<int>{3});
  CHECK(std::accumulate(single.begin(), single.end(), 0u) == 0);
  CHECK_THROWS_AS(kgram_features(std::vector<int>{1, 8}), std::out_of_range);
}

TEST_CASE("relation graphs collapse parallel edges") {
  const std::vector<Event> ev = {{1, 7, 3, 2}, {2, 7, 3, 2}, {3, 3, 9, 2}, {4, 9, 9, 5}};
  const auto graphs = build_relation_graphs(ev);
  REQUIRE(graphs.size() == 7);
  const auto& g = graphs[1];
  CHECK(g.nodes == std::vector<UserId>{3, 7, 9});
  REQUIRE(g.edges.size() == 2);
  CHECK(g.edges[1].src == 1);
  CHECK(g.edges[1].dst == 0);
  CHECK(g.edges[1].multiplicity == 2);
  CHECK(graphs[4].size() == 1);
  CHECK(undirected_projection(graphs[4])[0].empty());
  CHECK(graphs[0].size() == 0);
}

TEST_CASE("graph metrics agree with brute force on random graphs") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 120; ++trial) {
    const RelationGraph g = random_graph(rng, 14);
    CHECK(graph_mismatches(g) == 0);
    const Adjacency adj = undirected_projection(g);
    CHECK(triangle_counts(adj) == brute_triangles(adj));
    CHECK(core_numbers(adj) == brute_cores(adj));

    const auto colors = greedy_coloring(adj);
    for (std::size_t v = 0; v < adj.size(); ++v)
      for (std::size_t u : adj[v]) CHECK(colors[u] != colors[v]);

    const auto wcc = weakly_connected_components(g);
    const auto ref = brute_components(g);
    for (std::size_t v = 0; v < g.size(); ++v) {
      CHECK(wcc.id[v] == ref[v]);
      CHECK(wcc.size[v] == std::count(ref.begin(), ref.end(), ref[v]));
    }

    const auto pr = pagerank(g);
    const VectorXd exact = dense_pagerank(g, 0.85);
    double total = 0;
    for (std::size_t v = 0; v < g.size(); ++v) {
      CHECK(pr[v] == doctest::Approx(exact(Eigen::Index(v))).epsilon(1e-6));
      total += pr[v];
    }
    CHECK(total == doctest::Approx(1.0));
  }
}

TEST_CASE("pagerank of a directed cycle is uniform") {
  const std::vector<std::pair<UserId, UserId>> e = {{1, 2}, {2, 3}, {3, 1}};
  for (double r : pagerank(make_graph(e))) CHECK(r == doctest::Approx(1.0 / 3));
  CHECK(pagerank(RelationGraph{}).empty());
}

TEST_CASE("per-user graph features") {
  const std::vector<Event> ev = {{1, 1, 2, 3}, {2, 2, 3, 3}, {3, 3, 1, 3}, {4, 1, 2, 3}, {5, 4, 1, 6}};
  const auto rows = compute_graph_features(build_relation_graphs(ev));
  REQUIRE(rows.size() == 4);
  const auto& u1 = rows.at(1);
  REQUIRE(u1.size() == 56);
  const double* r3 = u1.data() + 2 * 8;
  CHECK(r3[0] == 1);  // triangle
  CHECK(r3[1] == 2);  // core
  CHECK(r3[4] == 1);  // in-degree
  CHECK(r3[5] == 2);  // out-degree, multiplicity kept
  CHECK(r3[7] == 3);  // component size
  const double* r6 = u1.data() + 5 * 8;
  CHECK(r6[4] == 1);
  CHECK(r6[7] == 2);
  const auto& u4 = rows.at(4);
  for (int j = 0; j < 8; ++j) CHECK(u4[2 * 8 + std::size_t(j)] == 0);
  CHECK(graph_column_names().size() == 56);
  CHECK(graph_column_names()[8 * 2 + 3] == "r3_pagerank");
}
