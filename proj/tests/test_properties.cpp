#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "properties.hpp"

using namespace mdm;

namespace {

constexpr int kCases = 200;

}  // namespace

TEST_CASE("softmax lands on the simplex and ignores shifts") {
  CHECK(props::softmax_simplex_and_shift(kCases, 1) == 0);
}

TEST_CASE("attention weights sum to one") { CHECK(props::attention_weights_sum_to_one(kCases, 2) == 0); }

TEST_CASE("bigram counts sum to T-1") { CHECK(props::kgram_conservation(kCases, 3) == 0); }

TEST_CASE("fuse is additive") { CHECK(props::fuse_additivity(kCases, 4) == 0); }

TEST_CASE("adam leaves parameters alone without a step") { CHECK(props::adam_identity(kCases, 5) == 0); }

TEST_CASE("seeded components are deterministic") { CHECK(props::determinism_under_seed(kCases, 6) == 0); }

TEST_CASE("elementwise activations") {
  std::mt19937_64 rng(7);
  for (int c = 0; c < kCases; ++c) {
    const VectorXd x = props::random_vector(rng, 20, 30.0);
    const VectorXd r = relu(x);
    CHECK(relu(r) == r);
    const VectorXd t = tanh_act(x), s = sigmoid(x);
    CHECK((t.array().abs() <= 1).all());
    CHECK((s.array() >= 0).all());
    CHECK((s.array() <= 1).all());
    MatrixXd A(x.size(), 3);
    A << x, t, s;
    CHECK(A * MatrixXd::Identity(3, 3) == A);
  }
}

TEST_CASE("relation softmax is a distribution") {
  std::mt19937_64 rng(8);
  for (int c = 0; c < kCases; ++c) {
    const int d = 1 + int(uniform_index(rng, 6));
    auto rel = RelationEmbeddings<double>::zeros(7, d);
    fill_uniform(rel.rows, 3.0, rng);
    VectorXd e(d);
    for (int i = 0; i < d; ++i) e(i) = 4 * (2 * uniform01(rng) - 1);
    const VectorXd p = relation_softmax(rel, e);
    CHECK(p.size() == 7);
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((p.array() > 0).all());
  }
}

TEST_CASE("core numbers never drop when an edge is added") {
  std::mt19937_64 rng(9);
  for (int c = 0; c < kCases; ++c) {
    const auto g = oracles::random_graph(rng, 10);
    Adjacency adj = undirected_projection(g);
    const auto before = core_numbers(adj);
    const std::size_t a = uniform_index(rng, adj.size()), b = uniform_index(rng, adj.size());
    if (a != b && !std::binary_search(adj[a].begin(), adj[a].end(), b)) {
      adj[a].insert(std::upper_bound(adj[a].begin(), adj[a].end(), b), b);
      adj[b].insert(std::upper_bound(adj[b].begin(), adj[b].end(), a), a);
    }
    const auto after = core_numbers(adj);
    for (std::size_t v = 0; v < adj.size(); ++v) CHECK(after[v] >= before[v]);
  }
}

TEST_CASE("pagerank sums to one and follows relabeling") {
  std::mt19937_64 rng(10);
  for (int c = 0; c < kCases; ++c) {
    const auto g = oracles::random_graph(rng, 12);
    std::vector<std::pair<UserId, UserId>> edges, relabeled;
    for (const auto& e : g.edges)
      for (std::uint32_t m = 0; m < e.multiplicity; ++m) edges.emplace_back(g.nodes[e.src], g.nodes[e.dst]);
    // Reversing the id order reverses the node order.
    for (const auto& [s, d] : edges) relabeled.emplace_back(1000 - s, 1000 - d);
    const auto pr = pagerank(g);
    const auto pr2 = pagerank(make_graph(relabeled));
    double total = 0;
    for (std::size_t v = 0; v < pr.size(); ++v) {
      total += pr[v];
      CHECK(pr[v] == doctest::Approx(pr2[pr.size() - 1 - v]).epsilon(1e-9));
    }
    CHECK(std::abs(total - 1) <= 1e-8);
  }
}

TEST_CASE("f-measure bounds") {
  std::mt19937_64 rng(11);
  for (int c = 0; c < kCases; ++c) {
    const double p = uniform01(rng), r = uniform01(rng);
    const double f = Metrics::f_measure(p, r);
    CHECK(f <= std::max(p, r) + 1e-15);
    CHECK(f >= std::min(p, r) - 1e-15);
    CHECK(Metrics::f_measure(p, p) == doctest::Approx(p));
  }
}

TEST_CASE("recall never rises with the threshold") {
  std::mt19937_64 rng(12);
  for (int c = 0; c < kCases; ++c) {
    MatrixXd X(30, 2);
    fill_uniform(X, 2.0, rng);
    std::vector<int> y;
    for (Eigen::Index i = 0; i < 30; ++i) y.push_back(X(i, 0) + 0.5 * uniform01(rng) > 0.3);
    if (std::count(y.begin(), y.end(), 1) < 2 || std::count(y.begin(), y.end(), 0) < 2) continue;
    const LrModel m = lr_fit(X, y);
    const double t1 = uniform01(rng), t2 = uniform01(rng);
    CHECK(evaluate(m, X, y, std::max(t1, t2)).recall() <= evaluate(m, X, y, std::min(t1, t2)).recall());
    for (std::size_t i = 1; i < m.objective_trace.size(); ++i)
      CHECK(m.objective_trace[i] <= m.objective_trace[i - 1]);
  }
}

TEST_CASE("padding never enters the score") {
  std::mt19937_64 rng(13);
  for (int c = 0; c < kCases; ++c) {
    MdmHyper h = props::random_hyper(rng);
    auto p = init_params<double>(h, std::uint64_t(c));
    const auto items = props::random_items(rng, 10);
    const double before = score<double>(items, p);
    p.encoder.table.row(0).setConstant(1e6);
    CHECK(score<double>(items, p) == before);
  }
}

TEST_CASE("training separates a separable toy") {
  Corpus corpus;
  std::mt19937_64 rng(14);
  for (UserId u = 0; u < 12; ++u) {
    UserSequence s{u, {}, u % 3 == 0 ? Label::kSpammer : Label::kNormal};
    const std::size_t len = 3 + uniform_index(rng, 4);
    for (std::size_t i = 0; i < len; ++i)
      s.items.push_back(s.label == Label::kSpammer ? 5 : 1 + int(uniform_index(rng, 3)));
    corpus.sequences.push_back(s);
  }
  MdmHyper h;
  h.dim = 4;
  h.window = 2;
  h.depth_r = 1;
  h.depth_e = 1;
  TrainConfig cfg;
  cfg.lambda = 0;
  cfg.epochs = 60;
  cfg.lr = 1e-2;
  cfg.rel_tol = 0;
  const auto trained = train_mdm(corpus, init_params<double>(h, 3), cfg).params;
  int ordered = 0, total = 0;
  for (const auto& s : corpus.sequences)
    for (const auto& l : corpus.sequences)
      if (s.label == Label::kSpammer && l.label == Label::kNormal) {
        ordered += score<double>(s.items, trained) > score<double>(l.items, trained);
        ++total;
      }
  CHECK(double(ordered) / total >= 0.95);
}
