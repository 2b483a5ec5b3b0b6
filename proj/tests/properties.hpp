#pragma once

// Randomised invariant checks. Each returns the number of violating cases.

#include "mdm/baselines.hpp"
#include "mdm/classify.hpp"
#include "mdm/embed.hpp"
#include "mdm/ingest.hpp"
#include "mdm/mdm.hpp"
#include "mdm/train.hpp"

#include <random>

namespace props {

using namespace mdm;

inline VectorXd random_vector(std::mt19937_64& rng, Eigen::Index max_size, double spread) {
  const auto n = Eigen::Index(1 + uniform_index(rng, std::size_t(max_size)));
  VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = spread * (2 * uniform01(rng) - 1);
  return x;
}

inline std::vector<int> random_items(std::mt19937_64& rng, std::size_t max_len, int relations = 7) {
  std::vector<int> items(1 + uniform_index(rng, max_len));
  for (int& r : items) r = 1 + int(uniform_index(rng, std::size_t(relations)));
  return items;
}

inline MdmHyper random_hyper(std::mt19937_64& rng) {
  MdmHyper h;
  h.dim = 2 + int(uniform_index(rng, 5));
  h.window = 1 + int(uniform_index(rng, 6));
  h.depth_r = int(uniform_index(rng, 4));
  h.depth_e = 1 + int(uniform_index(rng, 3));
  h.relation_sum = uniform01(rng) < 0.5 ? RelationSum::kDistinct : RelationSum::kOccurrence;
  h.components = static_cast<Components>(uniform_index(rng, 4));
  return h;
}

inline int softmax_simplex_and_shift(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  int bad = 0;
  for (int c = 0; c < cases; ++c) {
    const VectorXd x = random_vector(rng, 12, 50.0);
    const double shift = 1e3 * (2 * uniform01(rng) - 1);
    const VectorXd p = softmax(x);
    const VectorXd q = softmax((x.array() + shift).matrix());
    bad += !((p.array() > 0).all() && std::abs(p.sum() - 1) <= 1e-12 && (p - q).cwiseAbs().maxCoeff() <= 1e-12);
  }
  return bad;
}

inline int attention_weights_sum_to_one(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  int bad = 0;
  for (int c = 0; c < cases; ++c) {
    MdmHyper h = random_hyper(rng);
    h.components = uniform01(rng) < 0.5 ? Components::kIndividual : Components::kFull;
    const auto p = init_params<double>(h, seed + std::uint64_t(c), 1.0);
    const auto f = forward<double>(random_items(rng, 15), p);
    auto on_simplex = [](const VectorXd& w) {
      return (w.array() >= 0).all() && std::abs(w.sum() - 1) <= 1e-12;
    };
    bool ok = on_simplex(f.order.weights) && f.layers.size() == std::size_t(h.depth_r) + 1;
    for (const auto& layer : f.layers) ok = ok && on_simplex(layer.weights);
    bad += !ok;
  }
  return bad;
}

inline int kgram_conservation(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  int bad = 0;
  for (int c = 0; c < cases; ++c) {
    const auto items = random_items(rng, 40);
    const auto counts = kgram_features(items);
    std::uint64_t total = 0;
    for (auto v : counts) total += v;
    bad += total != items.size() - 1;
  }
  return bad;
}

inline int fuse_additivity(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  int bad = 0;
  for (int c = 0; c < cases; ++c) {
    const VectorXd v = random_vector(rng, 64, 10.0);
    VectorXd g(v.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = 10 * (2 * uniform01(rng) - 1);
    bad += (fuse(v, g) - (v + g)).norm() != 0.0;
  }
  return bad;
}

/// Zero gradients on a fresh state, and a zero learning rate on any state,
/// leave the parameters untouched.
inline int adam_identity(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  int bad = 0;
  for (int c = 0; c < cases; ++c) {
    MatrixXd param(Eigen::Index(1 + uniform_index(rng, 5)), Eigen::Index(1 + uniform_index(rng, 5)));
    fill_uniform(param, 5.0, rng);
    MatrixXd grad(param.rows(), param.cols());
    fill_uniform(grad, 5.0, rng);
    const auto zero = adam_step<double>(param, MatrixXd::Zero(param.rows(), param.cols()), {});
    AdamState<double> warm;
    warm = adam_step<double>(param, grad, warm).state;
    AdamConfig frozen;
    frozen.lr = 0;
    const auto still = adam_step<double>(param, grad, warm, frozen);
    bad += zero.param != param || still.param != param || still.state.step != 2;
  }
  return bad;
}

/// Same seed, same result for the generator, initialisation, forward pass,
/// splitting and a short training run.
inline int determinism_under_seed(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  int bad = 0;
  for (int c = 0; c < cases; ++c) {
    const std::uint64_t s = rng();
    const SynthConfig cfg{20 + uniform_index(rng, 30), 0.2, 6.0, s};
    const auto a = synth_generate(cfg), b = synth_generate(cfg);
    bool ok = a.events == b.events && a.labels == b.labels;

    const MdmHyper h = random_hyper(rng);
    const auto pa = init_params<double>(h, s), pb = init_params<double>(h, s);
    ok = ok && flatten(pa) == flatten(pb);
    const auto items = random_items(rng, 12);
    ok = ok && forward<double>(items, pa).phi == forward<double>(items, pb).phi;

    std::vector<int> y;
    for (std::size_t i = 0; i < 30; ++i) y.push_back(i % 3 == 0);
    ok = ok && stratified_split(y, 0.3, s).test == stratified_split(y, 0.3, s).test;

    if (c % 10 == 0 && a.corpus.stats.spammers > 0 && a.corpus.stats.normals > 0) {
      TrainConfig tc;
      tc.epochs = 2;
      tc.pairs_per_batch = 4;
      tc.batches_per_epoch = 2;
      tc.seed = s;
      MdmHyper small;
      small.dim = 3;
      small.depth_r = 1;
      small.depth_e = 1;
      const auto init = init_params<double>(small, s);
      ok = ok && flatten(train_mdm(a.corpus, init, tc).params) ==
                     flatten(train_mdm(b.corpus, init, tc).params);
    }
    bad += !ok;
  }
  return bad;
}

}  // namespace props
