#include "mdm/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

namespace mdm {

std::vector<RankPair> sample_pairs(std::span<const std::size_t> spammers,
                                   std::span<const std::size_t> normals, std::size_t count,
                                   std::mt19937_64& rng) {
  if (spammers.empty() || normals.empty())
    throw std::invalid_argument("pair sampling needs both spammers and normal users");
  std::vector<RankPair> pairs;
  pairs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t s = spammers[uniform_index(rng, spammers.size())];
    const std::size_t l = normals[uniform_index(rng, normals.size())];
    pairs.push_back({s, l});
  }
  return pairs;
}

Objective ranking_objective(const std::vector<std::vector<int>>& sequences,
                            std::span<const RankPair> pairs, const MdmParams<double>& params,
                            double lambda, bool freeze_embed, MdmParams<double>* grad) {
  if (pairs.empty()) throw std::invalid_argument("ranking objective over zero pairs");

  // Each distinct user is run forward once; its dL/dphi is accumulated over
  // every pair it appears in and pushed backward once.
  std::map<std::size_t, ForwardPass<double>> passes;
  for (const auto& p : pairs)
    for (std::size_t idx : {p.spam, p.normal})
      if (!passes.contains(idx)) passes.emplace(idx, forward<double>(sequences[idx], params));

  Objective obj;
  std::map<std::size_t, double> dphi;
  const double inv = 1.0 / double(pairs.size());
  for (const auto& p : pairs) {
    const double s = passes.at(p.spam).phi;
    const double l = passes.at(p.normal).phi;
    obj.pair_loss += pair_loss(s, l) * inv;
    const auto [ds, dl] = pair_loss_grad(s, l);
    dphi[p.spam] += ds * inv;
    dphi[p.normal] += dl * inv;
  }
  obj.frobenius = 0.5 * lambda * squared_norm(params, !freeze_embed);

  if (grad) {
    for (const auto& [idx, d] : dphi) backward(passes.at(idx), params, d, *grad);
    // Frozen tensors get no gradient; trained ones pick up the weight decay.
    std::vector<const Matrix<double>*> values;
    for_each_tensor(params, [&](const std::string&, TensorGroup, const Matrix<double>& m) {
      values.push_back(&m);
    });
    std::size_t i = 0;
    for_each_tensor(*grad, [&](const std::string&, TensorGroup g, Matrix<double>& m) {
      if (freeze_embed && g == TensorGroup::kEmbedding)
        m.setZero();
      else
        m += lambda * *values[i];
      ++i;
    });
    grad->encoder.table.row(0).setZero();
  }
  return obj;
}

TrainResult train_mdm(const Corpus& corpus, MdmParams<double> init, const TrainConfig& cfg) {
  if (cfg.lambda < 0) throw std::invalid_argument("train: lambda must be non-negative");
  if (cfg.pairs_per_batch < 1) throw std::invalid_argument("train: batch must be positive");

  std::vector<std::vector<int>> sequences;
  std::vector<std::size_t> spammers, normals;
  for (const auto& seq : corpus.sequences) {
    if (seq.label == Label::kUnknown) continue;
    (seq.label == Label::kSpammer ? spammers : normals).push_back(sequences.size());
    sequences.push_back(seq.items);
  }
  if (spammers.empty() || normals.empty())
    throw std::invalid_argument("train: corpus needs at least one spammer and one normal user");

  const std::size_t batches =
      cfg.batches_per_epoch > 0
          ? cfg.batches_per_epoch
          : (sequences.size() + cfg.pairs_per_batch - 1) / cfg.pairs_per_batch;

  TrainResult result{std::move(init), {}};
  MdmParams<double>& theta = result.params;
  std::mt19937_64 rng(cfg.seed);
  const AdamConfig adam{cfg.lr};

  std::vector<AdamState<double>> states;
  for_each_tensor(theta, [&](const std::string&, TensorGroup, Matrix<double>& m) {
    states.emplace_back(m.rows(), m.cols());
  });

  double previous = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double epoch_loss = 0;
    for (std::size_t b = 0; b < batches; ++b) {
      const auto pairs = sample_pairs(spammers, normals, cfg.pairs_per_batch, rng);
      MdmParams<double> grad = MdmParams<double>::zeros(theta.hyper);
      const Objective obj = ranking_objective(sequences, pairs, theta, cfg.lambda, cfg.freeze_embed, &grad);
      epoch_loss += obj.pair_loss;

      std::vector<const Matrix<double>*> grads;
      for_each_tensor(grad, [&](const std::string&, TensorGroup, const Matrix<double>& m) { grads.push_back(&m); });
      std::size_t i = 0;
      for_each_tensor(theta, [&](const std::string&, TensorGroup g, Matrix<double>& m) {
        if (!(cfg.freeze_embed && g == TensorGroup::kEmbedding)) adam_update(m, *grads[i], states[i], adam);
        ++i;
      });
      theta.encoder.table.row(0).setZero();
    }
    epoch_loss /= double(batches);
    result.trace.push_back(
        {epoch, epoch_loss, 0.5 * cfg.lambda * squared_norm(theta, !cfg.freeze_embed)});
    if (epoch > 1 && std::abs(epoch_loss - previous) <= cfg.rel_tol * std::abs(previous)) break;
    previous = epoch_loss;
  }
  return result;
}

FittedModel fit_model(const Corpus& corpus, const FitConfig& cfg) {
  cfg.hyper.validate();
  EmbedConfig ec = cfg.embed;
  ec.dim = cfg.hyper.dim;
  ec.seed = cfg.seed;
  EmbedResult emb = train_embeddings(corpus, ec);

  MdmParams<double> init = init_params<double>(cfg.hyper, cfg.seed + 1);
  init.relations = std::move(emb.relations);
  init.encoder = std::move(emb.encoder);

  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed + 2;
  TrainResult trained = train_mdm(corpus, std::move(init), tc);
  return {std::move(trained.params), std::move(trained.trace), std::move(emb.loss_trace)};
}

void write_loss_trace(const std::filesystem::path& path, const std::vector<EpochStats>& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  char buf[128];
  for (const auto& e : trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", e.epoch, e.mean_pair_loss, e.frobenius);
    out << buf;
  }
}

}  // namespace mdm
