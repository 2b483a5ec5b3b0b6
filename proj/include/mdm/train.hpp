#pragma once

#include "mdm/embed.hpp"
#include "mdm/ingest.hpp"
#include "mdm/mdm.hpp"
#include "mdm/params.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

namespace mdm {

/// -log sigmoid(phi_s - phi_l): small when the spammer outscores the normal user.
inline double pair_loss(double phi_spam, double phi_normal) {
  return softplus(-(phi_spam - phi_normal));
}

/// (d loss / d phi_s, d loss / d phi_l).
inline std::pair<double, double> pair_loss_grad(double phi_spam, double phi_normal) {
  const double s = logistic(-(phi_spam - phi_normal));
  return {-s, s};
}

struct TrainConfig {
  double lambda = 1e-4;
  int epochs = 20;
  std::size_t pairs_per_batch = 32;
  std::size_t batches_per_epoch = 0;  // 0: ceil(users / pairs_per_batch)
  double lr = 1e-3;
  std::uint64_t seed = 0;
  bool freeze_embed = false;
  double rel_tol = 1e-5;  // stop when the epoch loss changes less than this, relatively
};

/// Index pair into a sequence list: (spammer, normal user).
struct RankPair {
  std::size_t spam;
  std::size_t normal;
};

/// Uniform (spammer, normal) pairs.
std::vector<RankPair> sample_pairs(std::span<const std::size_t> spammers,
                                   std::span<const std::size_t> normals, std::size_t count,
                                   std::mt19937_64& rng);

struct Objective {
  double pair_loss = 0;  // mean over pairs
  double frobenius = 0;  // lambda/2 * ||Theta||_F^2 over trained tensors
  double total() const { return pair_loss + frobenius; }
};

/// Ranking objective on a fixed pair list. When `grad` is given it must be
/// zero-initialised with the shapes of `params`; frozen embedding tensors get
/// no gradient.
Objective ranking_objective(const std::vector<std::vector<int>>& sequences,
                            std::span<const RankPair> pairs, const MdmParams<double>& params,
                            double lambda, bool freeze_embed, MdmParams<double>* grad = nullptr);

struct EpochStats {
  int epoch = 0;
  double mean_pair_loss = 0;
  double frobenius = 0;
};

struct TrainResult {
  MdmParams<double> params;
  std::vector<EpochStats> trace;
};

/// Adam on the pairwise ranking objective. Throws if the corpus lacks either class.
TrainResult train_mdm(const Corpus& corpus, MdmParams<double> init, const TrainConfig& cfg);

/// Embedding pre-training followed by ranking training. Seeds: embeddings
/// use `seed`, initialisation `seed + 1`, pair sampling `seed + 2`. The
/// embedding width always follows `hyper.dim`.
struct FitConfig {
  MdmHyper hyper;
  EmbedConfig embed;
  TrainConfig train;
  std::uint64_t seed = 0;
};

struct FittedModel {
  MdmParams<double> params;
  std::vector<EpochStats> trace;
  std::vector<double> embed_trace;
};

FittedModel fit_model(const Corpus& corpus, const FitConfig& cfg);

/// `epoch,mean_pair_loss,frobenius_term` per line.
void write_loss_trace(const std::filesystem::path& path, const std::vector<EpochStats>& trace);

}  // namespace mdm
