#include "mdm/embed.hpp"

#include <numeric>

namespace mdm {

EmbedResult train_embeddings(const Corpus& corpus, const EmbedConfig& cfg) {
  if (corpus.sequences.empty()) throw std::invalid_argument("train_embeddings: empty corpus");
  if (cfg.dim < 1 || cfg.batch < 1) throw std::invalid_argument("train_embeddings: bad config");

  MdmHyper h;
  h.relations = corpus.relation_count;
  h.dim = cfg.dim;
  h.depth_r = 0;
  h.depth_e = 0;
  h.components = Components::kRepresentation;
  MdmParams<double> init = init_params<double>(h, cfg.seed);

  EmbedResult out{std::move(init.relations), std::move(init.encoder), {}};
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  const AdamConfig adam{cfg.lr};
  AdamState<double> s_rel, s_table, s_wx, s_wh, s_b;

  std::vector<std::size_t> order(corpus.sequences.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order, rng);
    double epoch_nll = 0;
    std::size_t epoch_count = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch);
      auto genc = EncoderParams<double>::zeros(h.relations, h.dim);
      auto grel = RelationEmbeddings<double>::zeros(h.relations, h.dim);
      double nll = 0;
      std::size_t count = 0;
      for (std::size_t i = start; i < stop; ++i) {
        std::size_t n = 0;
        nll += embedding_nll<double>(corpus.sequences[order[i]].items, out.encoder, out.relations,
                                     cfg.target, &genc, &grel, &n);
        count += n;
      }
      epoch_nll += nll;
      epoch_count += count;
      if (count == 0) continue;
      const double scale = 1.0 / double(count);
      genc.table.row(0).setZero();
      adam_update<double>(out.relations.rows, grel.rows * scale, s_rel, adam);
      adam_update<double>(out.encoder.table, genc.table * scale, s_table, adam);
      adam_update<double>(out.encoder.wx, genc.wx * scale, s_wx, adam);
      adam_update<double>(out.encoder.wh, genc.wh * scale, s_wh, adam);
      adam_update<double>(out.encoder.b, genc.b * scale, s_b, adam);
    }
    out.loss_trace.push_back(epoch_count ? epoch_nll / double(epoch_count) : 0.0);
  }
  return out;
}

double mean_log_likelihood(const Corpus& corpus, const RelationEmbeddings<double>& rel,
                           const EncoderParams<double>& enc, EmbedTarget target) {
  double nll = 0;
  std::size_t count = 0;
  for (const auto& seq : corpus.sequences) {
    std::size_t n = 0;
    nll += embedding_nll<double>(seq.items, enc, rel, target, nullptr, nullptr, &n);
    count += n;
  }
  return count ? -nll / double(count) : 0.0;
}

}  // namespace mdm
