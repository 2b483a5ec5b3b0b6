#pragma once

#include "mdm/numerics.hpp"

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mdm {

/// Which hidden states form the recent window.
enum class WindowMode : int {
  kIncludeLatest = 0,  // z_T, z_{T-1}, ..., z_{T-n+1}
  kSkipLatest = 1,     // z_{T-1}, ..., z_{T-n}
};

/// How the relation embeddings of a sequence are summed in the score.
enum class RelationSum : int {
  kDistinct = 0,     // each relation type present counts once
  kOccurrence = 1,   // every position counts
};

/// Which model blocks feed the fused representation. kFull is the complete
/// model; the others are the ablation ladder.
enum class Components : int {
  kRepresentation = 0,  // mean of the encoder outputs
  kLongTerm = 1,        // last LSTM hidden state
  kIndividual = 2,      // multi-order attention over the recent window
  kFull = 3,            // individual + union level
};

struct MdmHyper {
  int relations = 7;  // M
  int dim = 32;       // d
  int window = 6;     // n
  int depth_r = 4;    // k
  int depth_e = 4;    // L
  WindowMode window_mode = WindowMode::kIncludeLatest;
  RelationSum relation_sum = RelationSum::kDistinct;
  Components components = Components::kFull;

  void validate() const {
    if (relations < 1 || dim < 1 || window < 1 || depth_r < 0 || depth_e < 0)
      throw std::invalid_argument("model hyperparameters out of range");
    if (components == Components::kFull && depth_e < 1)
      throw std::invalid_argument("union-level network needs at least one layer");
  }
};

enum class TensorGroup { kEmbedding, kModel };

template <typename Scalar>
struct EncoderParams {
  Matrix<Scalar> table;  // (M+1) x d, row 0 is padding and stays zero
  Matrix<Scalar> wx;     // 3d x d, gate blocks: reset, update, candidate
  Matrix<Scalar> wh;     // 3d x d
  Matrix<Scalar> b;      // 3d x 1

  static EncoderParams zeros(int relations, int dim) {
    return {Matrix<Scalar>::Zero(relations + 1, dim), Matrix<Scalar>::Zero(3 * dim, dim),
            Matrix<Scalar>::Zero(3 * dim, dim), Matrix<Scalar>::Zero(3 * dim, 1)};
  }
  int dim() const { return static_cast<int>(table.cols()); }
  int relations() const { return static_cast<int>(table.rows()) - 1; }
};

template <typename Scalar>
struct RelationEmbeddings {
  Matrix<Scalar> rows;  // M x d; row m-1 embeds relation m

  static RelationEmbeddings zeros(int relations, int dim) {
    return {Matrix<Scalar>::Zero(relations, dim)};
  }
  auto of(int relation) const { return rows.row(relation - 1).transpose(); }
};

template <typename Scalar>
struct LstmParams {
  Matrix<Scalar> wx;  // 4d x d, gate blocks: input, forget, output, candidate
  Matrix<Scalar> wh;  // 4d x d
  Matrix<Scalar> b;   // 4d x 1

  static LstmParams zeros(int dim) {
    return {Matrix<Scalar>::Zero(4 * dim, dim), Matrix<Scalar>::Zero(4 * dim, dim),
            Matrix<Scalar>::Zero(4 * dim, 1)};
  }
};

template <typename Scalar>
struct ResidualLayer {
  Matrix<Scalar> w;  // d x d, applied as rows * w
  Matrix<Scalar> b;  // d x 1
};

template <typename Scalar>
struct ResNetParams {
  std::vector<ResidualLayer<Scalar>> layers;

  static ResNetParams zeros(int depth, int dim) {
    ResNetParams p;
    for (int l = 0; l < depth; ++l)
      p.layers.push_back({Matrix<Scalar>::Zero(dim, dim), Matrix<Scalar>::Zero(dim, 1)});
    return p;
  }
  int depth() const { return static_cast<int>(layers.size()); }
};

/// Two-layer scoring net: score(x) = w_out . tanh(w_in x + b_in) + b_out.
template <typename Scalar>
struct AttentionNet {
  Matrix<Scalar> w_out;  // a x 1
  Matrix<Scalar> w_in;   // a x d
  Matrix<Scalar> b_in;   // a x 1
  Matrix<Scalar> b_out;  // 1 x 1

  static AttentionNet zeros(int width, int dim) {
    return {Matrix<Scalar>::Zero(width, 1), Matrix<Scalar>::Zero(width, dim),
            Matrix<Scalar>::Zero(width, 1), Matrix<Scalar>::Zero(1, 1)};
  }
};

/// Layer-level net (omega_1, omega_2, c_1, c_2), shared across the k+1
/// stacked layers, and order-level net (phi_1, phi_2, b_1, b_2).
template <typename Scalar>
struct AttentionParams {
  AttentionNet<Scalar> layer;
  AttentionNet<Scalar> order;

  static AttentionParams zeros(int dim) {
    return {AttentionNet<Scalar>::zeros(dim, dim), AttentionNet<Scalar>::zeros(dim, dim)};
  }
};

/// Every trainable tensor of the model, plus its hyperparameters.
template <typename Scalar>
struct MdmParams {
  MdmHyper hyper;
  EncoderParams<Scalar> encoder;
  RelationEmbeddings<Scalar> relations;
  LstmParams<Scalar> lstm;
  ResNetParams<Scalar> resnet_r;
  AttentionParams<Scalar> attention;
  ResNetParams<Scalar> resnet_e;

  static MdmParams zeros(const MdmHyper& h) {
    h.validate();
    return {h,
            EncoderParams<Scalar>::zeros(h.relations, h.dim),
            RelationEmbeddings<Scalar>::zeros(h.relations, h.dim),
            LstmParams<Scalar>::zeros(h.dim),
            ResNetParams<Scalar>::zeros(h.depth_r, h.dim),
            AttentionParams<Scalar>::zeros(h.dim),
            ResNetParams<Scalar>::zeros(h.depth_e, h.dim)};
  }
};

/// Visit every tensor as f(name, group, matrix). Order is fixed and defines
/// the flat layout and the checkpoint layout.
template <typename Params, typename F>
void for_each_tensor(Params& p, F&& f) {
  f(std::string("relations"), TensorGroup::kEmbedding, p.relations.rows);
  f(std::string("encoder.table"), TensorGroup::kEmbedding, p.encoder.table);
  f(std::string("encoder.wx"), TensorGroup::kEmbedding, p.encoder.wx);
  f(std::string("encoder.wh"), TensorGroup::kEmbedding, p.encoder.wh);
  f(std::string("encoder.b"), TensorGroup::kEmbedding, p.encoder.b);
  f(std::string("lstm.wx"), TensorGroup::kModel, p.lstm.wx);
  f(std::string("lstm.wh"), TensorGroup::kModel, p.lstm.wh);
  f(std::string("lstm.b"), TensorGroup::kModel, p.lstm.b);
  for (std::size_t l = 0; l < p.resnet_r.layers.size(); ++l) {
    f("resnet_r." + std::to_string(l) + ".w", TensorGroup::kModel, p.resnet_r.layers[l].w);
    f("resnet_r." + std::to_string(l) + ".b", TensorGroup::kModel, p.resnet_r.layers[l].b);
  }
  f(std::string("attention.layer.w_out"), TensorGroup::kModel, p.attention.layer.w_out);
  f(std::string("attention.layer.w_in"), TensorGroup::kModel, p.attention.layer.w_in);
  f(std::string("attention.layer.b_in"), TensorGroup::kModel, p.attention.layer.b_in);
  f(std::string("attention.layer.b_out"), TensorGroup::kModel, p.attention.layer.b_out);
  f(std::string("attention.order.w_out"), TensorGroup::kModel, p.attention.order.w_out);
  f(std::string("attention.order.w_in"), TensorGroup::kModel, p.attention.order.w_in);
  f(std::string("attention.order.b_in"), TensorGroup::kModel, p.attention.order.b_in);
  f(std::string("attention.order.b_out"), TensorGroup::kModel, p.attention.order.b_out);
  for (std::size_t l = 0; l < p.resnet_e.layers.size(); ++l) {
    f("resnet_e." + std::to_string(l) + ".w", TensorGroup::kModel, p.resnet_e.layers[l].w);
    f("resnet_e." + std::to_string(l) + ".b", TensorGroup::kModel, p.resnet_e.layers[l].b);
  }
}

template <typename Scalar>
Eigen::Index parameter_count(const MdmParams<Scalar>& p) {
  Eigen::Index n = 0;
  for_each_tensor(p, [&](const std::string&, TensorGroup, const Matrix<Scalar>& m) { n += m.size(); });
  return n;
}

template <typename Scalar>
Vector<Scalar> flatten(const MdmParams<Scalar>& p) {
  Vector<Scalar> flat(parameter_count(p));
  Eigen::Index off = 0;
  for_each_tensor(p, [&](const std::string&, TensorGroup, const Matrix<Scalar>& m) {
    flat.segment(off, m.size()) = m.reshaped();
    off += m.size();
  });
  return flat;
}

template <typename Scalar>
void unflatten(const Vector<Scalar>& flat, MdmParams<Scalar>& p) {
  if (flat.size() != parameter_count(p)) throw std::invalid_argument("unflatten: size mismatch");
  Eigen::Index off = 0;
  for_each_tensor(p, [&](const std::string&, TensorGroup, Matrix<Scalar>& m) {
    m.reshaped() = flat.segment(off, m.size());
    off += m.size();
  });
}

template <typename Scalar>
Scalar squared_norm(const MdmParams<Scalar>& p, bool include_embedding = true) {
  Scalar s = 0;
  for_each_tensor(p, [&](const std::string&, TensorGroup g, const Matrix<Scalar>& m) {
    if (include_embedding || g == TensorGroup::kModel) s += m.squaredNorm();
  });
  return s;
}

/// Weights uniform in (-scale, scale), biases zero, padding row zero.
template <typename Scalar>
MdmParams<Scalar> init_params(const MdmHyper& h, std::uint64_t seed, Scalar scale = Scalar(0.1)) {
  MdmParams<Scalar> p = MdmParams<Scalar>::zeros(h);
  std::mt19937_64 rng(seed);
  for_each_tensor(p, [&](const std::string& name, TensorGroup, Matrix<Scalar>& m) {
    const bool bias = name.ends_with(".b") || name.ends_with("b_in") || name.ends_with("b_out");
    if (!bias) fill_uniform(m, scale, rng);
  });
  p.encoder.table.row(0).setZero();
  return p;
}

}  // namespace mdm
