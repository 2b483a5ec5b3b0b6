#pragma once

// User-relation representation: a gated recurrent encoder over relation input
// embeddings produces one vector per position, and a softmax over relation
// embeddings scores which relation each position holds.

#include "mdm/ingest.hpp"
#include "mdm/numerics.hpp"
#include "mdm/params.hpp"

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdm {

template <typename Scalar>
struct EncoderCache {
  Matrix<Scalar> h;  // d x (T+1); column 0 is the zero initial state
  Matrix<Scalar> reset, update, candidate;  // d x T
};

inline void check_items(std::span<const int> items, int relations) {
  if (items.empty()) throw std::invalid_argument("empty relational sequence");
  for (int r : items)
    if (r < 1 || r > relations)
      throw std::out_of_range("relation id " + std::to_string(r) + " outside 1.." +
                              std::to_string(relations));
}

/// Encoder outputs e_1..e_T as the rows of a T x d matrix.
template <typename Scalar>
Matrix<Scalar> encode_positions(std::span<const int> items, const EncoderParams<Scalar>& enc,
                                EncoderCache<Scalar>* cache = nullptr) {
  check_items(items, enc.relations());
  const Eigen::Index d = enc.dim();
  const auto T = static_cast<Eigen::Index>(items.size());

  EncoderCache<Scalar> local;
  EncoderCache<Scalar>& c = cache ? *cache : local;
  c.h = Matrix<Scalar>::Zero(d, T + 1);
  c.reset.resize(d, T);
  c.update.resize(d, T);
  c.candidate.resize(d, T);

  for (Eigen::Index t = 0; t < T; ++t) {
    const Vector<Scalar> x = enc.table.row(items[static_cast<std::size_t>(t)]).transpose();
    const Vector<Scalar> h = c.h.col(t);
    const Vector<Scalar> r = sigmoid(enc.wx.middleRows(0, d) * x + enc.wh.middleRows(0, d) * h +
                                     enc.b.middleRows(0, d));
    const Vector<Scalar> u = sigmoid(enc.wx.middleRows(d, d) * x + enc.wh.middleRows(d, d) * h +
                                     enc.b.middleRows(d, d));
    const Vector<Scalar> n = tanh_act(enc.wx.middleRows(2 * d, d) * x +
                                      enc.wh.middleRows(2 * d, d) * r.cwiseProduct(h) +
                                      enc.b.middleRows(2 * d, d));
    c.reset.col(t) = r;
    c.update.col(t) = u;
    c.candidate.col(t) = n;
    c.h.col(t + 1) = (Vector<Scalar>::Ones(d) - u).cwiseProduct(h) + u.cwiseProduct(n);
  }
  return c.h.rightCols(T).transpose();
}

/// Accumulates encoder gradients given dL/de (T x d).
template <typename Scalar>
void encoder_backward(std::span<const int> items, const EncoderParams<Scalar>& enc,
                      const EncoderCache<Scalar>& c, const Matrix<Scalar>& de,
                      EncoderParams<Scalar>& grad) {
  const Eigen::Index d = enc.dim();
  const auto T = static_cast<Eigen::Index>(items.size());
  Vector<Scalar> dh_next = Vector<Scalar>::Zero(d);
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    const int item = items[static_cast<std::size_t>(t)];
    const Vector<Scalar> x = enc.table.row(item).transpose();
    const Vector<Scalar> h = c.h.col(t);
    const auto r = c.reset.col(t);
    const auto u = c.update.col(t);
    const auto n = c.candidate.col(t);

    const Vector<Scalar> dh = de.row(t).transpose() + dh_next;
    const Vector<Scalar> du = dh.cwiseProduct(n - h);
    const Vector<Scalar> dn = dh.cwiseProduct(u);
    Vector<Scalar> dh_prev = dh.cwiseProduct(Vector<Scalar>::Ones(d) - u);

    const Vector<Scalar> dan = dn.cwiseProduct((Vector<Scalar>::Ones(d) - n.cwiseProduct(n)));
    const Vector<Scalar> rh = r.cwiseProduct(h);
    grad.wx.middleRows(2 * d, d) += dan * x.transpose();
    grad.wh.middleRows(2 * d, d) += dan * rh.transpose();
    grad.b.middleRows(2 * d, d) += dan;
    Vector<Scalar> dx = enc.wx.middleRows(2 * d, d).transpose() * dan;
    const Vector<Scalar> drh = enc.wh.middleRows(2 * d, d).transpose() * dan;
    const Vector<Scalar> dr = drh.cwiseProduct(h);
    dh_prev += drh.cwiseProduct(r);

    const Vector<Scalar> dau = du.cwiseProduct(u.cwiseProduct(Vector<Scalar>::Ones(d) - u));
    grad.wx.middleRows(d, d) += dau * x.transpose();
    grad.wh.middleRows(d, d) += dau * h.transpose();
    grad.b.middleRows(d, d) += dau;
    dx += enc.wx.middleRows(d, d).transpose() * dau;
    dh_prev += enc.wh.middleRows(d, d).transpose() * dau;

    const Vector<Scalar> dar = dr.cwiseProduct(r.cwiseProduct(Vector<Scalar>::Ones(d) - r));
    grad.wx.middleRows(0, d) += dar * x.transpose();
    grad.wh.middleRows(0, d) += dar * h.transpose();
    grad.b.middleRows(0, d) += dar;
    dx += enc.wx.middleRows(0, d).transpose() * dar;
    dh_prev += enc.wh.middleRows(0, d).transpose() * dar;

    grad.table.row(item) += dx.transpose();
    dh_next = dh_prev;
  }
}

/// P(r_m | t, u) for m = 1..M, from the dot products m_r . e_t.
template <typename Scalar>
Vector<Scalar> relation_softmax(const RelationEmbeddings<Scalar>& rel, const Vector<Scalar>& e_t) {
  if (rel.rows.cols() != e_t.size())
    throw std::invalid_argument("relation_softmax: dimension mismatch");
  return softmax(rel.rows * e_t);
}

/// Which relation each encoder position is trained to predict.
enum class EmbedTarget : int {
  kCurrent = 0,  // s_t from e_t
  kNext = 1,     // s_{t+1} from e_t
};

/// Summed negative log-likelihood of one sequence under the representation
/// objective. Gradients are accumulated when both grad pointers are set.
/// `count` receives the number of predicted positions.
template <typename Scalar>
Scalar embedding_nll(std::span<const int> items, const EncoderParams<Scalar>& enc,
                     const RelationEmbeddings<Scalar>& rel, EmbedTarget target,
                     EncoderParams<Scalar>* genc = nullptr,
                     RelationEmbeddings<Scalar>* grel = nullptr, std::size_t* count = nullptr) {
  EncoderCache<Scalar> cache;
  const Matrix<Scalar> e = encode_positions(items, enc, &cache);
  const auto T = static_cast<Eigen::Index>(items.size());
  const Eigen::Index shift = target == EmbedTarget::kNext ? 1 : 0;

  Matrix<Scalar> de = Matrix<Scalar>::Zero(e.rows(), e.cols());
  Scalar nll = 0;
  std::size_t n = 0;
  for (Eigen::Index t = 0; t + shift < T; ++t) {
    const int want = items[static_cast<std::size_t>(t + shift)];
    const Vector<Scalar> et = e.row(t).transpose();
    const Vector<Scalar> scores = rel.rows * et;
    const Scalar shift_by = scores.maxCoeff();
    const Scalar lse = shift_by + std::log((scores.array() - shift_by).exp().sum());
    nll += lse - scores(want - 1);
    ++n;
    if (genc && grel) {
      Vector<Scalar> dscores = (scores.array() - lse).exp().matrix();
      dscores(want - 1) -= Scalar(1);
      grel->rows += dscores * et.transpose();
      de.row(t) += (rel.rows.transpose() * dscores).transpose();
    }
  }
  if (genc && grel) encoder_backward(items, enc, cache, de, *genc);
  if (count) *count = n;
  return nll;
}

struct EmbedConfig {
  int dim = 32;
  int epochs = 10;
  std::size_t batch = 32;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  EmbedTarget target = EmbedTarget::kCurrent;
};

struct EmbedResult {
  RelationEmbeddings<double> relations;
  EncoderParams<double> encoder;
  std::vector<double> loss_trace;  // mean NLL per predicted position, per epoch
};

/// Fits relation embeddings and the encoder on a corpus with Adam. Throws on
/// an empty corpus.
EmbedResult train_embeddings(const Corpus& corpus, const EmbedConfig& cfg);

/// Mean log-likelihood of the corpus under the representation objective.
double mean_log_likelihood(const Corpus& corpus, const RelationEmbeddings<double>& rel,
                           const EncoderParams<double>& enc, EmbedTarget target);

}  // namespace mdm
