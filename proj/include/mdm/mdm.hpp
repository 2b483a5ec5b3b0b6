#pragma once

// Forward and backward passes of the multi-level dependency model:
//
//   e_1..e_T  --LSTM-->  z_1..z_T  --window-->  H (n x d)
//   H --ResNet^R--> H_0..H_k --layer attention--> v_0..v_k --order attention--> v
//   v --ResNet^E--> g_L,   F = v + g_L,   phi = F . sum_r m_r
//
// Vectors are column vectors; matrices whose rows are per-position or
// per-window-slot vectors follow the row convention (H * W).

#include "mdm/embed.hpp"
#include "mdm/numerics.hpp"
#include "mdm/params.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace mdm {

// ---------------------------------------------------------------------------
// Long-term dependency (LSTM)

template <typename Scalar>
struct LstmCache {
  Matrix<Scalar> z, c;           // d x (T+1); column 0 is the zero state
  Matrix<Scalar> in, forget, out, cand;  // d x T
};

/// Hidden states z_1..z_T as rows of a T x d matrix; z_0 = c_0 = 0.
template <typename Scalar>
Matrix<Scalar> lstm_forward(const Matrix<Scalar>& e, const LstmParams<Scalar>& p,
                            LstmCache<Scalar>* cache = nullptr) {
  const Eigen::Index T = e.rows();
  const Eigen::Index d = p.wh.cols();
  if (T < 1) throw std::invalid_argument("lstm_forward: empty input");
  if (e.cols() != p.wx.cols()) throw std::invalid_argument("lstm_forward: dimension mismatch");

  LstmCache<Scalar> local;
  LstmCache<Scalar>& c = cache ? *cache : local;
  c.z = Matrix<Scalar>::Zero(d, T + 1);
  c.c = Matrix<Scalar>::Zero(d, T + 1);
  c.in.resize(d, T);
  c.forget.resize(d, T);
  c.out.resize(d, T);
  c.cand.resize(d, T);

  for (Eigen::Index t = 0; t < T; ++t) {
    const Vector<Scalar> a = p.wx * e.row(t).transpose() + p.wh * c.z.col(t) + p.b;
    c.in.col(t) = sigmoid(a.segment(0, d));
    c.forget.col(t) = sigmoid(a.segment(d, d));
    c.out.col(t) = sigmoid(a.segment(2 * d, d));
    c.cand.col(t) = tanh_act(a.segment(3 * d, d));
    c.c.col(t + 1) = c.forget.col(t).cwiseProduct(c.c.col(t)) + c.in.col(t).cwiseProduct(c.cand.col(t));
    c.z.col(t + 1) = c.out.col(t).cwiseProduct(tanh_act(c.c.col(t + 1)));
  }
  return c.z.rightCols(T).transpose();
}

/// Accumulates LSTM gradients given dL/dz (T x d); returns dL/de (T x d).
template <typename Scalar>
Matrix<Scalar> lstm_backward(const Matrix<Scalar>& e, const LstmParams<Scalar>& p,
                             const LstmCache<Scalar>& c, const Matrix<Scalar>& dz,
                             LstmParams<Scalar>& grad) {
  const Eigen::Index T = e.rows();
  const Eigen::Index d = p.wh.cols();
  Matrix<Scalar> de = Matrix<Scalar>::Zero(T, e.cols());
  Vector<Scalar> dz_next = Vector<Scalar>::Zero(d);
  Vector<Scalar> dc_next = Vector<Scalar>::Zero(d);
  const Vector<Scalar> ones = Vector<Scalar>::Ones(d);
  Vector<Scalar> da(4 * d);

  for (Eigen::Index t = T - 1; t >= 0; --t) {
    const auto i = c.in.col(t);
    const auto f = c.forget.col(t);
    const auto o = c.out.col(t);
    const auto g = c.cand.col(t);
    const Vector<Scalar> tc = tanh_act(c.c.col(t + 1));

    const Vector<Scalar> dzt = dz.row(t).transpose() + dz_next;
    const Vector<Scalar> dct = dc_next + dzt.cwiseProduct(o).cwiseProduct(ones - tc.cwiseProduct(tc));
    da.segment(0, d) = dct.cwiseProduct(g).cwiseProduct(i.cwiseProduct(ones - i));
    da.segment(d, d) = dct.cwiseProduct(c.c.col(t)).cwiseProduct(f.cwiseProduct(ones - f));
    da.segment(2 * d, d) = dzt.cwiseProduct(tc).cwiseProduct(o.cwiseProduct(ones - o));
    da.segment(3 * d, d) = dct.cwiseProduct(i).cwiseProduct(ones - g.cwiseProduct(g));

    grad.wx.noalias() += da * e.row(t);
    grad.wh.noalias() += da * c.z.col(t).transpose();
    grad.b += da;
    de.row(t) = (p.wx.transpose() * da).transpose();
    dz_next = p.wh.transpose() * da;
    dc_next = dct.cwiseProduct(f);
  }
  return de;
}

// ---------------------------------------------------------------------------
// Recent window

template <typename Scalar>
struct Window {
  Matrix<Scalar> rows;          // n x d, most recent first; padding rows are zero
  Eigen::Index active = 0;      // leading rows that hold real hidden states
  std::vector<Eigen::Index> source;  // 0-based position of each active row
};

/// The last n hidden states in reverse-chronological order. Short sequences
/// are zero-padded at the bottom; padded rows are excluded from attention.
template <typename Scalar>
Window<Scalar> recent_window(const Matrix<Scalar>& z, int n,
                             WindowMode mode = WindowMode::kIncludeLatest) {
  if (n < 1) throw std::invalid_argument("recent_window: n must be positive");
  const Eigen::Index T = z.rows();
  Window<Scalar> w;
  w.rows = Matrix<Scalar>::Zero(n, z.cols());
  const Eigen::Index newest = mode == WindowMode::kIncludeLatest ? T - 1 : T - 2;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index t = newest - i;
    if (t < 0) break;
    w.rows.row(i) = z.row(t);
    w.source.push_back(t);
    ++w.active;
  }
  return w;
}

// ---------------------------------------------------------------------------
// Residual stacks

/// [X_0, X_1, ..., X_depth] with X_l = ReLU(X_{l-1} W_l + b_l + X_{l-1}).
/// Uses the first `depth` layers of `p` (all of them when depth < 0).
template <typename Scalar>
std::vector<Matrix<Scalar>> resnet_forward(const Matrix<Scalar>& x, const ResNetParams<Scalar>& p,
                                           int depth = -1) {
  if (depth < 0) depth = p.depth();
  if (depth > p.depth()) throw std::invalid_argument("resnet_forward: depth exceeds layers");
  std::vector<Matrix<Scalar>> stack;
  stack.reserve(static_cast<std::size_t>(depth) + 1);
  stack.push_back(x);
  for (int l = 0; l < depth; ++l) {
    const auto& layer = p.layers[static_cast<std::size_t>(l)];
    const Matrix<Scalar>& prev = stack.back();
    Matrix<Scalar> pre = prev * layer.w + prev;
    pre.rowwise() += layer.b.transpose().row(0);
    stack.push_back(relu(pre));
  }
  return stack;
}

/// Backward through the stack. `dstack[l]` holds dL/dX_l from outside the
/// stack (attention reads every layer); on return dstack[0] holds dL/dX_0.
template <typename Scalar>
void resnet_backward(const std::vector<Matrix<Scalar>>& stack, const ResNetParams<Scalar>& p,
                     std::vector<Matrix<Scalar>>& dstack, ResNetParams<Scalar>& grad) {
  for (std::size_t l = stack.size() - 1; l >= 1; --l) {
    const auto& layer = p.layers[l - 1];
    // X_l > 0 exactly where the pre-activation is positive.
    const Matrix<Scalar> dpre =
        (stack[l].array() > Scalar(0)).select(dstack[l], Matrix<Scalar>::Zero(dstack[l].rows(), dstack[l].cols()));
    grad.layers[l - 1].w.noalias() += stack[l - 1].transpose() * dpre;
    grad.layers[l - 1].b += dpre.colwise().sum().transpose();
    dstack[l - 1].noalias() += dpre * layer.w.transpose();
    dstack[l - 1] += dpre;
  }
}

// ---------------------------------------------------------------------------
// Attention

template <typename Scalar>
struct Attended {
  Vector<Scalar> value;    // d: weighted sum of the active rows
  Vector<Scalar> weights;  // n: zero on padded rows
  Matrix<Scalar> hidden;   // active x a: tanh activations
};

/// weights_i = softmax_i(w_out . tanh(w_in x_i + b_in) + b_out) over the
/// first `active` rows; value = sum_i weights_i x_i.
template <typename Scalar>
Attended<Scalar> attend(const Matrix<Scalar>& rows, Eigen::Index active, const AttentionNet<Scalar>& net) {
  if (active < 1) throw std::invalid_argument("attention over zero rows");
  if (active > rows.rows()) throw std::invalid_argument("attention: active rows exceed input");
  Attended<Scalar> out;
  Matrix<Scalar> pre = rows.topRows(active) * net.w_in.transpose();
  pre.rowwise() += net.b_in.transpose().row(0);
  out.hidden = tanh_act(pre);
  const Vector<Scalar> scores = (out.hidden * net.w_out).array() + net.b_out(0, 0);
  out.weights = Vector<Scalar>::Zero(rows.rows());
  out.weights.head(active) = softmax(scores);
  out.value = rows.topRows(active).transpose() * out.weights.head(active);
  return out;
}

/// Accumulates net gradients and dL/drows given dL/dvalue.
template <typename Scalar>
void attend_backward(const Matrix<Scalar>& rows, Eigen::Index active, const AttentionNet<Scalar>& net,
                     const Attended<Scalar>& fwd, const Vector<Scalar>& dvalue,
                     AttentionNet<Scalar>& grad, Matrix<Scalar>& drows) {
  const auto x = rows.topRows(active);
  const auto w = fwd.weights.head(active);
  const Vector<Scalar> dw = x * dvalue;
  const Vector<Scalar> dscore = w.cwiseProduct((dw.array() - w.dot(dw)).matrix());
  drows.topRows(active).noalias() += w * dvalue.transpose();

  grad.w_out.noalias() += fwd.hidden.transpose() * dscore;
  grad.b_out(0, 0) += dscore.sum();
  const Matrix<Scalar> dhidden = dscore * net.w_out.transpose();
  const Matrix<Scalar> dpre =
      dhidden.cwiseProduct((Matrix<Scalar>::Ones(active, net.w_in.rows()) - fwd.hidden.cwiseProduct(fwd.hidden)));
  grad.w_in.noalias() += dpre.transpose() * x;
  grad.b_in += dpre.colwise().sum().transpose();
  drows.topRows(active).noalias() += dpre * net.w_in;
}

/// Layer-level attention over one H_l (rows beyond `active` are padding).
template <typename Scalar>
Attended<Scalar> layer_attention(const Matrix<Scalar>& h_l, Eigen::Index active,
                                 const AttentionParams<Scalar>& a) {
  return attend(h_l, active, a.layer);
}

/// Order-level attention over the stacked contextual vectors [v_0; ...; v_k].
template <typename Scalar>
Attended<Scalar> order_attention(const Matrix<Scalar>& vs, const AttentionParams<Scalar>& a) {
  return attend(vs, vs.rows(), a.order);
}

/// g_L from v through the union-level residual stack.
template <typename Scalar>
Vector<Scalar> resnet_e_forward(const Vector<Scalar>& v, const ResNetParams<Scalar>& p, int depth = -1) {
  return resnet_forward<Scalar>(v.transpose(), p, depth).back().row(0).transpose();
}

template <typename Scalar>
Vector<Scalar> fuse(const Vector<Scalar>& v, const Vector<Scalar>& g) {
  if (v.size() != g.size()) throw std::invalid_argument("fuse: dimension mismatch");
  return v + g;
}

// ---------------------------------------------------------------------------
// Whole model

template <typename Scalar>
struct ForwardPass {
  std::vector<int> items;
  EncoderCache<Scalar> enc_cache;
  Matrix<Scalar> e;  // T x d
  LstmCache<Scalar> lstm_cache;
  Matrix<Scalar> z;  // T x d
  Window<Scalar> window;
  std::vector<Matrix<Scalar>> stack_r;   // H_0..H_k
  std::vector<Attended<Scalar>> layers;  // per H_l
  Matrix<Scalar> vs;                     // (k+1) x d
  Attended<Scalar> order;
  std::vector<Matrix<Scalar>> stack_e;   // g_0..g_L as 1 x d rows
  Vector<Scalar> v, g, fused, relation_sum;
  Scalar phi = 0;
};

/// Relation multiplicities entering the score's embedding sum.
inline std::vector<int> relation_counts(std::span<const int> items, int relations, RelationSum mode) {
  std::vector<int> counts(static_cast<std::size_t>(relations), 0);
  for (int r : items) {
    auto& c = counts[static_cast<std::size_t>(r - 1)];
    c = mode == RelationSum::kDistinct ? 1 : c + 1;
  }
  return counts;
}

template <typename Scalar>
ForwardPass<Scalar> forward(std::span<const int> items, const MdmParams<Scalar>& p) {
  const MdmHyper& h = p.hyper;
  ForwardPass<Scalar> f;
  f.items.assign(items.begin(), items.end());
  f.e = encode_positions(items, p.encoder, &f.enc_cache);

  if (h.components == Components::kRepresentation) {
    f.fused = f.e.colwise().mean().transpose();
  } else {
    f.z = lstm_forward(f.e, p.lstm, &f.lstm_cache);
    if (h.components == Components::kLongTerm) {
      f.fused = f.z.row(f.z.rows() - 1).transpose();
    } else {
      f.window = recent_window(f.z, h.window, h.window_mode);
      f.stack_r = resnet_forward(f.window.rows, p.resnet_r, h.depth_r);
      f.vs.resize(static_cast<Eigen::Index>(f.stack_r.size()), h.dim);
      for (std::size_t l = 0; l < f.stack_r.size(); ++l) {
        f.layers.push_back(layer_attention(f.stack_r[l], f.window.active, p.attention));
        f.vs.row(static_cast<Eigen::Index>(l)) = f.layers.back().value.transpose();
      }
      f.order = order_attention(f.vs, p.attention);
      f.v = f.order.value;
      if (h.components == Components::kFull) {
        f.stack_e = resnet_forward<Scalar>(f.v.transpose(), p.resnet_e, h.depth_e);
        f.g = f.stack_e.back().row(0).transpose();
        f.fused = fuse(f.v, f.g);
      } else {
        f.fused = f.v;
      }
    }
  }

  const auto counts = relation_counts(items, h.relations, h.relation_sum);
  f.relation_sum = Vector<Scalar>::Zero(h.dim);
  for (int r = 1; r <= h.relations; ++r)
    if (counts[static_cast<std::size_t>(r - 1)] > 0)
      f.relation_sum += Scalar(counts[static_cast<std::size_t>(r - 1)]) * p.relations.of(r);
  f.phi = f.fused.dot(f.relation_sum);
  return f;
}

/// Accumulates dL/dTheta into `grad` given dL/dphi.
template <typename Scalar>
void backward(const ForwardPass<Scalar>& f, const MdmParams<Scalar>& p, Scalar dphi,
              MdmParams<Scalar>& grad) {
  const MdmHyper& h = p.hyper;
  const std::span<const int> items(f.items);
  const Vector<Scalar> dfused = dphi * f.relation_sum;
  const auto counts = relation_counts(items, h.relations, h.relation_sum);
  for (int r = 1; r <= h.relations; ++r)
    if (counts[static_cast<std::size_t>(r - 1)] > 0)
      grad.relations.rows.row(r - 1) += (dphi * Scalar(counts[static_cast<std::size_t>(r - 1)])) * f.fused.transpose();

  Matrix<Scalar> de;
  if (h.components == Components::kRepresentation) {
    const Eigen::Index T = f.e.rows();
    de = (dfused / Scalar(T)).transpose().replicate(T, 1);
  } else {
    Matrix<Scalar> dz = Matrix<Scalar>::Zero(f.z.rows(), f.z.cols());
    if (h.components == Components::kLongTerm) {
      dz.row(dz.rows() - 1) = dfused.transpose();
    } else {
      Vector<Scalar> dv = dfused;
      if (h.components == Components::kFull) {
        std::vector<Matrix<Scalar>> dstack_e(f.stack_e.size());
        for (auto& m : dstack_e) m = Matrix<Scalar>::Zero(1, h.dim);
        dstack_e.back() = dfused.transpose();
        resnet_backward(f.stack_e, p.resnet_e, dstack_e, grad.resnet_e);
        dv += dstack_e.front().row(0).transpose();
      }
      Matrix<Scalar> dvs = Matrix<Scalar>::Zero(f.vs.rows(), f.vs.cols());
      attend_backward(f.vs, f.vs.rows(), p.attention.order, f.order, dv, grad.attention.order, dvs);

      std::vector<Matrix<Scalar>> dstack(f.stack_r.size());
      for (std::size_t l = 0; l < f.stack_r.size(); ++l) {
        dstack[l] = Matrix<Scalar>::Zero(f.stack_r[l].rows(), f.stack_r[l].cols());
        attend_backward(f.stack_r[l], f.window.active, p.attention.layer, f.layers[l],
                        Vector<Scalar>(dvs.row(static_cast<Eigen::Index>(l)).transpose()),
                        grad.attention.layer, dstack[l]);
      }
      resnet_backward(f.stack_r, p.resnet_r, dstack, grad.resnet_r);
      for (std::size_t i = 0; i < f.window.source.size(); ++i)
        dz.row(f.window.source[i]) += dstack[0].row(static_cast<Eigen::Index>(i));
    }
    de = lstm_backward(f.e, p.lstm, f.lstm_cache, dz, grad.lstm);
  }
  encoder_backward(items, p.encoder, f.enc_cache, de, grad.encoder);
}

template <typename Scalar>
Scalar score(std::span<const int> items, const MdmParams<Scalar>& p) {
  return forward(items, p).phi;
}

// ---------------------------------------------------------------------------
// Feature extraction

enum class FeatureMode : int {
  kSum = 0,        // [blocks ; sum_{r in u} m_r]
  kConcatAll = 1,  // [blocks ; m_1 ; ... ; m_M]
};

/// Model blocks: [v ; g_L] for the full model, otherwise the single fused
/// block of the ablated model. Followed by the relation embedding block(s).
template <typename Scalar>
Vector<Scalar> extract_features(std::span<const int> items, const MdmParams<Scalar>& p,
                                FeatureMode mode = FeatureMode::kSum) {
  const ForwardPass<Scalar> f = forward(items, p);
  const MdmHyper& h = p.hyper;
  std::vector<const Vector<Scalar>*> blocks;
  if (h.components == Components::kFull) {
    blocks = {&f.v, &f.g};
  } else {
    blocks = {&f.fused};
  }
  const Eigen::Index d = h.dim;
  const Eigen::Index tail = mode == FeatureMode::kSum ? d : d * h.relations;
  Vector<Scalar> out(static_cast<Eigen::Index>(blocks.size()) * d + tail);
  Eigen::Index off = 0;
  for (const auto* b : blocks) {
    out.segment(off, d) = *b;
    off += d;
  }
  if (mode == FeatureMode::kSum) {
    out.segment(off, d) = f.relation_sum;
  } else {
    for (int r = 1; r <= h.relations; ++r, off += d) out.segment(off, d) = p.relations.of(r);
  }
  return out;
}

inline Eigen::Index feature_dim(const MdmHyper& h, FeatureMode mode) {
  const Eigen::Index blocks = h.components == Components::kFull ? 2 : 1;
  return blocks * h.dim + (mode == FeatureMode::kSum ? h.dim : h.dim * h.relations);
}

}  // namespace mdm
