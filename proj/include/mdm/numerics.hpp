#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace mdm {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

// Elementwise activations. These work on any Eigen expression.

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar a) {
    if (a >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-a));
    const Scalar e = std::exp(a);
    return e / (Scalar(1) + e);
  });
}

template <typename Derived>
auto tanh_act(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar a) { return std::tanh(a); });
}

template <typename Derived>
auto relu(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar a) { return a > Scalar(0) ? a : Scalar(0); });
}

template <typename Scalar>
Scalar logistic(Scalar a) {
  if (a >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-a));
  const Scalar e = std::exp(a);
  return e / (Scalar(1) + e);
}

// log(1 + exp(a)) without overflow.
template <typename Scalar>
Scalar softplus(Scalar a) {
  if (a > Scalar(0)) return a + std::log1p(std::exp(-a));
  return std::log1p(std::exp(a));
}

/// Max-shifted softmax. Throws on empty input.
template <typename Derived>
Vector<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  if (x.size() == 0) throw std::invalid_argument("softmax: empty input");
  const Scalar shift = x.maxCoeff();
  Vector<Scalar> out = (x.array() - shift).exp().matrix();
  out /= out.sum();
  return out;
}

template <typename Scalar>
bool all_finite(const Matrix<Scalar>& m) {
  return m.allFinite();
}

// ---------------------------------------------------------------------------
// Adam

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename Scalar>
struct AdamState {
  std::int64_t step = 0;
  Matrix<Scalar> m;
  Matrix<Scalar> v;

  AdamState() = default;
  AdamState(Eigen::Index rows, Eigen::Index cols)
      : m(Matrix<Scalar>::Zero(rows, cols)), v(Matrix<Scalar>::Zero(rows, cols)) {}
};

/// In-place bias-corrected Adam update.
template <typename Scalar>
void adam_update(Matrix<Scalar>& param, const Matrix<Scalar>& grad, AdamState<Scalar>& state,
                 const AdamConfig& cfg) {
  if (param.rows() != grad.rows() || param.cols() != grad.cols())
    throw std::invalid_argument("adam_step: parameter/gradient shape mismatch");
  if (state.m.size() == 0) state = AdamState<Scalar>(param.rows(), param.cols());
  if (state.m.rows() != param.rows() || state.m.cols() != param.cols())
    throw std::invalid_argument("adam_step: optimizer state shape mismatch");

  ++state.step;
  const Scalar b1 = Scalar(cfg.beta1), b2 = Scalar(cfg.beta2);
  state.m = b1 * state.m + (Scalar(1) - b1) * grad;
  state.v = b2 * state.v + (Scalar(1) - b2) * grad.cwiseProduct(grad);
  const Scalar c1 = Scalar(1) - std::pow(b1, Scalar(state.step));
  const Scalar c2 = Scalar(1) - std::pow(b2, Scalar(state.step));
  param.array() -= Scalar(cfg.lr) * (state.m.array() / c1) /
                   ((state.v.array() / c2).sqrt() + Scalar(cfg.eps));
}

template <typename Scalar>
struct AdamResult {
  Matrix<Scalar> param;
  AdamState<Scalar> state;
};

/// Value-returning form of adam_update.
template <typename Scalar>
AdamResult<Scalar> adam_step(Matrix<Scalar> param, const Matrix<Scalar>& grad,
                             AdamState<Scalar> state, const AdamConfig& cfg = {}) {
  adam_update(param, grad, state, cfg);
  return {std::move(param), std::move(state)};
}

// ---------------------------------------------------------------------------
// Finite-difference gradient check

struct FdOptions {
  double h = 1e-5;
  // 0 checks every coordinate; otherwise a seeded sample of this many.
  std::size_t max_coords = 0;
  std::uint64_t seed = 0;
};

/// Central-difference gradient check. Returns the max over checked coordinates
/// of |analytic - numeric| / max(1, |analytic| + |numeric|).
template <typename Scalar>
Scalar finite_diff_check(const std::function<Scalar(const Vector<Scalar>&)>& loss,
                         const Vector<Scalar>& params, const Vector<Scalar>& analytic,
                         const FdOptions& opts = {}) {
  if (params.size() != analytic.size())
    throw std::invalid_argument("finite_diff_check: gradient size mismatch");
  if (!(opts.h > 0)) throw std::invalid_argument("finite_diff_check: step must be positive");

  std::vector<Eigen::Index> coords(static_cast<std::size_t>(params.size()));
  for (Eigen::Index i = 0; i < params.size(); ++i) coords[static_cast<std::size_t>(i)] = i;
  if (opts.max_coords > 0 && opts.max_coords < coords.size()) {
    std::mt19937_64 rng(opts.seed);
    for (std::size_t i = 0; i < opts.max_coords; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng() % (coords.size() - i));
      std::swap(coords[i], coords[j]);
    }
    coords.resize(opts.max_coords);
  }

  Vector<Scalar> x = params;
  const Scalar h = Scalar(opts.h);
  Scalar worst = 0;
  for (Eigen::Index i : coords) {
    const Scalar orig = x(i);
    x(i) = orig + h;
    const Scalar up = loss(x);
    x(i) = orig - h;
    const Scalar down = loss(x);
    x(i) = orig;
    if (!std::isfinite(up) || !std::isfinite(down))
      throw std::runtime_error("finite_diff_check: non-finite loss");
    const Scalar numeric = (up - down) / (Scalar(2) * h);
    const Scalar a = analytic(i);
    const Scalar err =
        std::abs(a - numeric) / std::max(Scalar(1), std::abs(a) + std::abs(numeric));
    worst = std::max(worst, err);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Seeded sampling helpers. std::uniform_*_distribution output is
// implementation-defined, so these are used wherever bit-identical output
// across toolchains matters.

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  // Rejection keeps the draw unbiased.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return static_cast<std::size_t>(r % bound);
}

template <typename T>
void shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[uniform_index(rng, i)]);
}

template <typename Scalar>
void fill_uniform(Matrix<Scalar>& m, Scalar scale, std::mt19937_64& rng) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      m(i, j) = Scalar((2.0 * uniform01(rng) - 1.0)) * scale;
}

}  // namespace mdm
