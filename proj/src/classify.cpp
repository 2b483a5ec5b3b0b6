#include "mdm/classify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace mdm {

namespace {

void check_binary(const std::vector<int>& y) {
  bool pos = false, neg = false;
  for (int v : y) {
    if (v != 0 && v != 1) throw std::invalid_argument("labels must be 0 or 1");
    (v == 1 ? pos : neg) = true;
  }
  if (!pos || !neg) throw std::invalid_argument("logistic regression needs both classes");
}

struct Fit {
  const MatrixXd& X;
  VectorXd y;
  double C;

  // theta = [w ; b]
  VectorXd margins(const VectorXd& theta) const {
    const Eigen::Index p = X.cols();
    return (X * theta.head(p)).array() + theta(p);
  }

  double objective(const VectorXd& theta) const {
    const Eigen::Index p = X.cols();
    const VectorXd z = margins(theta);
    double nll = 0;
    for (Eigen::Index i = 0; i < z.size(); ++i) nll += softplus(z(i)) - y(i) * z(i);
    return 0.5 * theta.head(p).squaredNorm() + C * nll;
  }
};

}  // namespace

double LrModel::probability(const Eigen::Ref<const VectorXd>& x) const {
  return logistic(weights.dot(x) + bias);
}

VectorXd LrModel::probabilities(const MatrixXd& X) const {
  VectorXd z = (X * weights).array() + bias;
  return z.unaryExpr([](double a) { return logistic(a); });
}

LrModel lr_fit(const MatrixXd& X, const std::vector<int>& y, const LrConfig& cfg) {
  if (static_cast<std::size_t>(X.rows()) != y.size())
    throw std::invalid_argument("lr_fit: feature/label row mismatch");
  check_binary(y);
  if (!X.allFinite()) throw std::invalid_argument("lr_fit: non-finite features");
  if (!(cfg.C > 0)) throw std::invalid_argument("lr_fit: C must be positive");

  const Eigen::Index n = X.rows(), p = X.cols();
  Fit fit{X, VectorXd(n), cfg.C};
  for (Eigen::Index i = 0; i < n; ++i) fit.y(i) = y[static_cast<std::size_t>(i)];

  LrModel model;
  model.config = cfg;
  VectorXd theta = VectorXd::Zero(p + 1);
  double current = fit.objective(theta);
  model.objective_trace.push_back(current);

  for (int it = 0; it < cfg.max_iter; ++it) {
    const VectorXd z = fit.margins(theta);
    const VectorXd prob = z.unaryExpr([](double a) { return logistic(a); });
    const VectorXd resid = prob - fit.y;
    VectorXd grad(p + 1);
    grad.head(p) = theta.head(p) + cfg.C * (X.transpose() * resid);
    grad(p) = cfg.C * resid.sum();
    if (grad.norm() <= cfg.tol) break;

    const VectorXd s = prob.array() * (1.0 - prob.array());
    MatrixXd H = MatrixXd::Zero(p + 1, p + 1);
    H.topLeftCorner(p, p) = cfg.C * (X.transpose() * s.asDiagonal() * X);
    H.topLeftCorner(p, p).diagonal().array() += 1.0;
    const VectorXd xs = cfg.C * (X.transpose() * s);
    H.block(0, p, p, 1) = xs;
    H.block(p, 0, 1, p) = xs.transpose();
    H(p, p) = cfg.C * s.sum() + 1e-12;
    const VectorXd step = -H.ldlt().solve(grad);

    double t = 1.0;
    double candidate = fit.objective(theta + step);
    const double slope = grad.dot(step);
    int halvings = 0;
    while (!(candidate <= current + 1e-4 * t * slope) && halvings < 60) {
      t *= 0.5;
      candidate = fit.objective(theta + t * step);
      ++halvings;
    }
    if (!(candidate <= current)) break;  // no progress possible
    theta += t * step;
    current = candidate;
    model.objective_trace.push_back(current);
    model.iterations = it + 1;
  }
  model.weights = theta.head(p);
  model.bias = theta(p);
  return model;
}

Metrics count_predictions(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("prediction/label size mismatch");
  Metrics m;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = predicted[i] == 1, t = truth[i] == 1;
    if (p && t) ++m.tp;
    else if (p) ++m.fp;
    else if (t) ++m.fn;
    else ++m.tn;
  }
  return m;
}

Metrics evaluate(const LrModel& model, const MatrixXd& X, const std::vector<int>& y, double threshold) {
  const VectorXd prob = model.probabilities(X);
  std::vector<int> predicted(static_cast<std::size_t>(prob.size()));
  for (Eigen::Index i = 0; i < prob.size(); ++i)
    predicted[static_cast<std::size_t>(i)] = prob(i) >= threshold ? 1 : 0;
  return count_predictions(predicted, y);
}

Split stratified_split(const std::vector<int>& y, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::invalid_argument("split: test_fraction must lie in (0, 1)");
  std::mt19937_64 rng(seed);
  Split split;
  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == cls) members.push_back(i);
    if (members.size() < 2)
      throw std::invalid_argument("split: class " + std::to_string(cls) + " has fewer than 2 members");
    shuffle(members, rng);
    auto n_test = static_cast<std::size_t>(std::llround(test_fraction * double(members.size())));
    n_test = std::clamp<std::size_t>(n_test, 1, members.size() - 1);
    split.test.insert(split.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train.insert(split.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

MatrixXd select_rows(const MatrixXd& X, const std::vector<std::size_t>& rows) {
  MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

std::vector<int> select(const std::vector<int>& y, const std::vector<std::size_t>& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(y[r]);
  return out;
}

std::vector<SeedResult> evaluate_over_seeds(const MatrixXd& X, const std::vector<int>& y, int n_seeds,
                                            double test_fraction, const LrConfig& cfg, double threshold) {
  std::vector<SeedResult> results;
  for (int s = 0; s < n_seeds; ++s) {
    const auto seed = static_cast<std::uint64_t>(s);
    const Split split = stratified_split(y, test_fraction, seed);
    const LrModel model = lr_fit(select_rows(X, split.train), select(y, split.train), cfg);
    results.push_back({seed, evaluate(model, select_rows(X, split.test), select(y, split.test), threshold)});
  }
  return results;
}

std::vector<Metrics> cross_validate(const MatrixXd& X, const std::vector<int>& y, int folds,
                                    std::uint64_t seed, const LrConfig& cfg, double threshold) {
  if (folds < 2) throw std::invalid_argument("cross_validate: need at least 2 folds");
  std::mt19937_64 rng(seed);
  std::vector<int> fold_of(y.size(), 0);
  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == cls) members.push_back(i);
    if (members.size() < static_cast<std::size_t>(folds))
      throw std::invalid_argument("cross_validate: class smaller than fold count");
    shuffle(members, rng);
    for (std::size_t j = 0; j < members.size(); ++j) fold_of[members[j]] = static_cast<int>(j % std::size_t(folds));
  }
  std::vector<Metrics> out;
  for (int f = 0; f < folds; ++f) {
    Split split;
    for (std::size_t i = 0; i < y.size(); ++i) (fold_of[i] == f ? split.test : split.train).push_back(i);
    const LrModel model = lr_fit(select_rows(X, split.train), select(y, split.train), cfg);
    out.push_back(evaluate(model, select_rows(X, split.test), select(y, split.test), threshold));
  }
  return out;
}

MeanStd mean_std(const std::vector<double>& values) {
  if (values.empty()) return {};
  double mean = 0;
  for (double v : values) mean += v;
  mean /= double(values.size());
  double var = 0;
  for (double v : values) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / double(values.size()))};
}

}  // namespace mdm
