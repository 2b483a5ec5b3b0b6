#pragma once

#include "mdm/numerics.hpp"

#include <cstdint>
#include <vector>

namespace mdm {

/// Confusion counts with spammer as the positive class. Precision, recall and
/// F-measure are derived from the counts; 0/0 is taken as 0.
struct Metrics {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  double precision() const { return tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp); }
  double recall() const { return tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn); }
  double f_measure() const { return f_measure(precision(), recall()); }

  static double f_measure(double precision, double recall) {
    return precision + recall == 0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
  }
};

struct LrConfig {
  double C = 1.0;       // inverse L2 strength
  double tol = 1e-4;    // Euclidean norm of the objective gradient
  int max_iter = 50;
};

/// L2-regularised logistic regression; the bias is not penalised.
struct LrModel {
  VectorXd weights;
  double bias = 0;
  LrConfig config;
  std::vector<double> objective_trace;  // objective after each iteration, starting at w = 0
  int iterations = 0;

  double probability(const Eigen::Ref<const VectorXd>& x) const;
  VectorXd probabilities(const MatrixXd& X) const;
};

/// Newton's method with backtracking on 0.5*|w|^2 + C * sum_i nll_i.
/// Throws if `y` holds a single class or X is not finite.
LrModel lr_fit(const MatrixXd& X, const std::vector<int>& y, const LrConfig& cfg = {});

Metrics evaluate(const LrModel& model, const MatrixXd& X, const std::vector<int>& y,
                 double threshold = 0.5);
Metrics count_predictions(const std::vector<int>& predicted, const std::vector<int>& truth);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified split of row indices by label. Each class sends
/// round(test_fraction * class size) rows to the test side.
Split stratified_split(const std::vector<int>& y, double test_fraction, std::uint64_t seed);

struct SeedResult {
  std::uint64_t seed = 0;
  Metrics metrics;
};

/// The repeated-split protocol: seeds 0..n_seeds-1, fit on train, score test.
std::vector<SeedResult> evaluate_over_seeds(const MatrixXd& X, const std::vector<int>& y,
                                            int n_seeds, double test_fraction,
                                            const LrConfig& cfg = {}, double threshold = 0.5);

/// Stratified k-fold cross-validation at fixed hyperparameters.
std::vector<Metrics> cross_validate(const MatrixXd& X, const std::vector<int>& y, int folds,
                                    std::uint64_t seed, const LrConfig& cfg = {},
                                    double threshold = 0.5);

struct MeanStd {
  double mean = 0;
  double std = 0;  // population standard deviation
};

MeanStd mean_std(const std::vector<double>& values);

MatrixXd select_rows(const MatrixXd& X, const std::vector<std::size_t>& rows);
std::vector<int> select(const std::vector<int>& y, const std::vector<std::size_t>& rows);

}  // namespace mdm
