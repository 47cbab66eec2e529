#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "feasible/models.hpp"

namespace feasible {

/// Losses sorted ascending, each paired with the id of its sample.
struct LossDistribution {
  std::vector<std::pair<double, int>> entries;

  static LossDistribution from(const LossVector& losses);
};

struct CdfPoint {
  double value = 0.0;
  double fraction = 0.0;  // fraction of samples with loss <= value
};

/// Right-continuous empirical CDF, one point per distinct loss value.
std::vector<CdfPoint> empirical_cdf(const LossVector& losses);

/// 1-based index of the order statistic used as the q-th empirical quantile:
/// max(1, ceil(q n)).
Eigen::Index quantile_rank(double q, Eigen::Index n);

/// Mean of the losses strictly above the q-th empirical quantile; the
/// maximum when nothing lies strictly above it.
double cvar(const LossVector& losses, double q);

struct LossSummary {
  double mean = 0.0;
  double max = 0.0;  // the worst-case (Rawlsian) risk
  std::optional<double> accuracy;
};

LossSummary summary(const LossVector& losses);
LossSummary summary(const LossVector& losses, const Eigen::MatrixXd& logits,
                    const Eigen::VectorXd& targets);

struct MultiplierStats {
  double fraction_zero = 0.0;
  double fraction_positive = 0.0;
  std::vector<int> top_k_ids;       // largest first, ties by smaller id
  std::vector<double> percentiles;  // 0, 10, ..., 100 (nearest rank)
};

MultiplierStats multiplier_stats(const Eigen::VectorXd& lambda, Eigen::Index k,
                                 double zero_tol = 1e-12);

struct Correlation {
  double value = 0.0;
  bool degenerate = false;  // an input was constant; value reported as 0
};

/// Spearman rank correlation (average ranks for ties).
Correlation spearman(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Spearman correlation between the multipliers and the negated margins.
Correlation margin_multiplier_correlation(const Eigen::VectorXd& lambda,
                                          const Eigen::VectorXd& margins);

}  // namespace feasible
