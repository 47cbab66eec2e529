#include "feasible/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "feasible/error.hpp"

namespace feasible {

namespace {

std::vector<double> sorted_copy(const LossVector& losses) {
  std::vector<double> values(losses.data(), losses.data() + losses.size());
  std::sort(values.begin(), values.end());
  return values;
}

Eigen::VectorXd average_ranks(const Eigen::VectorXd& values) {
  const auto n = values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values(a) < values(b); });
  Eigen::VectorXd ranks(n);
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && values(order[static_cast<std::size_t>(j + 1)]) ==
                            values(order[static_cast<std::size_t>(i)]))
      ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index k = i; k <= j; ++k) ranks(order[static_cast<std::size_t>(k)]) = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

LossDistribution LossDistribution::from(const LossVector& losses) {
  LossDistribution dist;
  dist.entries.reserve(static_cast<std::size_t>(losses.size()));
  for (Eigen::Index i = 0; i < losses.size(); ++i)
    dist.entries.emplace_back(losses(i), static_cast<int>(i));
  std::sort(dist.entries.begin(), dist.entries.end());
  return dist;
}

std::vector<CdfPoint> empirical_cdf(const LossVector& losses) {
  if (losses.size() == 0) throw ParameterError("empirical_cdf: empty loss vector");
  const auto values = sorted_copy(losses);
  const auto n = static_cast<double>(values.size());
  std::vector<CdfPoint> points;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
    points.push_back({values[i], static_cast<double>(i + 1) / n});
  }
  return points;
}

Eigen::Index quantile_rank(double q, Eigen::Index n) {
  // Guard against q*n landing a hair above an integer through rounding.
  const double scaled = q * static_cast<double>(n);
  const auto rank = static_cast<Eigen::Index>(std::ceil(scaled - 1e-9 * std::max(1.0, scaled)));
  return std::clamp<Eigen::Index>(rank, 1, n);
}

double cvar(const LossVector& losses, double q) {
  if (losses.size() == 0) throw ParameterError("cvar: empty loss vector");
  if (!(q >= 0.0 && q < 1.0)) throw ParameterError("cvar: q must be in [0, 1)");
  const auto values = sorted_copy(losses);
  const double quantile = values[static_cast<std::size_t>(quantile_rank(q, losses.size()) - 1)];
  const auto first_above = std::upper_bound(values.begin(), values.end(), quantile);
  if (first_above == values.end()) return values.back();
  const double total = std::accumulate(first_above, values.end(), 0.0);
  return total / static_cast<double>(values.end() - first_above);
}

LossSummary summary(const LossVector& losses) {
  LossSummary out;
  if (losses.size() == 0) return out;
  out.mean = losses.mean();
  out.max = losses.maxCoeff();
  return out;
}

LossSummary summary(const LossVector& losses, const Eigen::MatrixXd& logits,
                    const Eigen::VectorXd& targets) {
  auto out = summary(losses);
  out.accuracy = accuracy(logits, targets);
  return out;
}

MultiplierStats multiplier_stats(const Eigen::VectorXd& lambda, Eigen::Index k, double zero_tol) {
  const auto n = lambda.size();
  if (k < 0 || k > n) throw ParameterError("multiplier_stats: k must be in [0, n]");
  MultiplierStats stats;
  if (n == 0) return stats;
  const auto zeros = (lambda.array() <= zero_tol).count();
  stats.fraction_zero = static_cast<double>(zeros) / static_cast<double>(n);
  stats.fraction_positive = 1.0 - stats.fraction_zero;

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return lambda(a) > lambda(b); });
  stats.top_k_ids.assign(order.begin(), order.begin() + k);

  std::vector<double> values(lambda.data(), lambda.data() + n);
  std::sort(values.begin(), values.end());
  for (int p = 0; p <= 100; p += 10) {
    const auto rank = p == 0 ? 1 : quantile_rank(p / 100.0, n);
    stats.percentiles.push_back(values[static_cast<std::size_t>(rank - 1)]);
  }
  return stats;
}

Correlation spearman(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw ShapeError("spearman: length mismatch");
  if (a.size() < 2) return {0.0, true};
  const Eigen::VectorXd ra = average_ranks(a);
  const Eigen::VectorXd rb = average_ranks(b);
  const Eigen::VectorXd ca = ra.array() - ra.mean();
  const Eigen::VectorXd cb = rb.array() - rb.mean();
  const double denom = std::sqrt(ca.squaredNorm() * cb.squaredNorm());
  if (denom == 0.0) return {0.0, true};
  return {std::clamp(ca.dot(cb) / denom, -1.0, 1.0), false};
}

Correlation margin_multiplier_correlation(const Eigen::VectorXd& lambda,
                                          const Eigen::VectorXd& margins) {
  if (lambda.size() != margins.size())
    throw ShapeError("margin_multiplier_correlation: length mismatch");
  return spearman(lambda, -margins);
}

}  // namespace feasible
