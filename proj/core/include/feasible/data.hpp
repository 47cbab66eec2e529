#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace feasible {

enum class Task { regression, classification };

/// Rows of `features` are samples. Sample `i` has id `ids[i]`; the ids are a
/// permutation of 0..n-1 and index the per-sample constraints and
/// multipliers. For classification, `targets` holds class indices
/// 0..num_classes-1 stored as doubles.
struct Dataset {
  Eigen::MatrixXd features;
  Eigen::VectorXd targets;
  std::vector<int> ids;
  Task task = Task::regression;
  int num_classes = 0;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dims() const { return features.cols(); }
  int label(Eigen::Index row) const { return static_cast<int>(targets(row)); }

  /// Throws ParameterError when an invariant is broken.
  void validate() const;

  /// Rows `rows` (positions, not ids) as a new dataset with ids renumbered
  /// 0..rows.size()-1.
  Dataset subset(std::span<const int> rows) const;
};

/// A mini-batch: sample ids plus the matching rows copied out of the dataset.
struct Batch {
  std::vector<int> ids;
  Eigen::MatrixXd features;
  Eigen::VectorXd targets;

  Eigen::Index size() const { return static_cast<Eigen::Index>(ids.size()); }
};

Batch make_batch(const Dataset& dataset, std::span<const int> ids);
Batch full_batch(const Dataset& dataset);

/// Two interleaved unit half-circles (upper one centred at the origin, lower
/// one centred at (1, 0.5)) with isotropic Gaussian noise. n/2 per class,
/// class 0 first.
Dataset gen_two_moons(int n, double noise, std::uint64_t seed);

/// x ~ U[0, 1] (sorted), y = cos(2 pi x) + N(0, sigma^2).
Dataset gen_noisy_cosine(int n, double sigma, std::uint64_t seed);

/// Each of n_pairs random feature rows appears twice, with targets y and
/// y + label_gap (ids 2k and 2k+1).
Dataset gen_conflicting_pairs(int n_pairs, int d, double label_gap, std::uint64_t seed);

/// Linear regression y = x.w + N(0, noise^2) with w_j = (j+1)/d, where the
/// samples whose first feature exceeds the standard normal 95% quantile
/// (about 5% of them) get their label shifted by `outlier_shift`.
Dataset gen_outlier_regression(int n, int d, double outlier_shift, double noise,
                               std::uint64_t seed);

/// Noiseless cosine used by gen_noisy_cosine.
double cosine_wave(double x);

enum class Basis { monomial, chebyshev };

/// Input interval mapped onto [-1, 1] for the Chebyshev basis. The monomial
/// basis ignores it.
struct Domain {
  double lo = -1.0;
  double hi = 1.0;

  bool operator==(const Domain&) const = default;
};

/// n x (degree+1) design matrix; column j is the j-th basis polynomial.
Eigen::MatrixXd poly_features(const Eigen::VectorXd& x, int degree, Basis basis,
                              Domain domain = {});

/// 2-norm condition number (ratio of extreme singular values).
double condition_number(const Eigen::MatrixXd& matrix);

/// Key for the shuffle of `epoch` within run `run_seed`.
std::uint64_t epoch_seed(std::uint64_t run_seed, std::uint64_t epoch);

/// Shuffled partition of 0..n-1 into chunks of batch_size (last may be
/// smaller), deterministic in epoch_seed.
std::vector<std::vector<int>> shuffled_partition(Eigen::Index n, Eigen::Index batch_size,
                                                 std::uint64_t epoch_seed);

std::vector<Batch> batch_iter(const Dataset& dataset, Eigen::Index batch_size,
                              std::uint64_t epoch_seed);

/// Deterministic shuffled split; the first part has round(n * (1 - test_fraction))
/// samples.
std::pair<Dataset, Dataset> train_test_split(const Dataset& dataset, double test_fraction,
                                             std::uint64_t seed);

/// CSV with header `id,feat_0,...,feat_{d-1},target`.
void write_dataset_csv(const Dataset& dataset, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path, Task task);

/// FNV-1a over the raw bytes of features and targets, as 16 hex digits.
std::string dataset_signature(const Dataset& dataset);

std::string to_string(Task task);
std::string to_string(Basis basis);

}  // namespace feasible
