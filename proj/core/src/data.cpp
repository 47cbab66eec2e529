#include "feasible/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "feasible/error.hpp"
#include "feasible/rng.hpp"
#include "text_util.hpp"

namespace feasible {

namespace {

std::vector<int> iota_ids(Eigen::Index n) {
  std::vector<int> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

}  // namespace

void Dataset::validate() const {
  const auto n = size();
  if (targets.size() != n) throw ParameterError("dataset: targets length differs from rows");
  if (static_cast<Eigen::Index>(ids.size()) != n)
    throw ParameterError("dataset: ids length differs from rows");
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (int id : ids) {
    if (id < 0 || id >= n || seen[static_cast<std::size_t>(id)])
      throw ParameterError("dataset: ids are not a permutation of 0..n-1");
    seen[static_cast<std::size_t>(id)] = 1;
  }
  if (!features.allFinite()) throw ParameterError("dataset: non-finite feature value");
  if (!targets.allFinite()) throw ParameterError("dataset: non-finite target value");
  if (task == Task::classification) {
    if (num_classes < 2) throw ParameterError("dataset: classification needs >= 2 classes");
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = targets(i);
      if (t != std::floor(t) || t < 0 || t >= num_classes)
        throw ParameterError("dataset: class label out of range at row " + std::to_string(i));
    }
  }
}

Dataset Dataset::subset(std::span<const int> rows) const {
  Dataset out;
  const auto m = static_cast<Eigen::Index>(rows.size());
  out.features.resize(m, dims());
  out.targets.resize(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const int src = rows[static_cast<std::size_t>(r)];
    if (src < 0 || src >= size()) throw ParameterError("dataset subset: row out of range");
    out.features.row(r) = features.row(src);
    out.targets(r) = targets(src);
  }
  out.ids = iota_ids(m);
  out.task = task;
  out.num_classes = num_classes;
  return out;
}

Batch make_batch(const Dataset& dataset, std::span<const int> ids) {
  // ids[i] == i for every dataset built by this library; fall back to a
  // lookup table otherwise.
  std::vector<int> row_of;
  bool identity = true;
  for (std::size_t i = 0; i < dataset.ids.size(); ++i) {
    if (dataset.ids[i] != static_cast<int>(i)) {
      identity = false;
      break;
    }
  }
  if (!identity) {
    row_of.assign(dataset.ids.size(), -1);
    for (std::size_t i = 0; i < dataset.ids.size(); ++i)
      row_of[static_cast<std::size_t>(dataset.ids[i])] = static_cast<int>(i);
  }
  Batch batch;
  batch.ids.assign(ids.begin(), ids.end());
  const auto m = static_cast<Eigen::Index>(ids.size());
  batch.features.resize(m, dataset.dims());
  batch.targets.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const int id = ids[static_cast<std::size_t>(k)];
    if (id < 0 || id >= dataset.size()) throw ParameterError("batch: id out of range");
    const int row = identity ? id : row_of[static_cast<std::size_t>(id)];
    batch.features.row(k) = dataset.features.row(row);
    batch.targets(k) = dataset.targets(row);
  }
  return batch;
}

Batch full_batch(const Dataset& dataset) {
  const auto ids = iota_ids(dataset.size());
  return make_batch(dataset, ids);
}

Dataset gen_two_moons(int n, double noise, std::uint64_t seed) {
  if (n < 2 || n % 2 != 0) throw ParameterError("gen_two_moons: n must be even and >= 2");
  if (!(noise >= 0.0)) throw ParameterError("gen_two_moons: noise must be >= 0");
  const int half = n / 2;
  Dataset data;
  data.task = Task::classification;
  data.num_classes = 2;
  data.features.resize(n, 2);
  data.targets.resize(n);
  for (int k = 0; k < half; ++k) {
    const double t = half == 1 ? 0.0 : std::numbers::pi * k / (half - 1);
    data.features.row(k) << std::cos(t), std::sin(t);
    data.targets(k) = 0.0;
    data.features.row(half + k) << 1.0 - std::cos(t), 0.5 - std::sin(t);
    data.targets(half + k) = 1.0;
  }
  if (noise > 0.0) {
    CounterRng rng(seed, streams::kData);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 2; ++j) data.features(i, j) += noise * rng.normal();
  }
  data.ids = iota_ids(n);
  return data;
}

double cosine_wave(double x) { return std::cos(2.0 * std::numbers::pi * x); }

Dataset gen_noisy_cosine(int n, double sigma, std::uint64_t seed) {
  if (n < 1) throw ParameterError("gen_noisy_cosine: n must be >= 1");
  if (!(sigma >= 0.0)) throw ParameterError("gen_noisy_cosine: sigma must be >= 0");
  CounterRng rng(seed, streams::kData);
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (auto& x : xs) x = rng.uniform();
  std::sort(xs.begin(), xs.end());
  Dataset data;
  data.task = Task::regression;
  data.features.resize(n, 1);
  data.targets.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = xs[static_cast<std::size_t>(i)];
    data.features(i, 0) = x;
    data.targets(i) = cosine_wave(x) + sigma * rng.normal();
  }
  data.ids = iota_ids(n);
  return data;
}

Dataset gen_conflicting_pairs(int n_pairs, int d, double label_gap, std::uint64_t seed) {
  if (n_pairs < 1) throw ParameterError("gen_conflicting_pairs: n_pairs must be >= 1");
  if (d < 1) throw ParameterError("gen_conflicting_pairs: d must be >= 1");
  if (!(label_gap > 0.0)) throw ParameterError("gen_conflicting_pairs: label_gap must be > 0");
  CounterRng rng(seed, streams::kData);
  Dataset data;
  data.task = Task::regression;
  data.features.resize(2 * n_pairs, d);
  data.targets.resize(2 * n_pairs);
  for (int k = 0; k < n_pairs; ++k) {
    for (int j = 0; j < d; ++j) {
      const double v = rng.normal();
      data.features(2 * k, j) = v;
      data.features(2 * k + 1, j) = v;
    }
    const double base = rng.normal();
    data.targets(2 * k) = base;
    data.targets(2 * k + 1) = base + label_gap;
  }
  data.ids = iota_ids(2 * n_pairs);
  return data;
}

Dataset gen_outlier_regression(int n, int d, double outlier_shift, double noise,
                               std::uint64_t seed) {
  if (n < 1 || d < 1) throw ParameterError("gen_outlier_regression: n and d must be >= 1");
  if (!(noise >= 0.0)) throw ParameterError("gen_outlier_regression: noise must be >= 0");
  constexpr double kNormalQuantile95 = 1.6448536269514722;
  CounterRng rng(seed, streams::kData);
  Dataset data;
  data.task = Task::regression;
  data.features.resize(n, d);
  data.targets.resize(n);
  for (int i = 0; i < n; ++i) {
    double y = 0.0;
    for (int j = 0; j < d; ++j) {
      const double v = rng.normal();
      data.features(i, j) = v;
      y += v * (j + 1) / static_cast<double>(d);
    }
    y += noise * rng.normal();
    if (data.features(i, 0) > kNormalQuantile95) y += outlier_shift;
    data.targets(i) = y;
  }
  data.ids = iota_ids(n);
  return data;
}

Eigen::MatrixXd poly_features(const Eigen::VectorXd& x, int degree, Basis basis, Domain domain) {
  if (degree < 0) throw ParameterError("poly_features: degree must be >= 0");
  const auto n = x.size();
  Eigen::MatrixXd out(n, degree + 1);
  if (basis == Basis::monomial) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double power = 1.0;
      for (int j = 0; j <= degree; ++j) {
        out(i, j) = power;
        power *= x(i);
      }
    }
    return out;
  }
  if (!(domain.hi > domain.lo)) throw ParameterError("poly_features: empty domain");
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = 2.0 * (x(i) - domain.lo) / (domain.hi - domain.lo) - 1.0;
    out(i, 0) = 1.0;
    if (degree >= 1) out(i, 1) = t;
    for (int j = 2; j <= degree; ++j) out(i, j) = 2.0 * t * out(i, j - 1) - out(i, j - 2);
  }
  return out;
}

double condition_number(const Eigen::MatrixXd& matrix) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 0.0;
  const double smallest = s(s.size() - 1);
  return smallest > 0.0 ? s(0) / smallest : std::numeric_limits<double>::infinity();
}

std::uint64_t epoch_seed(std::uint64_t run_seed, std::uint64_t epoch) {
  return derive_key(run_seed, streams::kEpochBase + epoch);
}

std::vector<std::vector<int>> shuffled_partition(Eigen::Index n, Eigen::Index batch_size,
                                                 std::uint64_t epoch_key) {
  if (batch_size < 1) throw ParameterError("batch_iter: batch_size must be >= 1");
  if (batch_size > n) throw ParameterError("batch_iter: batch_size exceeds dataset size");
  auto order = iota_ids(n);
  CounterRng rng(epoch_key);
  rng.shuffle(std::span<int>(order));
  std::vector<std::vector<int>> batches;
  for (Eigen::Index start = 0; start < n; start += batch_size) {
    const auto stop = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + start, order.begin() + stop);
  }
  return batches;
}

std::vector<Batch> batch_iter(const Dataset& dataset, Eigen::Index batch_size,
                              std::uint64_t epoch_key) {
  std::vector<Batch> out;
  for (const auto& ids : shuffled_partition(dataset.size(), batch_size, epoch_key))
    out.push_back(make_batch(dataset, ids));
  return out;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& dataset, double test_fraction,
                                             std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0))
    throw ParameterError("train_test_split: test_fraction must be in [0, 1)");
  const auto n = dataset.size();
  auto order = iota_ids(n);
  CounterRng rng(seed, streams::kSplit);
  rng.shuffle(std::span<int>(order));
  const auto n_train = static_cast<Eigen::Index>(std::llround(n * (1.0 - test_fraction)));
  std::vector<int> train_rows(order.begin(), order.begin() + n_train);
  std::vector<int> test_rows(order.begin() + n_train, order.end());
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return {dataset.subset(train_rows), dataset.subset(test_rows)};
}

void write_dataset_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "id";
  for (Eigen::Index j = 0; j < dataset.dims(); ++j) out << ",feat_" << j;
  out << ",target\n";
  for (Eigen::Index i = 0; i < dataset.size(); ++i) {
    out << dataset.ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < dataset.dims(); ++j)
      out << ',' << detail::format_double(dataset.features(i, j));
    out << ',' << detail::format_double(dataset.targets(i)) << '\n';
  }
}

Dataset read_dataset_csv(const std::filesystem::path& path, Task task) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open dataset " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParameterError(path.string() + ": empty file");
  const auto header = detail::split(detail::trim(line), ',');
  if (header.size() < 2 || detail::trim(header.front()) != "id" ||
      detail::trim(header.back()) != "target")
    throw ParameterError(path.string() + ": header must be id,feat_0..feat_{d-1},target");
  const auto d = static_cast<Eigen::Index>(header.size() - 2);
  for (Eigen::Index j = 0; j < d; ++j) {
    if (detail::trim(header[static_cast<std::size_t>(j + 1)]) != "feat_" + std::to_string(j))
      throw ParameterError(path.string() + ": unexpected column " +
                           std::string(header[static_cast<std::size_t>(j + 1)]));
  }
  std::vector<int> ids;
  std::vector<double> values;
  std::vector<double> targets;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split(detail::trim(line), ',');
    if (cells.size() != header.size())
      throw ParameterError(path.string() + ":" + std::to_string(line_no) + ": wrong column count");
    const auto id = detail::parse_int(cells.front());
    if (!id) throw ParameterError(path.string() + ":" + std::to_string(line_no) + ": bad id");
    ids.push_back(static_cast<int>(*id));
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const auto v = detail::parse_double(cells[c]);
      if (!v) throw ParameterError(path.string() + ":" + std::to_string(line_no) + ": bad number");
      (c + 1 == cells.size() ? targets : values).push_back(*v);
    }
  }
  // Rows are stored by id so the loaded dataset keeps the ids[i] == i layout.
  const auto n = static_cast<Eigen::Index>(ids.size());
  Dataset data;
  data.task = task;
  data.features.resize(n, d);
  data.targets.resize(n);
  data.ids = iota_ids(n);
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (Eigen::Index r = 0; r < n; ++r) {
    const int id = ids[static_cast<std::size_t>(r)];
    if (id < 0 || id >= n || seen[static_cast<std::size_t>(id)])
      throw ParameterError(path.string() + ": ids are not a permutation of 0..n-1");
    seen[static_cast<std::size_t>(id)] = 1;
    for (Eigen::Index j = 0; j < d; ++j)
      data.features(id, j) = values[static_cast<std::size_t>(r * d + j)];
    data.targets(id) = targets[static_cast<std::size_t>(r)];
  }
  if (task == Task::classification)
    data.num_classes = n == 0 ? 0 : static_cast<int>(data.targets.maxCoeff()) + 1;
  data.validate();
  return data;
}

std::string dataset_signature(const Dataset& dataset) {
  std::uint64_t h = detail::fnv1a(dataset.features.data(),
                                  sizeof(double) * static_cast<std::size_t>(dataset.features.size()));
  h = detail::fnv1a(dataset.targets.data(),
                    sizeof(double) * static_cast<std::size_t>(dataset.targets.size()), h);
  const std::int64_t shape[2] = {dataset.size(), dataset.dims()};
  h = detail::fnv1a(shape, sizeof(shape), h);
  return detail::hex64(h);
}

std::string to_string(Task task) {
  return task == Task::regression ? "regression" : "classification";
}

std::string to_string(Basis basis) { return basis == Basis::monomial ? "monomial" : "chebyshev"; }

}  // namespace feasible
