#include "feasible/models.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include "feasible/error.hpp"
#include "feasible/rng.hpp"
#include "text_util.hpp"

namespace feasible {

namespace {

std::atomic<long> g_forward_passes{0};
std::atomic<long> g_backward_passes{0};

using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;
using MatrixMap = Eigen::Map<Eigen::MatrixXd>;

void check_width(const ModelParams& model, const Eigen::MatrixXd& features) {
  if (model.theta.size() != model.shape.parameter_count())
    throw ShapeError("model: parameter vector has " + std::to_string(model.theta.size()) +
                     " entries, shape expects " +
                     std::to_string(model.shape.parameter_count()));
  if (features.cols() != model.shape.input_dim())
    throw ShapeError("model: feature width " + std::to_string(features.cols()) +
                     " does not match input dim " + std::to_string(model.shape.input_dim()));
}

Eigen::MatrixXd polynomial_design(const ModelShape& shape, const Eigen::MatrixXd& features) {
  return poly_features(features.col(0), shape.degree, shape.basis, shape.domain);
}

void check_targets(LossKind kind, const Eigen::MatrixXd& predictions,
                   const Eigen::VectorXd& targets) {
  if (predictions.rows() != targets.size())
    throw ShapeError("loss: predictions and targets have different lengths");
  if (kind == LossKind::squared_error && predictions.cols() != 1)
    throw ShapeError("loss: squared error expects a single output column");
  if (kind == LossKind::cross_entropy && predictions.cols() < 2)
    throw ShapeError("loss: cross entropy expects >= 2 logits");
}

void check_finite_row(const Eigen::MatrixXd& predictions, Eigen::Index row) {
  if (!predictions.row(row).allFinite())
    throw NumericError("non-finite prediction for sample " + std::to_string(row), row);
}

}  // namespace

Eigen::Index ModelShape::parameter_count() const {
  if (architecture == Architecture::polynomial) return degree + 1;
  Eigen::Index count = 0;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l)
    count += static_cast<Eigen::Index>(layers[l + 1]) * (layers[l] + 1);
  return count;
}

int ModelShape::input_dim() const {
  if (architecture == Architecture::polynomial) return 1;
  return layers.empty() ? 0 : layers.front();
}

int ModelShape::output_dim() const {
  if (architecture == Architecture::polynomial) return 1;
  return layers.empty() ? 0 : layers.back();
}

std::string ModelShape::describe() const {
  std::ostringstream out;
  if (architecture == Architecture::polynomial) {
    out << "polynomial " << degree << ' ' << to_string(basis) << ' '
        << detail::format_double(domain.lo) << ' ' << detail::format_double(domain.hi);
  } else {
    out << "mlp";
    for (int width : layers) out << ' ' << width;
  }
  return out.str();
}

ModelShape ModelShape::parse(std::string_view descriptor) {
  std::istringstream in{std::string(descriptor)};
  std::string kind;
  in >> kind;
  if (kind == "mlp") {
    std::vector<int> layers;
    int width = 0;
    while (in >> width) layers.push_back(width);
    return make_mlp(layers).shape;
  }
  if (kind == "polynomial") {
    int degree = -1;
    std::string basis;
    std::string lo;
    std::string hi;
    in >> degree >> basis >> lo >> hi;
    const auto lo_value = detail::parse_double(lo);
    const auto hi_value = detail::parse_double(hi);
    if (degree < 0 || (basis != "monomial" && basis != "chebyshev") || !lo_value || !hi_value)
      throw ShapeError("bad polynomial descriptor: " + std::string(descriptor));
    return make_polynomial(degree, basis == "monomial" ? Basis::monomial : Basis::chebyshev,
                           Domain{*lo_value, *hi_value})
        .shape;
  }
  throw ShapeError("unknown model descriptor: " + std::string(descriptor));
}

ModelParams make_mlp(std::vector<int> layers) {
  if (layers.size() < 2) throw ShapeError("mlp: need at least input and output widths");
  for (int width : layers)
    if (width < 1) throw ShapeError("mlp: layer widths must be >= 1");
  ModelParams model;
  model.shape.architecture = Architecture::mlp;
  model.shape.layers = std::move(layers);
  model.theta = Eigen::VectorXd::Zero(model.shape.parameter_count());
  return model;
}

ModelParams make_linear(int inputs, int outputs) { return make_mlp({inputs, outputs}); }

ModelParams make_polynomial(int degree, Basis basis, Domain domain) {
  if (degree < 0) throw ShapeError("polynomial: degree must be >= 0");
  ModelParams model;
  model.shape.architecture = Architecture::polynomial;
  model.shape.degree = degree;
  model.shape.basis = basis;
  model.shape.domain = domain;
  model.theta = Eigen::VectorXd::Zero(model.shape.parameter_count());
  return model;
}

void init_fan_in_uniform(ModelParams& model, std::uint64_t seed) {
  if (model.shape.architecture != Architecture::mlp) return;
  CounterRng rng(seed, streams::kInit);
  const auto& layers = model.shape.layers;
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layers[l]));
    const Eigen::Index count = static_cast<Eigen::Index>(layers[l + 1]) * (layers[l] + 1);
    for (Eigen::Index k = 0; k < count; ++k) model.theta(offset + k) = rng.uniform(-bound, bound);
    offset += count;
  }
}

ForwardPass forward_cached(const ModelParams& model, const Eigen::MatrixXd& features) {
  check_width(model, features);
  g_forward_passes.fetch_add(1, std::memory_order_relaxed);
  ForwardPass pass;
  if (model.shape.architecture == Architecture::polynomial) {
    pass.inputs.push_back(polynomial_design(model.shape, features));
    pass.output = pass.inputs.back() * model.theta;
    return pass;
  }
  const auto& layers = model.shape.layers;
  const std::size_t depth = layers.size() - 1;
  Eigen::MatrixXd activation = features;
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l < depth; ++l) {
    const int in = layers[l];
    const int out = layers[l + 1];
    ConstMatrixMap weight(model.theta.data() + offset, out, in);
    const auto bias = model.theta.segment(offset + static_cast<Eigen::Index>(out) * in, out);
    offset += static_cast<Eigen::Index>(out) * (in + 1);
    Eigen::MatrixXd z = activation * weight.transpose();
    z.rowwise() += bias.transpose();
    pass.inputs.push_back(std::move(activation));
    if (l + 1 == depth) {
      pass.output = std::move(z);
    } else {
      activation = z.cwiseMax(0.0);
      pass.preactivations.push_back(std::move(z));
    }
  }
  return pass;
}

Eigen::MatrixXd forward(const ModelParams& model, const Eigen::MatrixXd& features) {
  return forward_cached(model, features).output;
}

Eigen::VectorXd backward(const ModelParams& model, const ForwardPass& pass,
                         const Eigen::MatrixXd& output_grad) {
  if (output_grad.rows() != pass.output.rows() || output_grad.cols() != pass.output.cols())
    throw ShapeError("backward: output gradient shape mismatch");
  g_backward_passes.fetch_add(1, std::memory_order_relaxed);
  Eigen::VectorXd grad(model.theta.size());
  if (model.shape.architecture == Architecture::polynomial) {
    grad = pass.inputs.front().transpose() * output_grad.col(0);
    return grad;
  }
  const auto& layers = model.shape.layers;
  const std::size_t depth = layers.size() - 1;
  std::vector<Eigen::Index> offsets(depth);
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l < depth; ++l) {
    offsets[l] = offset;
    offset += static_cast<Eigen::Index>(layers[l + 1]) * (layers[l] + 1);
  }
  Eigen::MatrixXd delta = output_grad;
  for (std::size_t l = depth; l-- > 0;) {
    const int in = layers[l];
    const int out = layers[l + 1];
    MatrixMap weight_grad(grad.data() + offsets[l], out, in);
    weight_grad.noalias() = delta.transpose() * pass.inputs[l];
    grad.segment(offsets[l] + static_cast<Eigen::Index>(out) * in, out) =
        delta.colwise().sum().transpose();
    if (l == 0) break;
    ConstMatrixMap weight(model.theta.data() + offsets[l], out, in);
    Eigen::MatrixXd upstream = delta * weight;
    const auto& z = pass.preactivations[l - 1];
    delta = (z.array() > 0.0).select(upstream, 0.0);
  }
  return grad;
}

LossVector per_sample_loss(LossKind kind, const Eigen::MatrixXd& predictions,
                           const Eigen::VectorXd& targets) {
  check_targets(kind, predictions, targets);
  const auto n = predictions.rows();
  LossVector losses(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    check_finite_row(predictions, i);
    if (kind == LossKind::squared_error) {
      const double r = predictions(i, 0) - targets(i);
      losses(i) = r * r;
    } else {
      const auto row = predictions.row(i);
      const double top = row.maxCoeff();
      const double lse = top + std::log((row.array() - top).exp().sum());
      const auto label = static_cast<Eigen::Index>(targets(i));
      if (label < 0 || label >= predictions.cols())
        throw ShapeError("loss: class label out of range for sample " + std::to_string(i));
      losses(i) = std::max(0.0, lse - row(label));
    }
  }
  return losses;
}

Eigen::MatrixXd loss_output_grad(LossKind kind, const Eigen::MatrixXd& predictions,
                                 const Eigen::VectorXd& targets, const Eigen::VectorXd& weights) {
  check_targets(kind, predictions, targets);
  if (weights.size() != predictions.rows())
    throw ShapeError("loss gradient: weights length differs from batch size");
  Eigen::MatrixXd grad(predictions.rows(), predictions.cols());
  for (Eigen::Index i = 0; i < predictions.rows(); ++i) {
    if (kind == LossKind::squared_error) {
      grad(i, 0) = weights(i) * 2.0 * (predictions(i, 0) - targets(i));
    } else {
      const auto row = predictions.row(i);
      const double top = row.maxCoeff();
      Eigen::RowVectorXd p = (row.array() - top).exp();
      p /= p.sum();
      p(static_cast<Eigen::Index>(targets(i))) -= 1.0;
      grad.row(i) = weights(i) * p;
    }
  }
  return grad;
}

Eigen::MatrixXd clamped_squared_output_grad(LossKind kind, const Eigen::MatrixXd& predictions,
                                            const Eigen::VectorXd& targets,
                                            const Eigen::VectorXd& epsilon, double alpha) {
  check_targets(kind, predictions, targets);
  if (epsilon.size() != predictions.rows())
    throw ShapeError("clamped loss gradient: epsilon length differs from batch size");
  const auto losses = per_sample_loss(kind, predictions, targets);
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(predictions.rows(), predictions.cols());
  for (Eigen::Index i = 0; i < predictions.rows(); ++i) {
    const double excess = losses(i) - epsilon(i);
    if (excess <= 0.0) continue;
    // d/dp (alpha/2) (l(p) - eps)^2 = alpha (l(p) - eps) dl/dp
    if (kind == LossKind::squared_error) {
      grad(i, 0) = alpha * excess * 2.0 * (predictions(i, 0) - targets(i));
    } else {
      const auto row = predictions.row(i);
      const double top = row.maxCoeff();
      Eigen::RowVectorXd p = (row.array() - top).exp();
      p /= p.sum();
      p(static_cast<Eigen::Index>(targets(i))) -= 1.0;
      grad.row(i) = alpha * excess * p;
    }
  }
  return grad;
}

Eigen::VectorXd weighted_loss_grad(const ModelParams& model, LossKind kind,
                                   const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                                   const Eigen::VectorXd& weights) {
  if (weights.size() != features.rows())
    throw ShapeError("weighted_loss_grad: weights length differs from batch size");
  if ((weights.array() < 0.0).any())
    throw ParameterError("weighted_loss_grad: weights must be nonnegative");
  const auto pass = forward_cached(model, features);
  const auto output_grad = loss_output_grad(kind, pass.output, targets, weights);
  Eigen::VectorXd grad = backward(model, pass, output_grad);
  if (!grad.allFinite()) throw NumericError("weighted_loss_grad: non-finite gradient");
  return grad;
}

Eigen::VectorXd weighted_loss_grad(const ModelParams& model, LossKind kind, const Batch& batch,
                                   const Eigen::VectorXd& weights) {
  return weighted_loss_grad(model, kind, batch.features, batch.targets, weights);
}

double weighted_loss(const ModelParams& model, LossKind kind, const Eigen::MatrixXd& features,
                     const Eigen::VectorXd& targets, const Eigen::VectorXd& weights) {
  return weights.dot(per_sample_loss(kind, forward(model, features), targets));
}

Eigen::VectorXd classification_margins(const Eigen::MatrixXd& logits,
                                       const Eigen::VectorXd& targets) {
  if (logits.rows() != targets.size() || logits.cols() < 2)
    throw ShapeError("margins: need >= 2 logits per sample and matching targets");
  Eigen::VectorXd margins(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const auto label = static_cast<Eigen::Index>(targets(i));
    double best_other = -std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < logits.cols(); ++c)
      if (c != label) best_other = std::max(best_other, logits(i, c));
    margins(i) = logits(i, label) - best_other;
  }
  return margins;
}

double accuracy(const Eigen::MatrixXd& logits, const Eigen::VectorXd& targets) {
  if (logits.rows() != targets.size()) throw ShapeError("accuracy: length mismatch");
  if (logits.rows() == 0) return 0.0;
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    logits.row(i).maxCoeff(&best);
    if (best == static_cast<Eigen::Index>(targets(i))) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(logits.rows());
}

PassCounts pass_counts() {
  return {g_forward_passes.load(std::memory_order_relaxed),
          g_backward_passes.load(std::memory_order_relaxed)};
}

void reset_pass_counts() {
  g_forward_passes.store(0, std::memory_order_relaxed);
  g_backward_passes.store(0, std::memory_order_relaxed);
}

namespace {

std::filesystem::path shape_path(const std::filesystem::path& path) {
  auto shape = path;
  shape.replace_extension(".shape");
  return shape;
}

}  // namespace

void save_checkpoint(const ModelParams& model, const std::filesystem::path& path) {
  static_assert(std::endian::native == std::endian::little,
                "checkpoint writer assumes a little-endian host");
  std::ofstream bin(path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + path.string());
  bin.write(reinterpret_cast<const char*>(model.theta.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(model.size())));
  std::ofstream shape(shape_path(path));
  shape << model.shape.describe() << '\n';
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream shape_in(shape_path(path));
  if (!shape_in) throw ShapeError("missing shape descriptor for " + path.string());
  std::string descriptor;
  std::getline(shape_in, descriptor);
  ModelParams model;
  model.shape = ModelShape::parse(descriptor);
  model.theta.resize(model.shape.parameter_count());
  std::ifstream bin(path, std::ios::binary | std::ios::ate);
  if (!bin) throw ShapeError("cannot read " + path.string());
  const auto bytes = static_cast<std::size_t>(bin.tellg());
  if (bytes != sizeof(double) * static_cast<std::size_t>(model.size()))
    throw ShapeError("checkpoint size does not match descriptor '" + descriptor + "'");
  bin.seekg(0);
  bin.read(reinterpret_cast<char*>(model.theta.data()), static_cast<std::streamsize>(bytes));
  return model;
}

std::string to_string(LossKind kind) {
  return kind == LossKind::squared_error ? "squared_error" : "cross_entropy";
}

}  // namespace feasible
