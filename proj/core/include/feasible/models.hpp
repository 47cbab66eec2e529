#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "feasible/data.hpp"

namespace feasible {

/// Per-sample losses g(theta), indexed like the rows they were computed on.
using LossVector = Eigen::VectorXd;

enum class LossKind { squared_error, cross_entropy };

enum class Architecture {
  mlp,         // affine layers with ReLU between them; two widths = linear model
  polynomial,  // scalar input expanded by poly_features, no bias
};

/// Everything needed to interpret a flat parameter vector.
struct ModelShape {
  Architecture architecture = Architecture::mlp;
  std::vector<int> layers;  // mlp: input width, hidden widths..., output width
  int degree = 0;           // polynomial only
  Basis basis = Basis::chebyshev;
  Domain domain{};

  Eigen::Index parameter_count() const;
  int input_dim() const;
  int output_dim() const;

  /// Plain-text descriptor, e.g. "mlp 2 70 70 2" or "polynomial 20 chebyshev 0 1".
  std::string describe() const;
  static ModelShape parse(std::string_view descriptor);

  bool operator==(const ModelShape&) const = default;
};

struct ModelParams {
  ModelShape shape;
  Eigen::VectorXd theta;

  Eigen::Index size() const { return theta.size(); }
};

ModelParams make_mlp(std::vector<int> layers);
ModelParams make_linear(int inputs, int outputs);
ModelParams make_polynomial(int degree, Basis basis, Domain domain = {});

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias of an
/// MLP; polynomial coefficients are left at zero.
void init_fan_in_uniform(ModelParams& model, std::uint64_t seed);

/// Activations kept from a forward pass so the backward pass can reuse them.
struct ForwardPass {
  std::vector<Eigen::MatrixXd> inputs;       // input to each affine layer
  std::vector<Eigen::MatrixXd> preactivations;
  Eigen::MatrixXd output;                    // n x output_dim
};

ForwardPass forward_cached(const ModelParams& model, const Eigen::MatrixXd& features);

/// Logits for classification, one column of scalar predictions for regression.
Eigen::MatrixXd forward(const ModelParams& model, const Eigen::MatrixXd& features);

/// Vector-Jacobian product: parameter gradient of sum_ij output_grad(i,j) * out(i,j).
Eigen::VectorXd backward(const ModelParams& model, const ForwardPass& pass,
                         const Eigen::MatrixXd& output_grad);

LossVector per_sample_loss(LossKind kind, const Eigen::MatrixXd& predictions,
                           const Eigen::VectorXd& targets);

/// d/d(predictions) of sum_i weights_i * g_i.
Eigen::MatrixXd loss_output_grad(LossKind kind, const Eigen::MatrixXd& predictions,
                                 const Eigen::VectorXd& targets, const Eigen::VectorXd& weights);

/// d/d(predictions) of (alpha/2) sum_i [g_i - eps_i]_+^2, obtained by the chain
/// rule through the composite per-sample loss (no multipliers involved).
Eigen::MatrixXd clamped_squared_output_grad(LossKind kind, const Eigen::MatrixXd& predictions,
                                            const Eigen::VectorXd& targets,
                                            const Eigen::VectorXd& epsilon, double alpha);

/// sum_i weights_i * grad g_i(theta) in a single forward/backward pass.
Eigen::VectorXd weighted_loss_grad(const ModelParams& model, LossKind kind,
                                   const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                                   const Eigen::VectorXd& weights);
Eigen::VectorXd weighted_loss_grad(const ModelParams& model, LossKind kind, const Batch& batch,
                                   const Eigen::VectorXd& weights);

/// sum_i weights_i * g_i(theta).
double weighted_loss(const ModelParams& model, LossKind kind, const Eigen::MatrixXd& features,
                     const Eigen::VectorXd& targets, const Eigen::VectorXd& weights);

/// True-class logit minus the best other logit.
Eigen::VectorXd classification_margins(const Eigen::MatrixXd& logits,
                                       const Eigen::VectorXd& targets);

/// Fraction of rows whose argmax logit equals the target class.
double accuracy(const Eigen::MatrixXd& logits, const Eigen::VectorXd& targets);

/// Global counters of model passes, for cost accounting.
struct PassCounts {
  long forward = 0;
  long backward = 0;
};
PassCounts pass_counts();
void reset_pass_counts();

/// `path` gets the little-endian float64 parameters; the same path with a
/// ".shape" extension gets the plain-text descriptor.
void save_checkpoint(const ModelParams& model, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

std::string to_string(LossKind kind);

}  // namespace feasible
