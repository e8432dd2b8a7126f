#pragma once

// Dense two-layer graph convolutional network trained with Adam.
//
//   Z1 = prop * (drop(X) * W1) [+ b1]
//   H1 = relu(Z1)
//   H2 = prop * (drop(H1) * W2) [+ b2]
//   P  = softmax(H2)            row-wise
//
// The loss is the summed cross-entropy over supervised document rows. Dropout
// is inverted (kept units are scaled by 1 / (1 - rate)) and only active in
// training passes. Everything runs in double precision.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cohgraph/hetgraph.hpp"
#include "cohgraph/random.hpp"

namespace cohgraph {

struct GcnModel {
  Eigen::MatrixXd w1;  // d_in x d_hidden
  Eigen::MatrixXd w2;  // d_hidden x C
  Eigen::RowVectorXd b1;
  Eigen::RowVectorXd b2;
  bool use_bias = false;
  double dropout_rate = 0.5;

  Eigen::Index input_dim() const { return w1.rows(); }
  Eigen::Index hidden_dim() const { return w1.cols(); }
  Eigen::Index num_classes() const { return w2.cols(); }
  Eigen::Index parameter_count() const;

  // Glorot-uniform weights, U(-a, a) with a = sqrt(6 / (fan_in + fan_out)),
  // drawn row-major from `rng`; biases start at zero.
  static GcnModel initialize(Eigen::Index input_dim, Eigen::Index hidden_dim,
                             Eigen::Index num_classes, double dropout_rate, bool use_bias, Rng& rng);
};

// Scaled keep-masks (entries 0 or 1 / (1 - rate)). Empty matrices mean no dropout.
struct DropoutMasks {
  Eigen::MatrixXd input;
  Eigen::MatrixXd hidden;

  bool active() const { return input.size() > 0; }
};

struct ForwardPass {
  Eigen::MatrixXd input;         // X after dropout
  Eigen::MatrixXd preactivation; // Z1
  Eigen::MatrixXd hidden;        // H1 after dropout
  Eigen::MatrixXd logits;        // H2
  Eigen::MatrixXd probabilities; // P
  DropoutMasks masks;
};

// Rows of the training signal: node row index and its class.
struct Supervision {
  std::vector<Eigen::Index> rows;
  std::vector<int> labels;
};

struct Gradients {
  Eigen::MatrixXd w1;
  Eigen::MatrixXd w2;
  Eigen::RowVectorXd b1;
  Eigen::RowVectorXd b2;
};

// Samples fresh masks when `training` is set and the rate is positive.
ForwardPass forward(const GcnModel& model, const PropagationMatrix& prop, const Eigen::MatrixXd& x,
                    bool training, Rng& rng);

// Forward pass under fixed masks (empty masks = evaluation mode).
ForwardPass forward_with_masks(const GcnModel& model, const PropagationMatrix& prop,
                               const Eigen::MatrixXd& x, const DropoutMasks& masks);

// Same network with the propagation step skipped (prop = I): a two-layer
// feed-forward classifier over node features.
ForwardPass baseline_forward(const GcnModel& model, const Eigen::MatrixXd& x, bool training,
                             Rng& rng);

// Numerically stable row-wise softmax.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

// Probabilities below this floor are clamped before the logarithm.
inline constexpr double kProbabilityFloor = 1e-300;

// -sum over supervised rows of ln P[row, label].
double cross_entropy(const Eigen::MatrixXd& probabilities, const Supervision& sup);

// Analytic gradients of cross_entropy through the pass described by `masks`.
// A null `prop` means identity propagation.
Gradients gradients(const GcnModel& model, const PropagationMatrix* prop, const Eigen::MatrixXd& x,
                    const Supervision& sup, const DropoutMasks& masks);

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  Gradients first;
  Gradients second;
  long long step = 0;

  static OptimizerState zeros_like(const GcnModel& model);
};

// One bias-corrected Adam update of every parameter in `model`.
void adam_step(OptimizerState& state, GcnModel& model, const Gradients& grads, const AdamConfig& cfg);

struct TrainConfig {
  double learning_rate = 0.01;
  int epochs = 160;
  std::uint64_t seed = 42;
  int hidden_dim = 240;
  double dropout_rate = 0.5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool use_bias = false;

  void validate() const;
  AdamConfig adam() const { return {learning_rate, beta1, beta2, epsilon}; }
};

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double train_accuracy = 0.0;
};

// Full-batch training for cfg.epochs epochs. A null `prop` trains the
// identity-propagation baseline.
std::vector<EpochStats> train(GcnModel& model, const PropagationMatrix* prop,
                              const Eigen::MatrixXd& x, const Supervision& sup,
                              const TrainConfig& cfg, Rng& rng);

// Index of the largest entry; ties go to the lowest index.
int argmax_row(const Eigen::MatrixXd& m, Eigen::Index row);

void write_checkpoint(std::ostream& out, const GcnModel& model);
GcnModel read_checkpoint(std::istream& in, const std::string& source);

void write_history_csv(std::ostream& out, std::span<const EpochStats> history);

}  // namespace cohgraph
