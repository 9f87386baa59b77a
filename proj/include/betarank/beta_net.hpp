#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "betarank/features.hpp"
#include "betarank/sampling.hpp"

namespace betarank {

/// Feed-forward net producing a strictly positive scalar:
///   h1  = exp(clamp(z W1 + b1))
///   h2  = h1 W2 + b2              (identity activation)
///   out = exp(clamp(h2 W3 + b3))
/// Pre-activations are clamped to [-exp_clamp, exp_clamp]; a plain
/// exponential would overflow, clamping keeps the output positive and the
/// map monotone on the live range.
struct BetaNet {
  std::array<int, 4> dims{8, 1000, 500, 1};
  double exp_clamp = 30.0;
  Eigen::MatrixXd w1, w2, w3;  // dims[l] x dims[l+1]
  Eigen::RowVectorXd b1, b2, b3;
};

/// The two prior-parameter functions. Same architecture, disjoint
/// parameters; each is Siamese across the positive/negative branches.
struct ModelPair {
  BetaNet alpha;
  BetaNet beta;
};

struct NetShape {
  std::array<int, 4> dims{8, 1000, 500, 1};
  double exp_clamp = 30.0;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 256;
  std::size_t epochs = 10;
  double margin = 1.0;
  double y_true = 1.0;
  std::uint64_t seed = 42;
  double exp_clamp = 30.0;
};

/// Glorot-uniform weights, zero biases. Deterministic given the seed; the
/// two nets draw from independent streams.
ModelPair init_model(std::uint64_t seed, const NetShape& shape = {});

/// Throws std::invalid_argument on non-finite input.
double forward(const BetaNet& net, const FeatureVector& z);

/// Batched forward over row-major inputs (one row per instance).
struct NetActivations {
  Eigen::MatrixXd a1, h1, h2, a3;
  Eigen::VectorXd out;
};
Eigen::VectorXd forward_batch(const BetaNet& net, const Eigen::MatrixXd& z,
                              NetActivations* cache = nullptr);

/// Mean of Beta(alpha, beta). Throws std::invalid_argument unless both
/// parameters are positive and finite.
double posterior_mean(double alpha, double beta);

/// (dmu/dalpha, dmu/dbeta) = (beta, -alpha) / (alpha+beta)^2.
std::pair<double, double> posterior_mean_gradient(double alpha, double beta);

struct PairLoss {
  double loss;
  double diff;  // positive-branch mean minus negative-branch mean
};

/// Hinge loss max(0, margin - y_true * diff) over the Siamese pass.
PairLoss pair_loss(const ModelPair& model, const TrainingPair& pair,
                   const TrainConfig& cfg);

struct NetGradients {
  Eigen::MatrixXd w1, w2, w3;
  Eigen::RowVectorXd b1, b2, b3;
};
struct ModelGradients {
  NetGradients alpha;
  NetGradients beta;
};

/// Analytic gradients of pair_loss for every parameter of both nets; both
/// branches contribute through the shared weights. Zero where the hinge is
/// inactive or a clamped exponential is saturated.
ModelGradients backward(const ModelPair& model, const TrainingPair& pair,
                        const TrainConfig& cfg);

struct TrainResult {
  std::vector<double> epoch_loss;  // mean pair loss per epoch
};

/// Mini-batch Adam (beta1 0.9, beta2 0.999, eps 1e-8) over seeded per-epoch
/// shuffles. Deterministic given cfg.seed. Throws std::runtime_error naming
/// the batch if the loss turns non-finite.
TrainResult train(ModelPair& model, std::span<const TrainingPair> pairs,
                  const TrainConfig& cfg);

/// Text format `BETANET v1`: dims and clamp, then ALPHA / BETA sections
/// listing W1,b1,W2,b2,W3,b3 row-major with 17 significant digits
/// (bit-exact round trip).
void save_model(const ModelPair& model, const std::filesystem::path& path);

/// Throws std::runtime_error on version mismatch, dimension mismatch, or a
/// truncated/invalid file.
ModelPair load_model(const std::filesystem::path& path);

}  // namespace betarank
