#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pml/dataset.hpp"
#include "pml/loss.hpp"
#include "pml/matrix.hpp"

namespace pml {

// Two-hidden-layer ReLU MLP with a per-class logit head, trained by manual
// backprop + Adam on a candidate-aware loss.
struct MlpModel {
  std::array<std::size_t, 4> dims = {0, 0, 0, 0};  // input, hidden1, hidden2, classes
  Matrix w1, b1;  // d x h1, 1 x h1
  Matrix w2, b2;  // h1 x h2, 1 x h2
  Matrix w3, b3;  // h2 x C, 1 x C
};

struct MlpGradients {
  Matrix w1, b1, w2, b2, w3, b3;
};

struct ForwardCache {
  Matrix x;       // batch input
  Matrix z1, a1;  // pre/post first ReLU
  Matrix z2, a2;  // pre/post second ReLU
  Matrix logits;
};

struct AdamState {
  std::vector<Matrix> m;  // first moments, one per parameter tensor
  std::vector<Matrix> v;  // second moments
  long step = 0;
};

struct TrainConfig {
  int epochs = 500;
  std::size_t batch = 128;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  LossConfig loss;
  std::uint64_t seed = 0;
};

struct TrainTrace {
  std::vector<double> epoch_loss;  // instance-weighted mean loss per epoch
};

// Glorot-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases; one
// RNG substream per weight matrix so layer draws are order-independent.
MlpModel init_model(const std::array<std::size_t, 4>& dims, std::uint64_t seed);

ForwardCache forward(const MlpModel& model, const Matrix& x);
Matrix predict_logits(const MlpModel& model, const Matrix& x);
Matrix predict_proba(const MlpModel& model, const Matrix& x, double epsilon = 1e-7);

// Backprop of an upstream d(loss)/d(logits) through the cached activations.
MlpGradients backward(const MlpModel& model, const ForwardCache& cache,
                      const Matrix& grad_logits);

AdamState make_adam_state(const MlpModel& model);
// One bias-corrected Adam update over all six parameter tensors.
void adam_step(MlpModel& model, const MlpGradients& grads, AdamState& state,
               const TrainConfig& config);

// Mini-batch training over dataset rows selected by `indices`, supervised by
// the aligned candidate rows. Reshuffles each epoch from a per-epoch RNG
// substream. Returns the loss trace; the model is updated in place.
TrainTrace train(MlpModel& model, const Dataset& ds,
                 const std::vector<std::vector<int>>& candidates,
                 const std::vector<std::size_t>& indices, const TrainConfig& config);

// Versioned little-endian binary checkpoint (magic, version, dims, then the
// six parameter tensors row-major as IEEE-754 doubles).
void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace pml
