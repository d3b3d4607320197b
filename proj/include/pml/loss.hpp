#pragma once

#include <string>
#include <vector>

#include "pml/matrix.hpp"

namespace pml {

enum class LossKind { propml, bce };

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& s);

struct LossConfig {
  LossKind kind = LossKind::propml;
  double lambda = 1.0;     // weight of the off-candidate penalty (propml only)
  double epsilon = 1e-7;   // probability clamp: p in [epsilon, 1-epsilon]
};

struct LossResult {
  double value = 0.0;   // mean over rows
  Matrix grad_logits;   // d(value)/d(logits), same shape as logits
};

// Candidate-aware loss over a batch. Row i sees candidate set S_i (nonempty,
// indices in [0, C)); probabilities are clamp(sigmoid(logits), eps, 1-eps).
//
// propml: -log(sum_{c in S} p_c) - lambda * sum_{c not in S} log(1 - p_c)
// bce:    -sum_{c in S} log(p_c) - sum_{c not in S} log(1 - p_c)
//
// With a single-element candidate set and lambda = 1 the two coincide, in
// value and gradient.
LossResult evaluate_loss(const Matrix& logits, const std::vector<std::vector<int>>& candidates,
                         const LossConfig& config);

// Central finite differences (step 1e-5) against the analytic gradient;
// returns the max over entries of |analytic - numeric| / max(|analytic|,
// |numeric|, 1e-8).
double check_gradients(const Matrix& logits, const std::vector<std::vector<int>>& candidates,
                       const LossConfig& config);

}  // namespace pml
