#pragma once

#include <cstdint>

#include "pml/dataset.hpp"
#include "pml/matrix.hpp"

namespace pml {

struct ScorerFitConfig {
  int epochs = 200;
  double lr = 0.5;
};

// Which corruption to apply and with what strength. flip: q is the
// per-negative-label flip probability in [0,1]. scorer: q is the target
// false-to-true ratio (0.5 / 1.0 / 1.5 in the benchmark protocol). clean:
// candidates are exactly the true labels.
struct CorruptionConfig {
  CandidateSource mode = CandidateSource::flip;
  double q = 0.0;
  std::uint64_t seed = 0;
  ScorerFitConfig scorer_fit;
};

// Independent-flip protocol: every label outside the true set becomes a
// candidate with probability q. q=1 yields the full label set.
CandidateOverlay corrupt_flip(const Dataset& ds, double q, std::uint64_t seed);

// One-vs-rest logistic linear model used to pick plausible false candidates.
struct LinearScorer {
  Matrix weights;  // d x C
  Matrix bias;     // 1 x C

  // Raw scores x W + b for a feature matrix (n x d) -> n x C.
  Matrix score(const Matrix& features) const;
};

// Full-batch gradient descent on the one-vs-rest logistic loss over the clean
// labels. Zero-initialized (the problem is convex), so the fit is the same for
// every seed; the seed is carried through to overlay headers for provenance.
LinearScorer fit_scorer(const Dataset& ds, const ScorerFitConfig& config,
                        std::uint64_t seed);

// Top-score protocol: instance i gains m_i = round_half_up(q * |Y_i|)
// distractors, the highest-scoring labels outside Y_i (capped at C - |Y_i|);
// score ties break toward the lower label index.
CandidateOverlay corrupt_scorer(const Dataset& ds, const LinearScorer& scorer, double q,
                                std::uint64_t seed);

// Mean candidate-set size of an overlay (the E(|S|) summary).
double mean_candidate_count(const CandidateOverlay& overlay);

}  // namespace pml
