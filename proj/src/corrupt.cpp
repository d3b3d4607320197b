#include "pml/corrupt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pml/rng.hpp"

namespace pml {

CandidateOverlay corrupt_flip(const Dataset& ds, double q, std::uint64_t seed) {
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("corrupt_flip: q must be in [0, 1]");
  CandidateOverlay ov;
  ov.source = CandidateSource::flip;
  ov.q = q;
  ov.seed = seed;
  ov.candidates.resize(ds.num_instances());

  Rng root(seed);
  for (std::size_t i = 0; i < ds.num_instances(); ++i) {
    Rng rng = root.substream(i);
    const auto& truth = ds.true_labels[i];
    std::vector<int> cand;
    cand.reserve(truth.size());
    std::size_t t = 0;
    for (int c = 0; c < ds.num_classes; ++c) {
      if (t < truth.size() && truth[t] == c) {
        cand.push_back(c);
        ++t;
      } else if (rng.uniform() < q) {
        cand.push_back(c);
      }
    }
    ov.candidates[i] = std::move(cand);
  }
  return ov;
}

Matrix LinearScorer::score(const Matrix& features) const {
  Matrix s = matmul(features, weights);
  for (std::size_t i = 0; i < s.rows(); ++i) {
    for (std::size_t c = 0; c < s.cols(); ++c) s(i, c) += bias(0, c);
  }
  return s;
}

LinearScorer fit_scorer(const Dataset& ds, const ScorerFitConfig& config,
                        std::uint64_t /*seed*/) {
  const std::size_t n = ds.num_instances();
  const std::size_t d = ds.dim();
  const std::size_t C = static_cast<std::size_t>(ds.num_classes);

  Matrix targets(n, C, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int y : ds.true_labels[i]) targets(i, static_cast<std::size_t>(y)) = 1.0;
  }

  LinearScorer scorer;
  scorer.weights = Matrix(d, C, 0.0);
  scorer.bias = Matrix(1, C, 0.0);

  const double inv_n = n ? 1.0 / static_cast<double>(n) : 0.0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Matrix probs = sigmoid(scorer.score(ds.features));
    Matrix delta = sub(probs, targets);           // n x C
    Matrix gw = matmul(transpose(ds.features), delta);  // d x C
    for (std::size_t i = 0; i < gw.size(); ++i) {
      scorer.weights.data()[i] -= config.lr * inv_n * gw.data()[i];
    }
    Matrix gb = reduce_sum(delta, Axis::cols);  // 1 x C
    for (std::size_t c = 0; c < C; ++c) scorer.bias(0, c) -= config.lr * inv_n * gb(0, c);
  }
  return scorer;
}

CandidateOverlay corrupt_scorer(const Dataset& ds, const LinearScorer& scorer, double q,
                                std::uint64_t seed) {
  if (q < 0.0) throw std::invalid_argument("corrupt_scorer: q must be nonnegative");
  CandidateOverlay ov;
  ov.source = CandidateSource::scorer;
  ov.q = q;
  ov.seed = seed;
  ov.candidates.resize(ds.num_instances());

  const Matrix scores = scorer.score(ds.features);
  for (std::size_t i = 0; i < ds.num_instances(); ++i) {
    const auto& truth = ds.true_labels[i];
    const std::size_t max_extra = static_cast<std::size_t>(ds.num_classes) - truth.size();
    std::size_t m =
        static_cast<std::size_t>(std::floor(q * static_cast<double>(truth.size()) + 0.5));
    if (m > max_extra) m = max_extra;

    std::vector<int> negatives;
    negatives.reserve(max_extra);
    std::size_t t = 0;
    for (int c = 0; c < ds.num_classes; ++c) {
      if (t < truth.size() && truth[t] == c) {
        ++t;
      } else {
        negatives.push_back(c);
      }
    }
    // Highest score first; exact ties resolved toward the lower label index
    // (stable sort over an index-ascending sequence).
    std::stable_sort(negatives.begin(), negatives.end(), [&](int a, int b) {
      return scores(i, static_cast<std::size_t>(a)) > scores(i, static_cast<std::size_t>(b));
    });

    std::vector<int> cand(truth);
    cand.insert(cand.end(), negatives.begin(), negatives.begin() + static_cast<long>(m));
    std::sort(cand.begin(), cand.end());
    ov.candidates[i] = std::move(cand);
  }
  return ov;
}

double mean_candidate_count(const CandidateOverlay& overlay) {
  if (overlay.candidates.empty()) return 0.0;
  double total = 0.0;
  for (const auto& row : overlay.candidates) total += static_cast<double>(row.size());
  return total / static_cast<double>(overlay.candidates.size());
}

}  // namespace pml
