#include "pml/corrupt.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "pml/dataset.hpp"
#include "pml/matrix.hpp"
#include "pml/rng.hpp"

using pml::CandidateOverlay;
using pml::Dataset;
using pml::LinearScorer;
using pml::Matrix;

namespace {

std::vector<int> full_set(int C) {
  std::vector<int> all;
  for (int c = 0; c < C; ++c) all.push_back(c);
  return all;
}

bool superset_holds(const Dataset& ds, const CandidateOverlay& ov) {
  for (std::size_t i = 0; i < ds.num_instances(); ++i) {
    if (!std::includes(ov.candidates[i].begin(), ov.candidates[i].end(),
                       ds.true_labels[i].begin(), ds.true_labels[i].end())) {
      return false;
    }
    for (int c : ov.candidates[i]) {
      if (c < 0 || c >= ds.num_classes) return false;
    }
  }
  return true;
}

Dataset single_class_dataset() {
  Dataset ds;
  ds.num_classes = 3;
  ds.features = Matrix(20, 3);
  pml::Rng rng(4);
  for (std::size_t i = 0; i < ds.features.size(); ++i) {
    ds.features.data()[i] = rng.uniform(-1.0, 1.0);
  }
  ds.true_labels.assign(20, {0});
  return ds;
}

}  // namespace

TEST_CASE("corrupt_flip at q=0 returns the true labels") {
  const Dataset ds = pml::synth_generate(40, 5, 4, {1, 2}, 0.4, 2);
  const CandidateOverlay ov = pml::corrupt_flip(ds, 0.0, 9);
  CHECK(ov.candidates == ds.true_labels);
  CHECK(ov.source == pml::CandidateSource::flip);
}

TEST_CASE("corrupt_flip at q=1 returns the full label set") {
  const Dataset ds = pml::synth_generate(40, 5, 4, {1, 2}, 0.4, 2);
  const CandidateOverlay ov = pml::corrupt_flip(ds, 1.0, 9);
  for (const auto& cand : ov.candidates) CHECK(cand == full_set(5));
}

TEST_CASE("corrupt_flip matches the binomial expectation at q=0.2, C=80") {
  const Dataset ds = pml::synth_generate(10000, 80, 6, {1, 3}, 0.5, 31);
  const CandidateOverlay ov = pml::corrupt_flip(ds, 0.2, 55);

  double added = 0.0, expected = 0.0;
  for (std::size_t i = 0; i < ds.num_instances(); ++i) {
    added += static_cast<double>(ov.candidates[i].size() - ds.true_labels[i].size());
    expected += 0.2 * static_cast<double>(80 - ds.true_labels[i].size());
  }
  CHECK(std::fabs(added - expected) / expected < 0.02);
}

TEST_CASE("corrupt_flip validates q and keeps the superset invariant") {
  const Dataset ds = pml::synth_generate(30, 6, 4, {1, 3}, 0.4, 3);
  CHECK_THROWS_AS(pml::corrupt_flip(ds, -0.1, 0), std::invalid_argument);
  CHECK_THROWS_AS(pml::corrupt_flip(ds, 1.1, 0), std::invalid_argument);
  for (double q : {0.1, 0.5, 0.9}) {
    CHECK(superset_holds(ds, pml::corrupt_flip(ds, q, 12)));
  }
}

TEST_CASE("corrupt_flip is deterministic and monotone in q on a shared seed") {
  const Dataset ds = pml::synth_generate(200, 10, 5, {1, 3}, 0.4, 6);
  const CandidateOverlay a = pml::corrupt_flip(ds, 0.3, 17);
  const CandidateOverlay b = pml::corrupt_flip(ds, 0.3, 17);
  CHECK(a.candidates == b.candidates);

  // Same per-slot uniforms, higher threshold: candidate sets can only grow.
  const CandidateOverlay more = pml::corrupt_flip(ds, 0.6, 17);
  for (std::size_t i = 0; i < ds.num_instances(); ++i) {
    CHECK(std::includes(more.candidates[i].begin(), more.candidates[i].end(),
                        a.candidates[i].begin(), a.candidates[i].end()));
  }
  CHECK(pml::mean_candidate_count(more) >= pml::mean_candidate_count(a));
}

TEST_CASE("fit_scorer separates noiseless synthetic data") {
  const Dataset ds = pml::synth_generate(200, 4, 10, {1, 2}, 0.0, 14);
  const LinearScorer scorer = pml::fit_scorer(ds, {200, 0.5}, 0);
  const Matrix scores = scorer.score(ds.features);
  // Training accuracy 100% at probability threshold 0.5 (score threshold 0).
  for (std::size_t i = 0; i < ds.num_instances(); ++i) {
    for (int c = 0; c < ds.num_classes; ++c) {
      const bool truth = std::binary_search(ds.true_labels[i].begin(),
                                            ds.true_labels[i].end(), c);
      CHECK((scores(i, static_cast<std::size_t>(c)) > 0.0) == truth);
    }
  }
}

TEST_CASE("fit_scorer is deterministic") {
  const Dataset ds = pml::synth_generate(60, 4, 6, {1, 2}, 0.4, 5);
  const LinearScorer a = pml::fit_scorer(ds, {100, 0.5}, 1);
  const LinearScorer b = pml::fit_scorer(ds, {100, 0.5}, 2);  // seed is provenance only
  CHECK(a.weights == b.weights);
  CHECK(a.bias == b.bias);
}

TEST_CASE("fit_scorer on a single-class dataset favors that class everywhere") {
  const Dataset ds = single_class_dataset();
  const LinearScorer scorer = pml::fit_scorer(ds, {200, 0.5}, 0);
  const Matrix scores = scorer.score(ds.features);
  for (std::size_t i = 0; i < ds.num_instances(); ++i) {
    CHECK(scores(i, 0) > scores(i, 1));
    CHECK(scores(i, 0) > scores(i, 2));
  }
}

TEST_CASE("corrupt_scorer picks the highest-scoring negatives") {
  Dataset ds;
  ds.num_classes = 6;
  ds.features = Matrix(1, 2, 0.0);
  ds.true_labels = {{0, 1}};

  LinearScorer scorer;
  scorer.weights = Matrix(2, 6, 0.0);
  scorer.bias = Matrix(1, 6, 0.0);
  // negatives: class 2 -> 0.0, class 3 -> 0.9, class 4 -> 0.2, class 5 -> 0.8
  scorer.bias(0, 3) = 0.9;
  scorer.bias(0, 4) = 0.2;
  scorer.bias(0, 5) = 0.8;

  const CandidateOverlay ov = pml::corrupt_scorer(ds, scorer, 1.0, 0);
  CHECK(ov.candidates[0] == std::vector<int>{0, 1, 3, 5});

  const CandidateOverlay none = pml::corrupt_scorer(ds, scorer, 0.0, 0);
  CHECK(none.candidates[0] == ds.true_labels[0]);
}

TEST_CASE("corrupt_scorer caps the distractor count at the negative pool") {
  Dataset ds;
  ds.num_classes = 5;
  ds.features = Matrix(1, 2, 0.0);
  ds.true_labels = {{0, 1, 2}};
  LinearScorer scorer;
  scorer.weights = Matrix(2, 5, 0.0);
  scorer.bias = Matrix(1, 5, 0.0);

  // q * |Y| = 4.5 rounds up past the pool of 2 negatives; the cap wins.
  const CandidateOverlay ov = pml::corrupt_scorer(ds, scorer, 1.5, 0);
  CHECK(ov.candidates[0] == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("corrupt_scorer breaks score ties toward the lower label index") {
  Dataset ds;
  ds.num_classes = 4;
  ds.features = Matrix(1, 2, 0.0);
  ds.true_labels = {{0}};
  LinearScorer scorer;
  scorer.weights = Matrix(2, 4, 0.0);
  scorer.bias = Matrix(1, 4, 0.5);  // all negatives tie

  const CandidateOverlay ov = pml::corrupt_scorer(ds, scorer, 1.0, 0);
  CHECK(ov.candidates[0] == std::vector<int>{0, 1});
}

TEST_CASE("corrupt_scorer rejects negative q and is deterministic") {
  const Dataset ds = pml::synth_generate(50, 6, 5, {1, 3}, 0.4, 23);
  const LinearScorer scorer = pml::fit_scorer(ds, {50, 0.5}, 0);
  CHECK_THROWS_AS(pml::corrupt_scorer(ds, scorer, -0.5, 0), std::invalid_argument);

  const CandidateOverlay a = pml::corrupt_scorer(ds, scorer, 1.0, 7);
  const CandidateOverlay b = pml::corrupt_scorer(ds, scorer, 1.0, 7);
  CHECK(a.candidates == b.candidates);
  CHECK(superset_holds(ds, a));

  // Monotone mean candidate count in q.
  double last = 0.0;
  for (double q : {0.0, 0.5, 1.0, 1.5, 3.0}) {
    const double mean = pml::mean_candidate_count(pml::corrupt_scorer(ds, scorer, q, 7));
    CHECK(mean >= last);
    last = mean;
  }
}

TEST_CASE("mean_candidate_count averages row sizes") {
  CandidateOverlay ov;
  ov.candidates = {{0}, {0, 1, 2}};
  CHECK(pml::mean_candidate_count(ov) == 2.0);
  CHECK(pml::mean_candidate_count(CandidateOverlay{}) == 0.0);
}
