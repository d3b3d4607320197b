#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pml/matrix.hpp"

namespace pml {

// Rank of label y within an instance's score row: 1 + count of labels with a
// strictly greater score (ties share the lowest rank). All ranking metrics
// below use this convention; threshold metrics use strict score > threshold.
//
// Accumulation shapes are fixed (per-instance value as a double ratio, summed
// over instances in index order, divided by the instance count last) so an
// independently coded oracle that derives the same integer counts reproduces
// the same doubles bit for bit.

struct RankingLossResult {
  double value = 0.0;
  std::size_t skipped = 0;  // instances whose complement was empty
};

struct VisionMetrics {
  double map = 0.0;
  double cf1 = 0.0;
  double of1 = 0.0;
  std::size_t skipped_classes = 0;  // classes with no positive instance
};

// mean over i of (1/|Y_i|) * sum_{y in Y_i} |{y' in Y_i : rank(y') <= rank(y)}| / rank(y)
double average_precision(const Matrix& scores, const std::vector<std::vector<int>>& truths);

// mean over i of (max_{y in Y_i} rank(y) - 1) / C
double coverage(const Matrix& scores, const std::vector<std::vector<int>>& truths);

// mean over i of |{c : (score_ic > threshold) != (c in Y_i)}| / C
double hamming_loss(const Matrix& scores, const std::vector<std::vector<int>>& truths,
                    double threshold = 0.5);

// mean over usable i of (sum of pair penalties) / (|Y_i| * |complement_i|),
// penalty 1 when a true label scores below a false one, 0.5 on exact ties.
RankingLossResult ranking_loss(const Matrix& scores,
                               const std::vector<std::vector<int>>& truths);

// fraction of instances whose argmax label (lowest index on ties) is not true
double one_error(const Matrix& scores, const std::vector<std::vector<int>>& truths);

// map: mean over classes with positives of per-class AP (instances ranked by
// class score, ties toward the lower instance index, precision averaged at
// each positive); cf1: mean over all classes of per-class F1 at threshold;
// of1: micro F1 of pooled TP/FP/FN. Zero-denominator F1 terms are 0.
VisionMetrics map_cf1_of1(const Matrix& scores, const std::vector<std::vector<int>>& truths,
                          double threshold = 0.5);

struct MetricReport {
  std::size_t n_instances = 0;
  double average_precision = 0.0;
  double coverage = 0.0;
  double hamming_loss = 0.0;
  double ranking_loss = 0.0;
  double one_error = 0.0;
  double map = 0.0;
  double cf1 = 0.0;
  double of1 = 0.0;
  std::size_t ranking_skipped = 0;
  std::size_t map_skipped_classes = 0;

  // Flat `name=value` text record, metric values at 6 decimal places.
  std::string to_record() const;
  static MetricReport from_record(const std::string& text);

  // Metric values by canonical name (average_precision, coverage, ...).
  double metric(const std::string& name) const;
  static const std::vector<std::string>& metric_names();
};

// Computes every metric in one pass. `threshold` is compared against the same
// scores used for ranking, so callers evaluating logits pass 0 (logit 0 is
// probability 0.5) and callers evaluating probabilities keep 0.5.
MetricReport evaluate_metrics(const Matrix& scores, const std::vector<std::vector<int>>& truths,
                              double threshold);

}  // namespace pml
