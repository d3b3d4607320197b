#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pml/corrupt.hpp"
#include "pml/dataset.hpp"
#include "pml/matrix.hpp"
#include "pml/metrics.hpp"
#include "pml/mlp.hpp"

namespace pml {

struct ExperimentConfig {
  std::string dataset_path;
  // Candidate supervision: an overlay file, an inline corruption, or (when
  // neither is given) a clean overlay built from the true labels.
  std::string overlay_path;
  std::optional<CorruptionConfig> corruption;

  int folds = 5;
  std::vector<double> lambda_grid = {0.02, 0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0};
  std::size_t hidden1 = 256;
  std::size_t hidden2 = 256;
  TrainConfig train;                  // loss/seed fields are overridden per cell
  std::vector<LossKind> methods = {LossKind::propml, LossKind::bce};
  std::string selection_criterion = "average_precision";
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct ResultCell {
  std::string method;
  double lambda = 0.0;  // 0 for methods that ignore it
  int fold = 0;
  MetricReport report;
};

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // sample std (n-1); 0 when n < 2
  std::size_t n = 0;
};

struct ResultsTable {
  std::vector<ResultCell> cells;  // canonical order: method, then lambda, then fold

  // Distinct (method, lambda) pairs in canonical order.
  std::vector<std::pair<std::string, double>> arms() const;
  Aggregate aggregate(const std::string& method, double lambda,
                      const std::string& metric) const;
};

struct RankStats {
  std::vector<double> mean_ranks;  // per method, rank 1 = best
  double friedman_chi2 = 0.0;
  double nemenyi_cd = 0.0;
  int k_methods = 0;
  int n_datasets = 0;
  double alpha = 0.05;
  std::vector<std::string> method_names;  // optional labels for reports
};

enum class BetterDirection { higher, lower };

// Direction of improvement for a canonical metric name.
BetterDirection metric_direction(const std::string& metric);

// Corruption dispatch: flip draws per-instance streams from config.seed;
// scorer fits the logistic scorer on the clean labels first.
CandidateOverlay make_overlay(const Dataset& ds, const CorruptionConfig& config);

// k-fold CV over every (method, lambda, fold) cell: train on the other folds
// with candidate labels, evaluate the held-out fold against clean labels
// (ranking metrics over logits). The lambda grid applies to the propml method
// only; bce runs once per fold. Deterministic for a given config, regardless
// of worker count.
ResultsTable run_cv(const Dataset& ds, const CandidateOverlay& overlay,
                    const ExperimentConfig& config);
// File-loading convenience over the same pipeline.
ResultsTable run_cv(const ExperimentConfig& config);

// Grid value with the best mean of the named criterion (ties -> smaller λ).
double select_lambda(const ResultsTable& table, const std::string& criterion,
                     const std::string& method = "propml");

// Friedman test + Nemenyi critical difference over an n_datasets x k_methods
// score matrix. alpha must be 0.05 or 0.10; k_methods <= 10 (table bound).
RankStats friedman_nemenyi(const Matrix& score_matrix, BetterDirection better, double alpha);

// Line-oriented key/value results file plus, when stats are present, a
// plot-data file at path + ".cd" (method names, mean ranks, CD value).
void emit_report(const ResultsTable& table, const RankStats* stats,
                 const ExperimentConfig& config, const std::string& path);

// Plot-data file for external critical-difference diagram rendering.
void write_cd_plot(const RankStats& stats, const std::string& path);

struct ParsedReport {
  std::uint64_t seed = 0;
  std::string config_hash;
  ResultsTable table;
  std::vector<std::pair<std::string, double>> selected;  // method -> lambda
  std::optional<RankStats> stats;
};

ParsedReport parse_report(const std::string& path);

// FNV-1a 64-bit hash, used for config/input fingerprints in reports.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

// Canonical key/value rendering of a config (the hashed representation).
std::string describe_config(const ExperimentConfig& config);

// Runs jobs 0..n_jobs-1 on a bounded pool; job results must be written to
// preallocated, disjoint slots so completion order cannot matter.
void run_parallel(std::size_t n_jobs, int workers,
                  const std::function<void(std::size_t)>& job);

}  // namespace pml
