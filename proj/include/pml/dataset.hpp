#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pml/matrix.hpp"

namespace pml {

// File/format/validation problems; the CLI maps this to its data-error exit
// code. Messages carry the offending path and line where applicable.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Immutable after construction; true labels are sorted ascending per row.
struct Dataset {
  Matrix features;                            // n x d
  std::vector<std::vector<int>> true_labels;  // per instance, ascending
  int num_classes = 0;

  std::size_t num_instances() const { return true_labels.size(); }
  std::size_t dim() const { return features.cols(); }
};

struct LoadReport {
  std::size_t loaded = 0;
  std::size_t dropped_empty = 0;  // lines whose label field was empty
};

enum class CandidateSource { flip, scorer, clean };

std::string to_string(CandidateSource s);
CandidateSource candidate_source_from_string(const std::string& s);

// Per-instance candidate sets laid over a dataset; every row is a superset of
// the dataset's true labels (checked at load).
struct CandidateOverlay {
  CandidateSource source = CandidateSource::clean;
  double q = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::vector<int>> candidates;  // per instance, ascending
};

// Text dataset format:
//   #ml C=<int> d=<int>
//   <labels> <idx>:<val> ...
// where <labels> is comma-separated 0-based label indices and feature indices
// are 0-based, strictly ascending; omitted indices are zero. Instances with an
// empty label field are dropped and counted in the report.
Dataset load_dataset(const std::string& path, LoadReport* report = nullptr);
void save_dataset(const Dataset& ds, const std::string& path);

// Overlay format:
//   #cand source=<flip|scorer|clean> q=<float> seed=<int>
//   <comma-separated candidate indices>, one line per instance.
CandidateOverlay load_overlay(const std::string& path, const Dataset& ds);
void save_overlay(const CandidateOverlay& overlay, const std::string& path);

// Builds an overlay whose candidates are exactly the true labels.
CandidateOverlay clean_overlay(const Dataset& ds);

// Unstratified shuffle-and-chunk fold assignment; fold sizes differ by at
// most one (the first n % k folds take the extra element).
struct SplitPlan {
  int num_folds = 0;
  std::vector<int> fold_of;  // instance index -> fold

  std::vector<std::size_t> fold_indices(int fold) const;
  std::vector<std::size_t> complement_indices(int fold) const;
};

SplitPlan make_splits(std::size_t n, int k, std::uint64_t seed);

struct LabelCountRange {
  int lo = 1;
  int hi = 1;
};

// Class prototypes drawn once from a standard Gaussian; each instance picks a
// uniform label count in [lo, hi], a uniform label subset of that size, and
// features = mean of the chosen prototypes + Gaussian(0, noise_std^2) noise.
Dataset synth_generate(std::size_t num_instances, int num_classes, std::size_t dim,
                       LabelCountRange labels_per_instance, double noise_std,
                       std::uint64_t seed);

// Restriction of a dataset (and optionally overlay rows) to an index subset.
Dataset subset(const Dataset& ds, const std::vector<std::size_t>& indices);
std::vector<std::vector<int>> subset_rows(const std::vector<std::vector<int>>& rows,
                                          const std::vector<std::size_t>& indices);

}  // namespace pml
