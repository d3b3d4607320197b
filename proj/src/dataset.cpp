#include "pml/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pml/rng.hpp"

namespace pml {

namespace {

std::string loc(const std::string& path, std::size_t line) {
  return path + ":" + std::to_string(line);
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

bool parse_int(const std::string& s, long& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtol(s.c_str(), &end, 10);
  return errno == 0 && end == s.c_str() + s.size();
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(s.c_str(), &end);
  return errno == 0 && end == s.c_str() + s.size();
}

std::vector<int> parse_label_list(const std::string& field, int num_classes,
                                  const std::string& where) {
  std::vector<int> labels;
  std::size_t start = 0;
  while (start <= field.size()) {
    const std::size_t comma = field.find(',', start);
    const std::string piece =
        field.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    long v;
    if (!parse_int(piece, v)) {
      throw DataError(where + ": bad label index '" + piece + "'");
    }
    if (v < 0 || v >= num_classes) {
      throw DataError(where + ": label index " + std::to_string(v) + " outside [0, " +
                      std::to_string(num_classes) + ")");
    }
    labels.push_back(static_cast<int>(v));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  std::sort(labels.begin(), labels.end());
  if (std::adjacent_find(labels.begin(), labels.end()) != labels.end()) {
    throw DataError(where + ": duplicate label index");
  }
  return labels;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join_labels(const std::vector<int>& labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(labels[i]);
  }
  return out;
}

}  // namespace

std::string to_string(CandidateSource s) {
  switch (s) {
    case CandidateSource::flip: return "flip";
    case CandidateSource::scorer: return "scorer";
    case CandidateSource::clean: return "clean";
  }
  return "clean";
}

CandidateSource candidate_source_from_string(const std::string& s) {
  if (s == "flip") return CandidateSource::flip;
  if (s == "scorer") return CandidateSource::scorer;
  if (s == "clean") return CandidateSource::clean;
  throw DataError("unknown candidate source '" + s + "'");
}

Dataset load_dataset(const std::string& path, LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file " + path);

  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  ++lineno;

  long C = -1, d = -1;
  {
    const auto toks = split_ws(line);
    if (toks.size() != 3 || toks[0] != "#ml" || toks[1].rfind("C=", 0) != 0 ||
        toks[2].rfind("d=", 0) != 0 || !parse_int(toks[1].substr(2), C) ||
        !parse_int(toks[2].substr(2), d) || C < 1 || d < 0) {
      throw DataError(loc(path, lineno) + ": expected header '#ml C=<int> d=<int>'");
    }
  }

  std::vector<std::vector<int>> labels;
  std::vector<std::vector<double>> rows;
  LoadReport rep;

  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;  // blank line, not an instance
    const std::string where = loc(path, lineno);

    std::size_t first_feature = 0;
    bool has_labels = toks[0].find(':') == std::string::npos;
    if (has_labels) first_feature = 1;

    std::vector<double> feat(static_cast<std::size_t>(d), 0.0);
    long prev_idx = -1;
    for (std::size_t t = first_feature; t < toks.size(); ++t) {
      const std::size_t colon = toks[t].find(':');
      if (colon == std::string::npos) {
        throw DataError(where + ": expected <idx>:<val>, got '" + toks[t] + "'");
      }
      long idx;
      double val;
      if (!parse_int(toks[t].substr(0, colon), idx)) {
        throw DataError(where + ": bad feature index in '" + toks[t] + "'");
      }
      if (!parse_double(toks[t].substr(colon + 1), val)) {
        throw DataError(where + ": bad feature value in '" + toks[t] + "'");
      }
      if (idx < 0 || idx >= d) {
        throw DataError(where + ": feature index " + std::to_string(idx) + " outside [0, " +
                        std::to_string(d) + ")");
      }
      if (idx <= prev_idx) {
        throw DataError(where + ": feature indices must be strictly ascending");
      }
      if (!std::isfinite(val)) {
        throw DataError(where + ": non-finite feature value '" + toks[t] + "'");
      }
      feat[static_cast<std::size_t>(idx)] = val;
      prev_idx = idx;
    }

    if (!has_labels) {
      ++rep.dropped_empty;  // instance without true labels; kept out of the dataset
      continue;
    }
    labels.push_back(parse_label_list(toks[0], static_cast<int>(C), where));
    rows.push_back(std::move(feat));
  }

  Dataset ds;
  ds.num_classes = static_cast<int>(C);
  ds.true_labels = std::move(labels);
  ds.features = Matrix(ds.true_labels.size(), static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) ds.features(i, j) = rows[i][j];
  }
  rep.loaded = ds.num_instances();
  if (report) *report = rep;
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset file " + path);
  out << "#ml C=" << ds.num_classes << " d=" << ds.dim() << "\n";
  for (std::size_t i = 0; i < ds.num_instances(); ++i) {
    out << join_labels(ds.true_labels[i]);
    for (std::size_t j = 0; j < ds.dim(); ++j) {
      const double v = ds.features(i, j);
      if (v != 0.0) out << ' ' << j << ':' << format_double(v);
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed for " + path);
}

CandidateOverlay load_overlay(const std::string& path, const Dataset& ds) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open overlay file " + path);

  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  ++lineno;

  CandidateOverlay ov;
  {
    const auto toks = split_ws(line);
    long seed;
    double q;
    if (toks.size() != 4 || toks[0] != "#cand" || toks[1].rfind("source=", 0) != 0 ||
        toks[2].rfind("q=", 0) != 0 || toks[3].rfind("seed=", 0) != 0 ||
        !parse_double(toks[2].substr(2), q) || !parse_int(toks[3].substr(5), seed)) {
      throw DataError(loc(path, lineno) +
                      ": expected header '#cand source=<flip|scorer|clean> q=<float> seed=<int>'");
    }
    ov.source = candidate_source_from_string(toks[1].substr(7));
    ov.q = q;
    ov.seed = static_cast<std::uint64_t>(seed);
  }

  while (std::getline(in, line)) {
    ++lineno;
    std::string trimmed = line;
    trimmed.erase(trimmed.find_last_not_of(" \t\r") + 1);
    if (trimmed.empty()) continue;
    ov.candidates.push_back(
        parse_label_list(trimmed, ds.num_classes, loc(path, lineno)));
  }

  if (ov.candidates.size() != ds.num_instances()) {
    throw DataError(path + ": overlay has " + std::to_string(ov.candidates.size()) +
                    " rows but dataset has " + std::to_string(ds.num_instances()));
  }
  for (std::size_t i = 0; i < ov.candidates.size(); ++i) {
    if (!std::includes(ov.candidates[i].begin(), ov.candidates[i].end(),
                       ds.true_labels[i].begin(), ds.true_labels[i].end())) {
      throw DataError(path + ": candidate set of instance " + std::to_string(i) +
                      " is not a superset of the true labels");
    }
  }
  return ov;
}

void save_overlay(const CandidateOverlay& overlay, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write overlay file " + path);
  out << "#cand source=" << to_string(overlay.source) << " q=" << format_double(overlay.q)
      << " seed=" << overlay.seed << "\n";
  for (const auto& row : overlay.candidates) out << join_labels(row) << '\n';
  if (!out) throw DataError("write failed for " + path);
}

CandidateOverlay clean_overlay(const Dataset& ds) {
  CandidateOverlay ov;
  ov.source = CandidateSource::clean;
  ov.q = 0.0;
  ov.seed = 0;
  ov.candidates = ds.true_labels;
  return ov;
}

std::vector<std::size_t> SplitPlan::fold_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> SplitPlan::complement_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != fold) out.push_back(i);
  }
  return out;
}

SplitPlan make_splits(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("make_splits: need at least 2 folds");
  if (static_cast<std::size_t>(k) > n) {
    throw std::invalid_argument("make_splits: more folds than instances");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  SplitPlan plan;
  plan.num_folds = k;
  plan.fold_of.assign(n, 0);
  const std::size_t base = n / static_cast<std::size_t>(k);
  const std::size_t rem = n % static_cast<std::size_t>(k);
  std::size_t pos = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t take = base + (static_cast<std::size_t>(f) < rem ? 1 : 0);
    for (std::size_t j = 0; j < take; ++j) plan.fold_of[order[pos++]] = f;
  }
  return plan;
}

Dataset synth_generate(std::size_t num_instances, int num_classes, std::size_t dim,
                       LabelCountRange labels_per_instance, double noise_std,
                       std::uint64_t seed) {
  if (labels_per_instance.lo < 1 || labels_per_instance.lo > labels_per_instance.hi ||
      labels_per_instance.hi > num_classes) {
    throw std::invalid_argument("synth_generate: label count range must satisfy 1 <= lo <= hi <= C");
  }
  Rng root(seed);

  Matrix protos(static_cast<std::size_t>(num_classes), dim);
  {
    Rng proto_rng = root.substream(0);
    for (std::size_t c = 0; c < protos.rows(); ++c) {
      for (std::size_t j = 0; j < dim; ++j) protos(c, j) = proto_rng.normal();
    }
  }

  Dataset ds;
  ds.num_classes = num_classes;
  ds.features = Matrix(num_instances, dim);
  ds.true_labels.resize(num_instances);

  std::vector<int> pool(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < num_instances; ++i) {
    Rng rng = root.substream(i + 1);
    const int span = labels_per_instance.hi - labels_per_instance.lo + 1;
    const int count =
        labels_per_instance.lo + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(span)));

    for (int c = 0; c < num_classes; ++c) pool[static_cast<std::size_t>(c)] = c;
    // Partial Fisher-Yates: the first `count` slots end up a uniform subset.
    for (int j = 0; j < count; ++j) {
      const std::size_t pick =
          static_cast<std::size_t>(j) +
          static_cast<std::size_t>(rng.bounded(static_cast<std::uint64_t>(num_classes - j)));
      std::swap(pool[static_cast<std::size_t>(j)], pool[pick]);
    }
    std::vector<int> ys(pool.begin(), pool.begin() + count);
    std::sort(ys.begin(), ys.end());

    for (std::size_t j = 0; j < dim; ++j) {
      double mean = 0.0;
      for (int y : ys) mean += protos(static_cast<std::size_t>(y), j);
      mean /= static_cast<double>(count);
      ds.features(i, j) = mean + noise_std * rng.normal();
    }
    ds.true_labels[i] = std::move(ys);
  }
  return ds;
}

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.num_classes = ds.num_classes;
  out.features = Matrix(indices.size(), ds.dim());
  out.true_labels.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t i = indices[r];
    for (std::size_t j = 0; j < ds.dim(); ++j) out.features(r, j) = ds.features(i, j);
    out.true_labels.push_back(ds.true_labels[i]);
  }
  return out;
}

std::vector<std::vector<int>> subset_rows(const std::vector<std::vector<int>>& rows,
                                          const std::vector<std::size_t>& indices) {
  std::vector<std::vector<int>> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(rows[i]);
  return out;
}

}  // namespace pml
