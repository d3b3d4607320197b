#include "pml/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace pml {

namespace {

void validate(const Matrix& scores, const std::vector<std::vector<int>>& truths,
              bool require_nonempty) {
  if (scores.rows() != truths.size()) {
    throw std::invalid_argument("metrics: score rows != truth rows");
  }
  const int C = static_cast<int>(scores.cols());
  for (const auto& row : truths) {
    if (require_nonempty && row.empty()) {
      throw std::invalid_argument("metrics: empty truth set");
    }
    for (int y : row) {
      if (y < 0 || y >= C) throw std::invalid_argument("metrics: label index out of range");
    }
  }
}

// 1 + number of strictly greater scores in the row.
std::size_t rank_of(const Matrix& scores, std::size_t i, int y) {
  const double sy = scores(i, static_cast<std::size_t>(y));
  std::size_t greater = 0;
  for (std::size_t c = 0; c < scores.cols(); ++c) {
    if (scores(i, c) > sy) ++greater;
  }
  return 1 + greater;
}

bool contains(const std::vector<int>& sorted_row, int y) {
  return std::binary_search(sorted_row.begin(), sorted_row.end(), y);
}

}  // namespace

double average_precision(const Matrix& scores, const std::vector<std::vector<int>>& truths) {
  validate(scores, truths, true);
  const std::size_t n = truths.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ys = truths[i];
    double acc = 0.0;
    for (int y : ys) {
      const std::size_t r = rank_of(scores, i, y);
      std::size_t within = 0;
      for (int y2 : ys) {
        if (rank_of(scores, i, y2) <= r) ++within;
      }
      acc += static_cast<double>(within) / static_cast<double>(r);
    }
    total += acc / static_cast<double>(ys.size());
  }
  return total / static_cast<double>(n);
}

double coverage(const Matrix& scores, const std::vector<std::vector<int>>& truths) {
  validate(scores, truths, true);
  const std::size_t n = truths.size();
  const double C = static_cast<double>(scores.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t worst = 0;
    for (int y : truths[i]) worst = std::max(worst, rank_of(scores, i, y));
    total += static_cast<double>(worst - 1) / C;
  }
  return total / static_cast<double>(n);
}

double hamming_loss(const Matrix& scores, const std::vector<std::vector<int>>& truths,
                    double threshold) {
  validate(scores, truths, false);
  const std::size_t n = truths.size();
  if (n == 0) return 0.0;
  const std::size_t C = scores.cols();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t wrong = 0;
    for (std::size_t c = 0; c < C; ++c) {
      const bool predicted = scores(i, c) > threshold;
      const bool truth = contains(truths[i], static_cast<int>(c));
      if (predicted != truth) ++wrong;
    }
    total += static_cast<double>(wrong) / static_cast<double>(C);
  }
  return total / static_cast<double>(n);
}

RankingLossResult ranking_loss(const Matrix& scores,
                               const std::vector<std::vector<int>>& truths) {
  validate(scores, truths, true);
  const std::size_t C = scores.cols();
  RankingLossResult out;
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const auto& ys = truths[i];
    if (ys.size() == C) {
      ++out.skipped;
      continue;
    }
    double penalty = 0.0;
    for (int y : ys) {
      const double sy = scores(i, static_cast<std::size_t>(y));
      for (std::size_t c = 0; c < C; ++c) {
        if (contains(ys, static_cast<int>(c))) continue;
        const double sc = scores(i, c);
        if (sy < sc) {
          penalty += 1.0;
        } else if (sy == sc) {
          penalty += 0.5;
        }
      }
    }
    total += penalty / static_cast<double>(ys.size() * (C - ys.size()));
    ++used;
  }
  out.value = used ? total / static_cast<double>(used) : 0.0;
  return out;
}

double one_error(const Matrix& scores, const std::vector<std::vector<int>>& truths) {
  validate(scores, truths, true);
  const std::size_t n = truths.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t top = 0;
    for (std::size_t c = 1; c < scores.cols(); ++c) {
      if (scores(i, c) > scores(i, top)) top = c;  // strict: ties keep lower index
    }
    if (!contains(truths[i], static_cast<int>(top))) total += 1.0;
  }
  return total / static_cast<double>(n);
}

VisionMetrics map_cf1_of1(const Matrix& scores, const std::vector<std::vector<int>>& truths,
                          double threshold) {
  validate(scores, truths, false);
  const std::size_t n = truths.size();
  const std::size_t C = scores.cols();
  VisionMetrics out;

  std::vector<std::vector<char>> is_pos(n, std::vector<char>(C, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (int y : truths[i]) is_pos[i][static_cast<std::size_t>(y)] = 1;
  }

  // mAP over classes with at least one positive, class index order.
  double ap_sum = 0.0;
  std::size_t ap_classes = 0;
  std::vector<std::size_t> order(n);
  std::vector<std::size_t> rank_of_instance(n);
  for (std::size_t c = 0; c < C; ++c) {
    std::size_t positives = 0;
    for (std::size_t i = 0; i < n; ++i) positives += is_pos[i][c];
    if (positives == 0) {
      ++out.skipped_classes;
      continue;
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scores(a, c) > scores(b, c);  // ties keep lower instance index
    });
    for (std::size_t pos = 0; pos < n; ++pos) rank_of_instance[order[pos]] = pos + 1;

    // precision at each positive, accumulated in instance-index order
    std::vector<std::size_t> pos_ranks;
    for (std::size_t i = 0; i < n; ++i) {
      if (is_pos[i][c]) pos_ranks.push_back(rank_of_instance[i]);
    }
    double ap = 0.0;
    for (std::size_t r : pos_ranks) {
      std::size_t pos_at_or_above = 0;
      for (std::size_t r2 : pos_ranks) {
        if (r2 <= r) ++pos_at_or_above;
      }
      ap += static_cast<double>(pos_at_or_above) / static_cast<double>(r);
    }
    ap_sum += ap / static_cast<double>(positives);
    ++ap_classes;
  }
  out.map = ap_classes ? ap_sum / static_cast<double>(ap_classes) : 0.0;

  // CF1 / OF1 at the threshold.
  double f1_sum = 0.0;
  std::size_t tp_all = 0, fp_all = 0, fn_all = 0;
  for (std::size_t c = 0; c < C; ++c) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool predicted = scores(i, c) > threshold;
      const bool truth = is_pos[i][c];
      if (predicted && truth) ++tp;
      if (predicted && !truth) ++fp;
      if (!predicted && truth) ++fn;
    }
    const std::size_t denom = 2 * tp + fp + fn;
    f1_sum += denom ? 2.0 * static_cast<double>(tp) / static_cast<double>(denom) : 0.0;
    tp_all += tp;
    fp_all += fp;
    fn_all += fn;
  }
  out.cf1 = C ? f1_sum / static_cast<double>(C) : 0.0;
  const std::size_t denom_all = 2 * tp_all + fp_all + fn_all;
  out.of1 = denom_all ? 2.0 * static_cast<double>(tp_all) / static_cast<double>(denom_all) : 0.0;
  return out;
}

const std::vector<std::string>& MetricReport::metric_names() {
  static const std::vector<std::string> names = {
      "average_precision", "coverage", "hamming_loss", "ranking_loss",
      "one_error",         "map",      "cf1",          "of1"};
  return names;
}

double MetricReport::metric(const std::string& name) const {
  if (name == "average_precision") return average_precision;
  if (name == "coverage") return coverage;
  if (name == "hamming_loss") return hamming_loss;
  if (name == "ranking_loss") return ranking_loss;
  if (name == "one_error") return one_error;
  if (name == "map") return map;
  if (name == "cf1") return cf1;
  if (name == "of1") return of1;
  throw std::invalid_argument("unknown metric '" + name + "'");
}

std::string MetricReport::to_record() const {
  char buf[64];
  std::string out;
  out += "n_instances=" + std::to_string(n_instances) + "\n";
  for (const auto& name : metric_names()) {
    std::snprintf(buf, sizeof(buf), "%.6f", metric(name));
    out += name + "=" + buf + "\n";
  }
  out += "ranking_skipped=" + std::to_string(ranking_skipped) + "\n";
  out += "map_skipped_classes=" + std::to_string(map_skipped_classes) + "\n";
  return out;
}

MetricReport MetricReport::from_record(const std::string& text) {
  MetricReport r;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("metric record: expected name=value, got '" + line + "'");
    }
    const std::string name = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (name == "n_instances") {
      r.n_instances = std::stoul(value);
    } else if (name == "ranking_skipped") {
      r.ranking_skipped = std::stoul(value);
    } else if (name == "map_skipped_classes") {
      r.map_skipped_classes = std::stoul(value);
    } else if (name == "average_precision") {
      r.average_precision = std::stod(value);
    } else if (name == "coverage") {
      r.coverage = std::stod(value);
    } else if (name == "hamming_loss") {
      r.hamming_loss = std::stod(value);
    } else if (name == "ranking_loss") {
      r.ranking_loss = std::stod(value);
    } else if (name == "one_error") {
      r.one_error = std::stod(value);
    } else if (name == "map") {
      r.map = std::stod(value);
    } else if (name == "cf1") {
      r.cf1 = std::stod(value);
    } else if (name == "of1") {
      r.of1 = std::stod(value);
    } else {
      throw std::invalid_argument("metric record: unknown key '" + name + "'");
    }
  }
  return r;
}

MetricReport evaluate_metrics(const Matrix& scores, const std::vector<std::vector<int>>& truths,
                              double threshold) {
  MetricReport r;
  r.n_instances = truths.size();
  r.average_precision = average_precision(scores, truths);
  r.coverage = coverage(scores, truths);
  r.hamming_loss = hamming_loss(scores, truths, threshold);
  const RankingLossResult rl = ranking_loss(scores, truths);
  r.ranking_loss = rl.value;
  r.ranking_skipped = rl.skipped;
  r.one_error = one_error(scores, truths);
  const VisionMetrics vm = map_cf1_of1(scores, truths, threshold);
  r.map = vm.map;
  r.cf1 = vm.cf1;
  r.of1 = vm.of1;
  r.map_skipped_classes = vm.skipped_classes;
  return r;
}

}  // namespace pml
