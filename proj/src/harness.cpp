#include "pml/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "pml/rng.hpp"

namespace pml {

namespace {

// Substream tags for the per-run seed. Cell streams start high so adding
// folds or arms never collides with the fixed streams.
constexpr std::uint64_t kStreamSplits = 0;
constexpr std::uint64_t kStreamCells = 100;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

BetterDirection metric_direction(const std::string& metric) {
  if (metric == "average_precision" || metric == "map" || metric == "cf1" ||
      metric == "of1") {
    return BetterDirection::higher;
  }
  if (metric == "coverage" || metric == "hamming_loss" || metric == "ranking_loss" ||
      metric == "one_error") {
    return BetterDirection::lower;
  }
  throw std::invalid_argument("unknown metric '" + metric + "'");
}

CandidateOverlay make_overlay(const Dataset& ds, const CorruptionConfig& config) {
  switch (config.mode) {
    case CandidateSource::flip:
      return corrupt_flip(ds, config.q, config.seed);
    case CandidateSource::scorer: {
      const LinearScorer scorer = fit_scorer(ds, config.scorer_fit, config.seed);
      return corrupt_scorer(ds, scorer, config.q, config.seed);
    }
    case CandidateSource::clean:
      return clean_overlay(ds);
  }
  throw std::invalid_argument("make_overlay: bad corruption mode");
}

std::vector<std::pair<std::string, double>> ResultsTable::arms() const {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& cell : cells) {
    const std::pair<std::string, double> key{cell.method, cell.lambda};
    if (std::find(out.begin(), out.end(), key) == out.end()) out.push_back(key);
  }
  return out;
}

Aggregate ResultsTable::aggregate(const std::string& method, double lambda,
                                  const std::string& metric) const {
  Aggregate agg;
  double sum = 0.0;
  for (const auto& cell : cells) {
    if (cell.method == method && cell.lambda == lambda) {
      sum += cell.report.metric(metric);
      ++agg.n;
    }
  }
  if (agg.n == 0) return agg;
  agg.mean = sum / static_cast<double>(agg.n);
  if (agg.n >= 2) {
    double ss = 0.0;
    for (const auto& cell : cells) {
      if (cell.method == method && cell.lambda == lambda) {
        const double d = cell.report.metric(metric) - agg.mean;
        ss += d * d;
      }
    }
    agg.stddev = std::sqrt(ss / static_cast<double>(agg.n - 1));
  }
  return agg;
}

void run_parallel(std::size_t n_jobs, int workers,
                  const std::function<void(std::size_t)>& job) {
  if (workers <= 1 || n_jobs <= 1) {
    for (std::size_t i = 0; i < n_jobs; ++i) job(i);
    return;
  }
  const std::size_t pool = std::min<std::size_t>(static_cast<std::size_t>(workers), n_jobs);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  threads.reserve(pool);
  for (std::size_t w = 0; w < pool; ++w) {
    threads.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n_jobs) return;
        job(i);
      }
    });
  }
  for (auto& t : threads) t.join();
}

namespace {

struct FoldData {
  Dataset train_ds;
  std::vector<std::vector<int>> train_candidates;
  Matrix test_features;
  std::vector<std::vector<int>> test_truths;
};

void validate_config(const ExperimentConfig& config) {
  if (config.folds < 2) throw std::invalid_argument("run_cv: folds must be >= 2");
  if (config.methods.empty()) throw std::invalid_argument("run_cv: no methods configured");
  for (double l : config.lambda_grid) {
    if (!(l > 0.0 && l <= 1.0)) {
      throw std::invalid_argument("run_cv: lambda grid values must lie in (0, 1]");
    }
  }
  const bool has_propml =
      std::find(config.methods.begin(), config.methods.end(), LossKind::propml) !=
      config.methods.end();
  if (has_propml && config.lambda_grid.empty()) {
    throw std::invalid_argument("run_cv: empty lambda grid for propml");
  }
}

}  // namespace

ResultsTable run_cv(const Dataset& ds, const CandidateOverlay& overlay,
                    const ExperimentConfig& config) {
  validate_config(config);
  if (overlay.candidates.size() != ds.num_instances()) {
    throw std::invalid_argument("run_cv: overlay does not match dataset");
  }

  const int k = config.folds;
  const SplitPlan plan =
      make_splits(ds.num_instances(), k, Rng::derive_seed(config.seed, kStreamSplits));

  std::vector<FoldData> folds(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f) {
    const auto train_idx = plan.complement_indices(f);
    const auto test_idx = plan.fold_indices(f);
    FoldData& fd = folds[static_cast<std::size_t>(f)];
    fd.train_ds = subset(ds, train_idx);
    fd.train_candidates = subset_rows(overlay.candidates, train_idx);
    fd.test_features = subset(ds, test_idx).features;
    fd.test_truths = subset_rows(ds.true_labels, test_idx);
  }

  // Arms in canonical order: methods as configured; the grid expands propml.
  std::vector<std::pair<std::string, double>> arms;
  std::vector<LossConfig> arm_loss;
  for (LossKind kind : config.methods) {
    if (kind == LossKind::propml) {
      for (double l : config.lambda_grid) {
        arms.emplace_back("propml", l);
        LossConfig lc = config.train.loss;
        lc.kind = LossKind::propml;
        lc.lambda = l;
        arm_loss.push_back(lc);
      }
    } else {
      arms.emplace_back("bce", 0.0);
      LossConfig lc = config.train.loss;
      lc.kind = LossKind::bce;
      lc.lambda = 0.0;
      arm_loss.push_back(lc);
    }
  }

  ResultsTable table;
  table.cells.resize(arms.size() * static_cast<std::size_t>(k));

  const std::array<std::size_t, 4> dims = {ds.dim(), config.hidden1, config.hidden2,
                                           static_cast<std::size_t>(ds.num_classes)};
  auto run_cell = [&](std::size_t cell) {
    const std::size_t arm = cell / static_cast<std::size_t>(k);
    const int fold = static_cast<int>(cell % static_cast<std::size_t>(k));
    const FoldData& fd = folds[static_cast<std::size_t>(fold)];

    // Every cell draws from its own substream of the run seed, so results do
    // not depend on scheduling or on which other arms are present.
    const std::uint64_t cell_seed = Rng::derive_seed(config.seed, kStreamCells + cell);
    MlpModel model = init_model(dims, Rng::derive_seed(cell_seed, 0));
    TrainConfig tc = config.train;
    tc.loss = arm_loss[arm];
    tc.seed = Rng::derive_seed(cell_seed, 1);

    std::vector<std::size_t> all(fd.train_ds.num_instances());
    std::iota(all.begin(), all.end(), std::size_t{0});
    train(model, fd.train_ds, fd.train_candidates, all, tc);

    const Matrix logits = predict_logits(model, fd.test_features);
    ResultCell& out = table.cells[cell];
    out.method = arms[arm].first;
    out.lambda = arms[arm].second;
    out.fold = fold;
    // Logit 0 corresponds to probability 0.5, so thresholding logits at 0
    // matches thresholding probabilities at 0.5.
    out.report = evaluate_metrics(logits, fd.test_truths, 0.0);
  };

  run_parallel(table.cells.size(), config.jobs, run_cell);
  return table;
}

ResultsTable run_cv(const ExperimentConfig& config) {
  const Dataset ds = load_dataset(config.dataset_path);
  CandidateOverlay overlay;
  if (!config.overlay_path.empty()) {
    overlay = load_overlay(config.overlay_path, ds);
  } else if (config.corruption) {
    overlay = make_overlay(ds, *config.corruption);
  } else {
    overlay = clean_overlay(ds);
  }
  return run_cv(ds, overlay, config);
}

double select_lambda(const ResultsTable& table, const std::string& criterion,
                     const std::string& method) {
  const BetterDirection dir = metric_direction(criterion);
  std::vector<double> lambdas;
  for (const auto& cell : table.cells) {
    if (cell.method == method && std::find(lambdas.begin(), lambdas.end(), cell.lambda) ==
                                     lambdas.end()) {
      lambdas.push_back(cell.lambda);
    }
  }
  if (lambdas.empty()) {
    throw std::invalid_argument("select_lambda: no entries for method '" + method + "'");
  }
  std::sort(lambdas.begin(), lambdas.end());

  double best_lambda = lambdas.front();
  double best_mean = table.aggregate(method, best_lambda, criterion).mean;
  for (std::size_t i = 1; i < lambdas.size(); ++i) {
    const double mean = table.aggregate(method, lambdas[i], criterion).mean;
    const bool improves =
        dir == BetterDirection::higher ? mean > best_mean : mean < best_mean;
    if (improves) {  // strict: ties keep the smaller lambda
      best_mean = mean;
      best_lambda = lambdas[i];
    }
  }
  return best_lambda;
}

namespace {

// Critical values q_alpha for the Nemenyi test, k = 2..10: the upper
// percentage points of the studentized range at infinite df divided by
// sqrt(2). Standard table, e.g. Demsar, JMLR 7 (2006), Table 5.
constexpr double kNemenyiQ05[] = {1.960, 2.343, 2.569, 2.728, 2.850,
                                  2.949, 3.031, 3.102, 3.164};
constexpr double kNemenyiQ10[] = {1.645, 2.052, 2.291, 2.459, 2.589,
                                  2.693, 2.780, 2.855, 2.920};

}  // namespace

RankStats friedman_nemenyi(const Matrix& score_matrix, BetterDirection better, double alpha) {
  const std::size_t n = score_matrix.rows();
  const std::size_t k = score_matrix.cols();
  if (n < 2) throw std::invalid_argument("friedman_nemenyi: need at least 2 datasets");
  if (k < 2 || k > 10) {
    throw std::invalid_argument("friedman_nemenyi: method count must be in [2, 10]");
  }
  const double* qtab = nullptr;
  if (std::fabs(alpha - 0.05) < 1e-12) {
    qtab = kNemenyiQ05;
  } else if (std::fabs(alpha - 0.10) < 1e-12) {
    qtab = kNemenyiQ10;
  } else {
    throw std::invalid_argument("friedman_nemenyi: alpha must be 0.05 or 0.10");
  }

  RankStats stats;
  stats.k_methods = static_cast<int>(k);
  stats.n_datasets = static_cast<int>(n);
  stats.alpha = alpha;
  stats.mean_ranks.assign(k, 0.0);

  std::vector<std::size_t> order(k);
  for (std::size_t i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return better == BetterDirection::higher ? score_matrix(i, a) > score_matrix(i, b)
                                               : score_matrix(i, a) < score_matrix(i, b);
    });
    // Tie groups share the average of the positions they span.
    std::size_t pos = 0;
    while (pos < k) {
      std::size_t end = pos + 1;
      while (end < k && score_matrix(i, order[end]) == score_matrix(i, order[pos])) ++end;
      const double avg_rank = (static_cast<double>(pos + 1) + static_cast<double>(end)) / 2.0;
      for (std::size_t j = pos; j < end; ++j) {
        stats.mean_ranks[order[j]] += avg_rank;
      }
      pos = end;
    }
  }
  for (double& r : stats.mean_ranks) r /= static_cast<double>(n);

  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);
  double sum_sq = 0.0;
  for (double r : stats.mean_ranks) sum_sq += r * r;
  stats.friedman_chi2 =
      12.0 * nd / (kd * (kd + 1.0)) * (sum_sq - kd * (kd + 1.0) * (kd + 1.0) / 4.0);
  stats.nemenyi_cd = qtab[k - 2] * std::sqrt(kd * (kd + 1.0) / (6.0 * nd));
  return stats;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string describe_config(const ExperimentConfig& config) {
  std::ostringstream out;
  out << "dataset=" << config.dataset_path << "\n";
  out << "overlay=" << config.overlay_path << "\n";
  if (config.corruption) {
    out << "corruption=" << to_string(config.corruption->mode) << " q="
        << fmt17(config.corruption->q) << " seed=" << config.corruption->seed
        << " scorer_epochs=" << config.corruption->scorer_fit.epochs
        << " scorer_lr=" << fmt17(config.corruption->scorer_fit.lr) << "\n";
  } else {
    out << "corruption=none\n";
  }
  out << "folds=" << config.folds << "\n";
  out << "lambda_grid=";
  for (std::size_t i = 0; i < config.lambda_grid.size(); ++i) {
    if (i) out << ',';
    out << fmt17(config.lambda_grid[i]);
  }
  out << "\n";
  out << "hidden=" << config.hidden1 << "," << config.hidden2 << "\n";
  out << "epochs=" << config.train.epochs << "\n";
  out << "batch=" << config.train.batch << "\n";
  out << "lr=" << fmt17(config.train.lr) << "\n";
  out << "adam_betas=" << fmt17(config.train.beta1) << "," << fmt17(config.train.beta2)
      << "\n";
  out << "adam_eps=" << fmt17(config.train.adam_eps) << "\n";
  out << "loss_epsilon=" << fmt17(config.train.loss.epsilon) << "\n";
  out << "methods=";
  for (std::size_t i = 0; i < config.methods.size(); ++i) {
    if (i) out << ',';
    out << to_string(config.methods[i]);
  }
  out << "\n";
  out << "selection_criterion=" << config.selection_criterion << "\n";
  out << "seed=" << config.seed << "\n";
  return out.str();
}

void emit_report(const ResultsTable& table, const RankStats* stats,
                 const ExperimentConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write report file " + path);

  out << "#pmlreport v1\n";
  out << "config_hash=" << hex64(fnv1a64(describe_config(config))) << "\n";
  out << "seed=" << config.seed << "\n";
  out << "selection_criterion=" << config.selection_criterion << "\n";

  for (LossKind kind : config.methods) {
    if (kind == LossKind::propml) {
      out << "selected method=propml lambda="
          << fmt17(select_lambda(table, config.selection_criterion, "propml")) << "\n";
    } else {
      out << "selected method=" << to_string(kind) << " lambda=0\n";
    }
  }

  for (const auto& cell : table.cells) {
    out << "cell method=" << cell.method << " lambda=" << fmt17(cell.lambda)
        << " fold=" << cell.fold << " n_instances=" << cell.report.n_instances
        << " ranking_skipped=" << cell.report.ranking_skipped
        << " map_skipped_classes=" << cell.report.map_skipped_classes;
    for (const auto& name : MetricReport::metric_names()) {
      out << " " << name << "=" << fmt17(cell.report.metric(name));
    }
    out << "\n";
  }

  for (const auto& [method, lambda] : table.arms()) {
    for (const auto& name : MetricReport::metric_names()) {
      const Aggregate agg = table.aggregate(method, lambda, name);
      out << "agg method=" << method << " lambda=" << fmt17(lambda) << " metric=" << name
          << " mean=" << fmt17(agg.mean) << " std=" << fmt17(agg.stddev) << " n=" << agg.n
          << "\n";
    }
  }

  if (stats) {
    out << "rank alpha=" << fmt17(stats->alpha) << " chi2=" << fmt17(stats->friedman_chi2)
        << " cd=" << fmt17(stats->nemenyi_cd) << " n_datasets=" << stats->n_datasets
        << " k_methods=" << stats->k_methods << "\n";
    for (std::size_t j = 0; j < stats->mean_ranks.size(); ++j) {
      const std::string name = j < stats->method_names.size()
                                   ? stats->method_names[j]
                                   : "method" + std::to_string(j);
      out << "rank_method name=" << name << " mean_rank=" << fmt17(stats->mean_ranks[j])
          << "\n";
    }
  }
  if (!out) throw DataError("write failed for " + path);

  if (stats) write_cd_plot(*stats, path + ".cd");
}

void write_cd_plot(const RankStats& stats, const std::string& path) {
  std::ofstream plot(path);
  if (!plot) throw DataError("cannot write plot-data file " + path);
  plot << "#cdplot v1\n";
  plot << "alpha=" << fmt17(stats.alpha) << "\n";
  plot << "cd=" << fmt17(stats.nemenyi_cd) << "\n";
  plot << "n_datasets=" << stats.n_datasets << "\n";
  plot << "k_methods=" << stats.k_methods << "\n";
  for (std::size_t j = 0; j < stats.mean_ranks.size(); ++j) {
    const std::string name = j < stats.method_names.size() ? stats.method_names[j]
                                                           : "method" + std::to_string(j);
    plot << "method name=" << name << " mean_rank=" << fmt17(stats.mean_ranks[j]) << "\n";
  }
  if (!plot) throw DataError("write failed for " + path);
}

namespace {

std::map<std::string, std::string> parse_kv_line(const std::string& line,
                                                 const std::string& where) {
  std::map<std::string, std::string> kv;
  std::istringstream in(line);
  std::string tok;
  in >> tok;  // record tag, handled by caller
  while (in >> tok) {
    const std::size_t eq = tok.find('=');
    if (eq == std::string::npos) {
      throw DataError(where + ": expected key=value, got '" + tok + "'");
    }
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return kv;
}

}  // namespace

ParsedReport parse_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report file " + path);

  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line) || line != "#pmlreport v1") {
    throw DataError(path + ": missing '#pmlreport v1' header");
  }
  ++lineno;

  ParsedReport rep;
  RankStats stats;
  bool have_stats = false;

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    std::istringstream probe(line);
    std::string tag;
    probe >> tag;

    const std::size_t eq = line.find('=');
    if (tag.rfind("config_hash=", 0) == 0) {
      rep.config_hash = line.substr(eq + 1);
    } else if (tag.rfind("seed=", 0) == 0) {
      rep.seed = std::stoull(line.substr(eq + 1));
    } else if (tag.rfind("selection_criterion=", 0) == 0) {
      // informational
    } else if (tag == "selected") {
      const auto kv = parse_kv_line(line, where);
      rep.selected.emplace_back(kv.at("method"), std::stod(kv.at("lambda")));
    } else if (tag == "cell") {
      const auto kv = parse_kv_line(line, where);
      ResultCell cell;
      cell.method = kv.at("method");
      cell.lambda = std::stod(kv.at("lambda"));
      cell.fold = std::stoi(kv.at("fold"));
      cell.report.n_instances = std::stoul(kv.at("n_instances"));
      cell.report.ranking_skipped = std::stoul(kv.at("ranking_skipped"));
      cell.report.map_skipped_classes = std::stoul(kv.at("map_skipped_classes"));
      cell.report.average_precision = std::stod(kv.at("average_precision"));
      cell.report.coverage = std::stod(kv.at("coverage"));
      cell.report.hamming_loss = std::stod(kv.at("hamming_loss"));
      cell.report.ranking_loss = std::stod(kv.at("ranking_loss"));
      cell.report.one_error = std::stod(kv.at("one_error"));
      cell.report.map = std::stod(kv.at("map"));
      cell.report.cf1 = std::stod(kv.at("cf1"));
      cell.report.of1 = std::stod(kv.at("of1"));
      rep.table.cells.push_back(std::move(cell));
    } else if (tag == "agg") {
      // Aggregates are recomputable from cells; nothing to retain.
    } else if (tag == "rank") {
      const auto kv = parse_kv_line(line, where);
      stats.alpha = std::stod(kv.at("alpha"));
      stats.friedman_chi2 = std::stod(kv.at("chi2"));
      stats.nemenyi_cd = std::stod(kv.at("cd"));
      stats.n_datasets = std::stoi(kv.at("n_datasets"));
      stats.k_methods = std::stoi(kv.at("k_methods"));
      have_stats = true;
    } else if (tag == "rank_method") {
      const auto kv = parse_kv_line(line, where);
      stats.method_names.push_back(kv.at("name"));
      stats.mean_ranks.push_back(std::stod(kv.at("mean_rank")));
      have_stats = true;
    } else {
      throw DataError(where + ": unknown record '" + tag + "'");
    }
  }
  if (have_stats) rep.stats = stats;
  return rep;
}

}  // namespace pml
