#include "pml/harness.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "pml/corrupt.hpp"
#include "pml/dataset.hpp"
#include "pml/matrix.hpp"
#include "pml/rng.hpp"
#include "test_util.hpp"

using pml::Aggregate;
using pml::BetterDirection;
using pml::CandidateSource;
using pml::CorruptionConfig;
using pml::Dataset;
using pml::ExperimentConfig;
using pml::LossKind;
using pml::Matrix;
using pml::MetricReport;
using pml::RankStats;
using pml::ResultCell;
using pml::ResultsTable;

namespace {

// Small but non-trivial: 40 instances, 3 classes, 5 folds, 3-lambda grid.
ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.folds = 5;
  cfg.lambda_grid = {0.1, 0.5, 1.0};
  cfg.hidden1 = 4;
  cfg.hidden2 = 4;
  cfg.train.epochs = 3;
  cfg.train.batch = 32;
  cfg.seed = 7;
  return cfg;
}

Dataset tiny_dataset() { return pml::synth_generate(40, 3, 6, {1, 2}, 0.3, 19); }

bool tables_equal(const ResultsTable& a, const ResultsTable& b) {
  if (a.cells.size() != b.cells.size()) return false;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    const ResultCell& x = a.cells[i];
    const ResultCell& y = b.cells[i];
    if (x.method != y.method || x.lambda != y.lambda || x.fold != y.fold) return false;
    if (x.report.n_instances != y.report.n_instances) return false;
    for (const auto& name : MetricReport::metric_names()) {
      if (x.report.metric(name) != y.report.metric(name)) return false;
    }
  }
  return true;
}

ResultCell make_cell(const std::string& method, double lambda, int fold, double ap,
                     double hamming) {
  ResultCell cell;
  cell.method = method;
  cell.lambda = lambda;
  cell.fold = fold;
  cell.report.n_instances = 10;
  cell.report.average_precision = ap;
  cell.report.hamming_loss = hamming;
  return cell;
}

}  // namespace

TEST_CASE("metric_direction") {
  CHECK(pml::metric_direction("average_precision") == BetterDirection::higher);
  CHECK(pml::metric_direction("map") == BetterDirection::higher);
  CHECK(pml::metric_direction("cf1") == BetterDirection::higher);
  CHECK(pml::metric_direction("of1") == BetterDirection::higher);
  CHECK(pml::metric_direction("coverage") == BetterDirection::lower);
  CHECK(pml::metric_direction("hamming_loss") == BetterDirection::lower);
  CHECK(pml::metric_direction("ranking_loss") == BetterDirection::lower);
  CHECK(pml::metric_direction("one_error") == BetterDirection::lower);
  CHECK_THROWS_AS(pml::metric_direction("accuracy"), std::invalid_argument);
}

TEST_CASE("make_overlay dispatches on the corruption mode") {
  const Dataset ds = tiny_dataset();
  CorruptionConfig cc;
  cc.q = 0.3;
  cc.seed = 11;

  cc.mode = CandidateSource::flip;
  const auto flip = pml::make_overlay(ds, cc);
  CHECK(flip.source == CandidateSource::flip);
  CHECK(flip.q == 0.3);
  CHECK(flip.seed == 11);
  CHECK(flip.candidates == pml::corrupt_flip(ds, 0.3, 11).candidates);

  cc.mode = CandidateSource::scorer;
  cc.q = 1.0;
  const auto scorer = pml::make_overlay(ds, cc);
  CHECK(scorer.source == CandidateSource::scorer);
  CHECK(pml::mean_candidate_count(scorer) > pml::mean_candidate_count(pml::clean_overlay(ds)));

  cc.mode = CandidateSource::clean;
  const auto clean = pml::make_overlay(ds, cc);
  CHECK(clean.candidates == ds.true_labels);
}

TEST_CASE("run_cv produces the full canonical cell grid") {
  const Dataset ds = tiny_dataset();
  const auto overlay = pml::clean_overlay(ds);
  ExperimentConfig cfg = tiny_config();

  SUBCASE("propml only") {
    cfg.methods = {LossKind::propml};
    const ResultsTable table = pml::run_cv(ds, overlay, cfg);
    CHECK(table.cells.size() == 15);  // 3 lambdas x 5 folds
    CHECK(table.arms().size() == 3);
  }
  SUBCASE("both methods, canonical order") {
    const ResultsTable table = pml::run_cv(ds, overlay, cfg);
    REQUIRE(table.cells.size() == 20);
    const auto arms = table.arms();
    REQUIRE(arms.size() == 4);
    CHECK(arms[0] == std::pair<std::string, double>{"propml", 0.1});
    CHECK(arms[1] == std::pair<std::string, double>{"propml", 0.5});
    CHECK(arms[2] == std::pair<std::string, double>{"propml", 1.0});
    CHECK(arms[3] == std::pair<std::string, double>{"bce", 0.0});
    for (std::size_t i = 0; i < table.cells.size(); ++i) {
      CHECK(table.cells[i].method == arms[i / 5].first);
      CHECK(table.cells[i].lambda == arms[i / 5].second);
      CHECK(table.cells[i].fold == static_cast<int>(i % 5));
    }
    // Fold sizes: 40 instances over 5 folds -> every test fold holds 8.
    for (const auto& cell : table.cells) CHECK(cell.report.n_instances == 8);
  }
  SUBCASE("config validation") {
    ExperimentConfig bad = cfg;
    bad.folds = 1;
    CHECK_THROWS_AS(pml::run_cv(ds, overlay, bad), std::invalid_argument);
    bad = cfg;
    bad.methods.clear();
    CHECK_THROWS_AS(pml::run_cv(ds, overlay, bad), std::invalid_argument);
    bad = cfg;
    bad.lambda_grid = {0.0};
    CHECK_THROWS_AS(pml::run_cv(ds, overlay, bad), std::invalid_argument);
    bad = cfg;
    bad.lambda_grid = {1.5};
    CHECK_THROWS_AS(pml::run_cv(ds, overlay, bad), std::invalid_argument);
    bad = cfg;
    bad.lambda_grid.clear();
    CHECK_THROWS_AS(pml::run_cv(ds, overlay, bad), std::invalid_argument);
  }
}

TEST_CASE("run_cv is deterministic and worker-count independent") {
  const Dataset ds = tiny_dataset();
  const auto overlay = pml::corrupt_flip(ds, 0.4, 23);
  ExperimentConfig cfg = tiny_config();

  const ResultsTable once = pml::run_cv(ds, overlay, cfg);
  const ResultsTable twice = pml::run_cv(ds, overlay, cfg);
  CHECK(tables_equal(once, twice));

  cfg.jobs = 3;
  const ResultsTable threaded = pml::run_cv(ds, overlay, cfg);
  CHECK(tables_equal(once, threaded));
}

TEST_CASE("run_cv learns easy clean data with both losses") {
  const Dataset ds = pml::synth_generate(60, 3, 6, {1, 2}, 0.0, 29);
  ExperimentConfig cfg;
  cfg.folds = 3;
  cfg.lambda_grid = {0.5};
  cfg.hidden1 = 8;
  cfg.hidden2 = 8;
  cfg.train.epochs = 60;
  cfg.train.batch = 64;
  cfg.train.lr = 1e-2;
  cfg.seed = 31;
  const ResultsTable table = pml::run_cv(ds, pml::clean_overlay(ds), cfg);
  CHECK(table.aggregate("propml", 0.5, "average_precision").mean > 0.95);
  CHECK(table.aggregate("bce", 0.0, "average_precision").mean > 0.95);
}

TEST_CASE("aggregate computes mean and sample standard deviation") {
  ResultsTable table;
  table.cells.push_back(make_cell("propml", 0.5, 0, 0.80, 0.10));
  table.cells.push_back(make_cell("propml", 0.5, 1, 0.90, 0.20));
  table.cells.push_back(make_cell("propml", 0.5, 2, 0.70, 0.30));
  table.cells.push_back(make_cell("bce", 0.0, 0, 0.60, 0.40));

  const Aggregate agg = table.aggregate("propml", 0.5, "average_precision");
  CHECK(agg.n == 3);
  CHECK(agg.mean == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(agg.stddev == doctest::Approx(0.1).epsilon(1e-12));

  const Aggregate single = table.aggregate("bce", 0.0, "average_precision");
  CHECK(single.n == 1);
  CHECK(single.mean == 0.6);
  CHECK(single.stddev == 0.0);

  CHECK(table.aggregate("propml", 0.9, "average_precision").n == 0);
}

TEST_CASE("select_lambda picks the best mean under the criterion direction") {
  ResultsTable table;
  // lambda 0.1: AP mean 0.80, hamming mean 0.15
  table.cells.push_back(make_cell("propml", 0.1, 0, 0.75, 0.10));
  table.cells.push_back(make_cell("propml", 0.1, 1, 0.85, 0.20));
  // lambda 0.5: AP mean 0.90, hamming mean 0.25
  table.cells.push_back(make_cell("propml", 0.5, 0, 0.88, 0.20));
  table.cells.push_back(make_cell("propml", 0.5, 1, 0.92, 0.30));
  table.cells.push_back(make_cell("bce", 0.0, 0, 0.99, 0.01));

  CHECK(pml::select_lambda(table, "average_precision") == 0.5);
  CHECK(pml::select_lambda(table, "hamming_loss") == 0.1);

  SUBCASE("ties keep the smaller lambda") {
    ResultsTable tied;
    tied.cells.push_back(make_cell("propml", 0.1, 0, 0.9, 0.1));
    tied.cells.push_back(make_cell("propml", 0.7, 0, 0.9, 0.1));
    CHECK(pml::select_lambda(tied, "average_precision") == 0.1);
  }
  SUBCASE("single lambda") {
    ResultsTable one;
    one.cells.push_back(make_cell("propml", 0.35, 0, 0.5, 0.5));
    CHECK(pml::select_lambda(one, "average_precision") == 0.35);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(pml::select_lambda(table, "not_a_metric"), std::invalid_argument);
    ResultsTable empty;
    CHECK_THROWS_AS(pml::select_lambda(empty, "average_precision"), std::invalid_argument);
  }
}

TEST_CASE("friedman_nemenyi") {
  SUBCASE("identical orderings across rows give chi2 = 6 for k = 3, n = 3") {
    const Matrix scores = Matrix::of({{3.0, 2.0, 1.0}, {9.0, 5.0, 4.0}, {0.3, 0.2, 0.1}});
    const RankStats stats = pml::friedman_nemenyi(scores, BetterDirection::higher, 0.05);
    CHECK(stats.mean_ranks[0] == 1.0);
    CHECK(stats.mean_ranks[1] == 2.0);
    CHECK(stats.mean_ranks[2] == 3.0);
    CHECK(stats.friedman_chi2 == doctest::Approx(6.0).epsilon(1e-12));
    // CD = 2.343 * sqrt(3*4 / (6*3))
    CHECK(stats.nemenyi_cd == doctest::Approx(2.343 * std::sqrt(2.0 / 3.0)).epsilon(1e-12));
  }
  SUBCASE("all-equal scores tie at the midpoint rank with chi2 = 0") {
    const Matrix scores(4, 3, 0.5);
    const RankStats stats = pml::friedman_nemenyi(scores, BetterDirection::higher, 0.05);
    for (double r : stats.mean_ranks) CHECK(r == 2.0);  // (k+1)/2
    CHECK(stats.friedman_chi2 == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("critical difference reference values") {
    pml::Rng rng(40);
    Matrix m(25, 6);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform();
    const RankStats a = pml::friedman_nemenyi(m, BetterDirection::higher, 0.05);
    CHECK(a.nemenyi_cd == doctest::Approx(1.508).epsilon(1e-3));  // 2.850*sqrt(42/150)

    Matrix m2(10, 2);
    for (std::size_t i = 0; i < m2.size(); ++i) m2.data()[i] = rng.uniform();
    const RankStats b = pml::friedman_nemenyi(m2, BetterDirection::higher, 0.10);
    CHECK(b.nemenyi_cd == doctest::Approx(1.645 * std::sqrt(0.1)).epsilon(1e-12));
  }
  SUBCASE("mean ranks always sum to k(k+1)/2") {
    pml::Rng rng(41);
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t k = 2 + rng.bounded(9);  // 2..10
      Matrix m(5, k);
      for (std::size_t i = 0; i < m.size(); ++i) {
        m.data()[i] = rng.bounded(4) * 0.25;  // coarse values force ties
      }
      const RankStats stats = pml::friedman_nemenyi(m, BetterDirection::higher, 0.05);
      const double total =
          std::accumulate(stats.mean_ranks.begin(), stats.mean_ranks.end(), 0.0);
      CHECK(total == doctest::Approx(static_cast<double>(k * (k + 1)) / 2.0).epsilon(1e-9));
    }
  }
  SUBCASE("a strictly dominant method ranks exactly 1") {
    const Matrix scores = Matrix::of({{0.9, 0.5, 0.4}, {0.8, 0.2, 0.7}, {0.99, 0.1, 0.5}});
    const RankStats stats = pml::friedman_nemenyi(scores, BetterDirection::higher, 0.05);
    CHECK(stats.mean_ranks[0] == 1.0);
  }
  SUBCASE("better=lower reverses the ranking") {
    const Matrix scores = Matrix::of({{0.1, 0.9}, {0.2, 0.8}});
    const RankStats low = pml::friedman_nemenyi(scores, BetterDirection::lower, 0.05);
    CHECK(low.mean_ranks[0] == 1.0);
    CHECK(low.mean_ranks[1] == 2.0);
    const RankStats high = pml::friedman_nemenyi(scores, BetterDirection::higher, 0.05);
    CHECK(high.mean_ranks[0] == 2.0);
    CHECK(high.mean_ranks[1] == 1.0);
  }
  SUBCASE("input validation") {
    const Matrix ok(3, 3, 0.0);
    CHECK_THROWS_AS(pml::friedman_nemenyi(Matrix(1, 3, 0.0), BetterDirection::higher, 0.05),
                    std::invalid_argument);
    CHECK_THROWS_AS(pml::friedman_nemenyi(Matrix(3, 1, 0.0), BetterDirection::higher, 0.05),
                    std::invalid_argument);
    CHECK_THROWS_AS(pml::friedman_nemenyi(Matrix(3, 11, 0.0), BetterDirection::higher, 0.05),
                    std::invalid_argument);
    CHECK_THROWS_AS(pml::friedman_nemenyi(ok, BetterDirection::higher, 0.07),
                    std::invalid_argument);
  }
}

TEST_CASE("report emit and parse round trip") {
  testutil::TempDir tmp("harness_report");
  const Dataset ds = tiny_dataset();
  const ExperimentConfig cfg = tiny_config();
  const ResultsTable table = pml::run_cv(ds, pml::clean_overlay(ds), cfg);

  SUBCASE("without rank stats") {
    const std::string path = tmp.file("report.txt");
    pml::emit_report(table, nullptr, cfg, path);
    CHECK_FALSE(std::filesystem::exists(path + ".cd"));

    const pml::ParsedReport rep = pml::parse_report(path);
    CHECK(rep.seed == cfg.seed);
    CHECK(rep.config_hash == pml::hex64(pml::fnv1a64(pml::describe_config(cfg))));
    CHECK_FALSE(rep.stats.has_value());
    CHECK(tables_equal(rep.table, table));

    // Aggregates recomputed from the parsed cells match the originals bit for
    // bit because cell metrics are printed with 17 significant digits.
    for (const auto& [method, lambda] : table.arms()) {
      for (const auto& name : MetricReport::metric_names()) {
        const Aggregate a = table.aggregate(method, lambda, name);
        const Aggregate b = rep.table.aggregate(method, lambda, name);
        CHECK(a.mean == b.mean);
        CHECK(a.stddev == b.stddev);
        CHECK(a.n == b.n);
      }
    }

    REQUIRE(rep.selected.size() == 2);
    CHECK(rep.selected[0].first == "propml");
    CHECK(rep.selected[0].second == pml::select_lambda(table, cfg.selection_criterion));
    CHECK(rep.selected[1].first == "bce");
    CHECK(rep.selected[1].second == 0.0);
  }

  SUBCASE("with rank stats and plot data") {
    pml::Rng rng(55);
    Matrix scores(4, 2);
    for (std::size_t i = 0; i < scores.size(); ++i) scores.data()[i] = rng.uniform();
    RankStats stats = pml::friedman_nemenyi(scores, BetterDirection::higher, 0.05);
    stats.method_names = {"propml", "bce"};

    const std::string path = tmp.file("ranked.txt");
    pml::emit_report(table, &stats, cfg, path);
    CHECK(std::filesystem::exists(path + ".cd"));

    const pml::ParsedReport rep = pml::parse_report(path);
    REQUIRE(rep.stats.has_value());
    CHECK(rep.stats->alpha == stats.alpha);
    CHECK(rep.stats->friedman_chi2 == stats.friedman_chi2);
    CHECK(rep.stats->nemenyi_cd == stats.nemenyi_cd);
    CHECK(rep.stats->n_datasets == stats.n_datasets);
    CHECK(rep.stats->k_methods == stats.k_methods);
    CHECK(rep.stats->mean_ranks == stats.mean_ranks);
    CHECK(rep.stats->method_names == stats.method_names);

    const std::string plot = testutil::read_file(path + ".cd");
    CHECK(plot.rfind("#cdplot v1\n", 0) == 0);
    CHECK(plot.find("method name=propml") != std::string::npos);
  }

  SUBCASE("malformed reports are rejected") {
    const std::string bad1 = tmp.file("bad1.txt");
    testutil::write_file(bad1, "not a report\n");
    CHECK_THROWS_AS(pml::parse_report(bad1), pml::DataError);

    const std::string bad2 = tmp.file("bad2.txt");
    testutil::write_file(bad2, "#pmlreport v1\nmystery record=1\n");
    CHECK_THROWS_AS(pml::parse_report(bad2), pml::DataError);

    CHECK_THROWS_AS(pml::parse_report(tmp.file("absent.txt")), pml::DataError);
  }
}

TEST_CASE("fnv1a64 reference vectors and hex rendering") {
  CHECK(pml::fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(pml::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(pml::hex64(0xcbf29ce484222325ULL) == "cbf29ce484222325");
  CHECK(pml::hex64(0x1ULL) == "0000000000000001");
}

TEST_CASE("describe_config covers seeds but not worker counts") {
  ExperimentConfig a = tiny_config();
  ExperimentConfig b = a;
  b.jobs = 16;
  CHECK(pml::describe_config(a) == pml::describe_config(b));

  b = a;
  b.seed = a.seed + 1;
  CHECK(pml::describe_config(a) != pml::describe_config(b));

  b = a;
  b.lambda_grid = {0.2};
  CHECK(pml::describe_config(a) != pml::describe_config(b));

  b = a;
  b.corruption = CorruptionConfig{};
  CHECK(pml::describe_config(a) != pml::describe_config(b));
}

TEST_CASE("run_parallel fills disjoint slots regardless of worker count") {
  const std::size_t n = 37;
  std::vector<double> inline_out(n, 0.0);
  pml::run_parallel(n, 1, [&](std::size_t i) {
    inline_out[i] = std::sqrt(static_cast<double>(i) + 0.25);
  });
  for (int workers : {2, 5, 64}) {
    std::vector<double> out(n, 0.0);
    std::atomic<int> calls{0};
    pml::run_parallel(n, workers, [&](std::size_t i) {
      out[i] = std::sqrt(static_cast<double>(i) + 0.25);
      calls.fetch_add(1);
    });
    CHECK(calls.load() == static_cast<int>(n));
    CHECK(out == inline_out);
  }
}
