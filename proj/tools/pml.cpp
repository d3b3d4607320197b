// pml: command-line front end for the partial multi-label learning lab.
//
// Subcommands: synth, corrupt, train, eval, cv, ranks. Exit codes: 0 success,
// 1 usage, 2 data error, 3 internal. Every error path prints `error: ...` to
// stderr. All randomness flows from the --seed flag through documented RNG
// substreams, so rerunning a subcommand with the same flags reproduces its
// output files byte for byte. File-producing subcommands also write a `.meta`
// sidecar (or a `manifest` in --out-dir) with the resolved configuration.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "pml/corrupt.hpp"
#include "pml/dataset.hpp"
#include "pml/harness.hpp"
#include "pml/loss.hpp"
#include "pml/metrics.hpp"
#include "pml/mlp.hpp"
#include "pml/rng.hpp"

namespace {

class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Format versions recorded in meta/manifest files, one token per file kind.
const char* kFormatVersions = "dataset=ml/1 overlay=cand/1 report=pmlreport/1 "
                              "plot=cdplot/1 checkpoint=PMLM/1";

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw pml::DataError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw pml::DataError("cannot write " + path);
  out << content;
  if (!out) throw pml::DataError("write failed for " + path);
}

using KvList = std::vector<std::pair<std::string, std::string>>;

void write_meta(const std::string& out_path, const KvList& kv) {
  std::string text;
  for (const auto& [k, v] : kv) text += k + "=" + v + "\n";
  write_text_file(out_path, text);
}

std::pair<std::size_t, std::size_t> hidden_pair(const std::vector<std::size_t>& hidden) {
  if (hidden.size() == 1) return {hidden[0], hidden[0]};
  if (hidden.size() == 2) return {hidden[0], hidden[1]};
  throw UsageError("--hidden takes one or two comma-separated sizes");
}

double mean_label_count(const std::vector<std::vector<int>>& rows) {
  std::size_t total = 0;
  for (const auto& r : rows) total += r.size();
  return rows.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(rows.size());
}

// ---------------------------------------------------------------------------

struct SynthOpts {
  std::size_t n = 0;
  int classes = 10;
  std::size_t dim = 50;
  int labels_min = 1;
  int labels_max = 3;
  double noise = 0.5;
  std::uint64_t seed = 0;
  std::string out;
};

int run_synth(const SynthOpts& o) {
  if (o.labels_max < o.labels_min) throw UsageError("--labels-max must be >= --labels-min");
  if (o.labels_max > o.classes) throw UsageError("--labels-max cannot exceed --classes");
  const pml::Dataset ds = pml::synth_generate(o.n, o.classes, o.dim,
                                              {o.labels_min, o.labels_max}, o.noise, o.seed);
  pml::save_dataset(ds, o.out);
  write_meta(o.out + ".meta",
             {{"command", "synth"},
              {"n", std::to_string(o.n)},
              {"classes", std::to_string(o.classes)},
              {"dim", std::to_string(o.dim)},
              {"labels_min", std::to_string(o.labels_min)},
              {"labels_max", std::to_string(o.labels_max)},
              {"noise", fmt17(o.noise)},
              {"seed", std::to_string(o.seed)},
              {"out", o.out},
              {"formats", kFormatVersions}});
  std::cout << "wrote " << o.out << ": n=" << ds.num_instances() << " C=" << ds.num_classes
            << " d=" << ds.dim() << " mean|Y|=" << mean_label_count(ds.true_labels) << "\n";
  return 0;
}

struct CorruptOpts {
  std::string data;
  std::string mode;
  double q = 0.0;
  std::uint64_t seed = 0;
  int scorer_epochs = 200;
  double scorer_lr = 0.5;
  std::string out;
};

int run_corrupt(const CorruptOpts& o) {
  const pml::Dataset ds = pml::load_dataset(o.data);
  pml::CorruptionConfig cc;
  cc.mode = pml::candidate_source_from_string(o.mode);
  cc.q = o.q;
  cc.seed = o.seed;
  cc.scorer_fit = {o.scorer_epochs, o.scorer_lr};
  const pml::CandidateOverlay overlay = pml::make_overlay(ds, cc);
  pml::save_overlay(overlay, o.out);
  write_meta(o.out + ".meta",
             {{"command", "corrupt"},
              {"data", o.data},
              {"data_hash", pml::hex64(pml::fnv1a64(read_file_bytes(o.data)))},
              {"mode", o.mode},
              {"q", fmt17(o.q)},
              {"seed", std::to_string(o.seed)},
              {"scorer_epochs", std::to_string(o.scorer_epochs)},
              {"scorer_lr", fmt17(o.scorer_lr)},
              {"out", o.out},
              {"formats", kFormatVersions}});
  std::cout << "wrote " << o.out << ": n=" << ds.num_instances()
            << " mean|Y|=" << mean_label_count(ds.true_labels)
            << " mean|S|=" << pml::mean_candidate_count(overlay) << "\n";
  return 0;
}

struct TrainOpts {
  std::string data;
  std::string overlay;
  std::vector<std::size_t> hidden = {256, 256};
  std::string loss = "propml";
  double lambda = 1.0;
  int epochs = 500;
  std::size_t batch = 128;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  std::string out;
};

int run_train(const TrainOpts& o) {
  const pml::Dataset ds = pml::load_dataset(o.data);
  const pml::CandidateOverlay overlay =
      o.overlay.empty() ? pml::clean_overlay(ds) : pml::load_overlay(o.overlay, ds);
  const auto [h1, h2] = hidden_pair(o.hidden);

  pml::TrainConfig tc;
  tc.epochs = o.epochs;
  tc.batch = o.batch;
  tc.lr = o.lr;
  tc.loss.kind = pml::loss_kind_from_string(o.loss);
  tc.loss.lambda = o.lambda;
  // Substreams 0/1 of the run seed: weight init and epoch shuffling.
  tc.seed = pml::Rng::derive_seed(o.seed, 1);

  pml::MlpModel model = pml::init_model(
      {ds.dim(), h1, h2, static_cast<std::size_t>(ds.num_classes)},
      pml::Rng::derive_seed(o.seed, 0));
  std::vector<std::size_t> all(ds.num_instances());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const pml::TrainTrace trace = pml::train(model, ds, overlay.candidates, all, tc);
  pml::save_model(model, o.out);

  const double final_loss = trace.epoch_loss.empty() ? 0.0 : trace.epoch_loss.back();
  write_meta(o.out + ".meta",
             {{"command", "train"},
              {"data", o.data},
              {"data_hash", pml::hex64(pml::fnv1a64(read_file_bytes(o.data)))},
              {"overlay", o.overlay},
              {"hidden", std::to_string(h1) + "," + std::to_string(h2)},
              {"loss", o.loss},
              {"lambda", fmt17(o.lambda)},
              {"epochs", std::to_string(o.epochs)},
              {"batch", std::to_string(o.batch)},
              {"lr", fmt17(o.lr)},
              {"seed", std::to_string(o.seed)},
              {"final_epoch_loss", fmt17(final_loss)},
              {"out", o.out},
              {"formats", kFormatVersions}});
  std::cout << "wrote " << o.out << ": final epoch loss " << final_loss << "\n";
  return 0;
}

struct EvalOpts {
  std::string data;
  std::string model;
  std::string out;
};

int run_eval(const EvalOpts& o) {
  const pml::Dataset ds = pml::load_dataset(o.data);
  const pml::MlpModel model = pml::load_model(o.model);
  if (model.dims[0] != ds.dim() ||
      model.dims[3] != static_cast<std::size_t>(ds.num_classes)) {
    throw pml::DataError("model (" + std::to_string(model.dims[0]) + " features, " +
                         std::to_string(model.dims[3]) + " classes) does not match dataset (" +
                         std::to_string(ds.dim()) + " features, " +
                         std::to_string(ds.num_classes) + " classes)");
  }
  const pml::Matrix logits = pml::predict_logits(model, ds.features);
  // Ranking over logits; logit threshold 0 == probability threshold 0.5.
  const pml::MetricReport report = pml::evaluate_metrics(logits, ds.true_labels, 0.0);
  std::cout << report.to_record();
  if (!o.out.empty()) {
    write_text_file(o.out, report.to_record());
    write_meta(o.out + ".meta",
               {{"command", "eval"},
                {"data", o.data},
                {"data_hash", pml::hex64(pml::fnv1a64(read_file_bytes(o.data)))},
                {"model", o.model},
                {"model_hash", pml::hex64(pml::fnv1a64(read_file_bytes(o.model)))},
                {"out", o.out},
                {"formats", kFormatVersions}});
  }
  return 0;
}

struct CvOpts {
  std::string data;
  std::string overlay;
  std::string mode;
  double q = 0.0;
  bool have_q = false;
  std::uint64_t corrupt_seed = 0;
  int scorer_epochs = 200;
  double scorer_lr = 0.5;
  int folds = 5;
  std::vector<double> grid = {0.02, 0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0};
  std::vector<std::size_t> hidden = {256, 256};
  int epochs = 500;
  std::size_t batch = 128;
  double lr = 1e-3;
  std::vector<std::string> methods = {"propml", "bce"};
  std::string criterion = "average_precision";
  std::uint64_t seed = 0;
  int jobs = 0;
  std::string out_dir;
};

int run_cv_cmd(const CvOpts& o) {
  pml::ExperimentConfig ec;
  ec.dataset_path = o.data;
  ec.overlay_path = o.overlay;
  if (!o.mode.empty()) {
    if (!o.have_q) throw UsageError("--mode requires --q");
    pml::CorruptionConfig cc;
    cc.mode = pml::candidate_source_from_string(o.mode);
    cc.q = o.q;
    cc.seed = o.corrupt_seed;
    cc.scorer_fit = {o.scorer_epochs, o.scorer_lr};
    ec.corruption = cc;
  } else if (o.have_q) {
    throw UsageError("--q requires --mode");
  }
  ec.folds = o.folds;
  ec.lambda_grid = o.grid;
  std::tie(ec.hidden1, ec.hidden2) = hidden_pair(o.hidden);
  ec.train.epochs = o.epochs;
  ec.train.batch = o.batch;
  ec.train.lr = o.lr;
  ec.methods.clear();
  for (const auto& m : o.methods) ec.methods.push_back(pml::loss_kind_from_string(m));
  ec.selection_criterion = o.criterion;
  ec.seed = o.seed;
  ec.jobs = o.jobs > 0 ? o.jobs
                       : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  const pml::Dataset ds = pml::load_dataset(o.data);
  pml::CandidateOverlay overlay;
  if (!ec.overlay_path.empty()) {
    overlay = pml::load_overlay(ec.overlay_path, ds);
  } else if (ec.corruption) {
    overlay = pml::make_overlay(ds, *ec.corruption);
  } else {
    overlay = pml::clean_overlay(ds);
  }

  const pml::ResultsTable table = pml::run_cv(ds, overlay, ec);

  std::filesystem::create_directories(o.out_dir);
  const std::string report_path = o.out_dir + "/report.txt";
  pml::emit_report(table, nullptr, ec, report_path);

  KvList manifest = {{"command", "cv"},
                     {"config_hash", pml::hex64(pml::fnv1a64(pml::describe_config(ec)))},
                     {"jobs", std::to_string(ec.jobs)},
                     {"formats", kFormatVersions},
                     {"input_hash_dataset", pml::hex64(pml::fnv1a64(read_file_bytes(o.data)))}};
  if (!ec.overlay_path.empty()) {
    manifest.emplace_back("input_hash_overlay",
                          pml::hex64(pml::fnv1a64(read_file_bytes(ec.overlay_path))));
  }
  // The canonical config rendering, inlined so the manifest is self-contained.
  std::istringstream cfg(pml::describe_config(ec));
  std::string line;
  while (std::getline(cfg, line)) {
    const std::size_t eq = line.find('=');
    manifest.emplace_back("config." + line.substr(0, eq), line.substr(eq + 1));
  }
  write_meta(o.out_dir + "/manifest", manifest);

  std::cout << "wrote " << report_path << "\n";
  for (const auto& [method, lambda] : table.arms()) {
    const pml::Aggregate agg = table.aggregate(method, lambda, ec.selection_criterion);
    std::cout << method << " lambda=" << lambda << " " << ec.selection_criterion << " = "
              << agg.mean << " +/- " << agg.stddev << " over " << agg.n << " folds\n";
  }
  for (const pml::LossKind kind : ec.methods) {
    if (kind == pml::LossKind::propml) {
      std::cout << "selected lambda (" << ec.selection_criterion
                << "): " << pml::select_lambda(table, ec.selection_criterion) << "\n";
    }
  }
  return 0;
}

struct RanksOpts {
  std::vector<std::string> results;
  std::string better = "higher";
  double alpha = 0.05;
  std::string metric = "average_precision";
  std::string out;
};

int run_ranks(const RanksOpts& o) {
  if (o.results.size() < 2) throw UsageError("--results needs at least two report files");
  pml::metric_direction(o.metric);  // validates the name

  std::vector<std::string> method_names;  // column order, from the first file
  pml::Matrix scores;
  for (std::size_t i = 0; i < o.results.size(); ++i) {
    const pml::ParsedReport rep = pml::parse_report(o.results[i]);
    if (rep.selected.empty()) {
      throw pml::DataError(o.results[i] + ": no selected methods in report");
    }
    if (i == 0) {
      for (const auto& [m, l] : rep.selected) method_names.push_back(m);
      scores = pml::Matrix(o.results.size(), method_names.size());
    }
    // Methods must agree across reports; report the asymmetric difference.
    std::vector<std::string> here;
    for (const auto& [m, l] : rep.selected) here.push_back(m);
    std::string missing, extra;
    for (const auto& m : method_names) {
      if (std::find(here.begin(), here.end(), m) == here.end()) missing += " " + m;
    }
    for (const auto& m : here) {
      if (std::find(method_names.begin(), method_names.end(), m) == method_names.end()) {
        extra += " " + m;
      }
    }
    if (!missing.empty() || !extra.empty()) {
      throw pml::DataError(o.results[i] + ": method set differs from " + o.results[0] +
                           " (missing:" + (missing.empty() ? " none" : missing) +
                           "; extra:" + (extra.empty() ? " none" : extra) + ")");
    }
    for (const auto& [m, lambda] : rep.selected) {
      const std::size_t col = static_cast<std::size_t>(
          std::find(method_names.begin(), method_names.end(), m) - method_names.begin());
      const pml::Aggregate agg = rep.table.aggregate(m, lambda, o.metric);
      if (agg.n == 0) {
        throw pml::DataError(o.results[i] + ": no cells for selected method " + m);
      }
      scores(i, col) = agg.mean;
    }
  }

  const pml::BetterDirection dir =
      o.better == "higher" ? pml::BetterDirection::higher : pml::BetterDirection::lower;
  pml::RankStats stats = pml::friedman_nemenyi(scores, dir, o.alpha);
  stats.method_names = method_names;
  pml::write_cd_plot(stats, o.out);

  KvList meta = {{"command", "ranks"},
                 {"better", o.better},
                 {"alpha", fmt17(o.alpha)},
                 {"metric", o.metric},
                 {"out", o.out},
                 {"formats", kFormatVersions}};
  for (const auto& path : o.results) {
    meta.emplace_back("input_hash_" + path, pml::hex64(pml::fnv1a64(read_file_bytes(path))));
  }
  write_meta(o.out + ".meta", meta);

  std::cout << "friedman chi2 = " << stats.friedman_chi2 << " (k=" << stats.k_methods
            << ", n=" << stats.n_datasets << ")\n";
  std::cout << "nemenyi cd = " << stats.nemenyi_cd << " at alpha " << stats.alpha << "\n";
  for (std::size_t j = 0; j < method_names.size(); ++j) {
    std::cout << "mean rank " << method_names[j] << " = " << stats.mean_ranks[j] << "\n";
  }
  std::cout << "wrote " << o.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"partial multi-label learning lab"};
  app.name("pml");
  app.require_subcommand(1);
  const auto non_negative = CLI::Range(0.0, std::numeric_limits<double>::max());

  SynthOpts synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset file");
  synth_cmd->add_option("--n", synth.n, "number of instances")
      ->required()
      ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));
  synth_cmd->add_option("--classes", synth.classes, "number of classes")
      ->capture_default_str()
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  synth_cmd->add_option("--dim", synth.dim, "feature dimension")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));
  synth_cmd->add_option("--labels-min", synth.labels_min, "minimum true labels per instance")
      ->capture_default_str()
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  synth_cmd->add_option("--labels-max", synth.labels_max, "maximum true labels per instance")
      ->capture_default_str()
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  synth_cmd->add_option("--noise", synth.noise, "feature noise standard deviation")
      ->capture_default_str()
      ->check(non_negative);
  synth_cmd->add_option("--seed", synth.seed, "RNG seed")->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "output dataset path")->required();

  CorruptOpts corrupt;
  CLI::App* corrupt_cmd =
      app.add_subcommand("corrupt", "derive a candidate-label overlay from a dataset");
  corrupt_cmd->add_option("--data", corrupt.data, "dataset path")
      ->required()
      ->check(CLI::ExistingFile);
  corrupt_cmd->add_option("--mode", corrupt.mode, "corruption protocol")
      ->required()
      ->check(CLI::IsMember({"flip", "scorer"}));
  corrupt_cmd
      ->add_option("--q", corrupt.q,
                   "strength: flip probability (flip) or false/true ratio (scorer)")
      ->required()
      ->check(non_negative);
  corrupt_cmd->add_option("--seed", corrupt.seed, "RNG seed")->capture_default_str();
  corrupt_cmd->add_option("--scorer-epochs", corrupt.scorer_epochs, "scorer fit epochs")
      ->capture_default_str()
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  corrupt_cmd->add_option("--scorer-lr", corrupt.scorer_lr, "scorer fit learning rate")
      ->capture_default_str()
      ->check(CLI::Range(std::numeric_limits<double>::min(),
                         std::numeric_limits<double>::max()));
  corrupt_cmd->add_option("--out", corrupt.out, "output overlay path")->required();

  TrainOpts train;
  CLI::App* train_cmd = app.add_subcommand("train", "train an MLP on candidate labels");
  train_cmd->add_option("--data", train.data, "dataset path")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--overlay", train.overlay,
                        "candidate overlay path (default: clean labels)")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--hidden", train.hidden, "hidden sizes h1,h2 (one value = both)")
      ->delimiter(',')
      ->capture_default_str();
  train_cmd->add_option("--loss", train.loss, "training loss")
      ->capture_default_str()
      ->check(CLI::IsMember({"propml", "bce"}));
  train_cmd->add_option("--lambda", train.lambda, "off-candidate penalty weight")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  train_cmd->add_option("--epochs", train.epochs, "training epochs")
      ->capture_default_str()
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  train_cmd->add_option("--batch", train.batch, "mini-batch size")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));
  train_cmd->add_option("--lr", train.lr, "Adam learning rate")
      ->capture_default_str()
      ->check(CLI::Range(std::numeric_limits<double>::min(),
                         std::numeric_limits<double>::max()));
  train_cmd->add_option("--seed", train.seed, "RNG seed")->capture_default_str();
  train_cmd->add_option("--out", train.out, "output checkpoint path")->required();

  EvalOpts eval;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "evaluate a checkpoint against true labels");
  eval_cmd->add_option("--data", eval.data, "dataset path")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--model", eval.model, "checkpoint path")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval.out, "also write the metric record to this path");

  CvOpts cv;
  CLI::App* cv_cmd = app.add_subcommand(
      "cv", "cross-validated lambda-grid experiment with report output");
  cv_cmd->set_config("--config", "",
                     "read options from a key=value file (command-line flags win)");
  cv_cmd->add_option("--data", cv.data, "dataset path")->required()->check(CLI::ExistingFile);
  CLI::Option* overlay_opt =
      cv_cmd->add_option("--overlay", cv.overlay, "candidate overlay path")
          ->check(CLI::ExistingFile);
  CLI::Option* mode_opt =
      cv_cmd->add_option("--mode", cv.mode, "inline corruption protocol")
          ->check(CLI::IsMember({"flip", "scorer"}));
  overlay_opt->excludes(mode_opt);
  CLI::Option* q_opt = cv_cmd->add_option("--q", cv.q, "inline corruption strength")
                           ->check(non_negative);
  overlay_opt->excludes(q_opt);
  cv_cmd->add_option("--corrupt-seed", cv.corrupt_seed, "inline corruption RNG seed")
      ->capture_default_str();
  cv_cmd->add_option("--scorer-epochs", cv.scorer_epochs, "scorer fit epochs")
      ->capture_default_str()
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  cv_cmd->add_option("--scorer-lr", cv.scorer_lr, "scorer fit learning rate")
      ->capture_default_str()
      ->check(CLI::Range(std::numeric_limits<double>::min(),
                         std::numeric_limits<double>::max()));
  cv_cmd->add_option("--folds", cv.folds, "cross-validation folds")
      ->capture_default_str()
      ->check(CLI::Range(2, std::numeric_limits<int>::max()));
  cv_cmd->add_option("--lambda-grid", cv.grid, "lambda grid values in (0, 1]")
      ->delimiter(',')
      ->capture_default_str();
  cv_cmd->add_option("--hidden", cv.hidden, "hidden sizes h1,h2 (one value = both)")
      ->delimiter(',')
      ->capture_default_str();
  cv_cmd->add_option("--epochs", cv.epochs, "training epochs")
      ->capture_default_str()
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  cv_cmd->add_option("--batch", cv.batch, "mini-batch size")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));
  cv_cmd->add_option("--lr", cv.lr, "Adam learning rate")
      ->capture_default_str()
      ->check(CLI::Range(std::numeric_limits<double>::min(),
                         std::numeric_limits<double>::max()));
  cv_cmd->add_option("--methods", cv.methods, "losses to compare")
      ->delimiter(',')
      ->capture_default_str();
  cv_cmd->add_option("--criterion", cv.criterion, "lambda selection metric")
      ->capture_default_str();
  cv_cmd->add_option("--seed", cv.seed, "RNG seed")->capture_default_str();
  cv_cmd->add_option("--jobs", cv.jobs, "worker threads (0 = all cores)")
      ->capture_default_str()
      ->check(CLI::Range(0, std::numeric_limits<int>::max()));
  cv_cmd->add_option("--out-dir", cv.out_dir, "output directory")->required();

  RanksOpts ranks;
  CLI::App* ranks_cmd = app.add_subcommand(
      "ranks", "Friedman/Nemenyi rank comparison across report files");
  ranks_cmd->add_option("--results", ranks.results, "report files (one per dataset)")
      ->required()
      ->expected(1, std::numeric_limits<int>::max());
  ranks_cmd->add_option("--better", ranks.better, "direction of improvement")
      ->capture_default_str()
      ->check(CLI::IsMember({"higher", "lower"}));
  ranks_cmd->add_option("--alpha", ranks.alpha, "significance level (0.05 or 0.10)")
      ->capture_default_str();
  ranks_cmd->add_option("--metric", ranks.metric, "metric to compare on")
      ->capture_default_str();
  ranks_cmd->add_option("--out", ranks.out, "output plot-data path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (app.got_subcommand(synth_cmd)) return run_synth(synth);
    if (app.got_subcommand(corrupt_cmd)) return run_corrupt(corrupt);
    if (app.got_subcommand(train_cmd)) return run_train(train);
    if (app.got_subcommand(eval_cmd)) return run_eval(eval);
    if (app.got_subcommand(cv_cmd)) {
      cv.have_q = q_opt->count() > 0 || !q_opt->results().empty();
      return run_cv_cmd(cv);
    }
    if (app.got_subcommand(ranks_cmd)) return run_ranks(ranks);
    std::cerr << "error: no subcommand\n";
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const pml::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
