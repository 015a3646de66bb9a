// Copyright 2026 The hexnas Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hexnas/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hexnas/errors.hpp"
#include "hexnas/gradsuite.hpp"
#include "hexnas/hexdata.hpp"
#include "hexnas/models.hpp"
#include "hexnas/nas.hpp"
#include "hexnas/random.hpp"
#include "hexnas/textio.hpp"
#include "hexnas/trainer.hpp"

namespace hexnas::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr std::uint64_t kSplitStream = 0x5350;
constexpr std::uint64_t kInitStream = 0x494E;
constexpr double kDefaultTrainFraction = 0.8;

// Usage problems found after flag parsing (unreadable inputs, mismatched
// checkpoints). Mapped to kUsage.
class UsageError : public Error {
 public:
  using Error::Error;
};

fs::path with_suffix(const fs::path& prefix, std::string_view suffix) {
  fs::path p = prefix;
  p += std::string(suffix);
  return p;
}

std::string utc_now() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Manifest {
 public:
  explicit Manifest(std::string_view subcommand) {
    doc_["tool"] = "hexnas";
    doc_["version"] = HEXNAS_VERSION;
    doc_["subcommand"] = subcommand;
    doc_["started_at"] = utc_now();
    doc_["parameters"] = Json::object();
    doc_["seeds"] = Json::object();
    doc_["inputs"] = Json::array();
    doc_["outputs"] = Json::array();
    doc_["results"] = Json::object();
  }

  Json& parameters() { return doc_["parameters"]; }
  Json& results() { return doc_["results"]; }
  void seed(const std::string& name, std::uint64_t value) {
    doc_["seeds"][name] = value;
  }
  void input(const fs::path& p) { doc_["inputs"].push_back(p.string()); }
  void output(const fs::path& p) { doc_["outputs"].push_back(p.string()); }

  void write(const fs::path& path, std::string_view status) {
    doc_["status"] = status;
    doc_["finished_at"] = utc_now();
    write_file_atomic(path, doc_.dump(2) + '\n');
  }

 private:
  Json doc_;
};

void require_file(const fs::path& p, std::string_view what) {
  if (!fs::is_regular_file(p)) {
    throw UsageError(std::string(what) + " '" + p.string() + "' not found");
  }
}

hexdata::Dataset load_dataset(const fs::path& p, Manifest& m) {
  require_file(p, "dataset");
  m.input(p);
  return hexdata::read_dataset(p);
}

// Training and validation sets: an explicit --val file, or a seeded split
// of --data.
std::pair<hexdata::Dataset, hexdata::Dataset> load_train_val(
    const std::string& data, const std::string& val, double fraction,
    std::uint64_t seed, Manifest& m) {
  hexdata::Dataset full = load_dataset(data, m);
  if (!val.empty()) {
    return {std::move(full), load_dataset(val, m)};
  }
  const std::uint64_t split_seed = derive_seed(seed, kSplitStream);
  m.seed("split", split_seed);
  m.parameters()["train_fraction"] = fraction;
  return hexdata::split_dataset(full, fraction, split_seed);
}

// --------------------------------------------------------------- config --

// Reads `key = value` lines with CLI11's parser and turns them into
// `--key=value` arguments.
std::vector<std::string> config_arguments(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw UsageError("config file '" + path.string() + "' not found");
  }
  std::vector<std::string> out;
  for (const auto& item : CLI::ConfigTOML().from_config(in)) {
    if (!item.parents.empty()) {
      throw UsageError("config file '" + path.string() +
                       "': sections are not supported (key '" + item.name +
                       "')");
    }
    if (item.name == "config") {
      throw UsageError("config files cannot include other config files");
    }
    std::string value;
    for (std::size_t i = 0; i < item.inputs.size(); ++i) {
      value += (i ? "," : "") + item.inputs[i];
    }
    out.push_back("--" + item.name + "=" + value);
  }
  return out;
}

// Splices `--config FILE` contents in front of the remaining flags so that
// explicit flags, parsed later, take precedence.
std::vector<std::string> expand_config(std::vector<std::string> args,
                                       std::string& config_path) {
  if (args.empty()) {
    return args;
  }
  for (std::size_t i = 1; i < args.size(); ++i) {
    std::string path;
    std::size_t used = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      used = 2;
    } else if (args[i].starts_with("--config=")) {
      path = args[i].substr(9);
      used = 1;
    } else {
      continue;
    }
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
               args.begin() + static_cast<std::ptrdiff_t>(i + used));
    const auto extra = config_arguments(path);
    args.insert(args.begin() + 1, extra.begin(), extra.end());
    config_path = path;
    break;
  }
  return args;
}

// ------------------------------------------------------------ subcommands --

struct GendataOpts {
  std::string op = "add";
  int digits = hexdata::kCanonicalWidth;
  std::size_t count = hexdata::kDeskCount;
  std::uint64_t seed = 0;
  std::string out;
  bool full_scale = false;
  std::string manifest;
};

int cmd_gendata(const GendataOpts& o, std::ostream& out) {
  Manifest m("gendata");
  const auto op = hexdata::parse_operation(o.op);
  const std::size_t count = o.full_scale ? hexdata::kFullCount : o.count;
  m.parameters()["op"] = hexdata::to_string(op);
  m.parameters()["digits"] = o.digits;
  m.parameters()["count"] = count;
  m.seed("data", o.seed);

  const auto ds = hexdata::generate_dataset(op, o.digits, count, o.seed);
  hexdata::write_dataset(ds, o.out);
  m.output(o.out);
  m.write(o.manifest.empty() ? with_suffix(o.out, ".manifest.json")
                             : fs::path(o.manifest),
          "ok");
  out << "wrote " << ds.count() << " samples (width " << o.digits << ", "
      << hexdata::to_string(op) << ") to " << o.out << '\n';
  return kOk;
}

struct TrainOpts {
  std::string arch = "fc";
  std::string data;
  std::string val;
  double train_fraction = kDefaultTrainFraction;
  int epochs = trainer::kLongEpochs;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  int hidden = models::kDefaultHidden;
  std::string slot2 = "linear";
  std::string out;
  bool full_scale = false;
  bool progress = false;
  std::string manifest;
};

void record_training(Manifest& m, const trainer::TrainConfig& tc) {
  m.parameters()["epochs"] = tc.epochs;
  m.parameters()["batch_size"] = tc.batch_size;
  m.parameters()["lr"] = tc.lr;
}

int cmd_train(const TrainOpts& o, std::ostream& out, std::ostream& err) {
  Manifest m("train");
  models::ModelSpec spec{models::parse_arch(o.arch), o.hidden,
                         models::parse_slot_kind(o.slot2)};
  m.parameters()["model"] = Json::parse(models::spec_to_json(spec));
  auto [train_ds, val_ds] =
      load_train_val(o.data, o.val, o.train_fraction, o.seed, m);
  m.parameters()["train_count"] = train_ds.count();
  m.parameters()["val_count"] = val_ds.count();

  trainer::TrainConfig tc;
  tc.epochs = o.full_scale ? trainer::kLongEpochs : o.epochs;
  tc.batch_size = o.batch_size;
  tc.lr = o.lr;
  tc.seed = o.seed;
  record_training(m, tc);
  const std::uint64_t init_seed = derive_seed(o.seed, kInitStream);
  m.seed("train", tc.seed);
  m.seed("init", init_seed);

  const fs::path prefix = o.out;
  const fs::path manifest_path = o.manifest.empty()
                                     ? with_suffix(prefix, ".manifest.json")
                                     : fs::path(o.manifest);
  const fs::path curve_path = with_suffix(prefix, ".curve.csv");
  models::Model model = models::build_model(spec, init_seed);
  trainer::EpochCallback progress;
  if (o.progress) {
    progress = [&err](const trainer::EpochRecord& r) {
      err << "epoch " << r.epoch << " train " << format_real(r.train_mse)
          << " val " << format_real(r.val_mse) << '\n';
    };
  }

  trainer::LossCurve curve;
  try {
    curve = trainer::train(model, train_ds, val_ds, tc, progress);
  } catch (const trainer::DivergedError& e) {
    const fs::path kept = with_suffix(curve_path, ".diverged");
    trainer::write_loss_curve(e.partial(), kept);
    m.output(kept);
    m.results()["diverged_epoch"] = e.epoch();
    m.results()["diverged_batch"] = e.batch();
    m.write(manifest_path, "diverged");
    err << "error: " << e.what() << "; partial curve kept at " << kept.string()
        << '\n';
    return kRuntime;
  }

  models::save_model(model, prefix);
  trainer::write_loss_curve(curve, curve_path);
  m.output(with_suffix(prefix, ".ckpt"));
  m.output(with_suffix(prefix, ".spec.json"));
  m.output(curve_path);

  const auto& last = curve.records.back();
  // Full pass with the final parameters; `eval` on the training set
  // reproduces this number.
  const double final_train = trainer::evaluate(model, train_ds);
  m.results()["parameter_count"] = model.parameter_count();
  m.results()["last_epoch_train_mse"] = last.train_mse;
  m.results()["final_val_mse"] = last.val_mse;
  m.results()["final_train_mse"] = final_train;
  m.write(manifest_path, "ok");

  out << "trained " << models::to_string(spec.arch) << " for " << tc.epochs
      << " epochs\n"
      << "last_epoch_train_mse " << format_real(last.train_mse) << '\n'
      << "final_val_mse " << format_real(last.val_mse) << '\n'
      << "final_train_mse " << format_real(final_train) << '\n';
  return kOk;
}

struct EvalOpts {
  std::string checkpoint;
  std::string data;
  std::string manifest;
};

models::Model load_checkpoint(const fs::path& prefix, Manifest& m) {
  const fs::path ckpt = with_suffix(prefix, ".ckpt");
  const fs::path spec = with_suffix(prefix, ".spec.json");
  require_file(ckpt, "checkpoint");
  require_file(spec, "model spec");
  m.input(ckpt);
  m.input(spec);
  try {
    return models::load_model(prefix);
  } catch (const ShapeError& e) {
    throw UsageError(std::string("checkpoint does not fit its spec: ") +
                     e.what());
  } catch (const IoError& e) {
    throw UsageError(std::string("unreadable checkpoint: ") + e.what());
  }
}

int cmd_eval(const EvalOpts& o, std::ostream& out) {
  Manifest m("eval");
  const models::Model model = load_checkpoint(o.checkpoint, m);
  const auto ds = load_dataset(o.data, m);
  const double loss = trainer::evaluate(model, ds);
  m.parameters()["model"] = Json::parse(models::spec_to_json(model.spec()));
  m.results()["mse"] = loss;
  m.results()["samples"] = ds.count();
  m.write(o.manifest.empty() ? with_suffix(o.checkpoint, ".eval.manifest.json")
                             : fs::path(o.manifest),
          "ok");
  out << format_real(loss) << '\n';
  return kOk;
}

struct NasOpts {
  std::string experiment = "valuechoice";
  std::string data;
  std::string val;
  double train_fraction = kDefaultTrainFraction;
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  int epochs = nas::kTrialEpochs;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  std::string out;
  std::string manifest;
};

int cmd_nas(const NasOpts& o, std::ostream& out, std::ostream& err) {
  Manifest m("nas");
  m.parameters()["experiment"] = o.experiment;
  auto [train_ds, val_ds] =
      load_train_val(o.data, o.val, o.train_fraction, o.seed, m);
  const nas::SearchSpace space = o.experiment == "valuechoice"
                                     ? nas::value_choice_space()
                                     : nas::layer_choice_space();
  nas::NasConfig cfg;
  cfg.budget = o.budget;
  cfg.seed = o.seed;
  cfg.max_epochs = o.epochs;
  cfg.training.batch_size = o.batch_size;
  cfg.training.lr = o.lr;
  cfg.threads = trainer::default_threads();
  m.parameters()["budget"] = o.budget == 0 ? space.size() : o.budget;
  m.parameters()["max_epochs"] = o.epochs;
  m.parameters()["batch_size"] = o.batch_size;
  m.parameters()["lr"] = o.lr;
  m.seed("search", o.seed);

  const fs::path prefix = o.out;
  const fs::path log_path = with_suffix(prefix, ".trials.csv");
  const fs::path winner_path = with_suffix(prefix, ".winner.csv");
  const fs::path manifest_path = o.manifest.empty()
                                     ? with_suffix(prefix, ".manifest.json")
                                     : fs::path(o.manifest);
  nas::SearchOutcome outcome;
  try {
    outcome = nas::run_search(space, train_ds, val_ds, cfg);
  } catch (const nas::SearchFailed& e) {
    write_file_atomic(log_path, nas::serialize_trial_log(e.trials()));
    m.output(log_path);
    m.write(manifest_path, "no_winner");
    err << "error: " << e.what() << "; trial log kept at " << log_path.string()
        << '\n';
    return kRuntime;
  }
  const auto winner = std::find_if(
      outcome.trials.begin(), outcome.trials.end(), [&](const auto& t) {
        return t.config.trial_index == outcome.best.trial_index;
      });
  write_file_atomic(log_path, nas::serialize_trial_log(outcome.trials));
  write_file_atomic(winner_path, nas::serialize_winner(*winner));
  m.output(log_path);
  m.output(winner_path);
  m.results()["trials"] = outcome.trials.size();
  m.results()["winner"] = nas::format_bindings(winner->config.bindings);
  m.results()["winner_trial"] = winner->config.trial_index;
  m.results()["final_val_loss"] = winner->final_val_loss;
  m.write(manifest_path, "ok");

  for (const auto& t : outcome.trials) {
    out << "trial " << t.config.trial_index << ' '
        << nas::format_bindings(t.config.bindings) << " final_val_loss "
        << format_real(t.final_val_loss)
        << (t.status == nas::TrialStatus::Diverged ? " diverged" : "") << '\n';
  }
  out << "winner " << nas::format_bindings(winner->config.bindings) << '\n';
  return kOk;
}

struct GradcheckOpts {
  std::string layer = "all";
  std::uint64_t seed = 0;
  std::string precision = "double";
  int instances = gradsuite::kInstances;
  std::string manifest = "gradcheck.manifest.json";
};

int cmd_gradcheck(const GradcheckOpts& o, std::ostream& out,
                  std::ostream& err) {
  Manifest m("gradcheck");
  const auto precision = gradsuite::parse_precision(o.precision);
  std::vector<std::string_view> names;
  if (o.layer == "all") {
    const auto all = gradsuite::case_names();
    names.assign(all.begin(), all.end());
  } else {
    names.push_back(o.layer);
  }
  m.parameters()["layer"] = o.layer;
  m.parameters()["precision"] = gradsuite::to_string(precision);
  m.parameters()["instances"] = o.instances;
  m.parameters()["step"] = gradsuite::kStep;
  m.parameters()["tolerance"] = gradsuite::tolerance(precision);
  m.seed("gradcheck", o.seed);

  bool ok = true;
  for (const auto name : names) {
    if (o.layer == "all" && precision == gradsuite::Precision::Single &&
        gradsuite::is_model_case(name)) {
      out << name << " skipped (double only)\n";
      continue;
    }
    const auto r = gradsuite::run_case(name, o.seed, precision, o.instances);
    out << gradsuite::describe(r) << '\n';
    m.results()[r.name] = r.worst.max_rel_error;
    if (!r.passed()) {
      ok = false;
      err << "gradcheck failed: " << r.name << " instance "
          << r.worst_instance << " coordinate " << r.worst.worst_index
          << " relative error " << format_real(r.worst.max_rel_error) << '\n';
    }
  }
  m.write(o.manifest, ok ? "ok" : "failed");
  return ok ? kOk : kCheckFailed;
}

struct ReportOpts {
  std::string op = "add";
  std::vector<std::string> archs = {"fc", "attn", "lstm"};
  std::vector<int> widths = {4, 3, 2};
  std::size_t train_count = hexdata::kDeskCount;
  std::size_t test_count = 2'500;
  int epochs = trainer::kLongEpochs;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  int hidden = models::kDefaultHidden;
  std::uint64_t seed = 0;
  std::uint64_t data_seed = 0;
  std::string nas_winner;
  std::string out;
  bool full_scale = false;
  std::string manifest;
};

int cmd_report(const ReportOpts& o, std::ostream& out) {
  Manifest m("report");
  const auto op = hexdata::parse_operation(o.op);
  std::vector<models::Arch> archs;
  for (const auto& a : o.archs) {
    archs.push_back(models::parse_arch(a));
  }
  trainer::GridConfig g;
  g.train.epochs = o.full_scale ? trainer::kLongEpochs : o.epochs;
  g.train.batch_size = o.batch_size;
  g.train.lr = o.lr;
  g.train.seed = o.seed;
  g.train_count = o.full_scale ? hexdata::kFullCount : o.train_count;
  g.test_count = o.test_count;
  g.hidden = o.hidden;
  g.data_seed = o.data_seed;
  m.parameters()["op"] = hexdata::to_string(op);
  m.parameters()["archs"] = o.archs;
  m.parameters()["widths"] = o.widths;
  m.parameters()["train_count"] = g.train_count;
  m.parameters()["test_count"] = g.test_count;
  m.parameters()["hidden"] = g.hidden;
  record_training(m, g.train);
  m.seed("train", o.seed);
  m.seed("data", o.data_seed);

  std::optional<nas::Bindings> winner;
  if (!o.nas_winner.empty()) {
    require_file(o.nas_winner, "NAS winner");
    m.input(o.nas_winner);
    winner = nas::parse_winner(read_file(o.nas_winner));
  }

  trainer::ExperimentReport report =
      trainer::run_grid(archs, o.widths, op, g);

  const fs::path prefix = o.out;
  if (winner) {
    // Extrapolation protocol: both arms train on 2-digit data and are tested
    // on the full-range held-out set.
    constexpr int kTrainWidth = 2;
    const auto data = trainer::grid_data(op, kTrainWidth, g);
    models::ModelSpec baseline;
    baseline.hidden = g.hidden;
    nas::TrialConfig best;
    best.bindings = *winner;
    m.parameters()["nas_winner"] = nas::format_bindings(*winner);
    trainer::ReportRow nas_row{"nas", kTrainWidth, 0, 0, {}};
    trainer::ReportRow human_row{"human", kTrainWidth, 0, 0, {}};
    try {
      const auto c = nas::retrain_and_compare(best, baseline, data.train,
                                              data.test, g.train.epochs,
                                              g.train);
      nas_row.train_loss_final = c.nas_curve.records.back().train_mse;
      nas_row.test_loss = c.nas_test_loss;
      human_row.train_loss_final = c.human_curve.records.back().train_mse;
      human_row.test_loss = c.human_test_loss;
      const fs::path cmp = with_suffix(prefix, ".comparison.csv");
      write_file_atomic(cmp, nas::serialize_comparison(c));
      m.output(cmp);
    } catch (const nas::ArmError& e) {
      nas_row.error = e.what();
      human_row.error = e.what();
    }
    report.rows.push_back(nas_row);
    report.rows.push_back(human_row);
  }

  const fs::path csv = with_suffix(prefix, ".csv");
  const fs::path table = with_suffix(prefix, ".txt");
  const std::string rendered = trainer::render_table(report);
  write_file_atomic(csv, trainer::serialize_report(report));
  write_file_atomic(table, rendered);
  m.output(csv);
  m.output(table);
  std::size_t failed = 0;
  for (const auto& r : report.rows) {
    failed += r.error ? 1 : 0;
  }
  m.results()["rows"] = report.rows.size();
  m.results()["error_rows"] = failed;
  m.write(o.manifest.empty() ? with_suffix(prefix, ".manifest.json")
                             : fs::path(o.manifest),
          "ok");
  out << rendered;
  return kOk;
}

struct DotOpts {
  std::string checkpoint;
  std::string arch = "fc";
  int hidden = models::kDefaultHidden;
  std::string slot2 = "linear";
  std::string out;
  std::string manifest;
};

int cmd_dot(const DotOpts& o, std::ostream& out) {
  Manifest m("dot");
  std::optional<models::Model> model;
  if (!o.checkpoint.empty()) {
    model.emplace(load_checkpoint(o.checkpoint, m));
  } else {
    model.emplace(models::build_model(
        {models::parse_arch(o.arch), o.hidden, models::parse_slot_kind(o.slot2)},
        0));
  }
  m.parameters()["model"] = Json::parse(models::spec_to_json(model->spec()));
  const std::string dot = models::export_dot(*model);
  if (o.out.empty()) {
    out << dot;
  } else {
    write_file_atomic(o.out, dot);
    m.output(o.out);
    m.write(o.manifest.empty() ? with_suffix(o.out, ".manifest.json")
                               : fs::path(o.manifest),
            "ok");
  }
  return kOk;
}

// ---------------------------------------------------------------- wiring --

const std::vector<std::string> kOps = {"add", "sub", "mul", "div"};
const std::vector<std::string> kArchs = {"fc", "lstm", "attn"};
const std::vector<std::string> kSlots = {"linear", "identity"};

void add_config_flag(CLI::App* sub) {
  // Consumed by expand_config; listed so it shows up in --help.
  sub->add_option("--config", "File of `key = value` lines; flags override it");
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Embedded-hex arithmetic datasets, models and architecture search",
               "hexnas"};
  app.set_version_flag("--version", HEXNAS_VERSION);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  GendataOpts gendata;
  auto* g = app.add_subcommand("gendata", "Generate a dataset CSV");
  add_config_flag(g);
  g->add_option("--op", gendata.op)->check(CLI::IsMember(kOps, CLI::ignore_case));
  g->add_option("--digits", gendata.digits)->check(CLI::Range(2, 4));
  g->add_option("--count", gendata.count)->check(CLI::PositiveNumber);
  g->add_option("--seed", gendata.seed);
  g->add_option("--out", gendata.out)->required();
  g->add_flag("--paper-scale", gendata.full_scale, "500,000 samples");
  g->add_option("--manifest", gendata.manifest);

  TrainOpts train;
  auto* t = app.add_subcommand("train", "Train one model");
  add_config_flag(t);
  t->add_option("--arch", train.arch)->check(CLI::IsMember(kArchs));
  t->add_option("--data", train.data)->required();
  t->add_option("--val", train.val, "Validation CSV (default: split --data)");
  t->add_option("--train-fraction", train.train_fraction)
      ->check(CLI::Range(0.0, 1.0));
  t->add_option("--epochs", train.epochs)->check(CLI::PositiveNumber);
  t->add_option("--batch-size", train.batch_size)->check(CLI::PositiveNumber);
  t->add_option("--lr", train.lr)->check(CLI::PositiveNumber);
  t->add_option("--seed", train.seed);
  t->add_option("--hidden", train.hidden)->check(CLI::PositiveNumber);
  t->add_option("--slot2", train.slot2)->check(CLI::IsMember(kSlots));
  t->add_option("--out", train.out, "Output prefix")->required();
  t->add_flag("--paper-scale", train.full_scale, "200 epochs");
  t->add_flag("--progress", train.progress, "Per-epoch losses on stderr");
  t->add_option("--manifest", train.manifest);

  EvalOpts eval;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  add_config_flag(e);
  e->add_option("--checkpoint", eval.checkpoint, "Checkpoint prefix")
      ->required();
  e->add_option("--data", eval.data)->required();
  e->add_option("--manifest", eval.manifest);

  NasOpts nas_opts;
  auto* n = app.add_subcommand("nas", "Random-strategy architecture search");
  add_config_flag(n);
  n->add_option("--experiment", nas_opts.experiment)
      ->check(CLI::IsMember({"valuechoice", "layerchoice"}));
  n->add_option("--data", nas_opts.data)->required();
  n->add_option("--val", nas_opts.val);
  n->add_option("--train-fraction", nas_opts.train_fraction)
      ->check(CLI::Range(0.0, 1.0));
  n->add_option("--budget", nas_opts.budget, "Trials (0: whole space)");
  n->add_option("--seed", nas_opts.seed);
  n->add_option("--epochs", nas_opts.epochs, "Epochs per trial")
      ->check(CLI::PositiveNumber);
  n->add_option("--batch-size", nas_opts.batch_size)
      ->check(CLI::PositiveNumber);
  n->add_option("--lr", nas_opts.lr)->check(CLI::PositiveNumber);
  n->add_option("--out", nas_opts.out, "Output prefix")->required();
  n->add_option("--manifest", nas_opts.manifest);

  GradcheckOpts grad;
  std::vector<std::string> layers(gradsuite::case_names().begin(),
                                  gradsuite::case_names().end());
  layers.push_back("all");
  auto* c = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  add_config_flag(c);
  c->add_option("--layer", grad.layer)->check(CLI::IsMember(layers));
  c->add_option("--seed", grad.seed);
  c->add_option("--precision", grad.precision)
      ->check(CLI::IsMember({"double", "single"}));
  c->add_option("--instances", grad.instances)->check(CLI::PositiveNumber);
  c->add_option("--manifest", grad.manifest);

  ReportOpts report;
  auto* r = app.add_subcommand("report", "Train the grid and tabulate losses");
  add_config_flag(r);
  r->add_option("--op", report.op)->check(CLI::IsMember(kOps, CLI::ignore_case));
  r->add_option("--archs", report.archs)
      ->delimiter(',')
      ->check(CLI::IsMember(kArchs));
  r->add_option("--widths", report.widths)->delimiter(',')->check(CLI::Range(2, 4));
  r->add_option("--train-count", report.train_count)->check(CLI::PositiveNumber);
  r->add_option("--test-count", report.test_count)->check(CLI::PositiveNumber);
  r->add_option("--epochs", report.epochs)->check(CLI::PositiveNumber);
  r->add_option("--batch-size", report.batch_size)->check(CLI::PositiveNumber);
  r->add_option("--lr", report.lr)->check(CLI::PositiveNumber);
  r->add_option("--hidden", report.hidden)->check(CLI::PositiveNumber);
  r->add_option("--seed", report.seed);
  r->add_option("--data-seed", report.data_seed);
  r->add_option("--nas-winner", report.nas_winner, "Winner CSV from `nas`");
  r->add_option("--out", report.out, "Output prefix")->required();
  r->add_flag("--paper-scale", report.full_scale,
              "500,000 training samples, 200 epochs");
  r->add_option("--manifest", report.manifest);

  DotOpts dot;
  auto* d = app.add_subcommand("dot", "Graphviz rendering of a model");
  add_config_flag(d);
  d->add_option("--checkpoint", dot.checkpoint, "Checkpoint prefix");
  d->add_option("--arch", dot.arch)->check(CLI::IsMember(kArchs));
  d->add_option("--hidden", dot.hidden)->check(CLI::PositiveNumber);
  d->add_option("--slot2", dot.slot2)->check(CLI::IsMember(kSlots));
  d->add_option("--out", dot.out);
  d->add_option("--manifest", dot.manifest);

  try {
    std::string config_path;
    std::vector<std::string> args = expand_config(raw_args, config_path);
    std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
    try {
      app.parse(args);
    } catch (const CLI::ParseError& pe) {
      const int code = app.exit(pe, out, err);
      return code == 0 ? kOk : kUsage;
    }

    if (g->parsed()) return cmd_gendata(gendata, out);
    if (t->parsed()) return cmd_train(train, out, err);
    if (e->parsed()) return cmd_eval(eval, out);
    if (n->parsed()) return cmd_nas(nas_opts, out, err);
    if (c->parsed()) return cmd_gradcheck(grad, out, err);
    if (r->parsed()) return cmd_report(report, out);
    if (d->parsed()) return cmd_dot(dot, out);
    return kUsage;
  } catch (const UsageError& ex) {
    err << "error: " << ex.what() << '\n';
    return kUsage;
  } catch (const ConfigError& ex) {
    err << "error: " << ex.what() << '\n';
    return kUsage;
  } catch (const hexnas::ParseError& ex) {
    err << "error: " << ex.what() << '\n';
    return kUsage;
  } catch (const CLI::ConfigError& ex) {
    err << "error: " << ex.what() << '\n';
    return kUsage;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kRuntime;
  }
}

int main_entry(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace hexnas::cli
