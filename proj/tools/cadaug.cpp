// cadaug: command-line front end for the ordering-selection experiment.
//
// Each verb reads and writes the on-disk formats from cadaug/io.hpp, so the
// stages can be run one at a time; `run` does all of them.
//
// Exit codes: 0 ok, 1 bad configuration, 2 bad data, 3 internal error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cadaug/experiment.hpp"
#include "cadaug/io.hpp"
#include "cadaug/random.hpp"
#include "cadaug/synth.hpp"

namespace fs = std::filesystem;
using namespace cadaug;

namespace {

enum Exit { kOk = 0, kConfig = 1, kData = 2, kInternal = 3 };

struct Options {
  std::string input;
  std::vector<std::string> inputs;
  std::vector<std::string> model_files;
  std::string labels;
  std::string labeller = "sotd";
  std::string timings;
  double timeout = kDefaultTimeoutSeconds;
  double test_fraction = 0.2;
  std::string balance_mode = "random";
  std::uint64_t seed = 1;
  std::string models = "knn,dt,rf";
  std::string out;
  int cv_folds = 5;
  std::string grid;
  std::size_t count = 400;
  double skew = 0.9;
  bool quiet = false;
};

std::vector<ml::ModelKind> parse_models(const std::string &list) {
  std::vector<ml::ModelKind> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty())
      continue;
    try {
      out.push_back(ml::parse_model_kind(item));
    } catch (const std::invalid_argument &ex) {
      throw ConfigError(ex.what());
    }
  }
  if (out.empty())
    throw ConfigError("--models is empty");
  return out;
}

// --grid takes inline JSON or a path to a JSON file.
std::map<ml::ModelKind, std::vector<ml::Hyperparameters>> parse_grid(const std::string &arg) {
  if (arg.empty())
    return ml::CVPlan::default_grids();
  try {
    nlohmann::json j = arg.front() == '{' ? nlohmann::json::parse(arg) : io::read_json_file(arg);
    return ml::CVPlan::grids_from_json(j);
  } catch (const std::exception &ex) {
    throw ConfigError(std::string("bad --grid: ") + ex.what());
  }
}

BalanceMode balance_mode(const std::string &s) {
  try {
    return parse_balance_mode(s);
  } catch (const std::invalid_argument &ex) {
    throw ConfigError(ex.what());
  }
}

fs::path require_out(const Options &o) {
  if (o.out.empty())
    throw ConfigError("--out is required");
  fs::create_directories(o.out);
  return o.out;
}

fs::path require_input(const Options &o) {
  if (o.input.empty())
    throw ConfigError("--input is required");
  if (!fs::exists(o.input))
    throw ConfigError("input " + o.input + " does not exist");
  return o.input;
}

Dataset read_dataset_checked(const fs::path &p) {
  if (!fs::exists(p))
    throw ConfigError("dataset " + p.string() + " does not exist");
  return io::read_dataset(p);
}

std::vector<ProblemInstance> read_instances(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  if (!in)
    throw DataError("cannot open " + p.string());
  return io::read_instances_jsonl(in);
}

int cmd_synth(const Options &o) {
  auto out = require_out(o);
  synth::CorpusOptions opts;
  opts.count = o.count;
  opts.seed = o.seed;
  opts.skewed_fraction = o.skew;
  auto paths = synth::write_corpus(out, opts);
  std::cout << "wrote " << paths.size() << " scripts to " << out.string() << '\n';
  return kOk;
}

int cmd_ingest(const Options &o) {
  auto in = require_input(o);
  auto out = require_out(o);
  auto r = load_instances(in);
  std::ostringstream jl;
  io::write_instances_jsonl(jl, r.instances);
  io::write_text_file(out / "instances.jsonl", jl.str());
  std::ostringstream fails;
  fails << "id,error\n";
  for (const auto &f : r.failures) {
    std::string msg = f.message;
    for (auto &c : msg)
      if (c == '\n' || c == ',')
        c = ' ';
    fails << f.id << ',' << msg << '\n';
  }
  io::write_text_file(out / "ingest_failures.csv", fails.str());
  std::cout << r.instances.size() << " instances, " << r.failures.size() << " failures\n";
  if (r.instances.empty())
    throw DataError("no instances ingested");
  return kOk;
}

int cmd_label(const Options &o) {
  auto in = require_input(o);
  auto out = require_out(o);
  auto labeller = parse_labeller(o.labeller);
  std::optional<fs::path> timings;
  if (!o.timings.empty())
    timings = o.timings;
  if (labeller == Labeller::Timings && !timings)
    throw ConfigError("--labeller timings needs --timings <csv>");
  if (!(o.timeout > 0))
    throw ConfigError("timeout must be positive");
  auto insts = read_instances(in);
  auto labels = label_instances(insts, labeller, timings, o.timeout, ProjectionBudget{});
  std::vector<std::string> ids;
  std::size_t discarded = 0;
  for (std::size_t i = 0; i < insts.size(); ++i) {
    ids.push_back(insts[i].id);
    discarded += labels[i] ? 0 : 1;
  }
  std::ostringstream csv;
  io::write_labels_csv(csv, ids, labels);
  io::write_text_file(out / "labels.csv", csv.str());
  std::cout << insts.size() - discarded << " labelled, " << discarded << " discarded\n";
  return kOk;
}

int cmd_featurize(const Options &o) {
  auto in = require_input(o);
  auto out = require_out(o);
  if (o.labels.empty())
    throw ConfigError("--labels is required");
  auto insts = read_instances(in);
  std::ifstream lin(o.labels, std::ios::binary);
  if (!lin)
    throw ConfigError("cannot open " + o.labels);
  auto label_map = io::read_labels_csv(lin);
  std::vector<std::optional<OrderingLabel>> labels;
  for (const auto &inst : insts) {
    auto it = label_map.find(inst.id);
    if (it == label_map.end())
      throw DataError("no label for instance " + inst.id);
    labels.push_back(it->second);
  }
  auto ds = build_dataset(insts, labels);
  if (ds.rows.empty())
    throw DataError("empty labelled dataset");
  io::write_dataset(out / "unbalanced_all.csv", ds);
  std::cout << ds.rows.size() << " rows x " << ds.schema.size() << " features\n";
  return kOk;
}

int cmd_split(const Options &o) {
  auto in = require_input(o);
  auto out = require_out(o);
  if (!(o.test_fraction > 0 && o.test_fraction < 1))
    throw ConfigError("test fraction must lie in (0, 1)");
  auto ds = read_dataset_checked(in);
  if (ds.rows.size() < 2)
    throw DataError("need at least 2 rows to split");
  auto parts = split(ds, o.test_fraction, derive_seed(o.seed, "split"));
  auto [train, test] = apply_filter(parts.first, parts.second);
  io::write_dataset(out / "unbalanced_train.csv", train, {{"seed", o.seed}});
  io::write_dataset(out / "unbalanced_test.csv", test, {{"seed", o.seed}});
  std::cout << train.rows.size() << " train / " << test.rows.size() << " test, "
            << train.schema.size() << " features kept\n";
  return kOk;
}

int cmd_balance(const Options &o) {
  auto in = require_input(o);
  auto out = require_out(o);
  auto mode = balance_mode(o.balance_mode);
  auto ds = read_dataset_checked(in);
  auto b = balance(ds, mode, derive_seed(o.seed, "balance-" + to_string(ds.role)));
  auto path = out / ("balanced_" + to_string(ds.role) + ".csv");
  io::write_dataset(path, b, {{"seed", o.seed}, {"balance_mode", to_string(mode)}});
  std::cout << "wrote " << path.string() << '\n';
  return kOk;
}

int cmd_augment(const Options &o) {
  auto in = require_input(o);
  auto out = require_out(o);
  auto ds = read_dataset_checked(in);
  auto a = augment_full(ds);
  auto path = out / ("augmented_" + to_string(ds.role) + ".csv");
  io::write_dataset(path, a);
  std::cout << "wrote " << path.string() << " (" << a.rows.size() << " rows)\n";
  return kOk;
}

int cmd_train(const Options &o) {
  auto in = require_input(o);
  auto out = require_out(o);
  auto kinds = parse_models(o.models);
  if (o.cv_folds < 2)
    throw ConfigError("--cv-folds must be at least 2");
  auto grids = parse_grid(o.grid);
  auto ds = read_dataset_checked(in);
  for (auto kind : kinds) {
    ml::CVPlan plan;
    plan.folds = o.cv_folds;
    plan.grids = grids;
    plan.seed = training_seed(o.seed, kind, ds.provenance);
    auto tr = ml::train(kind, ds, plan);
    auto path = out / (ml::to_string(kind) + "_" + to_string(ds.provenance) + ".json");
    io::write_text_file(path, training_record(kind, ds.provenance, tr).dump() + "\n");
    std::cout << ml::to_string(kind) << ": selected "
              << tr.model.hyperparameters().describe(kind) << ", cv accuracy "
              << tr.cv.mean_accuracy[tr.cv.selected] << '\n';
  }
  return kOk;
}

int cmd_evaluate(const Options &o) {
  if (o.model_files.empty())
    throw ConfigError("--model is required");
  if (o.inputs.empty())
    throw ConfigError("--input is required");
  std::ostringstream csv;
  csv << "model,train,test,accuracy\n";
  for (const auto &mf : o.model_files) {
    if (!fs::exists(mf))
      throw ConfigError("model " + mf + " does not exist");
    auto j = io::read_json_file(mf);
    ml::TrainedModel model;
    std::string train;
    try {
      model = ml::TrainedModel::from_json(j.contains("model") ? j.at("model") : j);
      train = j.value("train", "unknown");
    } catch (const nlohmann::json::exception &ex) {
      throw DataError(mf + ": " + ex.what());
    }
    for (const auto &tf : o.inputs) {
      auto ds = read_dataset_checked(tf);
      double acc = ml::accuracy(model, ds);
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6f", acc);
      csv << ml::to_string(model.kind()) << ',' << train << ',' << to_string(ds.provenance) << ','
          << buf << '\n';
    }
  }
  std::cout << csv.str();
  if (!o.out.empty())
    io::write_text_file(require_out(o) / "evaluation.csv", csv.str());
  return kOk;
}

int cmd_run(const Options &o) {
  ExperimentConfig c;
  c.input = o.input;
  c.labeller = parse_labeller(o.labeller);
  if (!o.timings.empty())
    c.timings = o.timings;
  c.timeout = o.timeout;
  c.test_fraction = o.test_fraction;
  c.balance_mode = balance_mode(o.balance_mode);
  c.seed = o.seed;
  c.models = parse_models(o.models);
  c.out = o.out;
  c.cv_folds = o.cv_folds;
  c.grids = parse_grid(o.grid);
  auto m = run_pipeline(c, o.quiet ? nullptr : &std::cerr);
  std::cout << render_matrix_csv(m);
  auto imp = improvement_summary(m);
  std::cout << "mean improvement on balanced test set: balanced-trained "
            << 100 * imp.mean_balanced_vs_unbalanced << "%, augmented-trained "
            << 100 * imp.mean_augmented_vs_unbalanced << "%\n";
  return kOk;
}

int cmd_report(const Options &o) {
  fs::path in = require_input(o);
  if (fs::is_directory(in))
    in /= "result.json";
  auto m = ResultMatrix::from_json(io::read_json_file(in));
  m.check_complete();
  fs::path out = o.out.empty() ? in.parent_path() : require_out(o);
  write_report(m, out);
  std::cout << "wrote report to " << out.string() << '\n';
  return kOk;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Variable-ordering selection for CAD: dataset balancing and augmentation"};
  app.require_subcommand(1);
  Options o;

  auto input = [&](CLI::App *s, const std::string &help) { s->add_option("--input", o.input, help); };
  auto out = [&](CLI::App *s) { s->add_option("--out", o.out, "Output directory"); };
  auto seed = [&](CLI::App *s) { s->add_option("--seed", o.seed, "Master seed"); };
  auto labelling = [&](CLI::App *s) {
    s->add_option("--labeller", o.labeller, "timings or sotd")
        ->check(CLI::IsMember({"timings", "sotd"}));
    s->add_option("--timings", o.timings, "Timings CSV (id,ordering,seconds|TIMEOUT)");
    s->add_option("--timeout", o.timeout, "Timeout in seconds");
  };
  auto training = [&](CLI::App *s) {
    s->add_option("--models", o.models, "Comma-separated subset of knn,dt,rf");
    s->add_option("--cv-folds", o.cv_folds, "Cross-validation folds");
    s->add_option("--grid", o.grid, "Hyperparameter grid: inline JSON or JSON file");
  };
  auto balancing = [&](CLI::App *s) {
    s->add_option("--balance-mode", o.balance_mode, "random or exact")
        ->check(CLI::IsMember({"random", "exact"}));
  };

  auto *synth_cmd = app.add_subcommand("synth", "Write a synthetic .smt2 corpus");
  out(synth_cmd);
  seed(synth_cmd);
  synth_cmd->add_option("--count", o.count, "Number of scripts");
  synth_cmd->add_option("--skew", o.skew, "Fraction of scripts with position-dependent degree caps")
      ->check(CLI::Range(0.0, 1.0));

  auto *ingest_cmd = app.add_subcommand("ingest", "Parse .smt2 scripts into instances.jsonl");
  input(ingest_cmd, "Directory of .smt2 files");
  out(ingest_cmd);

  auto *label_cmd = app.add_subcommand("label", "Label instances.jsonl, writing labels.csv");
  input(label_cmd, "instances.jsonl");
  out(label_cmd);
  labelling(label_cmd);

  auto *feat_cmd = app.add_subcommand("featurize", "Raw features for labelled instances");
  input(feat_cmd, "instances.jsonl");
  feat_cmd->add_option("--labels", o.labels, "labels.csv");
  out(feat_cmd);

  auto *split_cmd = app.add_subcommand("split", "Train/test split plus the distinct-feature filter");
  input(split_cmd, "Feature CSV");
  out(split_cmd);
  seed(split_cmd);
  split_cmd->add_option("--test-fraction", o.test_fraction, "Fraction held out for testing");

  auto *balance_cmd = app.add_subcommand("balance", "One random renaming per row");
  input(balance_cmd, "Feature CSV");
  out(balance_cmd);
  seed(balance_cmd);
  balancing(balance_cmd);

  auto *augment_cmd = app.add_subcommand("augment", "All six renamings of every row");
  input(augment_cmd, "Feature CSV");
  out(augment_cmd);

  auto *train_cmd = app.add_subcommand("train", "Grid search and fit models on a training CSV");
  input(train_cmd, "Training feature CSV");
  out(train_cmd);
  seed(train_cmd);
  training(train_cmd);

  auto *eval_cmd = app.add_subcommand("evaluate", "Accuracy of saved models on test CSVs");
  eval_cmd->add_option("--model", o.model_files, "Model JSON (repeatable)");
  eval_cmd->add_option("--input", o.inputs, "Test feature CSV (repeatable)");
  out(eval_cmd);

  auto *run_cmd = app.add_subcommand("run", "Full pipeline from scripts to report");
  input(run_cmd, "Directory of .smt2 files or instances.jsonl");
  out(run_cmd);
  seed(run_cmd);
  labelling(run_cmd);
  training(run_cmd);
  balancing(run_cmd);
  run_cmd->add_option("--test-fraction", o.test_fraction, "Fraction held out for testing");
  run_cmd->add_flag("--quiet", o.quiet, "No progress output");

  auto *report_cmd = app.add_subcommand("report", "Regenerate report files from result.json");
  input(report_cmd, "result.json or a run directory");
  out(report_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*synth_cmd)
      return cmd_synth(o);
    if (*ingest_cmd)
      return cmd_ingest(o);
    if (*label_cmd)
      return cmd_label(o);
    if (*feat_cmd)
      return cmd_featurize(o);
    if (*split_cmd)
      return cmd_split(o);
    if (*balance_cmd)
      return cmd_balance(o);
    if (*augment_cmd)
      return cmd_augment(o);
    if (*train_cmd)
      return cmd_train(o);
    if (*eval_cmd)
      return cmd_evaluate(o);
    if (*run_cmd)
      return cmd_run(o);
    if (*report_cmd)
      return cmd_report(o);
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const PipelineError &e) {
    std::cerr << (e.data_error() ? "data error in " : "internal error in ") << e.what() << '\n';
    return e.data_error() ? kData : kInternal;
  } catch (const DataError &e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const io::FormatError &e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const smtlib::IngestError &e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const ml::DegenerateDataset &e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const SchemaMismatch &e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception &e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}
