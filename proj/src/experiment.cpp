#include "cadaug/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "cadaug/io.hpp"
#include "cadaug/random.hpp"

namespace cadaug {

PipelineError::PipelineError(std::string stage, const std::string &message, bool data_error)
    : std::runtime_error(stage + ": " + message), stage_(std::move(stage)),
      data_error_(data_error) {}

std::string to_string(Labeller l) { return l == Labeller::Sotd ? "sotd" : "timings"; }

Labeller parse_labeller(const std::string &s) {
  if (s == "sotd")
    return Labeller::Sotd;
  if (s == "timings")
    return Labeller::Timings;
  throw ConfigError("unknown labeller '" + s + "' (expected timings or sotd)");
}

void ExperimentConfig::validate() const {
  if (input.empty())
    throw ConfigError("--input is required");
  if (!std::filesystem::exists(input))
    throw ConfigError("input " + input.string() + " does not exist");
  if (out.empty())
    throw ConfigError("--out is required");
  if (!(test_fraction > 0 && test_fraction < 1))
    throw ConfigError("test fraction must lie in (0, 1)");
  if (!(timeout > 0))
    throw ConfigError("timeout must be positive");
  if (labeller == Labeller::Timings) {
    if (!timings)
      throw ConfigError("--labeller timings needs --timings <csv>");
    if (!std::filesystem::exists(*timings))
      throw ConfigError("timings file " + timings->string() + " does not exist");
  }
  if (models.empty())
    throw ConfigError("no models selected");
  if (cv_folds < 2)
    throw ConfigError("--cv-folds must be at least 2");
  for (auto kind : models) {
    auto it = grids.find(kind);
    if (it == grids.end() || it->second.empty())
      throw ConfigError("empty hyperparameter grid for " + ml::to_string(kind));
  }
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  j["input"] = input.string();
  j["labeller"] = to_string(labeller);
  j["timings"] = timings ? nlohmann::ordered_json(timings->string()) : nlohmann::ordered_json();
  j["timeout"] = timeout;
  j["test_fraction"] = test_fraction;
  j["balance_mode"] = to_string(balance_mode);
  j["seed"] = seed;
  j["models"] = nlohmann::ordered_json::array();
  for (auto k : models)
    j["models"].push_back(ml::to_string(k));
  j["cv_folds"] = cv_folds;
  nlohmann::ordered_json grid = nlohmann::ordered_json::object();
  for (const auto &[kind, points] : grids) {
    auto &arr = grid[ml::to_string(kind)] = nlohmann::ordered_json::array();
    for (const auto &hp : points)
      arr.push_back(nlohmann::ordered_json(hp.to_json(kind)));
  }
  j["grids"] = grid;
  j["budget"] = {{"max_polynomials", budget.max_polynomials},
                 {"max_total_degree", budget.max_total_degree}};
  return j;
}

double ResultMatrix::at(ml::ModelKind m, Provenance train, Provenance test) const {
  auto it = accuracy.find({m, train, test});
  if (it == accuracy.end())
    throw std::out_of_range("no accuracy for " + ml::to_string(m) + " trained on " +
                            to_string(train) + ", tested on " + to_string(test));
  return it->second;
}

void ResultMatrix::check_complete() const {
  for (auto m : models)
    for (auto tr : kProvenances)
      for (auto te : kProvenances) {
        auto it = accuracy.find({m, tr, te});
        if (it == accuracy.end())
          throw std::logic_error("incomplete matrix: missing " + ml::to_string(m) + "/" +
                                 to_string(tr) + "/" + to_string(te));
        if (!(it->second >= 0 && it->second <= 1))
          throw std::logic_error("accuracy outside [0, 1]");
      }
}

nlohmann::ordered_json ResultMatrix::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["models"] = nlohmann::ordered_json::array();
  for (auto m : models)
    j["models"].push_back(ml::to_string(m));
  j["cells"] = nlohmann::ordered_json::array();
  for (const auto &[key, acc] : accuracy) {
    const auto &[m, tr, te] = key;
    j["cells"].push_back(
        {{"model", ml::to_string(m)}, {"train", to_string(tr)}, {"test", to_string(te)}, {"accuracy", acc}});
  }
  j["selected"] = nlohmann::ordered_json::array();
  for (const auto &[key, hp] : selected)
    j["selected"].push_back(
        {{"model", ml::to_string(key.first)}, {"train", to_string(key.second)}, {"hyperparameters", hp}});
  j["datasets"] = nlohmann::ordered_json::array();
  for (const auto &d : datasets)
    j["datasets"].push_back({{"provenance", to_string(d.provenance)},
                             {"role", to_string(d.role)},
                             {"rows", d.rows},
                             {"class_counts", d.class_counts}});
  j["instances"] = {{"ingested", instances_ingested},
                    {"failed", instances_failed},
                    {"discarded", instances_discarded}};
  j["features"] = {{"raw", raw_feature_count}, {"filtered", filtered_feature_count}};
  return j;
}

ResultMatrix ResultMatrix::from_json(const nlohmann::json &j) {
  ResultMatrix m;
  m.seed = j.at("seed").get<std::uint64_t>();
  for (const auto &s : j.at("models"))
    m.models.push_back(ml::parse_model_kind(s.get<std::string>()));
  for (const auto &c : j.at("cells"))
    m.accuracy[{ml::parse_model_kind(c.at("model").get<std::string>()),
                parse_provenance(c.at("train").get<std::string>()),
                parse_provenance(c.at("test").get<std::string>())}] = c.at("accuracy").get<double>();
  for (const auto &s : j.at("selected"))
    m.selected[{ml::parse_model_kind(s.at("model").get<std::string>()),
                parse_provenance(s.at("train").get<std::string>())}] =
        s.at("hyperparameters").get<std::string>();
  for (const auto &d : j.at("datasets")) {
    DatasetSummary s;
    s.provenance = parse_provenance(d.at("provenance").get<std::string>());
    s.role = parse_role(d.at("role").get<std::string>());
    s.rows = d.at("rows").get<std::size_t>();
    s.class_counts = d.at("class_counts").get<std::array<std::size_t, kNumOrderings>>();
    m.datasets.push_back(s);
  }
  const auto &inst = j.at("instances");
  m.instances_ingested = inst.at("ingested").get<std::size_t>();
  m.instances_failed = inst.at("failed").get<std::size_t>();
  m.instances_discarded = inst.at("discarded").get<std::size_t>();
  m.raw_feature_count = j.at("features").at("raw").get<std::size_t>();
  m.filtered_feature_count = j.at("features").at("filtered").get<std::size_t>();
  return m;
}

ImprovementSummary improvement_summary(const ResultMatrix &m) {
  ImprovementSummary s;
  auto rel = [](double base, double x) {
    return base == 0 ? std::nan("") : (x - base) / base;
  };
  for (auto kind : m.models) {
    double base = m.at(kind, Provenance::Unbalanced, Provenance::Balanced);
    s.balanced_vs_unbalanced[kind] =
        rel(base, m.at(kind, Provenance::Balanced, Provenance::Balanced));
    s.augmented_vs_unbalanced[kind] =
        rel(base, m.at(kind, Provenance::Augmented, Provenance::Balanced));
  }
  auto mean = [](const std::map<ml::ModelKind, double> &xs) {
    if (xs.empty())
      return 0.0;
    double t = 0;
    for (const auto &[k, v] : xs)
      t += v;
    return t / static_cast<double>(xs.size());
  };
  s.mean_balanced_vs_unbalanced = mean(s.balanced_vs_unbalanced);
  s.mean_augmented_vs_unbalanced = mean(s.augmented_vs_unbalanced);
  return s;
}

std::uint64_t training_seed(std::uint64_t master, ml::ModelKind kind, Provenance p) {
  return derive_seed(master, "train/" + ml::to_string(kind) + "/" + to_string(p));
}

smtlib::IngestResult load_instances(const std::filesystem::path &input) {
  smtlib::IngestResult r;
  if (std::filesystem::is_directory(input)) {
    r = smtlib::ingest_files(smtlib::list_scripts(input));
    r.instances = smtlib::dedup_syntactic(std::move(r.instances));
    return r;
  }
  std::ifstream in(input, std::ios::binary);
  if (!in)
    throw DataError("cannot open " + input.string());
  try {
    r.instances = io::read_instances_jsonl(in);
  } catch (const io::FormatError &ex) {
    throw DataError(ex.what());
  }
  return r;
}

std::vector<std::optional<OrderingLabel>> label_instances(const std::vector<ProblemInstance> &insts,
                                                          Labeller labeller,
                                                          const std::optional<std::filesystem::path> &timings,
                                                          double timeout,
                                                          const ProjectionBudget &budget) {
  if (labeller == Labeller::Sotd)
    return label_all_by_sotd(insts, budget);
  if (!timings)
    throw ConfigError("timings labeller needs a timings file");
  std::ifstream in(*timings, std::ios::binary);
  if (!in)
    throw DataError("cannot open " + timings->string());
  std::map<std::string, TimingRecord> records;
  try {
    records = read_timings_csv(in);
  } catch (const std::invalid_argument &ex) {
    throw DataError(ex.what());
  }
  std::vector<std::optional<OrderingLabel>> out;
  out.reserve(insts.size());
  for (const auto &inst : insts) {
    auto it = records.find(inst.id);
    if (it == records.end())
      throw DataError("no timings for instance " + inst.id);
    try {
      out.push_back(label_from_timings(it->second, timeout));
    } catch (const MissingOrderingError &ex) {
      throw DataError(ex.what());
    }
  }
  return out;
}

Dataset build_dataset(const std::vector<ProblemInstance> &insts,
                      const std::vector<std::optional<OrderingLabel>> &labels) {
  if (insts.size() != labels.size())
    throw std::invalid_argument("instances and labels differ in length");
  std::vector<ProblemInstance> kept;
  std::vector<OrderingLabel> kept_labels;
  for (std::size_t i = 0; i < insts.size(); ++i)
    if (labels[i]) {
      kept.push_back(insts[i]);
      kept_labels.push_back(*labels[i]);
    }
  Dataset ds;
  ds.schema = FeatureSchema::raw();
  auto fvs = featurize_all(kept, ds.schema);
  ds.rows.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i)
    ds.rows.push_back({fvs[i].instance_id, std::move(fvs[i].values), kept_labels[i]});
  return ds;
}

std::pair<Dataset, Dataset> apply_filter(const Dataset &train, const Dataset &test) {
  std::vector<std::vector<double>> rows;
  rows.reserve(train.rows.size());
  for (const auto &r : train.rows)
    rows.push_back(r.features);
  auto filter = fit_distinct_filter(rows, train.schema);
  auto project = [&](const Dataset &ds) {
    Dataset out = ds;
    out.schema = filter.schema;
    for (auto &r : out.rows)
      r.features = project_to_schema(r.features, ds.schema, filter.schema);
    return out;
  };
  return {project(train), project(test)};
}

nlohmann::ordered_json training_record(ml::ModelKind kind, Provenance train_provenance,
                                       const ml::TrainResult &tr) {
  nlohmann::ordered_json cv = nlohmann::ordered_json::array();
  for (std::size_t g = 0; g < tr.cv.grid.size(); ++g)
    cv.push_back({{"hyperparameters", nlohmann::ordered_json(tr.cv.grid[g].to_json(kind))},
                  {"fold_accuracy", tr.cv.fold_accuracy[g]},
                  {"mean_accuracy", tr.cv.mean_accuracy[g]}});
  return {{"train", to_string(train_provenance)},
          {"model", nlohmann::ordered_json(tr.model.to_json())},
          {"cv", cv},
          {"selected", tr.cv.selected}};
}

namespace {

std::string dataset_file(Provenance p, Role r) {
  return to_string(p) + "_" + to_string(r) + ".csv";
}

template <typename F>
auto stage(const char *name, std::ostream *log, F &&f) -> decltype(f()) {
  if (log)
    *log << "[" << name << "]" << std::endl;
  try {
    return f();
  } catch (const PipelineError &) {
    throw;
  } catch (const ConfigError &) {
    throw;
  } catch (const DataError &ex) {
    throw PipelineError(name, ex.what(), true);
  } catch (const ml::DegenerateDataset &ex) {
    throw PipelineError(name, ex.what(), true);
  } catch (const io::FormatError &ex) {
    throw PipelineError(name, ex.what(), true);
  } catch (const std::exception &ex) {
    throw PipelineError(name, ex.what(), false);
  }
}

DatasetSummary summarize(const Dataset &ds) {
  return {ds.provenance, ds.role, ds.rows.size(), ds.class_counts()};
}

} // namespace

ResultMatrix run_pipeline(const ExperimentConfig &config, std::ostream *log) {
  config.validate();
  const auto &out = config.out;
  std::filesystem::create_directories(out / "datasets");
  std::filesystem::create_directories(out / "models");
  io::write_text_file(out / "config.json", config.to_json().dump(2) + "\n");

  ResultMatrix result;
  result.models = config.models;
  result.seed = config.seed;

  auto ingested = stage("ingest", log, [&] {
    auto r = load_instances(config.input);
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
    if (r.instances.empty())
      throw DataError("no instances ingested from " + config.input.string());
    return r;
  });
  result.instances_ingested = ingested.instances.size();
  result.instances_failed = ingested.failures.size();
  if (log)
    *log << "  " << ingested.instances.size() << " instances, " << ingested.failures.size()
         << " failed" << std::endl;

  auto labels = stage("label", log, [&] {
    auto l = label_instances(ingested.instances, config.labeller, config.timings, config.timeout,
                             config.budget);
    std::vector<std::string> ids;
    for (const auto &inst : ingested.instances)
      ids.push_back(inst.id);
    std::ostringstream csv;
    io::write_labels_csv(csv, ids, l);
    io::write_text_file(out / "labels.csv", csv.str());
    return l;
  });
  for (const auto &l : labels)
    result.instances_discarded += l ? 0 : 1;

  Dataset all = stage("featurize", log, [&] {
    auto ds = build_dataset(ingested.instances, labels);
    if (ds.rows.empty())
      throw DataError("empty labelled dataset");
    if (ds.rows.size() < 2)
      throw DataError("need at least 2 labelled instances to split");
    io::write_dataset(out / "datasets" / "unbalanced_all.csv", ds);
    return ds;
  });
  result.raw_feature_count = all.schema.size();

  auto [train, test] = stage("split", log, [&] {
    auto parts = split(all, config.test_fraction, derive_seed(config.seed, "split"));
    return apply_filter(parts.first, parts.second);
  });
  result.filtered_feature_count = train.schema.size();
  if (log)
    *log << "  " << train.rows.size() << " train / " << test.rows.size() << " test rows, "
         << train.schema.size() << " of " << all.schema.size() << " features kept" << std::endl;

  std::map<std::pair<Provenance, Role>, Dataset> sets;
  stage("derive", log, [&] {
    sets[{Provenance::Unbalanced, Role::Train}] = train;
    sets[{Provenance::Unbalanced, Role::Test}] = test;
    sets[{Provenance::Balanced, Role::Train}] =
        balance(train, config.balance_mode, derive_seed(config.seed, "balance-train"));
    sets[{Provenance::Balanced, Role::Test}] =
        balance(test, config.balance_mode, derive_seed(config.seed, "balance-test"));
    sets[{Provenance::Augmented, Role::Train}] = augment_full(train);
    sets[{Provenance::Augmented, Role::Test}] = augment_full(test);
    for (auto r : {Role::Train, Role::Test})
      for (auto p : kProvenances) {
        const auto &ds = sets.at({p, r});
        nlohmann::ordered_json extra = {{"seed", config.seed}};
        if (p == Provenance::Balanced)
          extra["balance_mode"] = to_string(config.balance_mode);
        io::write_dataset(out / "datasets" / dataset_file(p, r), ds, extra);
        result.datasets.push_back(summarize(ds));
      }
    return 0;
  });

  for (auto kind : config.models) {
    for (auto tp : kProvenances) {
      const auto label = ml::to_string(kind) + "/" + to_string(tp);
      auto trained = stage("train", log, [&] {
        if (log)
          *log << "  " << label << std::endl;
        ml::CVPlan plan;
        plan.folds = config.cv_folds;
        plan.grids = config.grids;
        plan.seed = training_seed(config.seed, kind, tp);
        auto tr = ml::train(kind, sets.at({tp, Role::Train}), plan);
        auto j = training_record(kind, tp, tr);
        io::write_text_file(out / "models" / (ml::to_string(kind) + "_" + to_string(tp) + ".json"),
                            j.dump() + "\n");
        return tr;
      });
      result.selected[{kind, tp}] = trained.model.hyperparameters().describe(kind);
      stage("evaluate", log, [&] {
        for (auto te : kProvenances)
          result.accuracy[{kind, tp, te}] = ml::accuracy(trained.model, sets.at({te, Role::Test}));
        return 0;
      });
    }
  }

  stage("report", log, [&] {
    result.check_complete();
    write_report(result, out);
    return 0;
  });
  return result;
}

namespace {

std::string fixed(double v, int digits = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string percent(double v) {
  if (std::isnan(v))
    return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.1f%%", 100 * v);
  return buf;
}

std::string title_case(std::string s) {
  if (!s.empty())
    s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

} // namespace

std::string render_report_markdown(const ResultMatrix &m) {
  std::ostringstream md;
  md << "# Variable ordering selection: accuracy report\n\n";
  md << "Seed " << m.seed << ". Instances: " << m.instances_ingested << " ingested, "
     << m.instances_failed << " failed to ingest, " << m.instances_discarded
     << " discarded by the labeller.\n";
  md << "Features: " << m.raw_feature_count << " raw, " << m.filtered_feature_count
     << " after the distinct filter.\n\n";

  md << "## Dataset class counts\n\n| Dataset |";
  for (int c = 0; c < kNumOrderings; ++c)
    md << ' ' << c << " |";
  md << " Total |\n|---|";
  for (int c = 0; c <= kNumOrderings; ++c)
    md << "---:|";
  md << '\n';
  for (const auto &d : m.datasets) {
    md << "| " << to_string(d.provenance) << ' ' << to_string(d.role) << " |";
    for (auto c : d.class_counts)
      md << ' ' << c << " |";
    md << ' ' << d.rows << " |\n";
  }

  for (auto tp : kProvenances) {
    md << "\n## Trained on " << to_string(tp) << " data\n\n| Model |";
    for (auto te : kProvenances)
      md << " Tested " << to_string(te) << " |";
    md << "\n|---|";
    for (std::size_t i = 0; i < kProvenances.size(); ++i)
      md << "---:|";
    md << '\n';
    std::map<Provenance, double> best;
    for (auto te : kProvenances) {
      double b = -1;
      for (auto kind : m.models)
        b = std::max(b, m.at(kind, tp, te));
      best[te] = b;
    }
    for (auto kind : m.models) {
      md << "| " << ml::to_string(kind) << " |";
      for (auto te : kProvenances) {
        double a = m.at(kind, tp, te);
        // Compare the printed values so ties in the table bold together.
        bool bold = fixed(a) == fixed(best[te]);
        md << ' ' << (bold ? "**" + fixed(a) + "**" : fixed(a)) << " |";
      }
      md << '\n';
    }
  }

  auto imp = improvement_summary(m);
  md << "\n## Improvement on the balanced test set\n\n"
        "Relative accuracy change against the model trained on unbalanced data.\n\n"
        "| Model | Balanced-trained | Augmented-trained |\n|---|---:|---:|\n";
  for (auto kind : m.models)
    md << "| " << ml::to_string(kind) << " | " << percent(imp.balanced_vs_unbalanced.at(kind))
       << " | " << percent(imp.augmented_vs_unbalanced.at(kind)) << " |\n";
  md << "| mean | " << percent(imp.mean_balanced_vs_unbalanced) << " | "
     << percent(imp.mean_augmented_vs_unbalanced) << " |\n";

  if (!m.selected.empty()) {
    md << "\n## Selected hyperparameters\n\n| Model | Training data | Hyperparameters |\n|---|---|---|\n";
    for (auto kind : m.models)
      for (auto tp : kProvenances) {
        auto it = m.selected.find({kind, tp});
        if (it != m.selected.end())
          md << "| " << ml::to_string(kind) << " | " << title_case(to_string(tp)) << " | `"
             << it->second << "` |\n";
      }
  }
  return md.str();
}

std::string render_matrix_csv(const ResultMatrix &m) {
  std::ostringstream csv;
  csv << "model,train,test,accuracy\n";
  for (auto kind : m.models)
    for (auto tp : kProvenances)
      for (auto te : kProvenances)
        csv << ml::to_string(kind) << ',' << to_string(tp) << ',' << to_string(te) << ','
            << fixed(m.at(kind, tp, te), 6) << '\n';
  return csv.str();
}

nlohmann::ordered_json render_datasets_json(const ResultMatrix &m) {
  nlohmann::ordered_json j;
  j["instances"] = {{"ingested", m.instances_ingested},
                    {"failed", m.instances_failed},
                    {"discarded", m.instances_discarded}};
  j["features"] = {{"raw", m.raw_feature_count}, {"filtered", m.filtered_feature_count}};
  j["datasets"] = nlohmann::ordered_json::array();
  for (const auto &d : m.datasets)
    j["datasets"].push_back({{"name", to_string(d.provenance) + "_" + to_string(d.role)},
                             {"provenance", to_string(d.provenance)},
                             {"role", to_string(d.role)},
                             {"rows", d.rows},
                             {"class_counts", d.class_counts}});
  j["split_rule"] = "test rows = round(test_fraction * n), clamped to [1, n-1]; "
                    "n = 1019 at 0.2 gives 204 test and 815 train";
  return j;
}

void write_report(const ResultMatrix &m, const std::filesystem::path &dir) {
  io::write_text_file(dir / "report.md", render_report_markdown(m));
  io::write_text_file(dir / "matrix.csv", render_matrix_csv(m));
  io::write_text_file(dir / "datasets.json", render_datasets_json(m).dump(2) + "\n");
  io::write_text_file(dir / "result.json", m.to_json().dump(2) + "\n");
}

} // namespace cadaug
