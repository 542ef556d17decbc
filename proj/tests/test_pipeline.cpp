#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "cadaug/experiment.hpp"
#include "cadaug/io.hpp"
#include "cadaug/synth.hpp"

using namespace cadaug;
namespace fs = std::filesystem;

namespace {

const fs::path root = fs::temp_directory_path() / "cadaug_test_pipeline";

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const fs::path &corpus() {
  static const fs::path dir = [] {
    auto d = root / "corpus";
    fs::remove_all(d);
    synth::CorpusOptions opts;
    opts.count = 60;
    opts.seed = 7;
    synth::write_corpus(d, opts);
    return d;
  }();
  return dir;
}

const char *kSmallGrid = R"({"knn": [{"k": 1}, {"k": 5}],
                             "dt": [{"max_depth": 4}, {"max_depth": null}],
                             "rf": [{"trees": 15, "max_features": "sqrt"}]})";

ExperimentConfig small_config(const fs::path &out) {
  ExperimentConfig c;
  c.input = corpus();
  c.out = out;
  c.seed = 7;
  c.cv_folds = 3;
  c.grids = ml::CVPlan::grids_from_json(nlohmann::json::parse(kSmallGrid));
  return c;
}

int cli(const std::string &args) {
  const std::string cmd = std::string("\"") + CADAUG_CLI + "\" " + args + " >> \"" +
                          (root / "cli.log").string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string q(const fs::path &p) { return "\"" + p.string() + "\""; }

ResultMatrix hand_matrix(double unb, double bal, double aug) {
  ResultMatrix m;
  m.models = {ml::ModelKind::Knn, ml::ModelKind::DecisionTree};
  for (auto k : m.models)
    for (auto te : kProvenances) {
      m.accuracy[{k, Provenance::Unbalanced, te}] = unb;
      m.accuracy[{k, Provenance::Balanced, te}] = bal;
      m.accuracy[{k, Provenance::Augmented, te}] = aug;
    }
  return m;
}

} // namespace

TEST_CASE("same seed, same corpus: identical results") {
  auto a = run_pipeline(small_config(root / "det_a"));
  auto b = run_pipeline(small_config(root / "det_b"));
  CHECK(a.accuracy == b.accuracy);
  CHECK(a.selected == b.selected);
  CHECK(slurp(root / "det_a" / "matrix.csv") == slurp(root / "det_b" / "matrix.csv"));
  CHECK(slurp(root / "det_a" / "report.md") == slurp(root / "det_b" / "report.md"));
  for (const char *f : {"datasets/augmented_train.csv", "models/rf_augmented.json", "labels.csv"})
    CHECK(slurp(root / "det_a" / f) == slurp(root / "det_b" / f));
}

TEST_CASE("pipeline artifacts respect the dataset invariants") {
  const auto out = root / "inv";
  auto m = run_pipeline(small_config(out));
  CHECK_NOTHROW(m.check_complete());
  CHECK(m.instances_ingested + m.instances_failed == 60);
  CHECK(m.raw_feature_count == 384);
  CHECK(m.filtered_feature_count % 3 == 0);
  CHECK(m.filtered_feature_count <= 384);
  REQUIRE(m.datasets.size() == 6);

  // one filtered schema shared by all six datasets
  std::set<std::string> schemas;
  std::set<std::string> train_sources;
  std::set<std::string> test_sources;
  for (auto p : kProvenances)
    for (auto r : {Role::Train, Role::Test}) {
      auto csv = out / "datasets" / (to_string(p) + "_" + to_string(r) + ".csv");
      auto ds = io::read_dataset(csv);
      schemas.insert(ds.schema.to_json().dump());
      CHECK(ds.schema.size() == m.filtered_feature_count);
      for (const auto &row : ds.rows)
        (r == Role::Train ? train_sources : test_sources).insert(row.source_id());
      if (p == Provenance::Augmented)
        for (auto c : ds.class_counts())
          CHECK(c == ds.size() / 6);
    }
  CHECK(schemas.size() == 1);
  for (const auto &id : test_sources)
    CHECK(train_sources.count(id) == 0);

  auto csv = slurp(out / "matrix.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * 9);
  CHECK(csv.rfind("model,train,test,accuracy\n", 0) == 0);
  for (const char *f : {"report.md", "datasets.json", "result.json", "config.json", "instances.jsonl",
                        "labels.csv", "ingest_failures.csv", "models/knn_unbalanced.json"})
    CHECK(fs::exists(out / f));
  auto again = ResultMatrix::from_json(io::read_json_file(out / "result.json"));
  CHECK(again.accuracy == m.accuracy);
  CHECK(render_matrix_csv(again) == csv);
}

TEST_CASE("all instances discarded is a data error in the featurize stage") {
  auto dir = root / "discard";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto ingested = load_instances(corpus());
  std::ofstream jl(dir / "instances.jsonl");
  io::write_instances_jsonl(jl, ingested.instances);
  jl.close();
  std::ofstream t(dir / "timings.csv");
  t << "instance_id,ordering,seconds\n";
  for (const auto &inst : ingested.instances)
    for (int o = 0; o < 6; ++o)
      t << inst.id << ',' << o << ",TIMEOUT\n";
  t.close();

  auto c = small_config(dir / "out");
  c.input = dir / "instances.jsonl";
  c.labeller = Labeller::Timings;
  c.timings = dir / "timings.csv";
  try {
    run_pipeline(c);
    FAIL("expected the pipeline to fail");
  } catch (const PipelineError &e) {
    CHECK(e.stage() == "featurize");
    CHECK(e.data_error());
    CHECK(std::string(e.what()).find("empty labelled dataset") != std::string::npos);
  }
  CHECK(cli("run --input " + q(c.input) + " --labeller timings --timings " + q(*c.timings) +
            " --out " + q(dir / "cli_out") + " --quiet") == 2);
}

TEST_CASE("configuration is validated") {
  auto c = small_config(root / "cfg");
  c.test_fraction = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config(root / "cfg");
  c.input = root / "does-not-exist";
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config(root / "cfg");
  c.labeller = Labeller::Timings;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config(root / "cfg");
  c.models.clear();
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(parse_labeller("maple"), ConfigError);
}

TEST_CASE("improvement aggregates") {
  auto same = improvement_summary(hand_matrix(0.2, 0.2, 0.2));
  CHECK(same.mean_balanced_vs_unbalanced == 0.0);
  CHECK(same.mean_augmented_vs_unbalanced == 0.0);
  auto up = improvement_summary(hand_matrix(0.2, 0.3, 0.4));
  CHECK(up.mean_balanced_vs_unbalanced == doctest::Approx(0.5));
  CHECK(up.mean_augmented_vs_unbalanced == doctest::Approx(1.0));
  CHECK(up.balanced_vs_unbalanced.at(ml::ModelKind::Knn) == doctest::Approx(0.5));
  // only the balanced test column counts
  auto m = hand_matrix(0.2, 0.3, 0.3);
  m.accuracy[{ml::ModelKind::Knn, Provenance::Balanced, Provenance::Unbalanced}] = 0.9;
  CHECK(improvement_summary(m).mean_balanced_vs_unbalanced == doctest::Approx(0.5));
  CHECK(std::isnan(improvement_summary(hand_matrix(0.0, 0.3, 0.3)).balanced_vs_unbalanced.at(
      ml::ModelKind::Knn)));
}

TEST_CASE("report rendering") {
  auto m = hand_matrix(0.2, 0.3, 0.4);
  m.accuracy[{ml::ModelKind::DecisionTree, Provenance::Unbalanced, Provenance::Balanced}] = 0.25;
  m.datasets.push_back({Provenance::Augmented, Role::Test, 12, {2, 2, 2, 2, 2, 2}});
  auto csv = render_matrix_csv(m);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 9);
  CHECK(csv.find("dt,unbalanced,balanced,0.250000\n") != std::string::npos);
  auto md = render_report_markdown(m);
  // dt has the column maximum when trained unbalanced and tested balanced
  CHECK(md.find("| knn | **0.200** | 0.200 | **0.200** |") != std::string::npos);
  CHECK(md.find("| dt | **0.200** | **0.250** | **0.200** |") != std::string::npos);
  CHECK(md.find("| augmented test | 2 | 2 | 2 | 2 | 2 | 2 | 12 |") != std::string::npos);
  CHECK(md.find("+50.0%") != std::string::npos);
  auto dj = render_datasets_json(m);
  CHECK(dj["datasets"][0]["rows"] == 12);

  ResultMatrix partial = m;
  partial.accuracy.erase({ml::ModelKind::Knn, Provenance::Augmented, Provenance::Augmented});
  CHECK_THROWS_AS(partial.check_complete(), std::logic_error);
  ResultMatrix bad = m;
  bad.accuracy[{ml::ModelKind::Knn, Provenance::Augmented, Provenance::Augmented}] = 1.5;
  CHECK_THROWS_AS(bad.check_complete(), std::logic_error);
}

TEST_CASE("CLI exit codes") {
  CHECK(cli("--help") == 0);
  CHECK(cli("") == 1);
  CHECK(cli("run --out " + q(root / "x")) == 1);
  CHECK(cli("run --input " + q(root / "nowhere") + " --out " + q(root / "x")) == 1);
  CHECK(cli("run --input " + q(corpus()) + " --out " + q(root / "x") + " --test-fraction 1.5") == 1);
  CHECK(cli("run --input " + q(corpus()) + " --out " + q(root / "x") + " --models svm") == 1);
  CHECK(cli("run --input " + q(corpus()) + " --out " + q(root / "x") + " --labeller maple") == 1);

  auto empty = root / "empty_corpus";
  fs::remove_all(empty);
  fs::create_directories(empty);
  std::ofstream(empty / "bad.smt2") << "(declare-fun x () Real)(assert (> x 1))";
  CHECK(cli("run --input " + q(empty) + " --out " + q(root / "x")) == 2);
  CHECK(cli("ingest --input " + q(empty) + " --out " + q(root / "x")) == 2);

  auto junk = root / "junk.jsonl";
  std::ofstream(junk) << "{broken\n";
  CHECK(cli("label --input " + q(junk) + " --out " + q(root / "x")) == 2);
}

TEST_CASE("staged CLI run reproduces the one-shot run") {
  const auto s = root / "staged";
  fs::remove_all(s);
  const std::string grid = "'" + std::string(kSmallGrid) + "'";
  const std::string common = " --seed 7 --cv-folds 3 --grid " + grid;

  REQUIRE(cli("run --quiet --input " + q(corpus()) + " --out " + q(s / "oneshot") + common) == 0);
  REQUIRE(cli("ingest --input " + q(corpus()) + " --out " + q(s)) == 0);
  REQUIRE(cli("label --input " + q(s / "instances.jsonl") + " --out " + q(s)) == 0);
  REQUIRE(cli("featurize --input " + q(s / "instances.jsonl") + " --labels " + q(s / "labels.csv") +
              " --out " + q(s)) == 0);
  REQUIRE(cli("split --seed 7 --input " + q(s / "unbalanced_all.csv") + " --out " + q(s)) == 0);
  for (const char *role : {"train", "test"}) {
    const auto in = s / (std::string("unbalanced_") + role + ".csv");
    REQUIRE(cli("balance --seed 7 --input " + q(in) + " --out " + q(s)) == 0);
    REQUIRE(cli("augment --input " + q(in) + " --out " + q(s)) == 0);
  }
  for (const char *prov : {"unbalanced", "balanced", "augmented"})
    REQUIRE(cli("train --models dt --input " + q(s / (std::string(prov) + "_train.csv")) + " --out " +
                q(s / "models") + common) == 0);

  for (const char *f : {"labels.csv", "instances.jsonl"})
    CHECK(slurp(s / f) == slurp(s / "oneshot" / f));
  for (const char *f : {"unbalanced_train.csv", "balanced_train.csv", "augmented_test.csv"})
    CHECK(slurp(s / f) == slurp(s / "oneshot" / "datasets" / f));
  CHECK(slurp(s / "models" / "dt_augmented.json") ==
        slurp(s / "oneshot" / "models" / "dt_augmented.json"));

  std::string eval = "evaluate --out " + q(s);
  for (const char *prov : {"unbalanced", "balanced", "augmented"})
    eval += " --model " + q(s / "models" / (std::string("dt_") + prov + ".json"));
  for (const char *prov : {"unbalanced", "balanced", "augmented"})
    eval += " --input " + q(s / (std::string(prov) + "_test.csv"));
  REQUIRE(cli(eval) == 0);
  std::string expected = "model,train,test,accuracy\n";
  std::istringstream matrix(slurp(s / "oneshot" / "matrix.csv"));
  std::string line;
  while (std::getline(matrix, line))
    if (line.rfind("dt,", 0) == 0)
      expected += line + "\n";
  CHECK(slurp(s / "evaluation.csv") == expected);

  REQUIRE(cli("report --input " + q(s / "oneshot") + " --out " + q(s / "rep")) == 0);
  CHECK(slurp(s / "rep" / "report.md") == slurp(s / "oneshot" / "report.md"));
  CHECK(slurp(s / "rep" / "matrix.csv") == slurp(s / "oneshot" / "matrix.csv"));
}
