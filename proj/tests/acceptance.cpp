// Acceptance checks, one PASS/FAIL line per criterion. Criteria 7 and 9 drive
// the command-line tool end to end on a synthetic corpus.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "cadaug/augmentation.hpp"
#include "cadaug/experiment.hpp"
#include "cadaug/features.hpp"
#include "cadaug/io.hpp"
#include "cadaug/labelling.hpp"
#include "cadaug/ml.hpp"
#include "cadaug/synth.hpp"
#include "oracles.hpp"

using namespace cadaug;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path root = fs::temp_directory_path() / "cadaug_acceptance";

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string &what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string &s) { detail += (detail.empty() ? "" : "; ") + s; }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string &args) {
  const std::string cmd = std::string("\"") + CADAUG_CLI + "\" " + args + " >> \"" +
                          (root / "cli.log").string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path &p) { return "\"" + p.string() + "\""; }

Polynomial P(const char *s) { return Polynomial::parse(s); }

ProblemInstance make(std::vector<Polynomial> polys) {
  ProblemInstance inst;
  inst.id = "a";
  for (auto &p : polys)
    p = normalize_atom(p);
  inst.polynomials = canonical_set(std::move(polys));
  return inst;
}

// --- criteria -------------------------------------------------------------------

Outcome worked_examples() {
  Outcome o;
  auto inst = make({P("x2^2 - x2*x1"), P("x3^3*x1 - x1^2 + 1")});
  const DescriptorShape avg_sum{Base::VarDegree, Aggregate::Avg, false, Aggregate::Sum, false};
  const DescriptorShape sum_sign_sum{Base::VarDegree, Aggregate::Sum, true, Aggregate::Sum, false};
  auto t0 = Clock::now();
  Rational a = evaluate_descriptor_exact(inst, {x1, avg_sum});
  Rational b = evaluate_descriptor_exact(inst, {x2, sum_sign_sum});
  const double ms = seconds_since(t0) * 1000;
  o.require(a == Rational(3, 2), "avg/sum descriptor over x1 is " + a.get_str() + ", expected 3/2");
  o.require(b == 1, "sum/sign/sum descriptor over x2 is " + b.get_str() + ", expected 1");
  o.require(ms < 1.0, "took " + fmt(ms) + " ms");
  o.note("values " + a.get_str() + " and " + b.get_str() + " in " + fmt(ms, 4) + " ms");
  return o;
}

Outcome schema_counts(const ResultMatrix *run) {
  Outcome o;
  o.require(FeatureSchema::raw().size() == 384, "raw schema size");
  o.require(FeatureSchema::raw().descriptors().size() == 384, "raw descriptor list");
  if (!run) {
    o.require(false, "no experiment result to read the filtered count from");
    return o;
  }
  o.require(run->raw_feature_count == 384, "pipeline raw count");
  o.require(run->filtered_feature_count % 3 == 0, "filtered count not divisible by 3");
  o.require(run->filtered_feature_count <= 384, "filtered count above 384");
  o.note("raw 384, filtered " + std::to_string(run->filtered_feature_count) + " (" +
         std::to_string(run->filtered_feature_count / 3) + " shapes)");
  return o;
}

Outcome equivariance() {
  Outcome o;
  auto t0 = Clock::now();
  Rng rng(derive_seed(1, "acceptance-equivariance"));
  const auto raw = FeatureSchema::raw();
  std::size_t pairs = 0;
  std::size_t mismatches = 0;
  for (int i = 0; i < 500; ++i) {
    auto inst = synth::random_instance(rng, {5, 4, 4, 5}, "e" + std::to_string(i));
    const auto base = featurize_raw_exact(inst);
    for (const auto &sigma : VariablePermutation::all()) {
      if (featurize_raw_exact(inst.renamed(sigma)) != permute_block_vector<Rational>(base, sigma, raw))
        ++mismatches;
      ++pairs;
    }
  }
  const double s = seconds_since(t0);
  o.require(mismatches == 0, std::to_string(mismatches) + " mismatching pairs");
  o.require(s < 60, "took " + fmt(s, 1) + " s");
  o.note(std::to_string(pairs) + " instance/permutation pairs exact in " + fmt(s, 2) + " s");
  return o;
}

Outcome group_action() {
  Outcome o;
  int identities = 0;
  for (const auto &s : VariablePermutation::all())
    for (const auto &t : VariablePermutation::all()) {
      bool ok = true;
      for (int l = 0; l < 6; ++l)
        ok = ok && permute_ordering_label(permute_ordering_label(OrderingLabel(l), s), t) ==
                       permute_ordering_label(OrderingLabel(l), t.compose(s));
      identities += ok;
    }
  o.require(identities == 36, std::to_string(identities) + " of 36 identities hold");
  for (int l = 0; l < 6; ++l) {
    std::multiset<int> orbit;
    for (const auto &s : VariablePermutation::all())
      orbit.insert(permute_ordering_label(OrderingLabel(l), s).index());
    o.require(orbit == std::multiset<int>{0, 1, 2, 3, 4, 5}, "orbit of " + std::to_string(l));
  }
  o.require(permute_ordering_label(OrderingLabel(2), VariablePermutation::transposition(x1, x2)).index() == 0,
            "swapping x1 and x2 sends x2>x1>x3 to x1>x2>x3");
  o.note("36/36 identities, 6 free orbits");
  return o;
}

Outcome augmentation_structure() {
  Outcome o;
  auto t0 = Clock::now();
  const std::array<std::size_t, 6> counts = {406, 93, 135, 51, 202, 132};
  Dataset ds;
  ds.schema = FeatureSchema({DescriptorShape::from_index(0), DescriptorShape::from_index(64)});
  Rng rng(5);
  for (int c = 0; c < 6; ++c)
    for (std::size_t k = 0; k < counts[static_cast<std::size_t>(c)]; ++k) {
      Row r{"i" + std::to_string(ds.rows.size()), {}, OrderingLabel(c)};
      for (int f = 0; f < 6; ++f)
        r.features.push_back(uniform_unit(rng));
      ds.rows.push_back(std::move(r));
    }
  o.require(ds.size() == 1019 && ds.class_counts() == counts, "input profile");
  auto aug = augment_full(ds);
  o.require(aug.size() == 6114, "augmented size " + std::to_string(aug.size()));
  for (auto c : aug.class_counts())
    o.require(c == 1019, "augmented class count " + std::to_string(c));
  auto bal = balance(ds, BalanceMode::Exact, 1);
  std::string bal_counts;
  for (auto c : bal.class_counts()) {
    o.require(c == 169 || c == 170, "balanced class count " + std::to_string(c));
    bal_counts += (bal_counts.empty() ? "" : ",") + std::to_string(c);
  }
  const double s = seconds_since(t0);
  o.require(s < 5, "took " + fmt(s, 2) + " s");
  o.note("6114 rows at 1019 per class; exact balance " + bal_counts);
  return o;
}

Outcome labelling() {
  Outcome o;
  auto rec = [](std::array<double, 6> t) {
    TimingRecord r;
    for (std::size_t i = 0; i < 6; ++i)
      r.seconds[i] = t[i];
    return r;
  };
  const double T = kTimedOut;
  auto l1 = label_from_timings(rec({1.2, T, 0.5, 3.0, 7.0, 9.0}));
  o.require(l1 && l1->index() == 2, "argmin of timings");
  auto l2 = label_from_timings(rec({0.5, 0.5, 1, 1, 1, 1}));
  o.require(l2 && l2->index() == 0, "tie to lowest index");
  o.require(!label_from_timings(rec({T, T, T, T, T, T})), "all-timeout record is discarded");
  o.require(!label_from_timings(rec({61, 62, 63, 64, 65, 66}), 60), "slower than 60 s is a timeout");

  auto chain = projection_chain({P("x1^2 - x2")}, OrderingLabel(0));
  o.require(sotd(chain) == 4, "sotd of {x1^2 - x2} under x1>x2>x3 is " + std::to_string(sotd(chain)));
  o.require(resultant(P("x1^2 - 1"), P("x1 - 1"), x1).is_zero(), "res_x(x^2 - 1, x - 1) = 0");
  o.require(discriminant(P("x1^2 + x2*x1 + x3"), x1) == P("4*x3 - x2^2"), "disc_x(x^2 + bx + c) = 4c - b^2");
  o.note("sotd 4, timing argmin/discard, resultant and discriminant exact");
  return o;
}

struct RunOutcome {
  Outcome outcome;
  std::optional<ResultMatrix> matrix;
};

RunOutcome reproduction(const fs::path &corpus, const fs::path &out) {
  RunOutcome r;
  Outcome &o = r.outcome;
  auto t0 = Clock::now();
  const int synth_rc =
      cli("synth --count 3000 --seed 11 --skew 0.9 --out " + q(corpus));
  const int run_rc = cli("run --quiet --seed 1 --input " + q(corpus) + " --out " + q(out));
  const double s = seconds_since(t0);
  o.require(synth_rc == 0, "synth exit code " + std::to_string(synth_rc));
  o.require(run_rc == 0, "run exit code " + std::to_string(run_rc));
  if (run_rc != 0)
    return r;
  r.matrix = ResultMatrix::from_json(io::read_json_file(out / "result.json"));
  const auto &m = *r.matrix;
  const auto B = Provenance::Balanced;
  for (auto kind : m.models) {
    const double unb = m.at(kind, Provenance::Unbalanced, B);
    const double bal = m.at(kind, Provenance::Balanced, B);
    const double aug = m.at(kind, Provenance::Augmented, B);
    const auto name = ml::to_string(kind);
    o.require(aug >= bal - 0.02, name + " augmented-trained " + fmt(aug) + " < balanced-trained " + fmt(bal) + " - 0.02");
    o.require(bal >= unb - 0.02, name + " balanced-trained " + fmt(bal) + " < unbalanced-trained " + fmt(unb) + " - 0.02");
    o.require(aug > unb, name + " augmented-trained " + fmt(aug) + " not above unbalanced-trained " + fmt(unb));
    for (double a : {unb, bal, aug})
      o.require(a > 1.0 / 6.0, name + " at or below the 1/6 baseline");
    o.note(name + " u/b/a " + fmt(unb) + "/" + fmt(bal) + "/" + fmt(aug));
  }
  o.require(s < 600, "full run took " + fmt(s, 0) + " s");
  o.note(std::to_string(m.instances_ingested) + " instances, " + fmt(s, 0) + " s");
  return r;
}

Outcome ml_sanity(const fs::path &run_dir) {
  Outcome o;
  auto ds = oracle::blobs(600, 6, 12, 2024);
  auto [train_ds, test_ds] = split(ds, 0.2, 17);
  ml::CVPlan plan;
  plan.grids = ml::CVPlan::default_grids();
  plan.seed = 3;
  for (auto kind : {ml::ModelKind::Knn, ml::ModelKind::DecisionTree, ml::ModelKind::RandomForest}) {
    auto tr = ml::train(kind, train_ds, plan);
    const double acc = ml::accuracy(tr.model, test_ds);
    o.require(acc >= 0.9, ml::to_string(kind) + " holdout accuracy " + fmt(acc));
    o.note(ml::to_string(kind) + " " + fmt(acc));
  }
  const auto aug_path = run_dir / "datasets" / "augmented_test.csv";
  if (!fs::exists(aug_path)) {
    o.require(false, "no augmented test set from the experiment run");
    return o;
  }
  auto aug = io::read_dataset(aug_path);
  Rng rng(derive_seed(1, "acceptance-random-guess"));
  std::size_t hits = 0;
  for (const auto &row : aug.rows)
    hits += static_cast<int>(uniform_below(rng, 6)) == row.label.index();
  const double acc = static_cast<double>(hits) / static_cast<double>(aug.size());
  o.require(std::abs(acc - 1.0 / 6.0) <= 0.03, "random guessing scored " + fmt(acc));
  o.note("random guess " + fmt(acc) + " on " + std::to_string(aug.size()) + " augmented rows");
  return o;
}

Outcome determinism(const fs::path &corpus, const fs::path &first) {
  Outcome o;
  const auto second = root / "run_b";
  const int rc = cli("run --quiet --seed 1 --input " + q(corpus) + " --out " + q(second));
  o.require(rc == 0, "second run exit code " + std::to_string(rc));
  // every artifact, not just the matrix
  std::set<fs::path> files;
  for (const auto &base : {first, second})
    for (const auto &e : fs::recursive_directory_iterator(base))
      if (e.is_regular_file())
        files.insert(fs::relative(e.path(), base));
  o.require(files.count("matrix.csv") == 1, "matrix.csv missing");
  std::size_t bytes = 0;
  for (const auto &rel : files) {
    const auto a = slurp(first / rel);
    const bool same = fs::exists(first / rel) && fs::exists(second / rel) && a == slurp(second / rel);
    o.require(same, rel.string() + " differs between runs");
    bytes += a.size();
  }
  o.note(std::to_string(files.size()) + " files, " + std::to_string(bytes) + " bytes identical");
  return o;
}

} // namespace

int main() {
  fs::remove_all(root);
  fs::create_directories(root);
  auto guarded = [](const std::function<Outcome()> &f) {
    try {
      return f();
    } catch (const std::exception &ex) {
      Outcome o;
      o.require(false, std::string("exception: ") + ex.what());
      return o;
    }
  };

  const auto corpus = root / "corpus";
  const auto run_a = root / "run_a";
  std::array<std::pair<std::string, Outcome>, 9> results;
  results[0] = {"descriptor worked examples", guarded(worked_examples)};
  results[2] = {"featurize equivariance", guarded(equivariance)};
  results[3] = {"S3 action on labels", guarded(group_action)};
  results[4] = {"augmentation structure", guarded(augmentation_structure)};
  results[5] = {"labelling", guarded(labelling)};

  RunOutcome run;
  try {
    run = reproduction(corpus, run_a);
  } catch (const std::exception &ex) {
    run.outcome.require(false, std::string("exception: ") + ex.what());
  }
  const ResultMatrix *matrix = run.matrix ? &*run.matrix : nullptr;
  results[1] = {"schema counts", guarded([&] { return schema_counts(matrix); })};
  results[6] = {"experiment reproduction on the balanced test set", run.outcome};
  results[7] = {"classifier sanity", guarded([&] { return ml_sanity(run_a); })};
  results[8] = {"run determinism", guarded([&] { return determinism(corpus, run_a); })};

  int failed = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto &[title, o] = results[i];
    std::printf("criterion %zu: %s - %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", title.c_str(),
                o.detail.c_str());
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of 9 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
