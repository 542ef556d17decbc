#pragma once

// End-to-end experiment: three training and three testing datasets, every
// model trained on each training set and scored on each testing set.
//
// Seeds per stage, all derived from the master seed:
//   split                 derive_seed(seed, "split")
//   balance (train/test)  derive_seed(seed, "balance-train" / "balance-test")
//   training              derive_seed(seed, "train/<model>/<provenance>")

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "cadaug/augmentation.hpp"
#include "cadaug/labelling.hpp"
#include "cadaug/ml.hpp"
#include "cadaug/smtlib.hpp"

namespace cadaug {

/// Bad flags or settings; CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Unusable input data; CLI exit code 2.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Failure inside run_pipeline, tagged with the stage that raised it.
class PipelineError : public std::runtime_error {
public:
  PipelineError(std::string stage, const std::string &message, bool data_error);
  const std::string &stage() const { return stage_; }
  bool data_error() const { return data_error_; }

private:
  std::string stage_;
  bool data_error_;
};

enum class Labeller { Timings, Sotd };
std::string to_string(Labeller l);
Labeller parse_labeller(const std::string &s);

struct ExperimentConfig {
  /// Directory of .smt2 scripts or an instances .jsonl file.
  std::filesystem::path input;
  Labeller labeller = Labeller::Sotd;
  std::optional<std::filesystem::path> timings;
  double timeout = kDefaultTimeoutSeconds;
  double test_fraction = 0.2;
  BalanceMode balance_mode = BalanceMode::Random;
  std::uint64_t seed = 1;
  std::vector<ml::ModelKind> models = {ml::ModelKind::Knn, ml::ModelKind::DecisionTree,
                                       ml::ModelKind::RandomForest};
  std::filesystem::path out;
  int cv_folds = 5;
  std::map<ml::ModelKind, std::vector<ml::Hyperparameters>> grids = ml::CVPlan::default_grids();
  ProjectionBudget budget;

  /// Throws ConfigError.
  void validate() const;
  nlohmann::ordered_json to_json() const;
};

inline constexpr std::array<Provenance, 3> kProvenances = {
    Provenance::Unbalanced, Provenance::Balanced, Provenance::Augmented};

struct DatasetSummary {
  Provenance provenance = Provenance::Unbalanced;
  Role role = Role::Train;
  std::size_t rows = 0;
  std::array<std::size_t, kNumOrderings> class_counts{};
};

struct ResultMatrix {
  std::vector<ml::ModelKind> models;
  /// (model, training provenance, testing provenance) -> accuracy.
  std::map<std::tuple<ml::ModelKind, Provenance, Provenance>, double> accuracy;
  /// Selected hyperparameters, keyed like the first two accuracy coordinates.
  std::map<std::pair<ml::ModelKind, Provenance>, std::string> selected;
  std::vector<DatasetSummary> datasets;
  std::size_t instances_ingested = 0;
  std::size_t instances_failed = 0;
  std::size_t instances_discarded = 0;
  std::size_t raw_feature_count = 0;
  std::size_t filtered_feature_count = 0;
  std::uint64_t seed = 0;

  double at(ml::ModelKind m, Provenance train, Provenance test) const;
  /// Throws std::logic_error unless every model has all nine cells in [0, 1].
  void check_complete() const;

  nlohmann::ordered_json to_json() const;
  static ResultMatrix from_json(const nlohmann::json &j);
};

struct ImprovementSummary {
  /// Per model, relative change on the balanced test set.
  std::map<ml::ModelKind, double> balanced_vs_unbalanced;
  std::map<ml::ModelKind, double> augmented_vs_unbalanced;
  double mean_balanced_vs_unbalanced = 0;
  double mean_augmented_vs_unbalanced = 0;
};

/// (acc_trained_on_X - acc_trained_on_unbalanced) / acc_trained_on_unbalanced,
/// all on the balanced test set, averaged over models. A zero baseline gives
/// NaN for that model.
ImprovementSummary improvement_summary(const ResultMatrix &m);

/// Runs every stage and writes intermediate artifacts plus the report into
/// config.out. Progress lines go to `log` if given.
ResultMatrix run_pipeline(const ExperimentConfig &config, std::ostream *log = nullptr);

std::string render_report_markdown(const ResultMatrix &m);
std::string render_matrix_csv(const ResultMatrix &m);
nlohmann::ordered_json render_datasets_json(const ResultMatrix &m);

/// Writes report.md, matrix.csv, datasets.json and result.json into `dir`.
void write_report(const ResultMatrix &m, const std::filesystem::path &dir);

/// Seed for training `kind` on data of provenance `p`.
std::uint64_t training_seed(std::uint64_t master, ml::ModelKind kind, Provenance p);

/// Ingests a .smt2 directory (deduplicated) or reads an instances .jsonl file.
smtlib::IngestResult load_instances(const std::filesystem::path &input);

/// Labels with sotd or with a timings CSV; nullopt marks a discard.
std::vector<std::optional<OrderingLabel>> label_instances(const std::vector<ProblemInstance> &insts,
                                                          Labeller labeller,
                                                          const std::optional<std::filesystem::path> &timings,
                                                          double timeout,
                                                          const ProjectionBudget &budget);

/// Unbalanced dataset with the raw schema from labelled instances
/// (discarded ones skipped).
Dataset build_dataset(const std::vector<ProblemInstance> &insts,
                      const std::vector<std::optional<OrderingLabel>> &labels);

/// Model file contents: {"train", "model", "cv", "selected"}.
nlohmann::ordered_json training_record(ml::ModelKind kind, Provenance train_provenance,
                                       const ml::TrainResult &tr);

/// Fits the distinct filter on `train` and projects both parts onto it.
std::pair<Dataset, Dataset> apply_filter(const Dataset &train, const Dataset &test);

} // namespace cadaug
