#pragma once

// Small classifiers for ordering selection: k-nearest neighbours, CART
// decision trees and random forests, plus grid search by k-fold CV.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cadaug/augmentation.hpp"

namespace cadaug::ml {

class DegenerateDataset : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

enum class ModelKind { Knn, DecisionTree, RandomForest };
enum class FeatureSubset { All, Sqrt, Third };

std::string to_string(ModelKind k);
ModelKind parse_model_kind(const std::string &s);
std::string to_string(FeatureSubset f);
FeatureSubset parse_feature_subset(const std::string &s);

/// Union of the knobs of all three kinds; each kind reads its own.
struct Hyperparameters {
  int k = 5;
  int max_depth = 0; ///< 0 means unlimited
  int min_leaf = 1;
  int trees = 100;
  FeatureSubset max_features = FeatureSubset::All;
  bool bootstrap = true;

  nlohmann::json to_json(ModelKind kind) const;
  static Hyperparameters from_json(ModelKind kind, const nlohmann::json &j);
  std::string describe(ModelKind kind) const;

  friend bool operator==(const Hyperparameters &, const Hyperparameters &) = default;
};

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  static Matrix from_dataset(const Dataset &ds);
};

/// Per-feature z-score; zero-variance features map to 0.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  static Standardizer fit(const Matrix &x);
  std::vector<double> apply(std::span<const double> v) const;
  Matrix apply(const Matrix &x) const;
};

/// Column-wise ranks of a Matrix: levels[f] holds the sorted distinct values
/// of column f, code[f * rows + i] the rank of x(i, f). Built once and shared
/// by all trees of a forest.
struct RankedMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::vector<double>> levels;
  std::vector<std::uint32_t> code;

  static RankedMatrix of(const Matrix &x);
};

struct TreeNode {
  int feature = -1; ///< -1 for leaves
  double threshold = 0;
  int left = -1;
  int right = -1;
  int label = 0;
};

class DecisionTree {
public:
  /// CART with Gini impurity and midpoint thresholds. `weights` are
  /// per-row multiplicities (bootstrap counts; empty means all 1).
  /// `features_per_split` < cols draws that many candidate features per
  /// node from `rng`.
  static DecisionTree fit(const Matrix &x, std::span<const int> y, std::span<const double> weights,
                          int max_depth, int min_leaf, std::size_t features_per_split,
                          std::uint64_t seed);
  static DecisionTree fit(const RankedMatrix &x, std::span<const int> y,
                          std::span<const double> weights, int max_depth, int min_leaf,
                          std::size_t features_per_split, std::uint64_t seed);

  int predict(std::span<const double> v) const;
  /// Depth of the deepest leaf; a single leaf has depth 0.
  int depth() const;
  const std::vector<TreeNode> &nodes() const { return nodes_; }

  nlohmann::json to_json() const;
  static DecisionTree from_json(const nlohmann::json &j);

private:
  std::vector<TreeNode> nodes_;
};

class TrainedModel {
public:
  static TrainedModel fit(ModelKind kind, const Hyperparameters &hp, const Matrix &x,
                          std::span<const int> y, std::uint64_t seed);

  ModelKind kind() const { return kind_; }
  const Hyperparameters &hyperparameters() const { return hp_; }
  std::size_t feature_count() const { return feature_count_; }
  const std::vector<DecisionTree> &trees() const { return trees_; }

  /// Throws SchemaMismatch on a wrong-length input.
  OrderingLabel predict(std::span<const double> v) const;

  nlohmann::json to_json() const;
  static TrainedModel from_json(const nlohmann::json &j);

private:
  int predict_index(std::span<const double> v) const;

  ModelKind kind_ = ModelKind::Knn;
  Hyperparameters hp_;
  std::size_t feature_count_ = 0;
  std::optional<Standardizer> standardizer_;
  Matrix neighbours_;
  std::vector<int> neighbour_labels_;
  std::vector<DecisionTree> trees_;
};

struct CVPlan {
  int folds = 5;
  std::map<ModelKind, std::vector<Hyperparameters>> grids;
  std::uint64_t seed = 0;

  static std::map<ModelKind, std::vector<Hyperparameters>> default_grids();
  /// Reads {"knn": [{"k": 3}, ...], "dt": [...], "rf": [...]}; missing kinds
  /// keep their defaults.
  static std::map<ModelKind, std::vector<Hyperparameters>> grids_from_json(const nlohmann::json &j);
};

struct CVReport {
  std::vector<Hyperparameters> grid;
  std::vector<std::vector<double>> fold_accuracy; ///< [grid point][fold]
  std::vector<double> mean_accuracy;
  std::size_t selected = 0;
};

struct TrainResult {
  TrainedModel model;
  CVReport cv;
};

/// Folds are drawn over source instances, so all renamings of one instance
/// land in the same fold.
std::vector<int> assign_folds(const Dataset &ds, int folds, std::uint64_t seed);

/// Grid search by k-fold CV (best mean accuracy, ties to the earlier grid
/// point), then a refit on the whole dataset.
TrainResult train(ModelKind kind, const Dataset &ds, const CVPlan &plan);

OrderingLabel predict(const TrainedModel &model, std::span<const double> v);

/// Fraction of rows predicted correctly; OpenMP-parallel over rows.
double accuracy(const TrainedModel &model, const Dataset &ds);
/// Reference loop for accuracy().
double accuracy_serial(const TrainedModel &model, const Dataset &ds);

} // namespace cadaug::ml
