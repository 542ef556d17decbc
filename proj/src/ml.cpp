#include "cadaug/ml.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "cadaug/random.hpp"

namespace cadaug::ml {

std::string to_string(ModelKind k) {
  switch (k) {
  case ModelKind::Knn:
    return "knn";
  case ModelKind::DecisionTree:
    return "dt";
  case ModelKind::RandomForest:
    return "rf";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string &s) {
  if (s == "knn")
    return ModelKind::Knn;
  if (s == "dt")
    return ModelKind::DecisionTree;
  if (s == "rf")
    return ModelKind::RandomForest;
  throw std::invalid_argument("unknown model kind '" + s + "'");
}

std::string to_string(FeatureSubset f) {
  switch (f) {
  case FeatureSubset::All:
    return "all";
  case FeatureSubset::Sqrt:
    return "sqrt";
  case FeatureSubset::Third:
    return "third";
  }
  return "?";
}

FeatureSubset parse_feature_subset(const std::string &s) {
  if (s == "all")
    return FeatureSubset::All;
  if (s == "sqrt")
    return FeatureSubset::Sqrt;
  if (s == "third")
    return FeatureSubset::Third;
  throw std::invalid_argument("unknown feature subset '" + s + "'");
}

namespace {

std::size_t features_per_split(FeatureSubset f, std::size_t d) {
  switch (f) {
  case FeatureSubset::All:
    return d;
  case FeatureSubset::Sqrt:
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d))));
  case FeatureSubset::Third:
    return std::max<std::size_t>(1, d / 3);
  }
  return d;
}

nlohmann::json depth_json(int d) { return d == 0 ? nlohmann::json(nullptr) : nlohmann::json(d); }

int vote(std::span<const double> counts) {
  int best = 0;
  for (int c = 1; c < kNumOrderings; ++c)
    if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(best)])
      best = c;
  return best;
}

} // namespace

nlohmann::json Hyperparameters::to_json(ModelKind kind) const {
  switch (kind) {
  case ModelKind::Knn:
    return {{"k", k}};
  case ModelKind::DecisionTree:
    return {{"max_depth", depth_json(max_depth)}, {"min_leaf", min_leaf}};
  case ModelKind::RandomForest:
    return {{"trees", trees},
            {"max_depth", depth_json(max_depth)},
            {"min_leaf", min_leaf},
            {"max_features", to_string(max_features)},
            {"bootstrap", bootstrap}};
  }
  return {};
}

Hyperparameters Hyperparameters::from_json(ModelKind kind, const nlohmann::json &j) {
  Hyperparameters hp;
  auto depth = [&] {
    if (!j.contains("max_depth") || j.at("max_depth").is_null())
      return 0;
    return j.at("max_depth").get<int>();
  };
  switch (kind) {
  case ModelKind::Knn:
    hp.k = j.value("k", hp.k);
    if (hp.k < 1)
      throw std::invalid_argument("knn k must be positive");
    break;
  case ModelKind::DecisionTree:
    hp.max_depth = depth();
    hp.min_leaf = j.value("min_leaf", hp.min_leaf);
    break;
  case ModelKind::RandomForest:
    hp.trees = j.value("trees", hp.trees);
    hp.max_depth = depth();
    hp.min_leaf = j.value("min_leaf", hp.min_leaf);
    hp.max_features = parse_feature_subset(j.value("max_features", std::string("sqrt")));
    hp.bootstrap = j.value("bootstrap", true);
    if (hp.trees < 1)
      throw std::invalid_argument("forest needs at least one tree");
    break;
  }
  if (hp.max_depth < 0 || hp.min_leaf < 1)
    throw std::invalid_argument("bad tree hyperparameters");
  return hp;
}

std::string Hyperparameters::describe(ModelKind kind) const { return to_json(kind).dump(); }

// --- data --------------------------------------------------------------------

Matrix Matrix::from_dataset(const Dataset &ds) {
  Matrix m;
  m.rows = ds.rows.size();
  m.cols = ds.schema.size();
  m.data.reserve(m.rows * m.cols);
  for (const auto &r : ds.rows) {
    if (r.features.size() != m.cols)
      throw SchemaMismatch("row " + r.id + " does not match the dataset schema");
    m.data.insert(m.data.end(), r.features.begin(), r.features.end());
  }
  return m;
}

Standardizer Standardizer::fit(const Matrix &x) {
  if (x.rows == 0)
    throw std::invalid_argument("cannot standardize an empty matrix");
  Standardizer s;
  s.mean.assign(x.cols, 0.0);
  s.stddev.assign(x.cols, 0.0);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < x.cols; ++j)
      s.mean[j] += x.data[i * x.cols + j];
  for (auto &m : s.mean)
    m /= static_cast<double>(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < x.cols; ++j) {
      double d = x.data[i * x.cols + j] - s.mean[j];
      s.stddev[j] += d * d;
    }
  for (auto &v : s.stddev)
    v = std::sqrt(v / static_cast<double>(x.rows));
  return s;
}

std::vector<double> Standardizer::apply(std::span<const double> v) const {
  std::vector<double> out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j)
    out[j] = stddev[j] > 0 ? (v[j] - mean[j]) / stddev[j] : 0.0;
  return out;
}

Matrix Standardizer::apply(const Matrix &x) const {
  Matrix out = x;
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < x.cols; ++j) {
      double &e = out.data[i * x.cols + j];
      e = stddev[j] > 0 ? (e - mean[j]) / stddev[j] : 0.0;
    }
  return out;
}

// --- decision tree -------------------------------------------------------------

namespace {

using ClassWeights = std::array<double, kNumOrderings>;

double gini_score(const ClassWeights &c, double w) {
  if (w <= 0)
    return 0;
  double s = 0;
  for (double v : c)
    s += v * v;
  return w - s / w; // w * gini
}

class TreeBuilder {
public:
  TreeBuilder(const RankedMatrix &x, std::span<const int> y, std::span<const double> w,
              int max_depth, int min_leaf, std::size_t per_split, std::uint64_t seed)
      : x_(x), y_(y), w_(w), max_depth_(max_depth), min_leaf_(min_leaf),
        per_split_(std::min(per_split, x.cols)), rng_(seed), features_(x.cols) {
    std::iota(features_.begin(), features_.end(), 0);
    std::size_t max_levels = 0;
    for (const auto &l : x.levels)
      max_levels = std::max(max_levels, l.size());
    hist_.assign(max_levels, {});
    seen_.assign(max_levels, 0);
  }

  std::vector<TreeNode> build() {
    std::vector<std::uint32_t> idx;
    for (std::size_t i = 0; i < x_.rows; ++i)
      if (weight(i) > 0)
        idx.push_back(static_cast<std::uint32_t>(i));
    grow(idx, 0);
    return std::move(nodes_);
  }

private:
  double weight(std::size_t i) const { return w_.empty() ? 1.0 : w_[i]; }

  int grow(std::vector<std::uint32_t> &idx, int depth) {
    ClassWeights counts{};
    double total = 0;
    for (auto i : idx) {
      counts[static_cast<std::size_t>(y_[i])] += weight(i);
      total += weight(i);
    }
    const int node_id = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    nodes_[static_cast<std::size_t>(node_id)].label = vote(counts);

    const double parent = gini_score(counts, total);
    if (parent <= 1e-12 || (max_depth_ > 0 && depth >= max_depth_) ||
        total < 2.0 * min_leaf_)
      return node_id;

    if (per_split_ < x_.cols) {
      for (std::size_t k = 0; k < per_split_; ++k) {
        auto j = k + uniform_below(rng_, x_.cols - k);
        std::swap(features_[k], features_[j]);
      }
    }
    int best_feature = -1;
    std::uint32_t best_code = 0;
    double best_threshold = 0;
    double best_score = parent - 1e-12;
    for (std::size_t k = 0; k < per_split_; ++k) {
      const std::size_t f = features_[k];
      const std::uint32_t *codes = x_.code.data() + f * x_.rows;
      // Class weights per distinct value present in this node, ascending.
      touched_.clear();
      for (auto i : idx) {
        const auto c = codes[i];
        if (!seen_[c]) {
          seen_[c] = 1;
          touched_.push_back(c);
        }
        hist_[c][static_cast<std::size_t>(y_[i])] += weight(i);
      }
      std::sort(touched_.begin(), touched_.end());
      ClassWeights left{};
      double wl = 0;
      const auto &levels = x_.levels[f];
      for (std::size_t p = 0; p + 1 < touched_.size(); ++p) {
        const auto &bin = hist_[touched_[p]];
        for (std::size_t c = 0; c < kNumOrderings; ++c) {
          left[c] += bin[c];
          wl += bin[c];
        }
        const double wr = total - wl;
        if (wl < min_leaf_ || wr < min_leaf_)
          continue;
        ClassWeights right;
        for (std::size_t c = 0; c < kNumOrderings; ++c)
          right[c] = counts[c] - left[c];
        const double score = gini_score(left, wl) + gini_score(right, wr);
        if (score < best_score) {
          best_score = score;
          best_feature = static_cast<int>(f);
          best_code = touched_[p];
          const double a = levels[touched_[p]];
          const double b = levels[touched_[p + 1]];
          double mid = a + (b - a) / 2;
          best_threshold = mid < b ? mid : a;
        }
      }
      for (auto c : touched_) {
        seen_[c] = 0;
        hist_[c] = {};
      }
    }
    if (best_feature < 0)
      return node_id;

    const std::uint32_t *codes = x_.code.data() + static_cast<std::size_t>(best_feature) * x_.rows;
    std::vector<std::uint32_t> left_idx, right_idx;
    for (auto i : idx)
      (codes[i] <= best_code ? left_idx : right_idx).push_back(i);
    idx.clear();
    idx.shrink_to_fit();
    const int l = grow(left_idx, depth + 1);
    const int r = grow(right_idx, depth + 1);
    auto &node = nodes_[static_cast<std::size_t>(node_id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return node_id;
  }

  const RankedMatrix &x_;
  std::span<const int> y_;
  std::span<const double> w_;
  int max_depth_;
  int min_leaf_;
  std::size_t per_split_;
  Rng rng_;
  std::vector<std::size_t> features_;
  std::vector<ClassWeights> hist_;
  std::vector<char> seen_;
  std::vector<std::uint32_t> touched_;
  std::vector<TreeNode> nodes_;
};

} // namespace

RankedMatrix RankedMatrix::of(const Matrix &x) {
  RankedMatrix r;
  r.rows = x.rows;
  r.cols = x.cols;
  r.levels.resize(x.cols);
  r.code.resize(x.rows * x.cols);
  std::vector<double> col(x.rows);
  for (std::size_t f = 0; f < x.cols; ++f) {
    for (std::size_t i = 0; i < x.rows; ++i)
      col[i] = x.data[i * x.cols + f];
    auto &lv = r.levels[f];
    lv = col;
    std::sort(lv.begin(), lv.end());
    lv.erase(std::unique(lv.begin(), lv.end()), lv.end());
    for (std::size_t i = 0; i < x.rows; ++i)
      r.code[f * x.rows + i] = static_cast<std::uint32_t>(
          std::lower_bound(lv.begin(), lv.end(), col[i]) - lv.begin());
  }
  return r;
}

DecisionTree DecisionTree::fit(const Matrix &x, std::span<const int> y,
                               std::span<const double> weights, int max_depth, int min_leaf,
                               std::size_t per_split, std::uint64_t seed) {
  if (x.rows == 0 || y.size() != x.rows)
    throw std::invalid_argument("tree fit needs matching non-empty data");
  return fit(RankedMatrix::of(x), y, weights, max_depth, min_leaf, per_split, seed);
}

DecisionTree DecisionTree::fit(const RankedMatrix &x, std::span<const int> y,
                               std::span<const double> weights, int max_depth, int min_leaf,
                               std::size_t per_split, std::uint64_t seed) {
  if (x.rows == 0 || y.size() != x.rows)
    throw std::invalid_argument("tree fit needs matching non-empty data");
  if (!weights.empty() && weights.size() != x.rows)
    throw std::invalid_argument("tree fit: one weight per row expected");
  DecisionTree t;
  t.nodes_ = TreeBuilder(x, y, weights, max_depth, min_leaf, per_split, seed).build();
  return t;
}

int DecisionTree::predict(std::span<const double> v) const {
  std::size_t n = 0;
  while (nodes_[n].feature >= 0) {
    const auto &node = nodes_[n];
    n = static_cast<std::size_t>(v[static_cast<std::size_t>(node.feature)] <= node.threshold
                                     ? node.left
                                     : node.right);
  }
  return nodes_[n].label;
}

int DecisionTree::depth() const {
  std::vector<int> d(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    deepest = std::max(deepest, d[n]);
    if (nodes_[n].feature >= 0) {
      d[static_cast<std::size_t>(nodes_[n].left)] = d[n] + 1;
      d[static_cast<std::size_t>(nodes_[n].right)] = d[n] + 1;
    }
  }
  return deepest;
}

nlohmann::json DecisionTree::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto &n : nodes_)
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.label});
  return nodes;
}

DecisionTree DecisionTree::from_json(const nlohmann::json &j) {
  DecisionTree t;
  for (const auto &n : j)
    t.nodes_.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(),
                        n.at(3).get<int>(), n.at(4).get<int>()});
  const auto count = static_cast<int>(t.nodes_.size());
  if (count == 0)
    throw std::invalid_argument("empty tree in model file");
  for (int i = 0; i < count; ++i) {
    const auto &n = t.nodes_[static_cast<std::size_t>(i)];
    if (n.label < 0 || n.label >= kNumOrderings ||
        (n.feature >= 0 && (n.left <= i || n.right <= i || n.left >= count || n.right >= count)))
      throw std::invalid_argument("malformed tree in model file");
  }
  return t;
}

// --- models ------------------------------------------------------------------

namespace {

/// Indices of the k nearest rows (squared Euclidean, ties to lower index),
/// nearest first.
std::vector<std::uint32_t> nearest(const Matrix &store, std::span<const double> q, std::size_t k) {
  std::vector<std::pair<double, std::uint32_t>> dist(store.rows);
  for (std::size_t i = 0; i < store.rows; ++i) {
    const double *r = store.data.data() + i * store.cols;
    double s = 0;
    for (std::size_t j = 0; j < store.cols; ++j) {
      const double d = r[j] - q[j];
      s += d * d;
    }
    dist[i] = {s, static_cast<std::uint32_t>(i)};
  }
  k = std::min(k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<std::uint32_t> out(k);
  for (std::size_t i = 0; i < k; ++i)
    out[i] = dist[i].second;
  return out;
}

int knn_vote(std::span<const std::uint32_t> neighbours, std::span<const int> labels,
             std::size_t k) {
  std::array<double, kNumOrderings> counts{};
  for (std::size_t i = 0; i < std::min(k, neighbours.size()); ++i)
    counts[static_cast<std::size_t>(labels[neighbours[i]])] += 1;
  return vote(counts);
}

} // namespace

TrainedModel TrainedModel::fit(ModelKind kind, const Hyperparameters &hp, const Matrix &x,
                               std::span<const int> y, std::uint64_t seed) {
  if (x.rows == 0 || y.size() != x.rows)
    throw DegenerateDataset("cannot fit a model on an empty dataset");
  TrainedModel m;
  m.kind_ = kind;
  m.hp_ = hp;
  m.feature_count_ = x.cols;
  switch (kind) {
  case ModelKind::Knn:
    m.standardizer_ = Standardizer::fit(x);
    m.neighbours_ = m.standardizer_->apply(x);
    m.neighbour_labels_.assign(y.begin(), y.end());
    break;
  case ModelKind::DecisionTree:
    m.trees_.push_back(
        DecisionTree::fit(x, y, {}, hp.max_depth, hp.min_leaf, x.cols, derive_seed(seed, "tree")));
    break;
  case ModelKind::RandomForest: {
    m.trees_.resize(static_cast<std::size_t>(hp.trees));
    const std::size_t per_split = features_per_split(hp.max_features, x.cols);
    const RankedMatrix ranked = RankedMatrix::of(x);
#pragma omp parallel for schedule(dynamic, 1)
    for (int t = 0; t < hp.trees; ++t) {
      const std::uint64_t tree_seed = derive_seed(seed, static_cast<std::uint64_t>(t));
      std::vector<double> w;
      if (hp.bootstrap) {
        Rng rng(derive_seed(tree_seed, "bootstrap"));
        w.assign(x.rows, 0.0);
        for (std::size_t i = 0; i < x.rows; ++i)
          w[uniform_below(rng, x.rows)] += 1;
      }
      m.trees_[static_cast<std::size_t>(t)] = DecisionTree::fit(
          ranked, y, w, hp.max_depth, hp.min_leaf, per_split, derive_seed(tree_seed, "tree"));
    }
    break;
  }
  }
  return m;
}

int TrainedModel::predict_index(std::span<const double> v) const {
  if (v.size() != feature_count_)
    throw SchemaMismatch("model expects " + std::to_string(feature_count_) + " features, got " +
                         std::to_string(v.size()));
  if (kind_ == ModelKind::Knn) {
    auto q = standardizer_->apply(v);
    auto nn = nearest(neighbours_, q, static_cast<std::size_t>(hp_.k));
    return knn_vote(nn, neighbour_labels_, nn.size());
  }
  if (trees_.size() == 1)
    return trees_.front().predict(v);
  std::array<double, kNumOrderings> votes{};
  for (const auto &t : trees_)
    votes[static_cast<std::size_t>(t.predict(v))] += 1;
  return vote(votes);
}

OrderingLabel TrainedModel::predict(std::span<const double> v) const {
  return OrderingLabel(predict_index(v));
}

nlohmann::json TrainedModel::to_json() const {
  nlohmann::json j = {{"format", "cadaug-model"},
                      {"version", 1},
                      {"kind", to_string(kind_)},
                      {"hyperparameters", hp_.to_json(kind_)},
                      {"feature_count", feature_count_}};
  if (standardizer_)
    j["standardizer"] = {{"mean", standardizer_->mean}, {"stddev", standardizer_->stddev}};
  if (kind_ == ModelKind::Knn) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < neighbours_.rows; ++i) {
      auto r = neighbours_.row(i);
      rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    j["neighbours"] = {{"features", rows}, {"labels", neighbour_labels_}};
  } else {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto &t : trees_)
      trees.push_back(t.to_json());
    j["trees"] = trees;
  }
  return j;
}

TrainedModel TrainedModel::from_json(const nlohmann::json &j) {
  if (j.value("format", "") != "cadaug-model")
    throw std::invalid_argument("not a model file");
  if (j.at("version").get<int>() != 1)
    throw std::invalid_argument("unsupported model file version");
  TrainedModel m;
  m.kind_ = parse_model_kind(j.at("kind").get<std::string>());
  m.hp_ = Hyperparameters::from_json(m.kind_, j.at("hyperparameters"));
  m.feature_count_ = j.at("feature_count").get<std::size_t>();
  if (j.contains("standardizer")) {
    Standardizer s;
    s.mean = j["standardizer"].at("mean").get<std::vector<double>>();
    s.stddev = j["standardizer"].at("stddev").get<std::vector<double>>();
    m.standardizer_ = std::move(s);
  }
  if (m.kind_ == ModelKind::Knn) {
    if (!m.standardizer_)
      throw std::invalid_argument("knn model without standardizer");
    const auto &nb = j.at("neighbours");
    m.neighbour_labels_ = nb.at("labels").get<std::vector<int>>();
    m.neighbours_.cols = m.feature_count_;
    for (const auto &r : nb.at("features")) {
      auto row = r.get<std::vector<double>>();
      if (row.size() != m.feature_count_)
        throw std::invalid_argument("neighbour row has the wrong length");
      m.neighbours_.data.insert(m.neighbours_.data.end(), row.begin(), row.end());
      ++m.neighbours_.rows;
    }
    if (m.neighbours_.rows != m.neighbour_labels_.size() || m.neighbours_.rows == 0)
      throw std::invalid_argument("neighbour store is inconsistent");
  } else {
    for (const auto &t : j.at("trees"))
      m.trees_.push_back(DecisionTree::from_json(t));
    if (m.trees_.empty())
      throw std::invalid_argument("model has no trees");
  }
  return m;
}

// --- cross-validation ------------------------------------------------------------

std::map<ModelKind, std::vector<Hyperparameters>> CVPlan::default_grids() {
  std::map<ModelKind, std::vector<Hyperparameters>> g;
  for (int k : {1, 3, 5, 11, 21}) {
    Hyperparameters hp;
    hp.k = k;
    g[ModelKind::Knn].push_back(hp);
  }
  for (int depth : {4, 8, 16, 0})
    for (int leaf : {1, 5}) {
      Hyperparameters hp;
      hp.max_depth = depth;
      hp.min_leaf = leaf;
      g[ModelKind::DecisionTree].push_back(hp);
    }
  for (int depth : {8, 16, 0})
    for (auto subset : {FeatureSubset::Sqrt, FeatureSubset::Third}) {
      Hyperparameters hp;
      hp.trees = 100;
      hp.max_depth = depth;
      hp.max_features = subset;
      g[ModelKind::RandomForest].push_back(hp);
    }
  return g;
}

std::map<ModelKind, std::vector<Hyperparameters>>
CVPlan::grids_from_json(const nlohmann::json &j) {
  auto grids = default_grids();
  for (auto kind : {ModelKind::Knn, ModelKind::DecisionTree, ModelKind::RandomForest}) {
    const auto key = to_string(kind);
    if (!j.contains(key))
      continue;
    std::vector<Hyperparameters> points;
    for (const auto &p : j.at(key))
      points.push_back(Hyperparameters::from_json(kind, p));
    if (points.empty())
      throw std::invalid_argument("grid for " + key + " is empty");
    grids[kind] = std::move(points);
  }
  return grids;
}

std::vector<int> assign_folds(const Dataset &ds, int folds, std::uint64_t seed) {
  std::vector<std::string> groups;
  std::unordered_map<std::string, std::size_t> group_of;
  for (const auto &r : ds.rows) {
    auto src = r.source_id();
    if (group_of.emplace(src, groups.size()).second)
      groups.push_back(src);
  }
  if (groups.size() < static_cast<std::size_t>(folds))
    throw DegenerateDataset("need at least " + std::to_string(folds) +
                            " distinct instances for cross-validation");
  std::vector<std::size_t> order(groups.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  shuffle(order.begin(), order.end(), rng);
  std::vector<int> fold_of_group(groups.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    fold_of_group[order[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
  std::vector<int> out;
  out.reserve(ds.rows.size());
  for (const auto &r : ds.rows)
    out.push_back(fold_of_group[group_of.at(r.source_id())]);
  return out;
}

namespace {

struct FoldData {
  Matrix train_x, valid_x;
  std::vector<int> train_y, valid_y;
};

FoldData fold_data(const Matrix &x, const std::vector<int> &y, const std::vector<int> &fold,
                   int f) {
  FoldData d;
  d.train_x.cols = d.valid_x.cols = x.cols;
  for (std::size_t i = 0; i < x.rows; ++i) {
    auto row = x.row(i);
    if (fold[i] == f) {
      d.valid_x.data.insert(d.valid_x.data.end(), row.begin(), row.end());
      d.valid_y.push_back(y[i]);
      ++d.valid_x.rows;
    } else {
      d.train_x.data.insert(d.train_x.data.end(), row.begin(), row.end());
      d.train_y.push_back(y[i]);
      ++d.train_x.rows;
    }
  }
  return d;
}

} // namespace

TrainResult train(ModelKind kind, const Dataset &ds, const CVPlan &plan) {
  if (plan.folds < 2)
    throw std::invalid_argument("cross-validation needs at least 2 folds");
  auto grid_it = plan.grids.find(kind);
  if (grid_it == plan.grids.end() || grid_it->second.empty())
    throw std::invalid_argument("empty hyperparameter grid for " + to_string(kind));
  const auto &grid = grid_it->second;
  if (ds.rows.size() < static_cast<std::size_t>(plan.folds))
    throw DegenerateDataset("fewer rows than folds");
  std::set<int> classes;
  for (const auto &r : ds.rows)
    classes.insert(r.label.index());
  if (classes.size() < 2)
    throw DegenerateDataset("training data has a single class");

  const Matrix x = Matrix::from_dataset(ds);
  std::vector<int> y;
  for (const auto &r : ds.rows)
    y.push_back(r.label.index());
  const auto fold = assign_folds(ds, plan.folds, derive_seed(plan.seed, "folds"));

  CVReport report;
  report.grid = grid;
  report.fold_accuracy.assign(grid.size(), std::vector<double>(static_cast<std::size_t>(plan.folds)));
  for (int f = 0; f < plan.folds; ++f) {
    const FoldData d = fold_data(x, y, fold, f);
    const auto n_valid = static_cast<std::ptrdiff_t>(d.valid_x.rows);
    if (kind == ModelKind::Knn) {
      // One neighbour ranking per validation row serves every k in the grid.
      std::size_t k_max = 0;
      for (const auto &hp : grid)
        k_max = std::max(k_max, static_cast<std::size_t>(hp.k));
      const auto scaler = Standardizer::fit(d.train_x);
      const Matrix store = scaler.apply(d.train_x);
      std::vector<std::vector<std::uint32_t>> ranked(d.valid_x.rows);
#pragma omp parallel for schedule(dynamic, 16)
      for (std::ptrdiff_t i = 0; i < n_valid; ++i) {
        auto q = scaler.apply(d.valid_x.row(static_cast<std::size_t>(i)));
        ranked[static_cast<std::size_t>(i)] = nearest(store, q, k_max);
      }
      for (std::size_t g = 0; g < grid.size(); ++g) {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < d.valid_x.rows; ++i)
          hits += knn_vote(ranked[i], d.train_y, static_cast<std::size_t>(grid[g].k)) ==
                  d.valid_y[i];
        report.fold_accuracy[g][static_cast<std::size_t>(f)] =
            static_cast<double>(hits) / static_cast<double>(d.valid_x.rows);
      }
      continue;
    }
    for (std::size_t g = 0; g < grid.size(); ++g) {
      auto model = TrainedModel::fit(kind, grid[g], d.train_x, d.train_y,
                                     derive_seed(plan.seed, static_cast<std::uint64_t>(f) * 1000 + g));
      std::size_t hits = 0;
#pragma omp parallel for reduction(+ : hits)
      for (std::ptrdiff_t i = 0; i < n_valid; ++i)
        hits += model.predict(d.valid_x.row(static_cast<std::size_t>(i))).index() ==
                d.valid_y[static_cast<std::size_t>(i)];
      report.fold_accuracy[g][static_cast<std::size_t>(f)] =
          static_cast<double>(hits) / static_cast<double>(d.valid_x.rows);
    }
  }
  for (const auto &accs : report.fold_accuracy)
    report.mean_accuracy.push_back(std::accumulate(accs.begin(), accs.end(), 0.0) /
                                   static_cast<double>(accs.size()));
  for (std::size_t g = 1; g < grid.size(); ++g)
    if (report.mean_accuracy[g] > report.mean_accuracy[report.selected])
      report.selected = g;

  auto model = TrainedModel::fit(kind, grid[report.selected], x, y, derive_seed(plan.seed, "refit"));
  return {std::move(model), std::move(report)};
}

OrderingLabel predict(const TrainedModel &model, std::span<const double> v) {
  return model.predict(v);
}

namespace {

void check_rows(const TrainedModel &model, const Dataset &ds) {
  if (ds.rows.empty())
    throw std::invalid_argument("accuracy of an empty dataset");
  for (const auto &r : ds.rows)
    if (r.features.size() != model.feature_count())
      throw SchemaMismatch("row " + r.id + " has " + std::to_string(r.features.size()) +
                           " features, model expects " + std::to_string(model.feature_count()));
}

} // namespace

double accuracy(const TrainedModel &model, const Dataset &ds) {
  check_rows(model, ds);
  const auto n = static_cast<std::ptrdiff_t>(ds.rows.size());
  std::size_t hits = 0;
#pragma omp parallel for reduction(+ : hits) schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto &r = ds.rows[static_cast<std::size_t>(i)];
    hits += model.predict(r.features) == r.label;
  }
  return static_cast<double>(hits) / static_cast<double>(ds.rows.size());
}

double accuracy_serial(const TrainedModel &model, const Dataset &ds) {
  check_rows(model, ds);
  std::size_t hits = 0;
  for (const auto &r : ds.rows)
    hits += model.predict(r.features) == r.label;
  return static_cast<double>(hits) / static_cast<double>(ds.rows.size());
}

} // namespace cadaug::ml
