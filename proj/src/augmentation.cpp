#include "cadaug/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cadaug/random.hpp"

namespace cadaug {

std::string to_string(Provenance p) {
  switch (p) {
  case Provenance::Unbalanced:
    return "unbalanced";
  case Provenance::Balanced:
    return "balanced";
  case Provenance::Augmented:
    return "augmented";
  }
  return "?";
}

std::string to_string(Role r) { return r == Role::Train ? "train" : "test"; }

std::string to_string(BalanceMode m) { return m == BalanceMode::Random ? "random" : "exact"; }

Provenance parse_provenance(const std::string &s) {
  if (s == "unbalanced")
    return Provenance::Unbalanced;
  if (s == "balanced")
    return Provenance::Balanced;
  if (s == "augmented")
    return Provenance::Augmented;
  throw std::invalid_argument("unknown provenance '" + s + "'");
}

Role parse_role(const std::string &s) {
  if (s == "train")
    return Role::Train;
  if (s == "test")
    return Role::Test;
  throw std::invalid_argument("unknown role '" + s + "'");
}

BalanceMode parse_balance_mode(const std::string &s) {
  if (s == "random")
    return BalanceMode::Random;
  if (s == "exact")
    return BalanceMode::Exact;
  throw std::invalid_argument("unknown balance mode '" + s + "'");
}

std::string Row::source_id() const { return id.substr(0, id.find('#')); }

VariablePermutation Row::applied() const {
  auto hash = id.find('#');
  if (hash == std::string::npos)
    return {};
  return VariablePermutation::parse(id.substr(hash + 1));
}

std::array<std::size_t, kNumOrderings> Dataset::class_counts() const {
  std::array<std::size_t, kNumOrderings> counts{};
  for (const auto &r : rows)
    ++counts[static_cast<std::size_t>(r.label.index())];
  return counts;
}

OrderingLabel permute_ordering_label(OrderingLabel label, const VariablePermutation &sigma) {
  return label.permuted(sigma);
}

Row apply_permutation(const Row &row, const VariablePermutation &sigma,
                      const FeatureSchema &schema) {
  Row out;
  out.id = row.source_id() + "#" + sigma.compose(row.applied()).to_string();
  out.features = permute_block_vector<double>(std::span<const double>(row.features), sigma, schema);
  out.label = permute_ordering_label(row.label, sigma);
  return out;
}

Dataset balance(const Dataset &ds, BalanceMode mode, std::uint64_t seed) {
  Dataset out;
  out.provenance = Provenance::Balanced;
  out.role = ds.role;
  out.schema = ds.schema;
  out.rows.resize(ds.rows.size());
  Rng rng(seed);
  const auto perms = VariablePermutation::all();
  if (mode == BalanceMode::Random) {
    for (std::size_t i = 0; i < ds.rows.size(); ++i)
      out.rows[i] = apply_permutation(ds.rows[i], perms[uniform_below(rng, kNumOrderings)],
                                      ds.schema);
    return out;
  }
  // Greedy: visit rows in a seeded order and send each to a least-filled
  // class (ties broken at random). Every row can reach every class.
  std::vector<std::size_t> order(ds.rows.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  shuffle(order.begin(), order.end(), rng);
  std::array<std::size_t, kNumOrderings> counts{};
  for (auto i : order) {
    const std::size_t lowest = *std::min_element(counts.begin(), counts.end());
    std::vector<int> candidates;
    for (int k = 0; k < kNumOrderings; ++k)
      if (counts[static_cast<std::size_t>(k)] == lowest)
        candidates.push_back(k);
    const int target = candidates[uniform_below(rng, candidates.size())];
    const OrderingLabel from = ds.rows[i].label;
    for (const auto &sigma : perms) {
      if (from.permuted(sigma).index() == target) {
        out.rows[i] = apply_permutation(ds.rows[i], sigma, ds.schema);
        break;
      }
    }
    ++counts[static_cast<std::size_t>(target)];
  }
  return out;
}

Dataset augment_full(const Dataset &ds) {
  if (ds.provenance == Provenance::Augmented)
    throw AugmentationError("dataset is already augmented");
  Dataset out;
  out.provenance = Provenance::Augmented;
  out.role = ds.role;
  out.schema = ds.schema;
  out.rows.reserve(ds.rows.size() * kNumOrderings);
  for (const auto &row : ds.rows) {
    // Start from the source instance so re-augmenting a balanced set does not
    // compound renamings.
    Row base = row.applied().is_identity()
                   ? row
                   : apply_permutation(row, row.applied().inverse(), ds.schema);
    for (const auto &sigma : VariablePermutation::all())
      out.rows.push_back(apply_permutation(base, sigma, ds.schema));
  }
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset &ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::invalid_argument("test fraction must lie strictly between 0 and 1");
  if (ds.provenance != Provenance::Unbalanced)
    throw AugmentationError("split expects the original, unmodified dataset");
  const std::size_t n = ds.rows.size();
  if (n < 2)
    throw std::invalid_argument("split needs at least two instances");
  std::set<std::string> ids;
  for (const auto &r : ds.rows)
    if (!ids.insert(r.id).second)
      throw AugmentationError("duplicate instance id '" + r.id + "'");

  auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i)
    order[i] = i;
  Rng rng(seed);
  shuffle(order.begin(), order.end(), rng);
  std::vector<bool> is_test(n, false);
  for (std::size_t i = 0; i < n_test; ++i)
    is_test[order[i]] = true;

  Dataset train, test;
  train.provenance = test.provenance = Provenance::Unbalanced;
  train.role = Role::Train;
  test.role = Role::Test;
  train.schema = test.schema = ds.schema;
  for (std::size_t i = 0; i < n; ++i)
    (is_test[i] ? test : train).rows.push_back(ds.rows[i]);
  return {std::move(train), std::move(test)};
}

} // namespace cadaug
