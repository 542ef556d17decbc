#pragma once

// Labelled datasets and the action of S3 on them: balancing by one random
// renaming per row, and full augmentation with all six renamings.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cadaug/features.hpp"
#include "cadaug/symmetry.hpp"

namespace cadaug {

enum class Provenance { Unbalanced, Balanced, Augmented };
enum class Role { Train, Test };
enum class BalanceMode { Random, Exact };

std::string to_string(Provenance p);
std::string to_string(Role r);
std::string to_string(BalanceMode m);
Provenance parse_provenance(const std::string &s);
Role parse_role(const std::string &s);
BalanceMode parse_balance_mode(const std::string &s);

class AugmentationError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

struct Row {
  /// Source instance id, with `#<perm>` appended once a renaming was applied.
  std::string id;
  std::vector<double> features;
  OrderingLabel label;

  /// Id of the source instance, without any renaming suffix.
  std::string source_id() const;
  /// Renaming accumulated so far (identity for unsuffixed ids).
  VariablePermutation applied() const;

  friend bool operator==(const Row &, const Row &) = default;
};

struct Dataset {
  std::vector<Row> rows;
  Provenance provenance = Provenance::Unbalanced;
  Role role = Role::Train;
  FeatureSchema schema;

  std::size_t size() const { return rows.size(); }
  std::array<std::size_t, kNumOrderings> class_counts() const;
};

OrderingLabel permute_ordering_label(OrderingLabel label, const VariablePermutation &sigma);

/// Block-permutes the features and relabels; the id records the composed
/// renaming (`id#<sigma ∘ previous>`).
Row apply_permutation(const Row &row, const VariablePermutation &sigma,
                      const FeatureSchema &schema);

/// One renaming per row. Random mode draws sigma uniformly per row; exact
/// mode assigns renamings greedily so class counts differ by at most one.
Dataset balance(const Dataset &ds, BalanceMode mode, std::uint64_t seed);

/// Every row replaced by its six images, in canonical permutation order.
/// Refuses datasets that are already augmented.
Dataset augment_full(const Dataset &ds);

/// Uniform random split by instance; the test part gets
/// round(fraction * n) rows, clamped to [1, n-1]. Both parts keep the input
/// row order.
std::pair<Dataset, Dataset> split(const Dataset &ds, double test_fraction, std::uint64_t seed);

} // namespace cadaug
