#pragma once

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cadaug/poly.hpp"
#include "cadaug/symmetry.hpp"

namespace cadaug {

/// Marks an ordering whose CAD did not finish within the timeout.
inline constexpr double kTimedOut = std::numeric_limits<double>::infinity();

/// Wall-clock CAD time per ordering, indexed by OrderingLabel. An empty slot
/// is a missing measurement; kTimedOut marks a timeout.
struct TimingRecord {
  std::string instance_id;
  std::array<std::optional<double>, kNumOrderings> seconds;
};

/// A set of polynomials in x1, x2, x3 taken from one source script.
struct ProblemInstance {
  std::string id;
  /// Sorted, duplicate-free, each primitive with positive leading coefficient.
  std::vector<Polynomial> polynomials;
  /// Original name to canonical variable, in declaration order.
  std::vector<std::pair<std::string, Variable>> variable_map;
  std::optional<TimingRecord> timings;

  /// Throws std::invalid_argument on an empty set, a zero polynomial, or a
  /// variable count other than 3.
  void validate() const;

  /// Renames every polynomial and renormalizes the set. The id gets a
  /// `#<perm>` suffix unless `sigma` is the identity.
  ProblemInstance renamed(const VariablePermutation &sigma) const;
};

/// Primitive integer associate with positive leading coefficient, the form
/// every stored polynomial is kept in.
Polynomial normalize_atom(const Polynomial &p);

/// Sorts, removes duplicates. Inputs must already be normalized.
std::vector<Polynomial> canonical_set(std::vector<Polynomial> polys);

} // namespace cadaug
