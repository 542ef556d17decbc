#pragma once

// Best-ordering labels, either from measured CAD timings or from a cheap
// projection-based cost proxy (sum of total degrees over the projection
// chain).

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cadaug/instance.hpp"

namespace cadaug {

class MissingOrderingError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class BudgetExceeded : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultTimeoutSeconds = 60.0;

/// Argmin over orderings that finished within `timeout` (ties to the lowest
/// index); nullopt when every ordering timed out.
std::optional<OrderingLabel> label_from_timings(const TimingRecord &rec,
                                                double timeout = kDefaultTimeoutSeconds);

/// Reads `instance_id,ordering,seconds` rows (header required); `seconds` is
/// a positive decimal or TIMEOUT. Records need not be complete here.
std::map<std::string, TimingRecord> read_timings_csv(std::istream &in);

struct ProjectionBudget {
  std::size_t max_polynomials = 512;
  std::uint32_t max_total_degree = 200;
};

using PolySet = std::vector<Polynomial>;

/// McCallum projection eliminating `v`: coefficients, discriminants and
/// pairwise resultants of the polynomials containing `v`, plus the others
/// unchanged; constants dropped, each result made primitive, deduplicated.
/// Throws BudgetExceeded if the result breaks `budget`.
PolySet mccallum_projection(const PolySet &polys, Variable v,
                            const ProjectionBudget &budget = {});

/// [input, after eliminating the greatest variable, after the next one].
std::vector<PolySet> projection_chain(const PolySet &polys, OrderingLabel ordering,
                                      const ProjectionBudget &budget = {});

/// Sum over all levels, polynomials and monomials of monomial total degree.
std::uint64_t sotd(const std::vector<PolySet> &chain);

/// sotd per ordering; nullopt where the projection broke the budget.
std::array<std::optional<std::uint64_t>, kNumOrderings>
sotd_per_ordering(const ProblemInstance &inst, const ProjectionBudget &budget = {});

/// Argmin of sotd over the six orderings, ties to the lowest index;
/// nullopt (discard) if every ordering broke the budget.
std::optional<OrderingLabel> label_by_sotd(const ProblemInstance &inst,
                                           const ProjectionBudget &budget = {});

/// Reference loop over instances.
std::vector<std::optional<OrderingLabel>>
label_all_by_sotd_serial(const std::vector<ProblemInstance> &instances,
                         const ProjectionBudget &budget = {});
/// OpenMP-parallel over instances; same result as the serial loop.
std::vector<std::optional<OrderingLabel>>
label_all_by_sotd(const std::vector<ProblemInstance> &instances,
                  const ProjectionBudget &budget = {});

} // namespace cadaug
