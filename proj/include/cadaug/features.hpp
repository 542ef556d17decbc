#pragma once

// Descriptor grammar for polynomial sets.
//
// A descriptor shape is base -> aggregate over monomials -> optional sign ->
// aggregate over polynomials -> optional sign, with base either the degree
// of a variable or its sv measure. 2 * 4 * 2 * 4 * 2 = 128 shapes, each
// instantiated for x1, x2 and x3: 384 raw features.

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cadaug/instance.hpp"

namespace cadaug {

enum class Base { VarDegree, Sv };
enum class Aggregate { Max, Sum, Avg, AvgNonzero };

inline constexpr int kShapesPerVariable = 128;
inline constexpr int kRawFeatureCount = kNumVars * kShapesPerVariable;

class SchemaMismatch : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A descriptor with the variable left out.
struct DescriptorShape {
  Base base = Base::VarDegree;
  Aggregate monomial_agg = Aggregate::Max;
  bool sign_after_monomial = false;
  Aggregate polynomial_agg = Aggregate::Max;
  bool sign_after_polynomial = false;

  /// Position in grammar enumeration order (base outermost), 0..127.
  int index() const;
  static DescriptorShape from_index(int index);
  /// e.g. "sum_p(sign(avg_m(deg_{v})))"; `var` substitutes for {v}.
  std::string formula(const std::string &var = "v") const;

  friend bool operator==(const DescriptorShape &, const DescriptorShape &) = default;
};

struct Descriptor {
  Variable variable;
  DescriptorShape shape;

  std::string name() const { return shape.formula(variable.name()); }
  nlohmann::json to_json() const;
};

/// Ordered descriptor list laid out in per-variable blocks: all kept shapes
/// for x1, then the same shapes for x2, then for x3.
class FeatureSchema {
public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<DescriptorShape> shapes);

  /// All 128 shapes: the unfiltered grammar.
  static FeatureSchema raw();

  const std::vector<DescriptorShape> &shapes() const { return shapes_; }
  std::size_t shape_count() const { return shapes_.size(); }
  std::size_t size() const { return kNumVars * shapes_.size(); }
  std::vector<Descriptor> descriptors() const;
  Descriptor descriptor(std::size_t column) const;

  /// Column of (shape slot, variable).
  std::size_t column(std::size_t slot, Variable v) const {
    return static_cast<std::size_t>(v.pos()) * shapes_.size() + slot;
  }
  /// Raw-schema column of every column in this schema.
  std::vector<std::size_t> raw_columns() const;

  nlohmann::json to_json() const;
  static FeatureSchema from_json(const nlohmann::json &j);

  friend bool operator==(const FeatureSchema &, const FeatureSchema &) = default;

private:
  std::vector<DescriptorShape> shapes_;
};

struct FeatureVector {
  std::string instance_id;
  std::vector<double> values;
};

/// Exact value of one descriptor on an instance.
Rational evaluate_descriptor_exact(const ProblemInstance &inst, const Descriptor &d);
double evaluate_descriptor(const ProblemInstance &inst, const Descriptor &d);

/// All 384 raw features in exact arithmetic, in raw-schema order.
std::vector<Rational> featurize_raw_exact(const ProblemInstance &inst);

std::vector<Rational> featurize_exact(const ProblemInstance &inst, const FeatureSchema &schema);
FeatureVector featurize(const ProblemInstance &inst, const FeatureSchema &schema);

/// Reference loop, one instance after another.
std::vector<FeatureVector> featurize_all_serial(const std::vector<ProblemInstance> &instances,
                                                const FeatureSchema &schema);
/// OpenMP-parallel over instances; same result as the serial loop.
std::vector<FeatureVector> featurize_all(const std::vector<ProblemInstance> &instances,
                                         const FeatureSchema &schema);

struct FilterResult {
  FeatureSchema schema;
  std::vector<DescriptorShape> dropped;
};

/// Scans shapes of `input_schema` in order and keeps a shape iff one of its
/// three columns is linearly independent of the constant column and of all
/// columns already kept. Decisions are per shape, so the result stays
/// block-symmetric. `rows` are aligned to `input_schema`.
FilterResult fit_distinct_filter(std::span<const std::vector<double>> rows,
                                 const FeatureSchema &input_schema,
                                 double relative_tolerance = 1e-9);

/// Re-expresses `values` (aligned to `from`) in the column set of `to`,
/// whose shapes must be a subset of `from`'s.
std::vector<double> project_to_schema(std::span<const double> values, const FeatureSchema &from,
                                      const FeatureSchema &to);

/// Moves the value at (shape, v) to (shape, sigma(v)).
template <typename T>
std::vector<T> permute_block_vector(std::span<const T> values, const VariablePermutation &sigma,
                                    const FeatureSchema &schema) {
  if (values.size() != schema.size())
    throw SchemaMismatch("feature vector has " + std::to_string(values.size()) +
                         " entries, schema has " + std::to_string(schema.size()));
  std::vector<T> out(values.size());
  for (int i = 0; i < kNumVars; ++i) {
    const Variable v = Variable::from_pos(i);
    for (std::size_t s = 0; s < schema.shape_count(); ++s)
      out[schema.column(s, sigma(v))] = values[schema.column(s, v)];
  }
  return out;
}

FeatureVector permute_feature_vector(const FeatureVector &fv, const VariablePermutation &sigma,
                                     const FeatureSchema &schema);

} // namespace cadaug
