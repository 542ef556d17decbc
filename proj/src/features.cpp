#include "cadaug/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cadaug {

namespace {

constexpr std::array<const char *, 4> kAggNames = {"max", "sum", "avg", "avg_nonzero"};
constexpr std::array<const char *, 2> kBaseNames = {"degree", "sv"};

Rational aggregate(Aggregate op, std::span<const Rational> xs) {
  switch (op) {
  case Aggregate::Max: {
    if (xs.empty())
      return 0;
    return *std::max_element(xs.begin(), xs.end());
  }
  case Aggregate::Sum:
    return std::accumulate(xs.begin(), xs.end(), Rational(0));
  case Aggregate::Avg: {
    if (xs.empty())
      return 0;
    Rational s = std::accumulate(xs.begin(), xs.end(), Rational(0));
    return s / static_cast<unsigned long>(xs.size());
  }
  case Aggregate::AvgNonzero: {
    Rational s = 0;
    unsigned long n = 0;
    for (const auto &x : xs) {
      if (x != 0) {
        s += x;
        ++n;
      }
    }
    return n == 0 ? Rational(0) : Rational(s / n);
  }
  }
  return 0;
}

Rational sign_of(const Rational &x) { return sgn(x); }

std::uint32_t base_value(Base base, const Monomial &m, Variable v) {
  return base == Base::VarDegree ? m.degree_of(v) : sv_measure(m, v);
}

/// The 4 monomial-level aggregates of one polynomial, indexed by Aggregate.
std::array<Rational, 4> monomial_aggregates(const Polynomial &p, Base base, Variable v) {
  std::vector<Rational> xs;
  xs.reserve(p.size());
  for (const auto &t : p.terms())
    xs.emplace_back(base_value(base, t.monomial, v));
  std::array<Rational, 4> out;
  for (int a = 0; a < 4; ++a)
    out[static_cast<std::size_t>(a)] = aggregate(static_cast<Aggregate>(a), xs);
  return out;
}

} // namespace

int DescriptorShape::index() const {
  int i = static_cast<int>(base);
  i = i * 4 + static_cast<int>(monomial_agg);
  i = i * 2 + (sign_after_monomial ? 1 : 0);
  i = i * 4 + static_cast<int>(polynomial_agg);
  i = i * 2 + (sign_after_polynomial ? 1 : 0);
  return i;
}

DescriptorShape DescriptorShape::from_index(int index) {
  if (index < 0 || index >= kShapesPerVariable)
    throw std::out_of_range("descriptor shape index must be in 0..127");
  DescriptorShape s;
  s.sign_after_polynomial = (index % 2) != 0;
  index /= 2;
  s.polynomial_agg = static_cast<Aggregate>(index % 4);
  index /= 4;
  s.sign_after_monomial = (index % 2) != 0;
  index /= 2;
  s.monomial_agg = static_cast<Aggregate>(index % 4);
  index /= 4;
  s.base = static_cast<Base>(index);
  return s;
}

std::string DescriptorShape::formula(const std::string &var) const {
  std::string f = std::string(base == Base::VarDegree ? "deg_" : "sv_") + var;
  f = std::string(kAggNames[static_cast<std::size_t>(monomial_agg)]) + "_m(" + f + ")";
  if (sign_after_monomial)
    f = "sign(" + f + ")";
  f = std::string(kAggNames[static_cast<std::size_t>(polynomial_agg)]) + "_p(" + f + ")";
  if (sign_after_polynomial)
    f = "sign(" + f + ")";
  return f;
}

nlohmann::json Descriptor::to_json() const {
  return {
      {"name", name()},
      {"variable", variable.name()},
      {"base", kBaseNames[static_cast<std::size_t>(shape.base)]},
      {"monomial_agg", kAggNames[static_cast<std::size_t>(shape.monomial_agg)]},
      {"sign_after_monomial", shape.sign_after_monomial},
      {"polynomial_agg", kAggNames[static_cast<std::size_t>(shape.polynomial_agg)]},
      {"sign_after_polynomial", shape.sign_after_polynomial},
      {"shape_index", shape.index()},
  };
}

FeatureSchema::FeatureSchema(std::vector<DescriptorShape> shapes) : shapes_(std::move(shapes)) {}

FeatureSchema FeatureSchema::raw() {
  std::vector<DescriptorShape> shapes;
  shapes.reserve(kShapesPerVariable);
  for (int i = 0; i < kShapesPerVariable; ++i)
    shapes.push_back(DescriptorShape::from_index(i));
  return FeatureSchema(std::move(shapes));
}

std::vector<Descriptor> FeatureSchema::descriptors() const {
  std::vector<Descriptor> out;
  out.reserve(size());
  for (int v = 0; v < kNumVars; ++v)
    for (const auto &s : shapes_)
      out.push_back({Variable::from_pos(v), s});
  return out;
}

Descriptor FeatureSchema::descriptor(std::size_t column) const {
  if (column >= size())
    throw std::out_of_range("feature column out of range");
  return {Variable::from_pos(static_cast<int>(column / shapes_.size())),
          shapes_[column % shapes_.size()]};
}

std::vector<std::size_t> FeatureSchema::raw_columns() const {
  std::vector<std::size_t> out;
  out.reserve(size());
  for (int v = 0; v < kNumVars; ++v)
    for (const auto &s : shapes_)
      out.push_back(static_cast<std::size_t>(v * kShapesPerVariable + s.index()));
  return out;
}

nlohmann::json FeatureSchema::to_json() const {
  nlohmann::json descs = nlohmann::json::array();
  for (const auto &d : descriptors())
    descs.push_back(d.to_json());
  std::vector<int> indices;
  for (const auto &s : shapes_)
    indices.push_back(s.index());
  return {{"feature_count", size()}, {"shape_indices", indices}, {"descriptors", descs}};
}

FeatureSchema FeatureSchema::from_json(const nlohmann::json &j) {
  std::vector<DescriptorShape> shapes;
  for (int i : j.at("shape_indices").get<std::vector<int>>())
    shapes.push_back(DescriptorShape::from_index(i));
  FeatureSchema schema(std::move(shapes));
  if (j.contains("feature_count") && j.at("feature_count").get<std::size_t>() != schema.size())
    throw SchemaMismatch("schema feature_count disagrees with its shape list");
  return schema;
}

std::vector<Rational> featurize_raw_exact(const ProblemInstance &inst) {
  std::vector<Rational> out(kRawFeatureCount);
  const std::size_t np = inst.polynomials.size();
  std::vector<Rational> per_poly(np);
  for (int v = 0; v < kNumVars; ++v) {
    const Variable var = Variable::from_pos(v);
    for (int b = 0; b < 2; ++b) {
      const auto base = static_cast<Base>(b);
      std::vector<std::array<Rational, 4>> inner;
      inner.reserve(np);
      for (const auto &p : inst.polynomials)
        inner.push_back(monomial_aggregates(p, base, var));
      for (int ma = 0; ma < 4; ++ma) {
        for (int s1 = 0; s1 < 2; ++s1) {
          for (std::size_t k = 0; k < np; ++k) {
            const Rational &x = inner[k][static_cast<std::size_t>(ma)];
            per_poly[k] = s1 ? sign_of(x) : x;
          }
          for (int pa = 0; pa < 4; ++pa) {
            Rational y = aggregate(static_cast<Aggregate>(pa), per_poly);
            for (int s2 = 0; s2 < 2; ++s2) {
              DescriptorShape shape{base, static_cast<Aggregate>(ma), s1 == 1,
                                    static_cast<Aggregate>(pa), s2 == 1};
              out[static_cast<std::size_t>(v * kShapesPerVariable + shape.index())] =
                  s2 ? sign_of(y) : y;
            }
          }
        }
      }
    }
  }
  return out;
}

Rational evaluate_descriptor_exact(const ProblemInstance &inst, const Descriptor &d) {
  std::vector<Rational> per_poly;
  per_poly.reserve(inst.polynomials.size());
  for (const auto &p : inst.polynomials) {
    Rational x = monomial_aggregates(p, d.shape.base, d.variable)[static_cast<std::size_t>(
        d.shape.monomial_agg)];
    per_poly.push_back(d.shape.sign_after_monomial ? sign_of(x) : x);
  }
  Rational y = aggregate(d.shape.polynomial_agg, per_poly);
  return d.shape.sign_after_polynomial ? sign_of(y) : y;
}

double evaluate_descriptor(const ProblemInstance &inst, const Descriptor &d) {
  return evaluate_descriptor_exact(inst, d).get_d();
}

std::vector<Rational> featurize_exact(const ProblemInstance &inst, const FeatureSchema &schema) {
  auto raw = featurize_raw_exact(inst);
  std::vector<Rational> out;
  out.reserve(schema.size());
  for (auto c : schema.raw_columns())
    out.push_back(raw[c]);
  return out;
}

FeatureVector featurize(const ProblemInstance &inst, const FeatureSchema &schema) {
  auto exact = featurize_exact(inst, schema);
  FeatureVector fv{inst.id, {}};
  fv.values.reserve(exact.size());
  for (const auto &x : exact)
    fv.values.push_back(x.get_d());
  return fv;
}

std::vector<FeatureVector> featurize_all_serial(const std::vector<ProblemInstance> &instances,
                                                const FeatureSchema &schema) {
  std::vector<FeatureVector> out;
  out.reserve(instances.size());
  for (const auto &inst : instances)
    out.push_back(featurize(inst, schema));
  return out;
}

std::vector<FeatureVector> featurize_all(const std::vector<ProblemInstance> &instances,
                                         const FeatureSchema &schema) {
  std::vector<FeatureVector> out(instances.size());
  const auto n = static_cast<std::ptrdiff_t>(instances.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = featurize(instances[static_cast<std::size_t>(i)], schema);
  return out;
}

FilterResult fit_distinct_filter(std::span<const std::vector<double>> rows,
                                 const FeatureSchema &input_schema, double relative_tolerance) {
  if (rows.empty() || input_schema.size() == 0)
    throw std::invalid_argument("distinct filter needs a non-empty feature matrix");
  if (rows.size() < 2)
    throw std::invalid_argument("distinct filter needs at least two rows");
  const std::size_t n = rows.size();
  for (const auto &r : rows)
    if (r.size() != input_schema.size())
      throw SchemaMismatch("row length does not match schema");

  // Orthonormal basis of the span of the constant column and kept columns.
  std::vector<std::vector<double>> basis;
  basis.emplace_back(n, 1.0 / std::sqrt(static_cast<double>(n)));

  auto residual = [&](std::vector<double> col) {
    // Two passes of modified Gram-Schmidt.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto &q : basis) {
        double dot = 0;
        for (std::size_t i = 0; i < n; ++i)
          dot += q[i] * col[i];
        for (std::size_t i = 0; i < n; ++i)
          col[i] -= dot * q[i];
      }
    }
    return col;
  };
  auto norm = [](const std::vector<double> &x) {
    double s = 0;
    for (double v : x)
      s += v * v;
    return std::sqrt(s);
  };

  FilterResult result;
  std::vector<DescriptorShape> kept;
  for (std::size_t slot = 0; slot < input_schema.shape_count(); ++slot) {
    bool keep = false;
    for (int v = 0; v < kNumVars; ++v) {
      const std::size_t c = input_schema.column(slot, Variable::from_pos(v));
      std::vector<double> col(n);
      for (std::size_t i = 0; i < n; ++i)
        col[i] = rows[i][c];
      const double original = norm(col);
      if (original == 0)
        continue;
      auto r = residual(std::move(col));
      const double rn = norm(r);
      if (rn > relative_tolerance * original) {
        keep = true;
        for (auto &x : r)
          x /= rn;
        basis.push_back(std::move(r));
      }
    }
    (keep ? kept : result.dropped).push_back(input_schema.shapes()[slot]);
  }
  result.schema = FeatureSchema(std::move(kept));
  return result;
}

std::vector<double> project_to_schema(std::span<const double> values, const FeatureSchema &from,
                                      const FeatureSchema &to) {
  if (values.size() != from.size())
    throw SchemaMismatch("feature vector does not match source schema");
  std::array<int, kShapesPerVariable> slot_of;
  slot_of.fill(-1);
  for (std::size_t s = 0; s < from.shape_count(); ++s)
    slot_of[static_cast<std::size_t>(from.shapes()[s].index())] = static_cast<int>(s);
  std::vector<double> out;
  out.reserve(to.size());
  for (const auto &d : to.descriptors()) {
    int s = slot_of[static_cast<std::size_t>(d.shape.index())];
    if (s < 0)
      throw SchemaMismatch("target schema uses a shape missing from the source: " + d.name());
    out.push_back(values[from.column(static_cast<std::size_t>(s), d.variable)]);
  }
  return out;
}

FeatureVector permute_feature_vector(const FeatureVector &fv, const VariablePermutation &sigma,
                                     const FeatureSchema &schema) {
  return {fv.instance_id,
          permute_block_vector<double>(std::span<const double>(fv.values), sigma, schema)};
}

} // namespace cadaug
