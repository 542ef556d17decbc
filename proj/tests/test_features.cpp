#include <doctest.h>

#include <algorithm>
#include <set>

#include "cadaug/features.hpp"
#include "cadaug/synth.hpp"
#include "oracles.hpp"

#ifdef CADAUG_HAVE_EIGEN
#include <Eigen/Dense>
#endif

using namespace cadaug;

namespace {

Polynomial P(const char *s) { return Polynomial::parse(s); }

ProblemInstance make(std::string id, std::vector<Polynomial> polys) {
  ProblemInstance inst;
  inst.id = std::move(id);
  for (auto &p : polys)
    p = normalize_atom(p);
  inst.polynomials = canonical_set(std::move(polys));
  return inst;
}

ProblemInstance worked_example() {
  return make("w", {P("x2^2 - x2*x1"), P("x3^3*x1 - x1^2 + 1")});
}

std::vector<ProblemInstance> random_instances(std::size_t n, std::uint64_t seed,
                                              synth::InstanceShape shape = {}) {
  Rng rng(seed);
  std::vector<ProblemInstance> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(synth::random_instance(rng, shape, "r" + std::to_string(i)));
  return out;
}

} // namespace

TEST_CASE("worked examples") {
  auto inst = worked_example();
  DescriptorShape avg_sum{Base::VarDegree, Aggregate::Avg, false, Aggregate::Sum, false};
  CHECK(evaluate_descriptor_exact(inst, {x1, avg_sum}) == Rational(3, 2));
  DescriptorShape sum_sign_sum{Base::VarDegree, Aggregate::Sum, true, Aggregate::Sum, false};
  CHECK(evaluate_descriptor_exact(inst, {x2, sum_sign_sum}) == 1);
  CHECK(evaluate_descriptor(inst, {x1, avg_sum}) == 1.5);

  auto lone = make("c", {P("x3^3 - 1")});
  DescriptorShape sums{Base::VarDegree, Aggregate::Sum, false, Aggregate::Sum, false};
  CHECK(evaluate_descriptor_exact(lone, {x1, sums}) == 0);
  DescriptorShape sv_nz{Base::Sv, Aggregate::AvgNonzero, false, Aggregate::AvgNonzero, false};
  CHECK(evaluate_descriptor_exact(lone, {x1, sv_nz}) == 0);
  CHECK(evaluate_descriptor_exact(lone, {x3, sv_nz}) == 3);
}

TEST_CASE("grammar enumeration") {
  CHECK(kRawFeatureCount == 384);
  auto raw = FeatureSchema::raw();
  CHECK(raw.size() == 384);
  std::set<std::string> names;
  for (const auto &d : raw.descriptors())
    names.insert(d.name());
  CHECK(names.size() == 384);
  for (int i = 0; i < kShapesPerVariable; ++i)
    CHECK(DescriptorShape::from_index(i).index() == i);
  CHECK_THROWS(DescriptorShape::from_index(128));
  // variable blocks: x1 shapes first
  CHECK(raw.descriptor(0).variable == x1);
  CHECK(raw.descriptor(128).variable == x2);
  CHECK(raw.descriptor(383).variable == x3);
  CHECK(FeatureSchema::from_json(raw.to_json()) == raw);
}

TEST_CASE("every descriptor agrees with the definition") {
  auto insts = random_instances(150, 11);
  insts.push_back(worked_example());
  const auto raw = FeatureSchema::raw();
  for (const auto &inst : insts) {
    auto values = featurize_raw_exact(inst);
    REQUIRE(values.size() == 384);
    for (std::size_t c = 0; c < raw.size(); ++c) {
      auto d = raw.descriptor(c);
      CHECK(values[c] == oracle::descriptor(inst.polynomials, d.variable, d.shape));
    }
  }
}

TEST_CASE("featurize depends only on the polynomial set") {
  auto a = worked_example();
  auto b = a;
  std::reverse(b.polynomials.begin(), b.polynomials.end());
  CHECK(featurize(a, FeatureSchema::raw()).values == featurize(b, FeatureSchema::raw()).values);
}

TEST_CASE("featurize equivariance, exact, 500 instances x 6 renamings") {
  synth::InstanceShape shape{5, 4, 4, 5};
  auto insts = random_instances(500, 2024, shape);
  const auto raw = FeatureSchema::raw();
  std::size_t checked = 0;
  for (const auto &inst : insts) {
    const auto base = featurize_raw_exact(inst);
    for (const auto &sigma : VariablePermutation::all()) {
      auto lhs = featurize_raw_exact(inst.renamed(sigma));
      auto rhs = permute_block_vector<Rational>(base, sigma, raw);
      CHECK(lhs == rhs);
      ++checked;
    }
  }
  CHECK(checked == 3000);
}

TEST_CASE("block permutation is a group action") {
  auto fv = featurize(worked_example(), FeatureSchema::raw());
  const auto raw = FeatureSchema::raw();
  for (const auto &s : VariablePermutation::all()) {
    for (const auto &t : VariablePermutation::all()) {
      auto twice = permute_feature_vector(permute_feature_vector(fv, t, raw), s, raw);
      CHECK(twice.values == permute_feature_vector(fv, s.compose(t), raw).values);
    }
    CHECK(permute_feature_vector(permute_feature_vector(fv, s, raw), s.inverse(), raw).values ==
          fv.values);
  }
  CHECK(permute_feature_vector(fv, VariablePermutation(), raw).values == fv.values);
  FeatureVector short_fv{"s", {1.0, 2.0}};
  CHECK_THROWS_AS(permute_feature_vector(short_fv, VariablePermutation(), raw), SchemaMismatch);
}

TEST_CASE("parallel featurize matches the serial loop") {
  auto insts = random_instances(200, 5);
  auto par = featurize_all(insts, FeatureSchema::raw());
  auto ser = featurize_all_serial(insts, FeatureSchema::raw());
  REQUIRE(par.size() == ser.size());
  for (std::size_t i = 0; i < par.size(); ++i) {
    CHECK(par[i].instance_id == ser[i].instance_id);
    CHECK(par[i].values == ser[i].values);
  }
}

TEST_CASE("filter drops an exact duplicate shape") {
  // both vary across instances; sign-of-positive shapes would be constant
  auto s0 = DescriptorShape::from_index(0);
  auto s1 = DescriptorShape::from_index(70);
  FeatureSchema schema({s0, s1, s0});
  auto insts = random_instances(80, 9);
  std::vector<std::vector<double>> rows;
  for (const auto &i : insts)
    rows.push_back(featurize(i, schema).values);
  auto fit = fit_distinct_filter(rows, schema);
  CHECK(fit.schema.shapes() == std::vector<DescriptorShape>{s0, s1});
  REQUIRE(fit.dropped.size() == 1);
  CHECK(fit.dropped[0] == s0);
}

TEST_CASE("filter drops sum when every polynomial has the same number of monomials") {
  // with c monomials everywhere, max over polys of the inner sum is c times
  // max over polys of the inner average
  DescriptorShape sum{Base::VarDegree, Aggregate::Sum, false, Aggregate::Max, false};
  DescriptorShape avg{Base::VarDegree, Aggregate::Avg, false, Aggregate::Max, false};
  FeatureSchema schema({avg, sum});
  Rng rng(4);
  std::vector<std::vector<double>> rows;
  while (rows.size() < 60) {
    std::vector<Polynomial> polys;
    for (int k = 0; k < 3; ++k) {
      Polynomial p;
      while (p.size() != 2)
        p = oracle::random_polynomial(rng, 2, 4);
      polys.push_back(p);
    }
    auto inst = make("t", polys);
    bool uniform = !inst.polynomials.empty();
    for (const auto &p : inst.polynomials)
      uniform = uniform && p.size() == 2;
    if (uniform)
      rows.push_back(featurize(inst, schema).values);
  }
  auto fit = fit_distinct_filter(rows, schema);
  CHECK(fit.schema.shape_count() == 1);
  CHECK(fit.schema.shapes()[0] == avg);
}

TEST_CASE("filtered schema is block-symmetric, deterministic and projectable") {
  auto insts = random_instances(300, 77);
  auto fvs = featurize_all(insts, FeatureSchema::raw());
  std::vector<std::vector<double>> rows;
  for (auto &f : fvs)
    rows.push_back(f.values);
  auto a = fit_distinct_filter(rows, FeatureSchema::raw());
  auto b = fit_distinct_filter(rows, FeatureSchema::raw());
  CHECK(a.schema == b.schema);
  CHECK(a.schema.size() % 3 == 0);
  CHECK(a.schema.size() <= 384);
  CHECK(a.schema.shape_count() + a.dropped.size() == 128);
  CHECK(a.schema.shape_count() > 10);

  // projection agrees with featurizing against the filtered schema directly
  for (std::size_t i = 0; i < 20; ++i)
    CHECK(project_to_schema(rows[i], FeatureSchema::raw(), a.schema) ==
          featurize(insts[i], a.schema).values);
  CHECK_THROWS(fit_distinct_filter(std::vector<std::vector<double>>{}, FeatureSchema::raw()));

#ifdef CADAUG_HAVE_EIGEN
  // every dropped column is an affine combination of the kept ones
  const auto kept_cols = a.schema.raw_columns();
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd basis(n, static_cast<Eigen::Index>(kept_cols.size()) + 1);
  for (Eigen::Index r = 0; r < n; ++r) {
    basis(r, 0) = 1.0;
    for (std::size_t k = 0; k < kept_cols.size(); ++k)
      basis(r, static_cast<Eigen::Index>(k) + 1) = rows[static_cast<std::size_t>(r)][kept_cols[k]];
  }
  auto qr = basis.colPivHouseholderQr();
  const auto raw = FeatureSchema::raw();
  for (const auto &shape : a.dropped) {
    for (auto v : {x1, x2, x3}) {
      const std::size_t col = raw.column(static_cast<std::size_t>(shape.index()), v);
      Eigen::VectorXd y(n);
      for (Eigen::Index r = 0; r < n; ++r)
        y(r) = rows[static_cast<std::size_t>(r)][col];
      Eigen::VectorXd coef = qr.solve(y);
      const double resid = (basis * coef - y).norm();
      CHECK(resid <= 1e-6 * std::max(1.0, y.norm()));
    }
  }
#endif
}
