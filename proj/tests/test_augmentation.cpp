#include <doctest.h>

#include <set>

#include "cadaug/augmentation.hpp"
#include "cadaug/labelling.hpp"
#include "cadaug/synth.hpp"

using namespace cadaug;

namespace {

// Rows with the given class counts and a 2-shape schema (6 columns).
Dataset with_counts(std::array<std::size_t, 6> counts, std::uint64_t seed = 1) {
  Dataset ds;
  ds.schema = FeatureSchema({DescriptorShape::from_index(0), DescriptorShape::from_index(77)});
  Rng rng(seed);
  std::size_t n = 0;
  for (int c = 0; c < 6; ++c)
    for (std::size_t k = 0; k < counts[static_cast<std::size_t>(c)]; ++k) {
      Row r;
      r.id = "i" + std::to_string(n++);
      r.label = OrderingLabel(c);
      for (int f = 0; f < 6; ++f)
        r.features.push_back(static_cast<double>(uniform_below(rng, 100)));
      ds.rows.push_back(std::move(r));
    }
  shuffle(ds.rows.begin(), ds.rows.end(), rng);
  return ds;
}

const std::array<std::size_t, 6> kSkewedCounts = {406, 93, 135, 51, 202, 132};

VariablePermutation swap12() { return VariablePermutation::transposition(x1, x2); }

} // namespace

TEST_CASE("S3 enumeration and the six orderings") {
  auto all = VariablePermutation::all();
  std::set<std::string> seen;
  for (int i = 0; i < 6; ++i) {
    CHECK(all[static_cast<std::size_t>(i)].index() == i);
    CHECK(VariablePermutation::parse(all[static_cast<std::size_t>(i)].to_string()) ==
          all[static_cast<std::size_t>(i)]);
    seen.insert(all[static_cast<std::size_t>(i)].to_string());
  }
  CHECK(seen.size() == 6);
  CHECK(all[0].is_identity());
  CHECK(swap12().to_string() == "213");
  const char *table[] = {"x1>x2>x3", "x1>x3>x2", "x2>x1>x3", "x2>x3>x1", "x3>x1>x2", "x3>x2>x1"};
  for (int i = 0; i < 6; ++i) {
    CHECK(OrderingLabel(i).to_string() == table[i]);
    CHECK(OrderingLabel::from_order(OrderingLabel(i).order()).index() == i);
  }
  CHECK_THROWS(OrderingLabel(6));
}

TEST_CASE("label permutation: fixed case, identity and free transitive action") {
  CHECK(permute_ordering_label(OrderingLabel(2), swap12()).index() == 0);
  for (int l = 0; l < 6; ++l) {
    CHECK(permute_ordering_label(OrderingLabel(l), VariablePermutation()).index() == l);
    std::set<int> orbit;
    for (const auto &s : VariablePermutation::all())
      orbit.insert(permute_ordering_label(OrderingLabel(l), s).index());
    CHECK(orbit.size() == 6);
  }
}

TEST_CASE("label permutation: all 36 composition identities") {
  int identities = 0;
  for (const auto &s : VariablePermutation::all())
    for (const auto &t : VariablePermutation::all()) {
      bool ok = true;
      for (int l = 0; l < 6; ++l) {
        auto lhs = permute_ordering_label(permute_ordering_label(OrderingLabel(l), s), t);
        auto rhs = permute_ordering_label(OrderingLabel(l), t.compose(s));
        ok = ok && lhs == rhs;
      }
      CHECK(ok);
      identities += ok;
    }
  CHECK(identities == 36);
}

TEST_CASE("row permutation is a group action and records the renaming") {
  auto ds = with_counts({3, 2, 1, 0, 0, 0});
  for (const auto &row : ds.rows)
    for (const auto &s : VariablePermutation::all()) {
      for (const auto &t : VariablePermutation::all()) {
        auto lhs = apply_permutation(apply_permutation(row, s, ds.schema), t, ds.schema);
        auto rhs = apply_permutation(row, t.compose(s), ds.schema);
        CHECK(lhs == rhs);
      }
      auto back = apply_permutation(apply_permutation(row, s, ds.schema), s.inverse(), ds.schema);
      CHECK(back.features == row.features);
      CHECK(back.label == row.label);
      CHECK(back.source_id() == row.id);
      CHECK(back.applied().is_identity());
    }
  Row r{"inst", {1, 2, 3, 4, 5, 6}, OrderingLabel(2)};
  auto img = apply_permutation(r, swap12(), ds.schema);
  CHECK(img.label.index() == 0);
  CHECK(img.id == "inst#213");
  CHECK(img.source_id() == "inst");
  CHECK(img.applied() == swap12());
  // the x1 and x2 blocks trade places
  CHECK(img.features == std::vector<double>{3, 4, 1, 2, 5, 6});
  Row bad{"b", {1, 2}, OrderingLabel(0)};
  CHECK_THROWS_AS(apply_permutation(bad, swap12(), ds.schema), SchemaMismatch);
}

TEST_CASE("permuting rows agrees with renaming instances and relabelling") {
  Rng rng(6);
  const auto schema = FeatureSchema::raw();
  int checked = 0;
  for (int i = 0; i < 60; ++i) {
    auto inst = synth::random_instance(rng, {3, 3, 3, 4}, "r" + std::to_string(i));
    auto per = sotd_per_ordering(inst);
    std::optional<std::uint64_t> best;
    int winners = 0;
    for (auto &s : per)
      if (s && (!best || *s < *best))
        best = s;
    for (auto &s : per)
      winners += (s == best);
    if (!best || winners != 1)
      continue;
    Row row{inst.id, featurize(inst, schema).values, *label_by_sotd(inst)};
    for (const auto &sigma : VariablePermutation::all()) {
      auto renamed = inst.renamed(sigma);
      auto img = apply_permutation(row, sigma, schema);
      CHECK(img.features == featurize(renamed, schema).values);
      CHECK(img.label == *label_by_sotd(renamed));
    }
    ++checked;
  }
  CHECK(checked > 20);
}

TEST_CASE("full augmentation of the 1019-instance class profile") {
  auto ds = with_counts(kSkewedCounts);
  REQUIRE(ds.size() == 1019);
  CHECK(ds.class_counts() == kSkewedCounts);
  auto aug = augment_full(ds);
  CHECK(aug.size() == 6114);
  CHECK(aug.provenance == Provenance::Augmented);
  for (auto c : aug.class_counts())
    CHECK(c == 1019);
  // output order: original rows, then canonical permutation order
  for (std::size_t i = 0; i < ds.size(); ++i)
    for (std::size_t k = 0; k < 6; ++k)
      CHECK(aug.rows[6 * i + k] ==
            apply_permutation(ds.rows[i], VariablePermutation::from_index(static_cast<int>(k)), ds.schema));
  CHECK_THROWS_AS(augment_full(aug), AugmentationError);

  Dataset one = with_counts({1, 0, 0, 0, 0, 0});
  auto six = augment_full(one);
  std::set<int> labels;
  for (const auto &r : six.rows)
    labels.insert(r.label.index());
  CHECK(labels.size() == 6);
}

TEST_CASE("exact balancing") {
  auto ds = with_counts(kSkewedCounts);
  auto bal = balance(ds, BalanceMode::Exact, 5);
  CHECK(bal.size() == 1019);
  CHECK(bal.provenance == Provenance::Balanced);
  for (auto c : bal.class_counts())
    CHECK((c == 169 || c == 170));
  std::multiset<std::string> before;
  std::multiset<std::string> after;
  for (const auto &r : ds.rows)
    before.insert(r.id);
  for (const auto &r : bal.rows)
    after.insert(r.source_id());
  CHECK(before == after);

  auto zeros = with_counts({6, 0, 0, 0, 0, 0});
  for (auto c : balance(zeros, BalanceMode::Exact, 1).class_counts())
    CHECK(c == 1);
  CHECK(balance(ds, BalanceMode::Exact, 5).rows == bal.rows);
}

TEST_CASE("random balancing is a seeded uniform renaming") {
  auto ds = with_counts(kSkewedCounts);
  auto a = balance(ds, BalanceMode::Random, 99);
  auto b = balance(ds, BalanceMode::Random, 99);
  auto c = balance(ds, BalanceMode::Random, 100);
  CHECK(a.rows == b.rows);
  CHECK(a.rows != c.rows);
  // each row is one image of its source under some renaming
  for (std::size_t i = 0; i < ds.size(); ++i)
    CHECK(a.rows[i] == apply_permutation(ds.rows[i], a.rows[i].applied(), ds.schema));
  // roughly uniform: 1019/6 = 169.8, sd about 12
  for (auto n : a.class_counts()) {
    CHECK(n > 120);
    CHECK(n < 220);
  }
}

TEST_CASE("split sizes, determinism and disjointness") {
  auto ds = with_counts(kSkewedCounts);
  auto [train, test] = split(ds, 0.2, 3);
  CHECK(test.size() == 204);
  CHECK(train.size() == 815);
  CHECK(train.role == Role::Train);
  CHECK(test.role == Role::Test);
  auto [train2, test2] = split(ds, 0.2, 3);
  CHECK(train2.rows == train.rows);
  CHECK(test2.rows == test.rows);

  // augmenting each side separately never sends an image across
  std::set<std::string> train_sources;
  for (const auto &r : augment_full(train).rows)
    train_sources.insert(r.source_id());
  for (const auto &r : augment_full(test).rows)
    CHECK(train_sources.count(r.source_id()) == 0);

  auto two = with_counts({1, 1, 0, 0, 0, 0});
  auto [a, b] = split(two, 0.5, 1);
  CHECK(a.size() == 1);
  CHECK(b.size() == 1);
  CHECK_THROWS_AS(split(ds, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split(ds, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split(augment_full(ds), 0.2, 1), AugmentationError);
}
