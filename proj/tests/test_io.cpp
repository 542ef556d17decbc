#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "cadaug/io.hpp"
#include "cadaug/synth.hpp"
#include "oracles.hpp"

using namespace cadaug;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
  auto dir = fs::temp_directory_path() / ("cadaug_test_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

} // namespace

TEST_CASE("instances round-trip through JSONL") {
  Rng rng(1);
  std::vector<ProblemInstance> insts;
  for (int i = 0; i < 50; ++i) {
    auto inst = synth::random_instance(rng, {}, "r" + std::to_string(i));
    inst.variable_map = {{"zeta", x1}, {"alpha", x2}, {"mid", x3}};
    insts.push_back(inst);
  }
  // a coefficient that does not fit in 64 bits
  auto big = insts[0];
  big.id = "big";
  big.polynomials = canonical_set(
      {normalize_atom(Polynomial::parse("123456789012345678901234567890*x1 + x2*x3"))});
  insts.push_back(big);

  std::stringstream ss;
  io::write_instances_jsonl(ss, insts);
  auto back = io::read_instances_jsonl(ss);
  REQUIRE(back.size() == insts.size());
  for (std::size_t i = 0; i < insts.size(); ++i) {
    CHECK(back[i].id == insts[i].id);
    CHECK(back[i].polynomials == insts[i].polynomials);
    CHECK(back[i].variable_map == insts[i].variable_map);
  }
  auto j = io::instance_to_json(big);
  // terms are stored leading first; the x1 term comes after x2*x3
  CHECK(j["polys"][0][1][0] == "123456789012345678901234567890");
  CHECK(j["polys"][0][1][2] == nlohmann::json::array({1, 0, 0}));
}

TEST_CASE("malformed instance lines are rejected") {
  std::istringstream zero_den(R"({"id":"a","polys":[[["1","0",[1,0,0]]]]})");
  CHECK_THROWS(io::read_instances_jsonl(zero_den));
  std::istringstream two_vars(R"({"id":"a","polys":[[["1","1",[1,1,0]]]]})");
  CHECK_THROWS(io::read_instances_jsonl(two_vars));
  std::istringstream junk("{not json\n");
  CHECK_THROWS(io::read_instances_jsonl(junk));
}

TEST_CASE("labels CSV") {
  std::stringstream ss;
  io::write_labels_csv(ss, {"a", "b,c", "d"}, {OrderingLabel(3), std::nullopt, OrderingLabel(0)});
  CHECK(ss.str() == "id,label\na,3\nb,c,DISCARD\nd,0\n");
  auto m = io::read_labels_csv(ss);
  REQUIRE(m.size() == 3);
  CHECK(m["a"]->index() == 3);
  CHECK_FALSE(m["b,c"].has_value());
  std::istringstream bad("id,label\na,9\n");
  CHECK_THROWS_AS(io::read_labels_csv(bad), io::FormatError);
}

TEST_CASE("doubles use 17 significant digits and round-trip") {
  CHECK(io::format_double(1.5) == "1.5");
  CHECK(io::format_double(0.1) == "0.10000000000000001");
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    double v = (uniform_unit(rng) - 0.5) * std::pow(10.0, static_cast<double>(uniform_below(rng, 20)) - 10);
    CHECK(std::stod(io::format_double(v)) == v);
  }
}

TEST_CASE("datasets round-trip with sidecars") {
  auto dir = scratch("dataset");
  auto ds = augment_full(oracle::blobs(40, 6, 9, 3));
  ds.role = Role::Test;
  auto csv = dir / "aug_test.csv";
  io::write_dataset(csv, ds, {{"seed", 17}});
  CHECK(fs::exists(dir / "aug_test.schema.json"));
  CHECK(fs::exists(dir / "aug_test.meta.json"));
  auto meta = io::read_json_file(io::meta_sidecar(csv));
  CHECK(meta["seed"] == 17);
  CHECK(meta["provenance"] == "augmented");
  CHECK(meta["rows"] == 240);

  auto back = io::read_dataset(csv);
  CHECK(back.provenance == Provenance::Augmented);
  CHECK(back.role == Role::Test);
  CHECK(back.schema == ds.schema);
  CHECK(back.rows == ds.rows);

  std::istringstream header_only("id,label,f000,f001\n");
  CHECK_THROWS_AS(io::read_feature_csv(header_only, 3), io::FormatError);
  std::istringstream short_row("id,label,f000,f001\nx,1,0.5\n");
  CHECK_THROWS_AS(io::read_feature_csv(short_row, 2), io::FormatError);
  CHECK_THROWS_AS(io::read_json_file(dir / "missing.json"), io::FormatError);
  fs::remove_all(dir);
}
