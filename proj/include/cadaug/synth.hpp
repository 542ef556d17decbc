#pragma once

// Random problem generation: small instances for property tests and a
// synthetic SMT-LIB corpus for end-to-end runs.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cadaug/instance.hpp"
#include "cadaug/random.hpp"

namespace cadaug::synth {

struct InstanceShape {
  int max_polys = 5;
  int max_terms = 4;
  int max_total_degree = 4;
  int max_abs_coeff = 5;
};

/// Random instance using all three variables, normalized like ingested data.
ProblemInstance random_instance(Rng &rng, const InstanceShape &shape, const std::string &id);

/// A QF_NRA script in three variables (plus, sometimes, an unused
/// declaration). With probability `skewed_fraction` the per-variable degree
/// caps fall with declaration position (3, 2, 1), otherwise they are drawn
/// uniformly from 1..3, so orderings are not equally likely to win.
std::string random_script(Rng &rng, double skewed_fraction);

struct CorpusOptions {
  std::size_t count = 400;
  std::uint64_t seed = 1;
  double skewed_fraction = 0.9;
};

/// Writes `count` scripts named p0000.smt2, p0001.smt2, ... into `dir`.
std::vector<std::filesystem::path> write_corpus(const std::filesystem::path &dir,
                                                const CorpusOptions &options);

} // namespace cadaug::synth
