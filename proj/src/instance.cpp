#include "cadaug/instance.hpp"

#include <algorithm>
#include <stdexcept>

namespace cadaug {

Polynomial normalize_atom(const Polynomial &p) { return p.primitive(); }

std::vector<Polynomial> canonical_set(std::vector<Polynomial> polys) {
  std::sort(polys.begin(), polys.end());
  polys.erase(std::unique(polys.begin(), polys.end()), polys.end());
  return polys;
}

void ProblemInstance::validate() const {
  if (polynomials.empty())
    throw std::invalid_argument(id + ": empty polynomial set");
  std::array<bool, kNumVars> seen{};
  for (const auto &p : polynomials) {
    if (p.is_zero())
      throw std::invalid_argument(id + ": zero polynomial in set");
    for (int i = 0; i < kNumVars; ++i)
      seen[static_cast<std::size_t>(i)] =
          seen[static_cast<std::size_t>(i)] || p.contains(Variable::from_pos(i));
  }
  if (std::count(seen.begin(), seen.end(), true) != kNumVars)
    throw std::invalid_argument(id + ": instance must use exactly three variables");
}

ProblemInstance ProblemInstance::renamed(const VariablePermutation &sigma) const {
  ProblemInstance out;
  out.id = sigma.is_identity() ? id : id + "#" + sigma.to_string();
  for (const auto &p : polynomials)
    out.polynomials.push_back(normalize_atom(p.renamed(sigma)));
  out.polynomials = canonical_set(std::move(out.polynomials));
  out.variable_map = variable_map;
  for (auto &entry : out.variable_map)
    entry.second = sigma(entry.second);
  if (timings) {
    TimingRecord t{out.id, {}};
    for (int k = 0; k < kNumOrderings; ++k)
      t.seconds[static_cast<std::size_t>(OrderingLabel(k).permuted(sigma).index())] =
          timings->seconds[static_cast<std::size_t>(k)];
    out.timings = std::move(t);
  }
  return out;
}

} // namespace cadaug
