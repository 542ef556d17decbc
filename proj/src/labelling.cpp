#include "cadaug/labelling.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <istream>
#include <sstream>

namespace cadaug {

std::optional<OrderingLabel> label_from_timings(const TimingRecord &rec, double timeout) {
  std::optional<OrderingLabel> best;
  double best_time = 0;
  for (int k = 0; k < kNumOrderings; ++k) {
    const auto &slot = rec.seconds[static_cast<std::size_t>(k)];
    if (!slot)
      throw MissingOrderingError(rec.instance_id + ": no timing for ordering " +
                                 std::to_string(k));
    const double t = *slot;
    if (t > timeout)
      continue;
    if (!best || t < best_time) {
      best = OrderingLabel(k);
      best_time = t;
    }
  }
  return best;
}

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

} // namespace

std::map<std::string, TimingRecord> read_timings_csv(std::istream &in) {
  std::map<std::string, TimingRecord> out;
  std::string line;
  int lineno = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty())
      continue;
    if (header) {
      header = false;
      if (line.rfind("instance_id", 0) == 0)
        continue;
    }
    std::stringstream ss(line);
    std::string id, ordering, seconds;
    if (!std::getline(ss, id, ',') || !std::getline(ss, ordering, ',') ||
        !std::getline(ss, seconds))
      throw std::invalid_argument("timings line " + std::to_string(lineno) + ": expected 3 fields");
    id = trim(id);
    ordering = trim(ordering);
    seconds = trim(seconds);
    int k = -1;
    auto [p, ec] = std::from_chars(ordering.data(), ordering.data() + ordering.size(), k);
    if (ec != std::errc() || p != ordering.data() + ordering.size() || k < 0 ||
        k >= kNumOrderings)
      throw std::invalid_argument("timings line " + std::to_string(lineno) +
                                  ": ordering must be 0..5");
    double t = kTimedOut;
    if (seconds != "TIMEOUT") {
      try {
        std::size_t used = 0;
        t = std::stod(seconds, &used);
        if (used != seconds.size())
          throw std::invalid_argument("trailing characters");
      } catch (const std::exception &) {
        throw std::invalid_argument("timings line " + std::to_string(lineno) +
                                    ": bad seconds '" + seconds + "'");
      }
      if (!(t > 0))
        throw std::invalid_argument("timings line " + std::to_string(lineno) +
                                    ": seconds must be positive");
    }
    auto &rec = out[id];
    rec.instance_id = id;
    auto &slot = rec.seconds[static_cast<std::size_t>(k)];
    if (slot)
      throw std::invalid_argument("timings line " + std::to_string(lineno) +
                                  ": duplicate entry for " + id + " ordering " + ordering);
    slot = t;
  }
  return out;
}

PolySet mccallum_projection(const PolySet &polys, Variable v, const ProjectionBudget &budget) {
  PolySet out;
  auto emit = [&](const Polynomial &p) {
    if (p.is_constant())
      return;
    if (p.total_degree() > budget.max_total_degree)
      throw BudgetExceeded("projection produced total degree " +
                           std::to_string(p.total_degree()));
    out.push_back(p.primitive());
  };
  PolySet with_v;
  for (const auto &p : polys) {
    if (p.contains(v))
      with_v.push_back(p);
    else
      emit(p);
  }
  for (std::size_t i = 0; i < with_v.size(); ++i) {
    const auto &p = with_v[i];
    for (const auto &c : p.coefficients_wrt(v))
      emit(c);
    if (p.degree_in(v) >= 2)
      emit(discriminant(p, v));
    for (std::size_t j = i + 1; j < with_v.size(); ++j)
      emit(resultant(p, with_v[j], v));
  }
  out = canonical_set(std::move(out));
  if (out.size() > budget.max_polynomials)
    throw BudgetExceeded("projection produced " + std::to_string(out.size()) + " polynomials");
  return out;
}

std::vector<PolySet> projection_chain(const PolySet &polys, OrderingLabel ordering,
                                      const ProjectionBudget &budget) {
  const auto order = ordering.order();
  std::vector<PolySet> chain;
  chain.push_back(polys);
  chain.push_back(mccallum_projection(chain.back(), order[0], budget));
  chain.push_back(mccallum_projection(chain.back(), order[1], budget));
  return chain;
}

namespace {

std::uint64_t sotd_level(const PolySet &level) {
  std::uint64_t s = 0;
  for (const auto &p : level)
    for (const auto &t : p.terms())
      s += t.monomial.total_degree();
  return s;
}

} // namespace

std::uint64_t sotd(const std::vector<PolySet> &chain) {
  std::uint64_t s = 0;
  for (const auto &level : chain)
    s += sotd_level(level);
  return s;
}

std::array<std::optional<std::uint64_t>, kNumOrderings>
sotd_per_ordering(const ProblemInstance &inst, const ProjectionBudget &budget) {
  std::array<std::optional<std::uint64_t>, kNumOrderings> out;
  const std::uint64_t top = sotd_level(inst.polynomials);
  // Orderings 2k and 2k+1 share their first eliminated variable.
  for (int first = 0; first < kNumVars; ++first) {
    const Variable v = Variable::from_pos(first);
    PolySet level2;
    try {
      level2 = mccallum_projection(inst.polynomials, v, budget);
    } catch (const BudgetExceeded &) {
      continue;
    }
    const std::uint64_t upper = top + sotd_level(level2);
    for (int k = 2 * first; k < 2 * first + 2; ++k) {
      const Variable next = OrderingLabel(k).order()[1];
      try {
        out[static_cast<std::size_t>(k)] = upper + sotd_level(mccallum_projection(level2, next, budget));
      } catch (const BudgetExceeded &) {
      }
    }
  }
  return out;
}

std::optional<OrderingLabel> label_by_sotd(const ProblemInstance &inst,
                                           const ProjectionBudget &budget) {
  auto scores = sotd_per_ordering(inst, budget);
  std::optional<OrderingLabel> best;
  std::uint64_t best_score = 0;
  for (int k = 0; k < kNumOrderings; ++k) {
    const auto &s = scores[static_cast<std::size_t>(k)];
    if (s && (!best || *s < best_score)) {
      best = OrderingLabel(k);
      best_score = *s;
    }
  }
  return best;
}

std::vector<std::optional<OrderingLabel>>
label_all_by_sotd_serial(const std::vector<ProblemInstance> &instances,
                         const ProjectionBudget &budget) {
  std::vector<std::optional<OrderingLabel>> out;
  out.reserve(instances.size());
  for (const auto &inst : instances)
    out.push_back(label_by_sotd(inst, budget));
  return out;
}

std::vector<std::optional<OrderingLabel>>
label_all_by_sotd(const std::vector<ProblemInstance> &instances, const ProjectionBudget &budget) {
  std::vector<std::optional<OrderingLabel>> out(instances.size());
  const auto n = static_cast<std::ptrdiff_t>(instances.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = label_by_sotd(instances[static_cast<std::size_t>(i)], budget);
  return out;
}

} // namespace cadaug
