#include "cadaug/synth.hpp"

#include <array>
#include <fstream>
#include <sstream>

namespace cadaug::synth {

namespace {

int uniform_int(Rng &rng, int lo, int hi) {
  return lo + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

int nonzero_coeff(Rng &rng, int max_abs) {
  int c = uniform_int(rng, 1, max_abs);
  return uniform_below(rng, 2) ? c : -c;
}

// Exponent triple with e[i] <= caps[i] and total degree <= max_total.
std::array<std::uint32_t, 3> random_exponents(Rng &rng, const std::array<int, 3> &caps,
                                              int max_total) {
  for (;;) {
    std::array<std::uint32_t, 3> e{};
    int total = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      e[i] = static_cast<std::uint32_t>(uniform_int(rng, 0, caps[i]));
      total += static_cast<int>(e[i]);
    }
    if (total <= max_total)
      return e;
  }
}

struct RawTerm {
  int coeff;
  std::array<std::uint32_t, 3> exps;
};

// Terms over three variables; at least one term involves a variable.
std::vector<RawTerm> random_terms(Rng &rng, int max_terms, const std::array<int, 3> &caps,
                                  int max_total, int max_abs) {
  std::vector<RawTerm> terms;
  int n = uniform_int(rng, 1, max_terms);
  bool has_var = false;
  for (int t = 0; t < n; ++t) {
    auto e = random_exponents(rng, caps, max_total);
    has_var = has_var || e[0] + e[1] + e[2] > 0;
    terms.push_back({nonzero_coeff(rng, max_abs), e});
  }
  if (!has_var) {
    std::array<std::uint32_t, 3> e{};
    e[uniform_below(rng, 3)] = 1;
    terms.push_back({nonzero_coeff(rng, max_abs), e});
  }
  return terms;
}

Polynomial to_polynomial(const std::vector<RawTerm> &terms) {
  std::vector<Term> out;
  for (const auto &t : terms)
    out.push_back({Monomial(t.exps), Rational(t.coeff)});
  return Polynomial::from_terms(std::move(out));
}

bool uses_all_variables(const std::vector<Polynomial> &polys) {
  std::array<bool, 3> seen{};
  for (const auto &p : polys)
    for (int i = 1; i <= kNumVars; ++i)
      seen[static_cast<std::size_t>(i - 1)] =
          seen[static_cast<std::size_t>(i - 1)] || p.contains(Variable(i));
  return seen[0] && seen[1] && seen[2];
}

const std::array<const char *, 12> kNames = {"x", "y", "z", "a", "b", "c",
                                             "skoX", "skoY", "skoZ", "u_1", "v.2", "t"};

std::string term_sexpr(const RawTerm &t, const std::array<std::string, 3> &names) {
  std::vector<std::string> factors;
  int c = t.coeff < 0 ? -t.coeff : t.coeff;
  if (c != 1 || t.exps[0] + t.exps[1] + t.exps[2] == 0)
    factors.push_back(std::to_string(c));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::uint32_t k = 0; k < t.exps[i]; ++k)
      factors.push_back(names[i]);
  std::string body;
  if (factors.size() == 1) {
    body = factors[0];
  } else {
    body = "(*";
    for (const auto &f : factors)
      body += " " + f;
    body += ")";
  }
  return t.coeff < 0 ? "(- " + body + ")" : body;
}

std::string poly_sexpr(const std::vector<RawTerm> &terms, const std::array<std::string, 3> &names) {
  if (terms.size() == 1)
    return term_sexpr(terms[0], names);
  std::string s = "(+";
  for (const auto &t : terms)
    s += " " + term_sexpr(t, names);
  return s + ")";
}

std::string atom_sexpr(Rng &rng, const std::string &poly) {
  static const std::array<const char *, 5> rels = {"<", ">", "<=", ">=", "="};
  const char *rel = rels[uniform_below(rng, rels.size())];
  // Sometimes put the polynomial on the right against a constant.
  if (uniform_below(rng, 4) == 0)
    return std::string("(") + rel + " 0 " + poly + ")";
  return std::string("(") + rel + " " + poly + " 0)";
}

} // namespace

ProblemInstance random_instance(Rng &rng, const InstanceShape &shape, const std::string &id) {
  const std::array<int, 3> caps = {shape.max_total_degree, shape.max_total_degree,
                                   shape.max_total_degree};
  for (;;) {
    std::vector<Polynomial> polys;
    int n = uniform_int(rng, 1, shape.max_polys);
    for (int i = 0; i < n; ++i) {
      auto p = to_polynomial(
          random_terms(rng, shape.max_terms, caps, shape.max_total_degree, shape.max_abs_coeff));
      if (!p.is_constant())
        polys.push_back(normalize_atom(p));
    }
    polys = canonical_set(std::move(polys));
    if (polys.empty() || !uses_all_variables(polys))
      continue;
    ProblemInstance inst;
    inst.id = id;
    inst.polynomials = std::move(polys);
    inst.variable_map = {{"x1", x1}, {"x2", x2}, {"x3", x3}};
    return inst;
  }
}

std::string random_script(Rng &rng, double skewed_fraction) {
  std::array<std::string, 3> names;
  {
    std::vector<std::size_t> idx(kNames.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
      idx[i] = i;
    shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i = 0; i < 3; ++i)
      names[i] = kNames[idx[i]];
  }
  // First-declared variable carries the most degree, the last the least.
  std::array<int, 3> caps{3, 2, 1};
  if (uniform_unit(rng) >= skewed_fraction)
    for (auto &c : caps)
      c = uniform_int(rng, 1, 3);
  const int max_total = 4;

  std::vector<std::vector<RawTerm>> polys;
  for (;;) {
    polys.clear();
    int n = uniform_int(rng, 2, 4);
    std::vector<Polynomial> check;
    for (int i = 0; i < n; ++i) {
      polys.push_back(random_terms(rng, 4, caps, max_total, 4));
      check.push_back(to_polynomial(polys.back()));
    }
    if (uses_all_variables(check))
      break;
  }

  std::ostringstream out;
  out << "(set-info :status unknown)\n(set-logic QF_NRA)\n";
  for (const auto &nm : names)
    out << "(declare-fun " << nm << " () Real)\n";
  if (uniform_below(rng, 5) == 0)
    out << "(declare-fun unused () Real)\n";
  if (uniform_below(rng, 5) == 0)
    out << "(declare-fun flag () Bool)\n";

  std::vector<std::string> atoms;
  for (const auto &p : polys)
    atoms.push_back(atom_sexpr(rng, poly_sexpr(p, names)));
  // Random Boolean shape: a flat conjunction split across asserts, or a
  // disjunction nested under a conjunction.
  if (atoms.size() >= 3 && uniform_below(rng, 2) == 0) {
    out << "(assert (and " << atoms[0] << " (or";
    for (std::size_t i = 1; i < atoms.size(); ++i)
      out << " " << atoms[i];
    out << ")))\n";
  } else {
    for (const auto &a : atoms)
      out << "(assert " << a << ")\n";
  }
  out << "(check-sat)\n(exit)\n";
  return out.str();
}

std::vector<std::filesystem::path> write_corpus(const std::filesystem::path &dir,
                                                const CorpusOptions &options) {
  std::filesystem::create_directories(dir);
  Rng rng(derive_seed(options.seed, "corpus"));
  std::vector<std::filesystem::path> paths;
  for (std::size_t i = 0; i < options.count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "p%04zu.smt2", i);
    auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out)
      throw std::runtime_error("cannot write " + path.string());
    out << random_script(rng, options.skewed_fraction);
    paths.push_back(path);
  }
  return paths;
}

} // namespace cadaug::synth
