#include "cadaug/poly.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <unordered_map>
#include <ostream>
#include <sstream>

namespace cadaug {

Monomial Monomial::renamed(const VariablePermutation &sigma) const {
  Exponents e{};
  for (int i = 0; i < kNumVars; ++i) {
    auto target = sigma(Variable::from_pos(i)).pos();
    e[static_cast<std::size_t>(target)] = exps_[static_cast<std::size_t>(i)];
  }
  return Monomial(e);
}

Polynomial::Polynomial(const Rational &c) {
  if (c != 0)
    terms_.push_back({Monomial(), c});
}

Polynomial::Polynomial(const Monomial &m, const Rational &c) {
  if (c != 0)
    terms_.push_back({m, c});
}

Polynomial Polynomial::from_terms(std::vector<Term> terms) {
  std::sort(terms.begin(), terms.end(),
            [](const Term &a, const Term &b) { return a.monomial > b.monomial; });
  Polynomial out;
  for (auto &t : terms) {
    if (!out.terms_.empty() && out.terms_.back().monomial == t.monomial) {
      out.terms_.back().coeff += t.coeff;
    } else {
      if (!out.terms_.empty() && out.terms_.back().coeff == 0)
        out.terms_.pop_back();
      out.terms_.push_back(std::move(t));
    }
  }
  if (!out.terms_.empty() && out.terms_.back().coeff == 0)
    out.terms_.pop_back();
  return out;
}

Rational Polynomial::constant_term() const {
  if (!terms_.empty() && terms_.back().monomial.is_constant())
    return terms_.back().coeff;
  return 0;
}

std::uint32_t Polynomial::degree_in(Variable v) const {
  std::uint32_t d = 0;
  for (const auto &t : terms_)
    d = std::max(d, t.monomial.degree_of(v));
  return d;
}

std::uint32_t Polynomial::total_degree() const {
  return terms_.empty() ? 0 : terms_.front().monomial.total_degree();
}

Polynomial Polynomial::operator-() const {
  Polynomial out = *this;
  for (auto &t : out.terms_)
    t.coeff = -t.coeff;
  return out;
}

namespace {

template <typename Combine>
std::vector<Term> merge(const std::vector<Term> &a, const std::vector<Term> &b, Combine sign_b) {
  std::vector<Term> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].monomial > b[j].monomial)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].monomial > a[i].monomial) {
      out.push_back({b[j].monomial, sign_b(b[j].coeff)});
      ++j;
    } else {
      Rational c = a[i].coeff + sign_b(b[j].coeff);
      if (c != 0)
        out.push_back({a[i].monomial, std::move(c)});
      ++i;
      ++j;
    }
  }
  return out;
}

} // namespace

Polynomial operator+(const Polynomial &p, const Polynomial &q) {
  Polynomial out;
  out.terms_ = merge(p.terms_, q.terms_, [](const Rational &c) { return c; });
  return out;
}

Polynomial operator-(const Polynomial &p, const Polynomial &q) {
  Polynomial out;
  out.terms_ = merge(p.terms_, q.terms_, [](const Rational &c) { return Rational(-c); });
  return out;
}

Polynomial operator*(const Polynomial &p, const Polynomial &q) {
  if (p.is_zero() || q.is_zero())
    return {};
  constexpr std::uint32_t kLimit = 1U << 20U;
  bool packable = true;
  for (const auto *poly : {&p, &q})
    for (const auto &t : poly->terms_)
      for (auto e : t.monomial.exponents())
        packable = packable && e < kLimit;
  if (!packable) {
    std::vector<Term> out;
    out.reserve(p.size() * q.size());
    for (const auto &a : p.terms_)
      for (const auto &b : q.terms_)
        out.push_back({a.monomial * b.monomial, a.coeff * b.coeff});
    return Polynomial::from_terms(std::move(out));
  }
  // Like terms are combined as they are produced, keyed by the packed
  // exponent triple, so only distinct monomials get sorted.
  auto pack = [](const Monomial &m) {
    const auto &e = m.exponents();
    return (std::uint64_t{e[0]} << 42U) | (std::uint64_t{e[1]} << 21U) | std::uint64_t{e[2]};
  };
  std::unordered_map<std::uint64_t, std::size_t> slot;
  slot.reserve(p.size() * q.size());
  std::vector<Term> out;
  Rational prod;
  for (const auto &a : p.terms_) {
    for (const auto &b : q.terms_) {
      const Monomial m = a.monomial * b.monomial;
      mpq_mul(prod.get_mpq_t(), a.coeff.get_mpq_t(), b.coeff.get_mpq_t());
      auto [it, fresh] = slot.try_emplace(pack(m), out.size());
      if (fresh)
        out.push_back({m, prod});
      else
        mpq_add(out[it->second].coeff.get_mpq_t(), out[it->second].coeff.get_mpq_t(),
                prod.get_mpq_t());
    }
  }
  std::erase_if(out, [](const Term &t) { return t.coeff == 0; });
  std::sort(out.begin(), out.end(),
            [](const Term &x, const Term &y) { return x.monomial > y.monomial; });
  Polynomial r;
  r.terms_ = std::move(out);
  return r;
}

Polynomial Polynomial::scaled(const Rational &c) const {
  if (c == 0)
    return {};
  Polynomial out = *this;
  for (auto &t : out.terms_)
    t.coeff *= c;
  return out;
}

Polynomial Polynomial::pow(unsigned n) const {
  Polynomial result(1);
  Polynomial base = *this;
  while (n) {
    if (n & 1U)
      result = result * base;
    n >>= 1U;
    if (n)
      base = base * base;
  }
  return result;
}

Polynomial Polynomial::divide_exact(const Polynomial &divisor) const {
  if (divisor.is_zero())
    throw std::domain_error("division by zero polynomial");
  const Term &lead = divisor.leading_term();
  if (divisor.size() == 1) {
    std::vector<Term> quotient;
    quotient.reserve(terms_.size());
    for (const auto &t : terms_) {
      if (!lead.monomial.divides(t.monomial))
        throw std::domain_error("inexact polynomial division");
      quotient.push_back({t.monomial / lead.monomial, t.coeff / lead.coeff});
    }
    Polynomial out;
    out.terms_ = std::move(quotient); // dividing by a monomial keeps the order
    return out;
  }
  // Remainder kept in a map, greatest monomial first, so each step only
  // touches the terms it changes.
  std::map<Monomial, Rational, std::greater<>> rem;
  for (const auto &t : terms_)
    rem.emplace(t.monomial, t.coeff);
  std::vector<Term> quotient;
  Rational scratch;
  while (!rem.empty()) {
    auto top = rem.begin();
    if (!lead.monomial.divides(top->first))
      throw std::domain_error("inexact polynomial division");
    const Monomial qm = top->first / lead.monomial;
    const Rational qc = top->second / lead.coeff;
    rem.erase(top);
    for (std::size_t i = 1; i < divisor.terms_.size(); ++i) {
      const auto &d = divisor.terms_[i];
      scratch = qc * d.coeff;
      auto [it, fresh] = rem.try_emplace(qm * d.monomial);
      it->second -= scratch;
      if (!fresh && it->second == 0)
        rem.erase(it);
    }
    quotient.push_back({qm, qc});
  }
  Polynomial out;
  out.terms_ = std::move(quotient); // produced in decreasing order
  return out;
}

Polynomial Polynomial::derivative(Variable v) const {
  std::vector<Term> out;
  for (const auto &t : terms_) {
    auto d = t.monomial.degree_of(v);
    if (d == 0)
      continue;
    auto e = t.monomial.exponents();
    e[static_cast<std::size_t>(v.pos())] = d - 1;
    out.push_back({Monomial(e), t.coeff * d});
  }
  return from_terms(std::move(out));
}

std::vector<Polynomial> Polynomial::coefficients_wrt(Variable v) const {
  std::vector<std::vector<Term>> buckets(degree_in(v) + 1);
  for (const auto &t : terms_) {
    auto d = t.monomial.degree_of(v);
    auto e = t.monomial.exponents();
    e[static_cast<std::size_t>(v.pos())] = 0;
    buckets[d].push_back({Monomial(e), t.coeff});
  }
  std::vector<Polynomial> out;
  out.reserve(buckets.size());
  for (auto &b : buckets)
    out.push_back(from_terms(std::move(b)));
  return out;
}

Polynomial Polynomial::renamed(const VariablePermutation &sigma) const {
  std::vector<Term> out;
  out.reserve(terms_.size());
  for (const auto &t : terms_)
    out.push_back({t.monomial.renamed(sigma), t.coeff});
  return from_terms(std::move(out));
}

Polynomial Polynomial::substitute(Variable v, const Polynomial &value) const {
  auto coeffs = coefficients_wrt(v);
  Polynomial acc;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
    acc = acc * value + *it;
  return acc;
}

Polynomial Polynomial::primitive() const {
  if (is_zero())
    return {};
  Integer den_lcm = 1;
  for (const auto &t : terms_)
    mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), t.coeff.get_den_mpz_t());
  Integer num_gcd = 0;
  for (const auto &t : terms_) {
    Integer n = t.coeff.get_num() * (den_lcm / t.coeff.get_den());
    mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), n.get_mpz_t());
  }
  Rational factor(den_lcm, num_gcd);
  factor.canonicalize();
  if (leading_term().coeff < 0)
    factor = -factor;
  return scaled(factor);
}

bool operator<(const Polynomial &a, const Polynomial &b) {
  const auto &x = a.terms_;
  const auto &y = b.terms_;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (x[i].monomial != y[i].monomial)
      return x[i].monomial < y[i].monomial;
    if (x[i].coeff != y[i].coeff)
      return x[i].coeff < y[i].coeff;
  }
  return x.size() < y.size();
}

std::string Polynomial::to_string() const {
  if (terms_.empty())
    return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto &t : terms_) {
    Rational mag = abs(t.coeff);
    bool neg = t.coeff < 0;
    if (first)
      os << (neg ? "-" : "");
    else
      os << (neg ? " - " : " + ");
    first = false;
    if (t.monomial.is_constant()) {
      os << mag.get_str();
      continue;
    }
    bool need_star = false;
    if (mag != 1) {
      os << mag.get_str();
      need_star = true;
    }
    for (int i = 0; i < kNumVars; ++i) {
      auto e = t.monomial.exponents()[static_cast<std::size_t>(i)];
      if (e == 0)
        continue;
      if (need_star)
        os << '*';
      os << 'x' << (i + 1);
      if (e > 1)
        os << '^' << e;
      need_star = true;
    }
  }
  return os.str();
}

std::ostream &operator<<(std::ostream &os, const Polynomial &p) { return os << p.to_string(); }

// --- parsing ---------------------------------------------------------------

namespace {

class InfixParser {
public:
  explicit InfixParser(std::string_view s) : s_(s) {}

  Polynomial parse_all() {
    Polynomial p = expr();
    skip();
    if (pos_ != s_.size())
      fail("unexpected trailing input");
    return p;
  }

private:
  [[noreturn]] void fail(const std::string &msg) const {
    throw PolyParseError(msg + " at offset " + std::to_string(pos_) + " in '" +
                         std::string(s_) + "'");
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Polynomial expr() {
    Polynomial acc = term();
    for (;;) {
      if (eat('+'))
        acc = acc + term();
      else if (eat('-'))
        acc = acc - term();
      else
        return acc;
    }
  }

  Polynomial term() {
    Polynomial acc = unary();
    for (;;) {
      if (eat('*')) {
        acc = acc * unary();
      } else if (eat('/')) {
        Polynomial d = unary();
        if (!d.is_constant() || d.is_zero())
          fail("division by a non-constant or zero");
        acc = acc.scaled(1 / d.constant_term());
      } else {
        return acc;
      }
    }
  }

  Polynomial unary() {
    if (eat('-'))
      return -unary();
    if (eat('+'))
      return unary();
    Polynomial base = primary();
    if (eat('^')) {
      skip();
      auto n = integer();
      return base.pow(static_cast<unsigned>(n.get_ui()));
    }
    return base;
  }

  Integer integer() {
    skip();
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
    if (start == pos_)
      fail("expected integer");
    return Integer(std::string(s_.substr(start, pos_ - start)), 10);
  }

  Polynomial primary() {
    skip();
    if (pos_ >= s_.size())
      fail("unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Polynomial p = expr();
      if (!eat(')'))
        fail("expected ')'");
      return p;
    }
    if (c == 'x') {
      ++pos_;
      auto idx = integer();
      if (idx < 1 || idx > kNumVars)
        fail("variable index out of range");
      return Polynomial(Variable(static_cast<int>(idx.get_si())));
    }
    if (std::isdigit(static_cast<unsigned char>(c)))
      return Polynomial(Rational(integer()));
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

} // namespace

Polynomial Polynomial::parse(std::string_view text) { return InfixParser(text).parse_all(); }

// --- free functions ----------------------------------------------------------

Polynomial derivative(const Polynomial &p, Variable v) { return p.derivative(v); }

std::vector<Polynomial> coefficients_wrt(const Polynomial &p, Variable v) {
  return p.coefficients_wrt(v);
}

Polynomial rename_variables(const Polynomial &p, const VariablePermutation &sigma) {
  return p.renamed(sigma);
}

Polynomial bareiss_determinant(std::vector<std::vector<Polynomial>> m) {
  const std::size_t n = m.size();
  if (n == 0)
    return Polynomial(1);
  for (const auto &row : m)
    if (row.size() != n)
      throw std::invalid_argument("determinant of a non-square matrix");
  bool negate = false;
  Polynomial prev(1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m[k][k].is_zero()) {
      std::size_t swap_row = k + 1;
      while (swap_row < n && m[swap_row][k].is_zero())
        ++swap_row;
      if (swap_row == n)
        return {};
      std::swap(m[k], m[swap_row]);
      negate = !negate;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        Polynomial num = m[i][j] * m[k][k] - m[i][k] * m[k][j];
        m[i][j] = num.divide_exact(prev);
      }
      m[i][k] = Polynomial();
    }
    prev = m[k][k];
  }
  Polynomial det = m[n - 1][n - 1];
  return negate ? -det : det;
}

std::vector<std::vector<Polynomial>> sylvester_matrix(const Polynomial &p, const Polynomial &q,
                                                      Variable v) {
  auto pc = p.coefficients_wrt(v);
  auto qc = q.coefficients_wrt(v);
  const std::size_t m = pc.size() - 1;
  const std::size_t n = qc.size() - 1;
  const std::size_t size = m + n;
  std::vector<std::vector<Polynomial>> s(size, std::vector<Polynomial>(size));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t i = 0; i <= m; ++i)
      s[r][r + i] = pc[m - i];
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t i = 0; i <= n; ++i)
      s[n + r][r + i] = qc[n - i];
  return s;
}

namespace {

using Coeffs = std::vector<Polynomial>; // index = power of the main variable

void trim(Coeffs &c) {
  while (!c.empty() && c.back().is_zero())
    c.pop_back();
}

int deg(const Coeffs &c) { return static_cast<int>(c.size()) - 1; }

// lc(b)^(deg a - deg b + 1) * a mod b, with deg a >= deg b.
Coeffs pseudo_remainder(Coeffs a, const Coeffs &b) {
  const Polynomial &lb = b.back();
  const int n = deg(b);
  int e = deg(a) - n + 1;
  while (!a.empty() && deg(a) >= n) {
    const int shift = deg(a) - n;
    const Polynomial lead = a.back();
    for (auto &c : a)
      c = c * lb;
    for (int i = 0; i <= n; ++i)
      a[static_cast<std::size_t>(i + shift)] =
          a[static_cast<std::size_t>(i + shift)] - lead * b[static_cast<std::size_t>(i)];
    a.pop_back();
    trim(a);
    --e;
  }
  if (e > 0) {
    const Polynomial f = lb.pow(static_cast<unsigned>(e));
    for (auto &c : a)
      c = c * f;
  }
  return a;
}

} // namespace

// Subresultant PRS; equals the Sylvester determinant (rows of p first).
Polynomial resultant(const Polynomial &p, const Polynomial &q, Variable v) {
  if (p.degree_in(v) == 0 || q.degree_in(v) == 0)
    throw DegreeError("resultant needs positive degree in " + v.name() + " for both inputs");
  Coeffs a = p.coefficients_wrt(v);
  Coeffs b = q.coefficients_wrt(v);
  bool negate = false;
  if (deg(a) < deg(b)) {
    std::swap(a, b);
    negate = (deg(a) % 2 == 1) && (deg(b) % 2 == 1);
  }
  Polynomial g(1);
  Polynomial h(1);
  for (;;) {
    const int delta = deg(a) - deg(b);
    if (deg(a) % 2 == 1 && deg(b) % 2 == 1)
      negate = !negate;
    Coeffs r = pseudo_remainder(a, b);
    a = std::move(b);
    const Polynomial divisor = g * h.pow(static_cast<unsigned>(delta));
    for (auto &c : r)
      c = c.divide_exact(divisor);
    b = std::move(r);
    g = a.back();
    if (delta > 0)
      h = g.pow(static_cast<unsigned>(delta)).divide_exact(h.pow(static_cast<unsigned>(delta - 1)));
    if (b.empty())
      return {};
    if (deg(b) == 0)
      break;
  }
  const int da = deg(a);
  Polynomial out = b.back().pow(static_cast<unsigned>(da));
  if (da > 1)
    out = out.divide_exact(h.pow(static_cast<unsigned>(da - 1)));
  return negate ? -out : out;
}

Polynomial discriminant(const Polynomial &p, Variable v) {
  if (p.degree_in(v) < 2)
    throw DegreeError("discriminant needs degree >= 2 in " + v.name());
  return resultant(p, p.derivative(v), v);
}

} // namespace cadaug
