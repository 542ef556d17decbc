#pragma once

// Sparse multivariate polynomials in x1, x2, x3 with exact rational
// coefficients.

#include <array>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "cadaug/symmetry.hpp"

namespace cadaug {

using Integer = mpz_class;
using Rational = mpq_class;

/// Thrown when an operation's degree precondition does not hold.
class DegreeError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

class PolyParseError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class Monomial {
public:
  using Exponents = std::array<std::uint32_t, kNumVars>;

  constexpr Monomial() = default;
  constexpr explicit Monomial(Exponents e) : exps_(e) {}

  static Monomial of(Variable v, std::uint32_t power = 1) {
    Exponents e{};
    e[static_cast<std::size_t>(v.pos())] = power;
    return Monomial(e);
  }

  std::uint32_t degree_of(Variable v) const { return exps_[static_cast<std::size_t>(v.pos())]; }
  std::uint32_t total_degree() const { return exps_[0] + exps_[1] + exps_[2]; }
  bool is_constant() const { return total_degree() == 0; }
  const Exponents &exponents() const { return exps_; }

  Monomial operator*(const Monomial &o) const {
    return Monomial({exps_[0] + o.exps_[0], exps_[1] + o.exps_[1], exps_[2] + o.exps_[2]});
  }
  bool divides(const Monomial &o) const {
    return exps_[0] <= o.exps_[0] && exps_[1] <= o.exps_[1] && exps_[2] <= o.exps_[2];
  }
  /// Requires divisor.divides(*this).
  Monomial operator/(const Monomial &divisor) const {
    return Monomial({exps_[0] - divisor.exps_[0], exps_[1] - divisor.exps_[1],
                     exps_[2] - divisor.exps_[2]});
  }
  Monomial renamed(const VariablePermutation &sigma) const;

  /// Graded lexicographic order with x1 < x2 < x3.
  friend std::strong_ordering operator<=>(const Monomial &a, const Monomial &b) {
    if (auto c = a.total_degree() <=> b.total_degree(); c != 0)
      return c;
    for (int i = kNumVars - 1; i >= 0; --i) {
      auto k = static_cast<std::size_t>(i);
      if (auto c = a.exps_[k] <=> b.exps_[k]; c != 0)
        return c;
    }
    return std::strong_ordering::equal;
  }
  friend bool operator==(const Monomial &, const Monomial &) = default;

private:
  Exponents exps_{};
};

/// The total degree of `m` if `v` occurs in it, otherwise 0.
inline std::uint32_t sv_measure(const Monomial &m, Variable v) {
  return m.degree_of(v) > 0 ? m.total_degree() : 0;
}

inline std::uint32_t degree_of(const Monomial &m, Variable v) { return m.degree_of(v); }

struct Term {
  Monomial monomial;
  Rational coeff;

  friend bool operator==(const Term &, const Term &) = default;
};

/// Immutable-by-convention value type. Terms are kept sorted by strictly
/// decreasing monomial (leading term first) with no zero coefficients, so
/// equal polynomials have identical term lists.
class Polynomial {
public:
  Polynomial() = default;
  Polynomial(int c) : Polynomial(Rational(c)) {} // NOLINT(google-explicit-constructor)
  explicit Polynomial(const Rational &c);
  explicit Polynomial(Variable v) : terms_{{Monomial::of(v), Rational(1)}} {}
  Polynomial(const Monomial &m, const Rational &c);

  /// Builds from arbitrary terms: merges like monomials, drops zeros, sorts.
  static Polynomial from_terms(std::vector<Term> terms);

  /// Parses the infix form produced by to_string(), plus parentheses.
  static Polynomial parse(std::string_view text);

  const std::vector<Term> &terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const { return terms_.empty() || terms_.front().monomial.is_constant(); }
  bool contains(Variable v) const { return degree_in(v) > 0; }

  const Term &leading_term() const { return terms_.front(); }
  /// Constant term value (0 when absent).
  Rational constant_term() const;

  std::uint32_t degree_in(Variable v) const;
  std::uint32_t total_degree() const;

  Polynomial operator-() const;
  Polynomial &operator+=(const Polynomial &o) { return *this = *this + o; }
  Polynomial &operator-=(const Polynomial &o) { return *this = *this - o; }
  Polynomial &operator*=(const Polynomial &o) { return *this = *this * o; }

  friend Polynomial operator+(const Polynomial &p, const Polynomial &q);
  friend Polynomial operator-(const Polynomial &p, const Polynomial &q);
  friend Polynomial operator*(const Polynomial &p, const Polynomial &q);
  Polynomial scaled(const Rational &c) const;
  Polynomial pow(unsigned n) const;

  /// Exact quotient; throws std::domain_error if `divisor` does not divide.
  Polynomial divide_exact(const Polynomial &divisor) const;

  Polynomial derivative(Variable v) const;
  /// Coefficients of v^0 .. v^deg as polynomials in the other variables.
  std::vector<Polynomial> coefficients_wrt(Variable v) const;
  Polynomial renamed(const VariablePermutation &sigma) const;
  /// Substitutes `value` for `v`.
  Polynomial substitute(Variable v, const Polynomial &value) const;

  /// Integer-coefficient associate with content 1 and a positive leading
  /// coefficient. Zero stays zero.
  Polynomial primitive() const;

  std::string to_string() const;

  friend bool operator==(const Polynomial &, const Polynomial &) = default;
  /// Arbitrary but total order, used for sets.
  friend bool operator<(const Polynomial &a, const Polynomial &b);

private:
  std::vector<Term> terms_;
};

Polynomial derivative(const Polynomial &p, Variable v);
std::vector<Polynomial> coefficients_wrt(const Polynomial &p, Variable v);
Polynomial rename_variables(const Polynomial &p, const VariablePermutation &sigma);

/// Determinant of a square matrix with polynomial entries by fraction-free
/// (Bareiss) elimination.
Polynomial bareiss_determinant(std::vector<std::vector<Polynomial>> m);

/// Sylvester matrix of p and q with respect to v; p's shifted rows first.
std::vector<std::vector<Polynomial>> sylvester_matrix(const Polynomial &p, const Polynomial &q,
                                                      Variable v);

/// Determinant of the Sylvester matrix. Throws DegreeError unless both
/// inputs have positive degree in v.
Polynomial resultant(const Polynomial &p, const Polynomial &q, Variable v);

/// resultant(p, dp/dv, v) without leading-coefficient normalization.
/// Throws DegreeError if degree_in(p, v) < 2.
Polynomial discriminant(const Polynomial &p, Variable v);

std::ostream &operator<<(std::ostream &os, const Polynomial &p);

} // namespace cadaug
