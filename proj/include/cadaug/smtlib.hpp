#pragma once

// Ingestion of QF_NRA SMT-LIB 2 scripts into polynomial sets.
//
// Only the polynomial atoms matter: Boolean structure is walked and
// discarded, every relation `lhs op rhs` contributes lhs - rhs.

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cadaug/instance.hpp"

namespace cadaug::smtlib {

class IngestError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ParseError : public IngestError {
public:
  ParseError(const std::string &msg, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_;
  int column_;
};

class UnsupportedError : public IngestError {
public:
  UnsupportedError(const std::string &construct, int line, int column);
};

class VariableCountError : public IngestError {
public:
  using IngestError::IngestError;
};

/// An atom whose polynomial is a numeric constant, e.g. (> 1 0).
class ConstantAtomError : public IngestError {
public:
  using IngestError::IngestError;
};

/// Polynomial over an arbitrary number of declared variables, indexed by
/// declaration position. Only used between parsing and canonicalization.
struct RawPolynomial {
  std::map<std::vector<std::uint32_t>, Rational> terms;

  bool is_constant() const;
};

struct RawInstance {
  std::string id;
  /// Real-sorted declarations, in script order.
  std::vector<std::string> declared;
  std::vector<RawPolynomial> atoms;
};

/// Parses the script text into atom polynomials over declared variables.
RawInstance parse_raw(std::string_view text, const std::string &id);

/// Keeps the declared variables that occur in some atom (must be exactly 3),
/// maps them to x1, x2, x3 in declaration order and normalizes every atom.
ProblemInstance canonicalize_variables(const RawInstance &raw);

/// parse_raw followed by canonicalize_variables.
ProblemInstance parse_script(std::string_view text, const std::string &id);

/// Keeps the first instance (in input order) of each distinct polynomial set.
std::vector<ProblemInstance> dedup_syntactic(std::vector<ProblemInstance> instances);

/// Writes a script that declares the original names and asserts one atom per
/// polynomial; parse_script on the result reproduces `inst`.
std::string render_script(const ProblemInstance &inst);

struct IngestFailure {
  std::string id;
  std::string message;
};

struct IngestResult {
  std::vector<ProblemInstance> instances;
  std::vector<IngestFailure> failures;
};

/// `.smt2` files under `dir`, recursively, in lexicographic path order.
std::vector<std::filesystem::path> list_scripts(const std::filesystem::path &dir);

/// Parses every file (in parallel when OpenMP is enabled); output order
/// equals input order. Files that fail are reported, not thrown.
IngestResult ingest_files(const std::vector<std::filesystem::path> &files);

} // namespace cadaug::smtlib
