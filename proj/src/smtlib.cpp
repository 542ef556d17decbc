#include "cadaug/smtlib.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>

namespace cadaug::smtlib {

ParseError::ParseError(const std::string &msg, int line, int column)
    : IngestError(std::to_string(line) + ":" + std::to_string(column) + ": " + msg), line_(line),
      column_(column) {}

UnsupportedError::UnsupportedError(const std::string &construct, int line, int column)
    : IngestError(std::to_string(line) + ":" + std::to_string(column) +
                  ": unsupported construct '" + construct + "'") {}

bool RawPolynomial::is_constant() const {
  for (const auto &[exps, c] : terms)
    if (std::any_of(exps.begin(), exps.end(), [](auto e) { return e != 0; }))
      return false;
  return true;
}

namespace {

// --- s-expressions -----------------------------------------------------------

struct SExpr {
  enum class Kind { List, Symbol, Numeral, Decimal, String, Keyword };
  Kind kind = Kind::List;
  std::string text;
  std::vector<SExpr> items;
  int line = 1;
  int column = 1;

  bool is_list() const { return kind == Kind::List; }
  bool is_symbol(std::string_view s) const { return kind == Kind::Symbol && text == s; }
  const std::string *head() const {
    if (kind == Kind::List && !items.empty() && items[0].kind == Kind::Symbol)
      return &items[0].text;
    return nullptr;
  }
};

class Reader {
public:
  explicit Reader(std::string_view src) : src_(src) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    for (;;) {
      skip();
      if (pos_ >= src_.size())
        return out;
      out.push_back(read());
    }
  }

private:
  [[noreturn]] void fail(const std::string &msg) const { throw ParseError(msg, line_, col_); }

  char peek() const { return src_[pos_]; }
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip() {
    while (pos_ < src_.size()) {
      char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == ';') {
        while (pos_ < src_.size() && peek() != '\n')
          advance();
      } else {
        return;
      }
    }
  }

  SExpr read() {
    skip();
    if (pos_ >= src_.size())
      fail("unexpected end of input");
    SExpr e;
    e.line = line_;
    e.column = col_;
    char c = peek();
    if (c == '(') {
      advance();
      for (;;) {
        skip();
        if (pos_ >= src_.size())
          fail("unbalanced '('");
        if (peek() == ')') {
          advance();
          return e;
        }
        e.items.push_back(read());
      }
    }
    if (c == ')')
      fail("unexpected ')'");
    if (c == '"') {
      e.kind = SExpr::Kind::String;
      advance();
      for (;;) {
        if (pos_ >= src_.size())
          fail("unterminated string literal");
        if (peek() == '"') {
          advance();
          if (pos_ < src_.size() && peek() == '"') {
            e.text.push_back('"');
            advance();
            continue;
          }
          return e;
        }
        e.text.push_back(peek());
        advance();
      }
    }
    if (c == '|') {
      e.kind = SExpr::Kind::Symbol;
      advance();
      while (pos_ < src_.size() && peek() != '|') {
        e.text.push_back(peek());
        advance();
      }
      if (pos_ >= src_.size())
        fail("unterminated quoted symbol");
      advance();
      return e;
    }
    while (pos_ < src_.size()) {
      char d = peek();
      if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ';' ||
          d == '"' || d == '|')
        break;
      e.text.push_back(d);
      advance();
    }
    e.kind = classify(e.text);
    return e;
  }

  static SExpr::Kind classify(const std::string &t) {
    if (t.front() == ':')
      return SExpr::Kind::Keyword;
    auto digits = [](std::string_view s) {
      return !s.empty() && std::all_of(s.begin(), s.end(), [](char ch) {
        return std::isdigit(static_cast<unsigned char>(ch));
      });
    };
    if (digits(t))
      return SExpr::Kind::Numeral;
    auto dot = t.find('.');
    if (dot != std::string::npos && digits(std::string_view(t).substr(0, dot)) &&
        digits(std::string_view(t).substr(dot + 1)))
      return SExpr::Kind::Decimal;
    return SExpr::Kind::Symbol;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// --- raw polynomial arithmetic ---------------------------------------------

RawPolynomial raw_constant(const Rational &c) {
  RawPolynomial p;
  if (c != 0)
    p.terms[{}] = c;
  return p;
}

std::vector<std::uint32_t> padded(const std::vector<std::uint32_t> &e, std::size_t n) {
  auto out = e;
  out.resize(n, 0);
  return out;
}

std::vector<std::uint32_t> trimmed(std::vector<std::uint32_t> e) {
  while (!e.empty() && e.back() == 0)
    e.pop_back();
  return e;
}

void add_into(RawPolynomial &acc, const RawPolynomial &p, const Rational &scale) {
  for (const auto &[exps, c] : p.terms) {
    auto &slot = acc.terms[exps];
    slot += c * scale;
    if (slot == 0)
      acc.terms.erase(exps);
  }
}

RawPolynomial raw_mul(const RawPolynomial &a, const RawPolynomial &b) {
  RawPolynomial out;
  for (const auto &[ea, ca] : a.terms) {
    for (const auto &[eb, cb] : b.terms) {
      std::size_t n = std::max(ea.size(), eb.size());
      auto e = padded(ea, n);
      for (std::size_t i = 0; i < eb.size(); ++i)
        e[i] += eb[i];
      auto &slot = out.terms[trimmed(std::move(e))];
      slot += ca * cb;
    }
  }
  std::erase_if(out.terms, [](const auto &kv) { return kv.second == 0; });
  return out;
}

std::optional<Rational> raw_constant_value(const RawPolynomial &p) {
  if (!p.is_constant())
    return std::nullopt;
  return p.terms.empty() ? Rational(0) : p.terms.begin()->second;
}

// --- script evaluation -------------------------------------------------------

enum class Sort { Real, Bool };

struct Env;

struct Binding {
  const SExpr *expr;
  std::shared_ptr<const Env> scope;
  mutable std::optional<RawPolynomial> cached;
};

struct Env {
  std::unordered_map<std::string, Binding> bindings;
  std::shared_ptr<const Env> parent;

  const Binding *find(const std::string &name) const {
    for (const Env *e = this; e; e = e->parent.get()) {
      auto it = e->bindings.find(name);
      if (it != e->bindings.end())
        return &it->second;
    }
    return nullptr;
  }
};

const std::set<std::string, std::less<>> kBoolConnectives = {"and", "or", "not", "=>", "xor"};
const std::set<std::string, std::less<>> kOrderRelations = {"<", "<=", ">", ">="};
const std::set<std::string, std::less<>> kQuantifiers = {"forall", "exists"};

class ScriptEvaluator {
public:
  explicit ScriptEvaluator(std::string id) { raw_.id = std::move(id); }

  RawInstance run(const std::vector<SExpr> &commands) {
    for (const auto &cmd : commands)
      command(cmd);
    return std::move(raw_);
  }

private:
  [[noreturn]] static void unsupported(const SExpr &e, const std::string &what) {
    throw UnsupportedError(what, e.line, e.column);
  }
  [[noreturn]] static void malformed(const SExpr &e, const std::string &what) {
    throw ParseError(what, e.line, e.column);
  }

  void command(const SExpr &cmd) {
    const std::string *h = cmd.head();
    if (!h)
      malformed(cmd, "expected a command");
    const std::string &name = *h;
    if (name == "set-logic" || name == "set-info" || name == "set-option" ||
        name == "check-sat" || name == "exit" || name == "get-model" || name == "get-value" ||
        name == "get-info" || name == "echo" || name == "get-assignment" ||
        name == "get-unsat-core") {
      return;
    }
    if (name == "declare-fun") {
      if (cmd.items.size() != 4 || !cmd.items[2].is_list())
        malformed(cmd, "malformed declare-fun");
      if (!cmd.items[2].items.empty())
        unsupported(cmd, "declare-fun with arguments");
      declare(cmd, cmd.items[1], cmd.items[3]);
      return;
    }
    if (name == "declare-const") {
      if (cmd.items.size() != 3)
        malformed(cmd, "malformed declare-const");
      declare(cmd, cmd.items[1], cmd.items[2]);
      return;
    }
    if (name == "assert") {
      if (cmd.items.size() != 2)
        malformed(cmd, "malformed assert");
      auto root = std::make_shared<const Env>();
      collect_bool(cmd.items[1], root);
      return;
    }
    unsupported(cmd, name);
  }

  void declare(const SExpr &cmd, const SExpr &name, const SExpr &sort) {
    if (name.kind != SExpr::Kind::Symbol)
      malformed(cmd, "declaration name must be a symbol");
    if (sorts_.count(name.text))
      malformed(cmd, "duplicate declaration of '" + name.text + "'");
    if (sort.is_symbol("Real")) {
      sorts_[name.text] = Sort::Real;
      index_[name.text] = raw_.declared.size();
      raw_.declared.push_back(name.text);
    } else if (sort.is_symbol("Bool")) {
      sorts_[name.text] = Sort::Bool;
    } else {
      unsupported(sort, "sort " + (sort.is_list() ? std::string("(...)") : sort.text));
    }
  }

  std::shared_ptr<const Env> bind_let(const SExpr &e, const std::shared_ptr<const Env> &env) {
    if (e.items.size() != 3 || !e.items[1].is_list())
      malformed(e, "malformed let");
    auto scope = std::make_shared<Env>();
    scope->parent = env;
    for (const auto &b : e.items[1].items) {
      if (!b.is_list() || b.items.size() != 2 || b.items[0].kind != SExpr::Kind::Symbol)
        malformed(b, "malformed let binding");
      scope->bindings.emplace(b.items[0].text, Binding{&b.items[1], env, std::nullopt});
    }
    return scope;
  }

  const SExpr &annotated_body(const SExpr &e) {
    if (e.items.size() < 2)
      malformed(e, "malformed annotation");
    return e.items[1];
  }

  bool is_boolean(const SExpr &e, const std::shared_ptr<const Env> &env) {
    if (e.kind == SExpr::Kind::Symbol) {
      if (e.text == "true" || e.text == "false")
        return true;
      if (const Binding *b = env->find(e.text))
        return is_boolean(*b->expr, b->scope);
      auto it = sorts_.find(e.text);
      return it != sorts_.end() && it->second == Sort::Bool;
    }
    const std::string *h = e.head();
    if (!h)
      return false;
    if (kBoolConnectives.count(*h) || kOrderRelations.count(*h) || *h == "=" ||
        *h == "distinct" || kQuantifiers.count(*h))
      return true;
    if (*h == "let")
      return e.items.size() == 3 && is_boolean(e.items[2], bind_let(e, env));
    if (*h == "ite")
      return e.items.size() == 4 && is_boolean(e.items[2], env);
    if (*h == "!")
      return is_boolean(annotated_body(e), env);
    return false;
  }

  void collect_bool(const SExpr &e, const std::shared_ptr<const Env> &env) {
    if (e.kind == SExpr::Kind::Symbol) {
      if (e.text == "true" || e.text == "false")
        return;
      if (const Binding *b = env->find(e.text)) {
        collect_bool(*b->expr, b->scope);
        return;
      }
      auto it = sorts_.find(e.text);
      if (it == sorts_.end())
        malformed(e, "undeclared symbol '" + e.text + "'");
      if (it->second != Sort::Bool)
        malformed(e, "real-valued '" + e.text + "' used as a formula");
      return;
    }
    const std::string *h = e.head();
    if (!h) {
      if (e.is_list())
        malformed(e, "expected a formula");
      malformed(e, "expected a formula, got '" + e.text + "'");
    }
    const std::string &op = *h;
    if (kQuantifiers.count(op))
      unsupported(e, op);
    if (kBoolConnectives.count(op) || op == "ite") {
      for (std::size_t i = 1; i < e.items.size(); ++i)
        collect_bool(e.items[i], env);
      return;
    }
    if (op == "let") {
      collect_bool(e.items.size() == 3 ? e.items[2] : e, bind_let(e, env));
      return;
    }
    if (op == "!") {
      collect_bool(annotated_body(e), env);
      return;
    }
    if (e.items.size() < 3)
      malformed(e, "'" + op + "' needs at least two arguments");
    if (op == "=" || op == "distinct") {
      if (is_boolean(e.items[1], env)) {
        for (std::size_t i = 1; i < e.items.size(); ++i)
          collect_bool(e.items[i], env);
        return;
      }
    } else if (!kOrderRelations.count(op)) {
      unsupported(e, op);
    }
    std::vector<RawPolynomial> args;
    for (std::size_t i = 1; i < e.items.size(); ++i)
      args.push_back(eval_arith(e.items[i], env));
    auto add_atom = [&](const RawPolynomial &a, const RawPolynomial &b) {
      RawPolynomial d = a;
      add_into(d, b, -1);
      if (d.is_constant())
        throw ConstantAtomError(std::to_string(e.line) + ":" + std::to_string(e.column) +
                                ": atom '" + op + "' has a constant polynomial");
      raw_.atoms.push_back(std::move(d));
    };
    if (op == "distinct") {
      for (std::size_t i = 0; i < args.size(); ++i)
        for (std::size_t j = i + 1; j < args.size(); ++j)
          add_atom(args[i], args[j]);
    } else {
      for (std::size_t i = 0; i + 1 < args.size(); ++i)
        add_atom(args[i], args[i + 1]);
    }
  }

  RawPolynomial variable(std::size_t index) {
    std::vector<std::uint32_t> e(index + 1, 0);
    e[index] = 1;
    RawPolynomial p;
    p.terms[e] = 1;
    return p;
  }

  RawPolynomial eval_arith(const SExpr &e, const std::shared_ptr<const Env> &env) {
    switch (e.kind) {
    case SExpr::Kind::Numeral:
      return raw_constant(Rational(Integer(e.text, 10)));
    case SExpr::Kind::Decimal: {
      auto dot = e.text.find('.');
      std::string digits = e.text.substr(0, dot) + e.text.substr(dot + 1);
      Integer den = 1;
      for (std::size_t i = dot + 1; i < e.text.size(); ++i)
        den *= 10;
      Rational r(Integer(digits, 10), den);
      r.canonicalize();
      return raw_constant(r);
    }
    case SExpr::Kind::Symbol: {
      if (const Binding *b = env->find(e.text)) {
        if (!b->cached)
          b->cached = eval_arith(*b->expr, b->scope);
        return *b->cached;
      }
      auto it = sorts_.find(e.text);
      if (it == sorts_.end())
        unsupported(e, e.text);
      if (it->second != Sort::Real)
        malformed(e, "Boolean '" + e.text + "' used as a real term");
      return variable(index_.at(e.text));
    }
    case SExpr::Kind::String:
    case SExpr::Kind::Keyword:
      malformed(e, "expected a real term");
    case SExpr::Kind::List:
      break;
    }
    const std::string *h = e.head();
    if (!h)
      malformed(e, "expected a real term");
    const std::string &op = *h;
    const std::size_t argc = e.items.size() - 1;
    if (op == "let")
      return eval_arith(e.items.size() == 3 ? e.items[2] : e, bind_let(e, env));
    if (op == "!")
      return eval_arith(annotated_body(e), env);
    if (op == "+" || op == "*" || op == "-" || op == "/") {
      if (argc == 0)
        malformed(e, "'" + op + "' needs arguments");
    } else {
      unsupported(e, op);
    }
    RawPolynomial acc = eval_arith(e.items[1], env);
    if (op == "-" && argc == 1) {
      RawPolynomial neg;
      add_into(neg, acc, -1);
      return neg;
    }
    if (op == "/" && argc == 1)
      malformed(e, "'/' needs two arguments");
    for (std::size_t i = 2; i <= argc; ++i) {
      RawPolynomial next = eval_arith(e.items[i], env);
      if (op == "+") {
        add_into(acc, next, 1);
      } else if (op == "-") {
        add_into(acc, next, -1);
      } else if (op == "*") {
        acc = raw_mul(acc, next);
      } else {
        auto divisor = raw_constant_value(next);
        if (!divisor)
          unsupported(e.items[i], "division by a non-numeric term");
        if (*divisor == 0)
          unsupported(e.items[i], "division by zero");
        RawPolynomial q;
        add_into(q, acc, 1 / *divisor);
        acc = std::move(q);
      }
    }
    return acc;
  }

  RawInstance raw_;
  std::unordered_map<std::string, Sort> sorts_;
  std::unordered_map<std::string, std::size_t> index_;
};

bool simple_symbol(const std::string &s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0])))
    return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) ||
           std::string_view("~!@$%^&*_-+=<>.?/").find(c) != std::string_view::npos;
  });
}

std::string render_rational(const Rational &c) {
  Rational mag = abs(c);
  std::string s = mag.get_den() == 1
                      ? mag.get_num().get_str()
                      : "(/ " + mag.get_num().get_str() + " " + mag.get_den().get_str() + ")";
  return c < 0 ? "(- " + s + ")" : s;
}

} // namespace

RawInstance parse_raw(std::string_view text, const std::string &id) {
  auto commands = Reader(text).read_all();
  return ScriptEvaluator(id).run(commands);
}

ProblemInstance canonicalize_variables(const RawInstance &raw) {
  std::vector<bool> used(raw.declared.size(), false);
  for (const auto &atom : raw.atoms)
    for (const auto &[exps, c] : atom.terms)
      for (std::size_t i = 0; i < exps.size(); ++i)
        if (exps[i] != 0)
          used[i] = true;
  std::vector<std::size_t> slots;
  for (std::size_t i = 0; i < used.size(); ++i)
    if (used[i])
      slots.push_back(i);
  if (slots.size() != kNumVars)
    throw VariableCountError(raw.id + ": expected 3 real variables in use, found " +
                             std::to_string(slots.size()));

  ProblemInstance inst;
  inst.id = raw.id;
  for (std::size_t k = 0; k < slots.size(); ++k)
    inst.variable_map.emplace_back(raw.declared[slots[k]],
                                   Variable::from_pos(static_cast<int>(k)));
  for (const auto &atom : raw.atoms) {
    std::vector<Term> terms;
    for (const auto &[exps, c] : atom.terms) {
      Monomial::Exponents e{};
      for (std::size_t k = 0; k < slots.size(); ++k)
        e[k] = slots[k] < exps.size() ? exps[slots[k]] : 0;
      terms.push_back({Monomial(e), c});
    }
    inst.polynomials.push_back(normalize_atom(Polynomial::from_terms(std::move(terms))));
  }
  inst.polynomials = canonical_set(std::move(inst.polynomials));
  if (inst.polynomials.empty())
    throw IngestError(raw.id + ": script asserts no polynomial atoms");
  return inst;
}

ProblemInstance parse_script(std::string_view text, const std::string &id) {
  return canonicalize_variables(parse_raw(text, id));
}

std::vector<ProblemInstance> dedup_syntactic(std::vector<ProblemInstance> instances) {
  std::set<std::vector<Polynomial>> seen;
  std::vector<ProblemInstance> out;
  for (auto &inst : instances)
    if (seen.insert(inst.polynomials).second)
      out.push_back(std::move(inst));
  return out;
}

std::string render_script(const ProblemInstance &inst) {
  std::array<std::string, kNumVars> names;
  std::ostringstream os;
  os << "(set-logic QF_NRA)\n";
  for (const auto &[name, var] : inst.variable_map) {
    names[static_cast<std::size_t>(var.pos())] = simple_symbol(name) ? name : "|" + name + "|";
    os << "(declare-fun " << names[static_cast<std::size_t>(var.pos())] << " () Real)\n";
  }
  for (const auto &p : inst.polynomials) {
    std::vector<std::string> terms;
    for (const auto &t : p.terms()) {
      std::vector<std::string> factors;
      if (t.coeff != 1 || t.monomial.is_constant())
        factors.push_back(render_rational(t.coeff));
      for (int i = 0; i < kNumVars; ++i)
        for (std::uint32_t k = 0; k < t.monomial.exponents()[static_cast<std::size_t>(i)]; ++k)
          factors.push_back(names[static_cast<std::size_t>(i)]);
      if (factors.size() == 1) {
        terms.push_back(factors[0]);
      } else {
        std::string s = "(*";
        for (const auto &f : factors)
          s += " " + f;
        terms.push_back(s + ")");
      }
    }
    std::string body;
    if (terms.size() == 1) {
      body = terms[0];
    } else {
      body = "(+";
      for (const auto &t : terms)
        body += " " + t;
      body += ")";
    }
    os << "(assert (> " << body << " 0))\n";
  }
  os << "(check-sat)\n";
  return os.str();
}

std::vector<std::filesystem::path> list_scripts(const std::filesystem::path &dir) {
  std::vector<std::filesystem::path> files;
  for (const auto &entry : std::filesystem::recursive_directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".smt2")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

IngestResult ingest_files(const std::vector<std::filesystem::path> &files) {
  const auto n = static_cast<std::ptrdiff_t>(files.size());
  std::vector<std::optional<ProblemInstance>> parsed(files.size());
  std::vector<std::string> errors(files.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto &path = files[static_cast<std::size_t>(i)];
    std::string id = path.stem().string();
    try {
      std::ifstream in(path, std::ios::binary);
      if (!in)
        throw IngestError("cannot open " + path.string());
      std::stringstream buf;
      buf << in.rdbuf();
      parsed[static_cast<std::size_t>(i)] = parse_script(buf.str(), id);
    } catch (const std::exception &ex) {
      errors[static_cast<std::size_t>(i)] = ex.what();
    }
  }
  IngestResult result;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (parsed[i])
      result.instances.push_back(std::move(*parsed[i]));
    else
      result.failures.push_back({files[i].stem().string(), errors[i]});
  }
  return result;
}

} // namespace cadaug::smtlib
