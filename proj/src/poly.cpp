// SPDX-License-Identifier: Apache-2.0
#include "ldbsm/poly.hpp"

#include "ldbsm/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <mutex>
#include <unordered_map>

namespace ldbsm {

// ---------------------------------------------------------------------------
// Symbol table

namespace {

struct SymbolEntry {
  std::string name;
  SymbolKind kind;
};

struct SymbolTable {
  std::mutex mutex;
  std::deque<SymbolEntry> entries;  // deque: references stay valid
  std::unordered_map<std::string, std::uint32_t> by_name;
};

SymbolTable& table() {
  static SymbolTable t;
  return t;
}

const char* kind_name(SymbolKind k) {
  switch (k) {
  case SymbolKind::State: return "state variable";
  case SymbolKind::Input: return "input variable";
  case SymbolKind::Noise: return "noise variable";
  case SymbolKind::Unknown: return "unknown";
  }
  return "?";
}

} // namespace

Symbol intern(std::string_view name, SymbolKind kind) {
  auto& t = table();
  std::lock_guard lock(t.mutex);
  std::string key(name);
  if (auto it = t.by_name.find(key); it != t.by_name.end()) {
    const auto& e = t.entries[it->second];
    if (e.kind != kind)
      throw ModelError("symbol '" + key + "' already used as " + kind_name(e.kind) +
                       ", cannot reuse as " + kind_name(kind));
    return Symbol{it->second};
  }
  auto id = static_cast<std::uint32_t>(t.entries.size());
  t.entries.push_back({key, kind});
  t.by_name.emplace(std::move(key), id);
  return Symbol{id};
}

std::optional<Symbol> lookup_symbol(std::string_view name) {
  auto& t = table();
  std::lock_guard lock(t.mutex);
  if (auto it = t.by_name.find(std::string(name)); it != t.by_name.end()) return Symbol{it->second};
  return std::nullopt;
}

const std::string& symbol_name(Symbol s) {
  auto& t = table();
  std::lock_guard lock(t.mutex);
  return t.entries.at(s.id).name;
}

SymbolKind symbol_kind(Symbol s) {
  auto& t = table();
  std::lock_guard lock(t.mutex);
  return t.entries.at(s.id).kind;
}

Symbol UnknownFactory::fresh() { return intern(prefix_ + std::to_string(next_++), SymbolKind::Unknown); }

// ---------------------------------------------------------------------------
// Monomial

Monomial Monomial::of(Symbol s, std::uint32_t exponent) {
  Monomial m;
  if (exponent > 0) m.factors_.emplace_back(s, exponent);
  return m;
}

std::uint32_t Monomial::degree() const {
  std::uint32_t d = 0;
  for (const auto& [s, e] : factors_) d += e;
  return d;
}

std::uint32_t Monomial::exponent(Symbol s) const {
  for (const auto& [t, e] : factors_)
    if (t == s) return e;
  return 0;
}

Monomial Monomial::operator*(const Monomial& other) const {
  Monomial r;
  r.factors_.reserve(factors_.size() + other.factors_.size());
  auto a = factors_.begin();
  auto b = other.factors_.begin();
  while (a != factors_.end() || b != other.factors_.end()) {
    if (b == other.factors_.end() || (a != factors_.end() && a->first < b->first)) {
      r.factors_.push_back(*a++);
    } else if (a == factors_.end() || b->first < a->first) {
      r.factors_.push_back(*b++);
    } else {
      r.factors_.emplace_back(a->first, a->second + b->second);
      ++a;
      ++b;
    }
  }
  return r;
}

std::pair<Monomial, Monomial> Monomial::split(const std::function<bool(Symbol)>& pred) const {
  Monomial in, out;
  for (const auto& f : factors_) (pred(f.first) ? in : out).factors_.push_back(f);
  return {std::move(in), std::move(out)};
}

bool operator<(const Monomial& a, const Monomial& b) {
  auto da = a.degree(), db = b.degree();
  if (da != db) return da < db;
  // Same degree: the monomial with the earlier symbol at higher power first.
  auto n = std::min(a.factors_.size(), b.factors_.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& fa = a.factors_[i];
    const auto& fb = b.factors_[i];
    if (fa.first != fb.first) return fa.first < fb.first;
    if (fa.second != fb.second) return fa.second > fb.second;
  }
  return a.factors_.size() < b.factors_.size();
}

// ---------------------------------------------------------------------------
// Poly

Poly::Poly(const Rational& c) {
  if (c != 0) terms_.emplace(Monomial{}, c);
}

Poly Poly::var(Symbol s) { return term(Rational(1), Monomial::of(s)); }

Poly Poly::term(const Rational& c, Monomial m) {
  Poly p;
  if (c != 0) p.terms_.emplace(std::move(m), c);
  return p;
}

bool Poly::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_one());
}

Rational Poly::constant() const { return coeff(Monomial{}); }

Rational Poly::coeff(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? Rational(0) : it->second;
}

std::uint32_t Poly::degree() const {
  std::uint32_t d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
  return d;
}

std::uint32_t Poly::degree_in(const std::function<bool(Symbol)>& pred) const {
  std::uint32_t d = 0;
  for (const auto& [m, c] : terms_) {
    std::uint32_t k = 0;
    for (const auto& [s, e] : m.factors())
      if (pred(s)) k += e;
    d = std::max(d, k);
  }
  return d;
}

std::uint32_t Poly::degree_in(Symbol s) const {
  std::uint32_t d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.exponent(s));
  return d;
}

std::set<Symbol> Poly::symbols() const {
  std::set<Symbol> out;
  for (const auto& [m, c] : terms_)
    for (const auto& [s, e] : m.factors()) out.insert(s);
  return out;
}

bool Poly::mentions(const std::function<bool(Symbol)>& pred) const {
  for (const auto& [m, c] : terms_)
    for (const auto& [s, e] : m.factors())
      if (pred(s)) return true;
  return false;
}

void Poly::add_term(const Monomial& m, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

Poly Poly::operator-() const {
  Poly r = *this;
  for (auto& [m, c] : r.terms_) c = -c;
  return r;
}

Poly& Poly::operator+=(const Poly& o) {
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

Poly& Poly::operator-=(const Poly& o) {
  for (const auto& [m, c] : o.terms_) add_term(m, -c);
  return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
  Poly r;
  for (const auto& [ma, ca] : a.terms_)
    for (const auto& [mb, cb] : b.terms_) r.add_term(ma * mb, ca * cb);
  return r;
}

Poly& Poly::operator*=(const Poly& o) { return *this = *this * o; }

Poly Poly::pow(unsigned exponent) const {
  Poly result(1);
  Poly base = *this;
  while (exponent) {
    if (exponent & 1u) result *= base;
    exponent >>= 1;
    if (exponent) base *= base;
  }
  return result;
}

Poly Poly::substitute(const std::map<Symbol, Poly>& bindings) const {
  // Cache powers of each binding; dynamics compositions reuse them heavily.
  std::map<std::pair<Symbol, std::uint32_t>, Poly> powers;
  auto power_of = [&](Symbol s, std::uint32_t e) -> const Poly& {
    auto key = std::make_pair(s, e);
    if (auto it = powers.find(key); it != powers.end()) return it->second;
    return powers.emplace(key, bindings.at(s).pow(e)).first->second;
  };
  Poly out;
  for (const auto& [m, c] : terms_) {
    Poly t = Poly::term(c, {});
    Monomial kept;
    for (const auto& [s, e] : m.factors()) {
      if (bindings.count(s))
        t *= power_of(s, e);
      else
        kept = kept * Monomial::of(s, e);
    }
    if (!kept.is_one()) t *= Poly::term(Rational(1), kept);
    out += t;
  }
  return out;
}

Poly Poly::bind(const std::map<Symbol, Rational>& values) const {
  Poly out;
  for (const auto& [m, c] : terms_) {
    Rational v = c;
    Monomial kept;
    for (const auto& [s, e] : m.factors()) {
      if (auto it = values.find(s); it != values.end())
        v *= ldbsm::pow(it->second, e);
      else
        kept = kept * Monomial::of(s, e);
    }
    out.add_term(kept, v);
  }
  return out;
}

Rational Poly::eval(const std::map<Symbol, Rational>& values) const {
  Rational total(0);
  for (const auto& [m, c] : terms_) {
    Rational v = c;
    for (const auto& [s, e] : m.factors()) {
      auto it = values.find(s);
      if (it == values.end()) throw BindingError(symbol_name(s));
      v *= ldbsm::pow(it->second, e);
    }
    total += v;
  }
  return total;
}

std::map<Monomial, Poly> Poly::collect(const std::function<bool(Symbol)>& pred) const {
  std::map<Monomial, Poly> out;
  for (const auto& [m, c] : terms_) {
    auto [in, rest] = m.split(pred);
    out[in].add_term(rest, c);
  }
  for (auto it = out.begin(); it != out.end();) {
    if (it->second.is_zero())
      it = out.erase(it);
    else
      ++it;
  }
  return out;
}

Poly expect_over_noise(const Poly& p, std::span<const Symbol> noise, const MomentFn& moment) {
  auto dim_of = [&](Symbol s) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < noise.size(); ++i)
      if (noise[i] == s) return i;
    return std::nullopt;
  };
  Poly out;
  for (const auto& [m, c] : p.terms()) {
    Rational factor = c;
    Monomial kept;
    for (const auto& [s, e] : m.factors()) {
      if (auto dim = dim_of(s))
        factor *= moment(*dim, e);
      else
        kept = kept * Monomial::of(s, e);
    }
    out += Poly::term(factor, kept);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Atoms

const char* rel_text(Rel r) {
  switch (r) {
  case Rel::Ge: return ">=";
  case Rel::Gt: return ">";
  case Rel::Le: return "<=";
  case Rel::Lt: return "<";
  case Rel::Eq: return "==";
  }
  return "?";
}

Rel negate(Rel r) {
  switch (r) {
  case Rel::Ge: return Rel::Lt;
  case Rel::Gt: return Rel::Le;
  case Rel::Le: return Rel::Gt;
  case Rel::Lt: return Rel::Ge;
  case Rel::Eq: break;
  }
  throw DomainError("equality has no single-atom negation");
}

Atom Atom::relaxed_ge() const {
  switch (rel) {
  case Rel::Ge:
  case Rel::Gt: return {poly, Rel::Ge};
  case Rel::Le:
  case Rel::Lt: return {-poly, Rel::Ge};
  case Rel::Eq: return *this;
  }
  return *this;
}

bool Atom::holds(const std::map<Symbol, Rational>& values) const {
  auto v = poly.eval(values);
  switch (rel) {
  case Rel::Ge: return v >= 0;
  case Rel::Gt: return v > 0;
  case Rel::Le: return v <= 0;
  case Rel::Lt: return v < 0;
  case Rel::Eq: return v == 0;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class PolyParser {
public:
  PolyParser(std::string_view text, const SymbolResolver& resolve, bool allow_decimal)
      : text_(text), resolve_(resolve), allow_decimal_(allow_decimal) {}

  Poly parse_full() {
    Poly p = expr();
    skip_ws();
    if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return p;
  }

  Poly expr() {
    skip_ws();
    Poly acc;
    bool first = true;
    while (true) {
      skip_ws();
      int sign = 1;
      if (peek('+')) {
        ++pos_;
      } else if (peek('-')) {
        ++pos_;
        sign = -1;
      } else if (!first) {
        break;
      }
      Poly t = product();
      acc += sign > 0 ? t : -t;
      first = false;
    }
    return acc;
  }

  std::size_t pos() const { return pos_; }
  void set_pos(std::size_t p) { pos_ = p; }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what + " in '" + std::string(text_) + "'", 1, static_cast<int>(pos_) + 1);
  }

private:
  Poly product() {
    Poly acc = power();
    while (true) {
      skip_ws();
      if (peek('*') && !peek2('*', '*')) {
        ++pos_;
        acc *= power();
      } else if (peek('/')) {
        ++pos_;
        Poly d = power();
        if (!d.is_constant() || d.is_zero()) fail("division by non-constant or zero");
        acc *= Poly(Rational(1) / d.constant());
      } else {
        break;
      }
    }
    return acc;
  }

  Poly power() {
    Poly base = atom();
    skip_ws();
    if (peek('^') || peek2('*', '*')) {
      pos_ += peek('^') ? 1 : 2;
      skip_ws();
      auto start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("expected non-negative integer exponent");
      auto e = std::stoul(std::string(text_.substr(start, pos_ - start)));
      if (e > 64) fail("exponent too large");
      base = base.pow(static_cast<unsigned>(e));
    }
    return base;
  }

  Poly atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Poly inner = expr();
      skip_ws();
      if (!peek(')')) fail("expected ')'");
      ++pos_;
      return inner;
    }
    if (c == '-' || c == '+') {
      ++pos_;
      Poly inner = power();
      return c == '-' ? -inner : inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      auto start = pos_;
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
        ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E') && allow_decimal_) {
        auto save = pos_;
        ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) ++pos_;
        if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        } else {
          pos_ = save;
        }
      }
      auto lit = text_.substr(start, pos_ - start);
      try {
        return Poly(parse_rational(lit, allow_decimal_));
      } catch (const ParseError& e) {
        pos_ = start;
        fail(e.what());
      }
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      auto start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      auto name = text_.substr(start, pos_ - start);
      auto s = resolve_(name);
      if (!s) {
        pos_ = start;
        fail("unknown identifier '" + std::string(name) + "'");
      }
      return Poly::var(*s);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool peek(char c) const { return pos_ < text_.size() && text_[pos_] == c; }
  bool peek2(char a, char b) const {
    return pos_ + 1 < text_.size() && text_[pos_] == a && text_[pos_ + 1] == b;
  }

  std::string_view text_;
  const SymbolResolver& resolve_;
  bool allow_decimal_;
  std::size_t pos_ = 0;
};

} // namespace

Poly parse_poly(std::string_view text, const SymbolResolver& resolve, bool allow_decimal) {
  PolyParser parser(text, resolve, allow_decimal);
  return parser.parse_full();
}

Atom parse_atom(std::string_view text, const SymbolResolver& resolve, bool allow_decimal) {
  static constexpr std::pair<std::string_view, Rel> ops[] = {
      {">=", Rel::Ge}, {"<=", Rel::Le}, {"==", Rel::Eq}, {">", Rel::Gt}, {"<", Rel::Lt}};
  for (std::size_t i = 0; i < text.size(); ++i) {
    for (const auto& [op, rel] : ops) {
      if (text.substr(i, op.size()) == op) {
        Poly lhs = parse_poly(text.substr(0, i), resolve, allow_decimal);
        Poly rhs = parse_poly(text.substr(i + op.size()), resolve, allow_decimal);
        return {lhs - rhs, rel};
      }
    }
  }
  throw ParseError("expected a relation (>=, >, <=, <, ==) in '" + std::string(text) + "'", 1, 1);
}

SymbolResolver resolver_for(std::vector<Symbol> allowed) {
  return [allowed = std::move(allowed)](std::string_view name) -> std::optional<Symbol> {
    for (Symbol s : allowed)
      if (symbol_name(s) == name) return s;
    return std::nullopt;
  };
}

// ---------------------------------------------------------------------------
// Printing

std::string to_string(const Monomial& m) {
  std::string out;
  for (const auto& [s, e] : m.factors()) {
    if (!out.empty()) out += "*";
    out += symbol_name(s);
    if (e > 1) out += "^" + std::to_string(e);
  }
  return out.empty() ? "1" : out;
}

std::string to_string(const Poly& p) {
  if (p.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [m, c] : p.terms()) {
    Rational mag = abs(c);
    bool neg = c < 0;
    if (first)
      out += neg ? "-" : "";
    else
      out += neg ? " - " : " + ";
    if (m.is_one())
      out += to_string(mag);
    else if (mag == 1)
      out += to_string(m);
    else
      out += to_string(mag) + "*" + to_string(m);
    first = false;
  }
  return out;
}

std::string to_string(const Atom& a) { return to_string(a.poly) + " " + rel_text(a.rel) + " 0"; }

// ---------------------------------------------------------------------------
// CompiledPoly

CompiledPoly::CompiledPoly(const Poly& p, std::span<const Symbol> slots) {
  for (const auto& [m, c] : p.terms()) {
    Term t{to_double(c), {}};
    for (const auto& [s, e] : m.factors()) {
      auto it = std::find(slots.begin(), slots.end(), s);
      if (it == slots.end()) throw BindingError(symbol_name(s));
      t.powers.emplace_back(static_cast<std::uint32_t>(it - slots.begin()), e);
    }
    terms_.push_back(std::move(t));
  }
  affine_ = p.degree() <= 1;
  if (affine_) {
    for (const auto& t : terms_) {
      if (t.powers.empty())
        constant_ += t.coeff;
      else
        linear_.emplace_back(t.powers[0].first, t.coeff);
    }
  }
}

double CompiledPoly::operator()(std::span<const double> values) const {
  if (affine_) {
    double total = constant_;
    for (const auto& [slot, c] : linear_) total += c * values[slot];
    return total;
  }
  double total = 0.0;
  for (const auto& t : terms_) {
    double v = t.coeff;
    for (const auto& [slot, e] : t.powers) {
      double x = values[slot];
      for (std::uint32_t k = 0; k < e; ++k) v *= x;
    }
    total += v;
  }
  return total;
}

} // namespace ldbsm
