// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ldbsm/rational.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ldbsm {

enum class SymbolKind { State, Input, Noise, Unknown };

/// Interned name. Ordering follows interning order, which keeps emitted
/// systems stable for a deterministic pipeline.
struct Symbol {
  std::uint32_t id = 0;
  friend auto operator<=>(Symbol, Symbol) = default;
};

/// Returns the symbol for `name`, creating it on first use. Re-interning an
/// existing name with a different kind throws ModelError.
Symbol intern(std::string_view name, SymbolKind kind);
std::optional<Symbol> lookup_symbol(std::string_view name);
const std::string& symbol_name(Symbol s);
SymbolKind symbol_kind(Symbol s);
inline bool is_unknown(Symbol s) { return symbol_kind(s) == SymbolKind::Unknown; }

/// Allocates unknowns named `<prefix><n>` with a private counter, so the
/// names depend only on the order of requests made through this factory.
class UnknownFactory {
public:
  explicit UnknownFactory(std::string prefix) : prefix_(std::move(prefix)) {}
  Symbol fresh();
  std::size_t issued() const { return next_; }

private:
  std::string prefix_;
  std::size_t next_ = 0;
};

/// Sparse power product, sorted by symbol, no zero exponents.
class Monomial {
public:
  using Factor = std::pair<Symbol, std::uint32_t>;

  Monomial() = default;
  static Monomial of(Symbol s, std::uint32_t exponent = 1);

  std::span<const Factor> factors() const { return factors_; }
  bool is_one() const { return factors_.empty(); }
  std::uint32_t degree() const;
  std::uint32_t exponent(Symbol s) const;

  Monomial operator*(const Monomial& other) const;
  /// Splits into (factors satisfying pred, remaining factors).
  std::pair<Monomial, Monomial> split(const std::function<bool(Symbol)>& pred) const;

  /// Graded order: lower total degree first, then by factors.
  friend bool operator<(const Monomial& a, const Monomial& b);
  friend bool operator==(const Monomial& a, const Monomial& b) = default;

private:
  std::vector<Factor> factors_;
};

/// Multivariate polynomial with exact rational coefficients over any mix of
/// state, input, noise and unknown symbols. Template polynomials keep their
/// unknown coefficients as ordinary symbols; `collect` recovers the
/// coefficient-in-unknowns view per monomial in the other symbols.
class Poly {
public:
  using Terms = std::map<Monomial, Rational>;

  Poly() = default;
  Poly(const Rational& c);  // NOLINT: implicit constants read naturally
  Poly(long c) : Poly(Rational(c)) {}  // NOLINT
  static Poly var(Symbol s);
  static Poly term(const Rational& c, Monomial m);

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  /// Constant term (coefficient of the empty monomial).
  Rational constant() const;
  Rational coeff(const Monomial& m) const;

  std::uint32_t degree() const;
  /// Total degree counting only symbols satisfying pred.
  std::uint32_t degree_in(const std::function<bool(Symbol)>& pred) const;
  std::uint32_t degree_in(Symbol s) const;
  std::set<Symbol> symbols() const;
  bool mentions(const std::function<bool(Symbol)>& pred) const;

  Poly operator-() const;
  Poly& operator+=(const Poly& o);
  Poly& operator-=(const Poly& o);
  Poly& operator*=(const Poly& o);
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(const Poly& a, const Poly& b);
  friend bool operator==(const Poly& a, const Poly& b) = default;
  Poly pow(unsigned exponent) const;

  /// Replaces each bound symbol by its polynomial, expanded and collected.
  Poly substitute(const std::map<Symbol, Poly>& bindings) const;
  /// Fixes the given symbols to values; others stay symbolic.
  Poly bind(const std::map<Symbol, Rational>& values) const;
  /// Exact value; every symbol must be bound (BindingError names the first
  /// missing one).
  Rational eval(const std::map<Symbol, Rational>& values) const;

  /// Groups terms by their part in `pred` symbols: result maps each such
  /// monomial to its coefficient polynomial in the remaining symbols.
  std::map<Monomial, Poly> collect(const std::function<bool(Symbol)>& pred) const;

private:
  void add_term(const Monomial& m, const Rational& c);
  Terms terms_;
};

/// E_w[p]: each noise factor w_i^k is replaced by moment(i, k), where i
/// indexes `noise`. Cross terms use independence across dimensions.
using MomentFn = std::function<Rational(std::size_t dim, unsigned order)>;
Poly expect_over_noise(const Poly& p, std::span<const Symbol> noise, const MomentFn& moment);

enum class Rel { Ge, Gt, Le, Lt, Eq };

/// `poly rel 0`.
struct Atom {
  Poly poly;
  Rel rel = Rel::Ge;

  /// Non-strict `>= 0` form: strict relations are relaxed, `<=` negated.
  /// Eq atoms are returned unchanged.
  Atom relaxed_ge() const;
  bool holds(const std::map<Symbol, Rational>& values) const;
  friend bool operator==(const Atom&, const Atom&) = default;
};

const char* rel_text(Rel r);
Rel negate(Rel r);

using SymbolResolver = std::function<std::optional<Symbol>(std::string_view)>;

/// Infix grammar: sums/differences of products of powers, integer or
/// rational literals, identifiers, parentheses, `^` or `**` with
/// non-negative integer exponents, division by constants only.
Poly parse_poly(std::string_view text, const SymbolResolver& resolve, bool allow_decimal = true);
/// "lhs op rhs" with op in >=, >, <=, <, ==; yields (lhs - rhs) op 0.
Atom parse_atom(std::string_view text, const SymbolResolver& resolve, bool allow_decimal = true);

/// Resolver over an explicit list of allowed symbols.
SymbolResolver resolver_for(std::vector<Symbol> allowed);

std::string to_string(const Monomial& m);
std::string to_string(const Poly& p);
std::string to_string(const Atom& a);

/// Fast floating-point evaluator for simulation; slots index the value array.
class CompiledPoly {
public:
  CompiledPoly() = default;
  CompiledPoly(const Poly& p, std::span<const Symbol> slots);
  double operator()(std::span<const double> values) const;

private:
  struct Term {
    double coeff;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> powers;
  };
  std::vector<Term> terms_;
  // Affine polynomials skip the term walk.
  bool affine_ = false;
  double constant_ = 0.0;
  std::vector<std::pair<std::uint32_t, double>> linear_;
};

} // namespace ldbsm
