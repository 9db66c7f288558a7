#pragma once
// Exact multivariate polynomials over the rationals in rotflow symbols.

#include <cmath>
#include <functional>
#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rotflow/rational.hpp"
#include "rotflow/symbol.hpp"

namespace rotflow {

/// Product of symbol powers, factors sorted by symbol with positive exponents.
class Monomial {
 public:
  struct Factor {
    Symbol symbol;
    int exponent;
    friend bool operator==(const Factor&, const Factor&) = default;
  };

  Monomial() = default;
  explicit Monomial(Symbol s, int exponent = 1) {
    if (exponent > 0) factors_.push_back({s, exponent});
  }

  [[nodiscard]] const std::vector<Factor>& factors() const { return factors_; }
  [[nodiscard]] bool is_one() const { return factors_.empty(); }

  [[nodiscard]] int exponent_of(Symbol s) const {
    for (const auto& f : factors_)
      if (f.symbol == s) return f.exponent;
    return 0;
  }

  /// Total degree counting only factors whose symbol satisfies `pred`.
  template <class Pred>
  [[nodiscard]] int degree_if(Pred pred) const {
    int total = 0;
    for (const auto& f : factors_)
      if (pred(f.symbol)) total += f.exponent;
    return total;
  }
  [[nodiscard]] int jet_degree() const {
    return degree_if([](Symbol s) { return s.is_jet(); });
  }

  /// The monomial with every factor matching `pred` removed.
  template <class Pred>
  [[nodiscard]] Monomial without(Pred pred) const {
    Monomial m;
    for (const auto& f : factors_)
      if (!pred(f.symbol)) m.factors_.push_back(f);
    return m;
  }
  template <class Pred>
  [[nodiscard]] Monomial only(Pred pred) const {
    return without([&](Symbol s) { return !pred(s); });
  }

  /// Divides by s^1; requires exponent_of(s) >= 1.
  [[nodiscard]] Monomial reduced(Symbol s) const {
    Monomial m;
    for (const auto& f : factors_) {
      if (f.symbol == s) {
        if (f.exponent > 1) m.factors_.push_back({s, f.exponent - 1});
      } else {
        m.factors_.push_back(f);
      }
    }
    return m;
  }

  /// Exact quotient this / other if other divides this.
  [[nodiscard]] std::optional<Monomial> divided_by(const Monomial& other) const {
    Monomial m = *this;
    for (const auto& f : other.factors_) {
      auto it = std::find_if(m.factors_.begin(), m.factors_.end(), [&](const Factor& g) { return g.symbol == f.symbol; });
      if (it == m.factors_.end() || it->exponent < f.exponent) return std::nullopt;
      it->exponent -= f.exponent;
      if (it->exponent == 0) m.factors_.erase(it);
    }
    return m;
  }

  /// Greatest common divisor of two monomials.
  [[nodiscard]] static Monomial gcd(const Monomial& a, const Monomial& b) {
    Monomial m;
    for (const auto& f : a.factors_)
      if (int e = std::min(f.exponent, b.exponent_of(f.symbol)); e > 0) m.factors_.push_back({f.symbol, e});
    return m;
  }

  friend Monomial operator*(const Monomial& a, const Monomial& b) {
    Monomial m;
    m.factors_.reserve(a.factors_.size() + b.factors_.size());
    auto ia = a.factors_.begin();
    auto ib = b.factors_.begin();
    while (ia != a.factors_.end() || ib != b.factors_.end()) {
      if (ib == b.factors_.end() || (ia != a.factors_.end() && ia->symbol < ib->symbol)) {
        m.factors_.push_back(*ia++);
      } else if (ia == a.factors_.end() || ib->symbol < ia->symbol) {
        m.factors_.push_back(*ib++);
      } else {
        m.factors_.push_back({ia->symbol, ia->exponent + ib->exponent});
        ++ia;
        ++ib;
      }
    }
    return m;
  }

  friend bool operator==(const Monomial&, const Monomial&) = default;
  friend bool operator<(const Monomial& a, const Monomial& b) {
    return std::lexicographical_compare(a.factors_.begin(), a.factors_.end(), b.factors_.begin(), b.factors_.end(),
                                        [](const Factor& x, const Factor& y) {
                                          if (x.symbol != y.symbol) return x.symbol < y.symbol;
                                          return x.exponent < y.exponent;
                                        });
  }

  [[nodiscard]] std::string to_string() const {
    if (factors_.empty()) return "1";
    std::string out;
    for (const auto& f : factors_) {
      if (!out.empty()) out += "*";
      out += f.symbol.name();
      if (f.exponent != 1) out += "^" + std::to_string(f.exponent);
    }
    return out;
  }

 private:
  std::vector<Factor> factors_;
};

/// Parses the output of Monomial::to_string().
inline Monomial parse_monomial(std::string_view text) {
  const std::string s(text);
  if (s == "1") return {};
  Monomial m;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    // '*' never occurs inside a symbol name.
    auto star = s.find('*', pos);
    const std::string piece = s.substr(pos, star == std::string::npos ? std::string::npos : star - pos);
    int exponent = 1;
    std::string name = piece;
    if (auto caret = piece.rfind('^'); caret != std::string::npos) {
      name = piece.substr(0, caret);
      try {
        exponent = std::stoi(piece.substr(caret + 1));
      } catch (const std::logic_error&) {
        throw InputError("malformed exponent in monomial '" + s + "'");
      }
    }
    m = m * Monomial(parse_symbol(name), exponent);
    if (star == std::string::npos) break;
    pos = star + 1;
  }
  return m;
}

/// Numeric values for symbols.  Bound coordinates also bind sin/cos of themselves.
class Bindings {
 public:
  Bindings& set(Symbol s, double value) {
    values_[s.key()] = value;
    return *this;
  }
  Bindings& set_point(const std::vector<double>& x) {
    for (std::size_t i = 0; i < x.size(); ++i) set(Symbol::coord(static_cast<int>(i) + 1), x[i]);
    return *this;
  }
  Bindings& set_rates(const std::vector<double>& rates) {
    for (std::size_t i = 0; i < rates.size(); ++i) set(Symbol::rate(static_cast<int>(i) + 1), rates[i]);
    return *this;
  }

  [[nodiscard]] std::optional<double> find(Symbol s) const {
    if (auto it = values_.find(s.key()); it != values_.end()) return it->second;
    if (s.kind() == SymbolKind::Sin || s.kind() == SymbolKind::Cos) {
      if (auto x = find(Symbol::coord(s.i()))) return s.kind() == SymbolKind::Sin ? std::sin(*x) : std::cos(*x);
    }
    return std::nullopt;
  }
  [[nodiscard]] double at(Symbol s) const {
    if (auto v = find(s)) return *v;
    throw UnboundSymbol("symbol " + s.name() + " has no value");
  }

 private:
  std::unordered_map<std::uint32_t, double> values_;
};

/// Exact polynomial with rational coefficients, kept in canonical form:
/// monomials sorted, zero coefficients dropped, coefficients in lowest terms.
class ScalarExpr {
 public:
  using TermMap = std::map<Monomial, Rational>;

  ScalarExpr() = default;
  ScalarExpr(const Rational& c) {  // NOLINT(google-explicit-constructor)
    if (c != 0) terms_.emplace(Monomial{}, c).first->second.canonicalize();
  }
  ScalarExpr(long c) : ScalarExpr(Rational(c)) {}  // NOLINT(google-explicit-constructor)
  ScalarExpr(int c) : ScalarExpr(Rational(c)) {}   // NOLINT(google-explicit-constructor)
  ScalarExpr(Symbol s) { terms_.emplace(Monomial(s), Rational(1)); }  // NOLINT(google-explicit-constructor)
  ScalarExpr(const Monomial& m, const Rational& c) {
    if (c != 0) terms_.emplace(m, c).first->second.canonicalize();
  }

  [[nodiscard]] const TermMap& terms() const { return terms_; }
  [[nodiscard]] bool is_zero() const { return terms_.empty(); }
  [[nodiscard]] std::size_t size() const { return terms_.size(); }
  [[nodiscard]] bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_one()); }
  [[nodiscard]] Rational constant_term() const {
    auto it = terms_.find(Monomial{});
    return it == terms_.end() ? Rational(0) : it->second;
  }
  [[nodiscard]] Rational coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  void add_term(const Monomial& m, const Rational& c) {
    if (c == 0) return;
    // mpq_class(a, b) is not reduced on construction; GMP arithmetic assumes reduced operands
    auto [it, inserted] = terms_.try_emplace(m, c);
    it->second.canonicalize();
    if (!inserted) {
      Rational r = c;
      r.canonicalize();
      it->second += r;
      if (it->second == 0) terms_.erase(it);
    }
  }

  ScalarExpr& operator+=(const ScalarExpr& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  ScalarExpr& operator-=(const ScalarExpr& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  ScalarExpr& operator*=(const Rational& c) {
    if (c == 0) {
      terms_.clear();
    } else {
      for (auto& [m, v] : terms_) v *= c;
    }
    return *this;
  }
  friend ScalarExpr operator+(ScalarExpr a, const ScalarExpr& b) { return a += b; }
  friend ScalarExpr operator-(ScalarExpr a, const ScalarExpr& b) { return a -= b; }
  friend ScalarExpr operator-(ScalarExpr a) { return a *= Rational(-1); }
  friend ScalarExpr operator*(ScalarExpr a, const Rational& c) { return a *= c; }
  friend ScalarExpr operator*(const Rational& c, ScalarExpr a) { return a *= c; }
  friend ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b) {
    ScalarExpr out;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) out.add_term(ma * mb, ca * cb);
    return out;
  }
  ScalarExpr& operator*=(const ScalarExpr& o) { return *this = *this * o; }

  friend bool operator==(const ScalarExpr& a, const ScalarExpr& b) { return a.terms_ == b.terms_; }

  [[nodiscard]] ScalarExpr pow(int n) const {
    ScalarExpr out(1);
    for (int i = 0; i < n; ++i) out *= *this;
    return out;
  }

  /// Partial derivative along coordinate axis `a`.  Jets are functions of x:
  /// d/dx_a u_i = u_{i,a}, d/dx_a u_{i,j} = u_{i,ja}; second jets cannot be differentiated.
  [[nodiscard]] ScalarExpr partial(int axis) const {
    ScalarExpr out;
    for (const auto& [m, c] : terms_) {
      for (const auto& f : m.factors()) {
        std::optional<ScalarExpr> ds = symbol_partial(f.symbol, axis);
        if (!ds) continue;
        ScalarExpr rest(m.reduced(f.symbol), c * f.exponent);
        out += rest * *ds;
      }
    }
    return out;
  }

  /// Replaces every occurrence of `s` by `value`.
  [[nodiscard]] ScalarExpr substitute(Symbol s, const ScalarExpr& value) const {
    ScalarExpr out;
    for (const auto& [m, c] : terms_) {
      const int e = m.exponent_of(s);
      if (e == 0) {
        out.add_term(m, c);
        continue;
      }
      out += ScalarExpr(m.without([&](Symbol t) { return t == s; }), c) * value.pow(e);
    }
    return out;
  }

  /// Replaces symbols for which `fn` returns a value; others are kept.
  [[nodiscard]] ScalarExpr substitute(const std::function<std::optional<ScalarExpr>(Symbol)>& fn) const {
    ScalarExpr out;
    for (const auto& [m, c] : terms_) {
      ScalarExpr term{Rational(c)};
      for (const auto& f : m.factors()) {
        if (auto v = fn(f.symbol)) {
          term *= v->pow(f.exponent);
        } else {
          term *= ScalarExpr(Monomial(f.symbol, f.exponent), Rational(1));
        }
      }
      out += term;
    }
    return out;
  }

  [[nodiscard]] double evaluate(const Bindings& b) const {
    double total = 0.0;
    for (const auto& [m, c] : terms_) {
      double term = c.get_d();
      for (const auto& f : m.factors()) term *= std::pow(b.at(f.symbol), f.exponent);
      total += term;
    }
    return total;
  }

  /// True if any monomial contains a symbol satisfying `pred`.
  template <class Pred>
  [[nodiscard]] bool mentions(Pred pred) const {
    for (const auto& [m, c] : terms_)
      for (const auto& f : m.factors())
        if (pred(f.symbol)) return true;
    return false;
  }

  [[nodiscard]] std::string to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
      Rational mag = abs(c);
      if (first) {
        if (c < 0) os << "-";
      } else {
        os << (c < 0 ? " - " : " + ");
      }
      if (m.is_one()) {
        os << mag.get_str();
      } else {
        if (mag != 1) os << mag.get_str() << "*";
        os << m.to_string();
      }
      first = false;
    }
    return os.str();
  }

 private:
  static std::optional<ScalarExpr> symbol_partial(Symbol s, int axis) {
    switch (s.kind()) {
      case SymbolKind::Coord:
        return s.i() == axis ? std::optional<ScalarExpr>(ScalarExpr(1)) : std::nullopt;
      case SymbolKind::Sin:
        return s.i() == axis ? std::optional<ScalarExpr>(ScalarExpr(Symbol::cos_of(axis))) : std::nullopt;
      case SymbolKind::Cos:
        return s.i() == axis ? std::optional<ScalarExpr>(-ScalarExpr(Symbol::sin_of(axis))) : std::nullopt;
      case SymbolKind::Jet0: return ScalarExpr(Symbol::jet(s.i(), axis));
      case SymbolKind::Jet1: return ScalarExpr(Symbol::jet(s.i(), s.j(), axis));
      case SymbolKind::Jet2:
        throw JetOrderOverflow("cannot differentiate second jet " + s.name() + ": jet order is truncated at 2");
      default: return std::nullopt;
    }
  }

  TermMap terms_;
};

inline ScalarExpr sym(Symbol s) { return ScalarExpr(s); }

}  // namespace rotflow
