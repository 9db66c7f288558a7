#pragma once
// Symbols of the coefficient ring: coordinates, rotation rates, velocity jets and
// a few auxiliary generators (trigonometric coordinate functions, wavevector
// components, a frequency variable).

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>

#include "rotflow/rational.hpp"

namespace rotflow {

/// Symbol kinds, in canonical sort order.
enum class SymbolKind : std::uint8_t {
  Rate = 0,   // lambda_i
  Wave = 1,   // k_i
  Freq = 2,   // s (frequency variable of normal-mode determinants)
  Coord = 3,  // x_i
  Sin = 4,    // sin(x_i)
  Cos = 5,    // cos(x_i)
  Jet0 = 6,   // u_i
  Jet1 = 7,   // u_{i,j}
  Jet2 = 8,   // u_{i,jk}, j <= k
};

/// A ring generator.  Indices are 1-based axis/plane labels; unused slots are 0.
/// Identity is the packed key, so symbols compare and hash cheaply.
class Symbol {
 public:
  constexpr Symbol() = default;

  static constexpr Symbol coord(int i) { return {SymbolKind::Coord, i, 0, 0}; }
  static constexpr Symbol rate(int i) { return {SymbolKind::Rate, i, 0, 0}; }
  static constexpr Symbol wave(int i) { return {SymbolKind::Wave, i, 0, 0}; }
  static constexpr Symbol freq() { return {SymbolKind::Freq, 0, 0, 0}; }
  static constexpr Symbol sin_of(int i) { return {SymbolKind::Sin, i, 0, 0}; }
  static constexpr Symbol cos_of(int i) { return {SymbolKind::Cos, i, 0, 0}; }
  static constexpr Symbol jet(int i) { return {SymbolKind::Jet0, i, 0, 0}; }
  static constexpr Symbol jet(int i, int j) { return {SymbolKind::Jet1, i, j, 0}; }
  static constexpr Symbol jet(int i, int j, int k) {
    return {SymbolKind::Jet2, i, std::min(j, k), std::max(j, k)};
  }

  [[nodiscard]] constexpr SymbolKind kind() const { return static_cast<SymbolKind>(key_ >> 24); }
  [[nodiscard]] constexpr int i() const { return static_cast<int>((key_ >> 16) & 0xff); }
  [[nodiscard]] constexpr int j() const { return static_cast<int>((key_ >> 8) & 0xff); }
  [[nodiscard]] constexpr int k() const { return static_cast<int>(key_ & 0xff); }
  [[nodiscard]] constexpr std::uint32_t key() const { return key_; }

  [[nodiscard]] constexpr bool is_jet() const {
    return kind() == SymbolKind::Jet0 || kind() == SymbolKind::Jet1 || kind() == SymbolKind::Jet2;
  }
  /// Derivative order of a jet symbol (0, 1, 2); -1 for non-jets.
  [[nodiscard]] constexpr int jet_order() const {
    switch (kind()) {
      case SymbolKind::Jet0: return 0;
      case SymbolKind::Jet1: return 1;
      case SymbolKind::Jet2: return 2;
      default: return -1;
    }
  }

  [[nodiscard]] std::string name() const {
    auto n = [](int v) { return std::to_string(v); };
    switch (kind()) {
      case SymbolKind::Rate: return "lambda_" + n(i());
      case SymbolKind::Wave: return "k_" + n(i());
      case SymbolKind::Freq: return "s";
      case SymbolKind::Coord: return "x_" + n(i());
      case SymbolKind::Sin: return "sin(x_" + n(i()) + ")";
      case SymbolKind::Cos: return "cos(x_" + n(i()) + ")";
      case SymbolKind::Jet0: return "u_" + n(i());
      case SymbolKind::Jet1: return "u_{" + n(i()) + "," + n(j()) + "}";
      case SymbolKind::Jet2:
        if (j() < 10 && k() < 10) return "u_{" + n(i()) + "," + n(j()) + n(k()) + "}";
        return "u_{" + n(i()) + "," + n(j()) + "," + n(k()) + "}";
    }
    return "?";
  }

  friend constexpr bool operator==(Symbol a, Symbol b) { return a.key_ == b.key_; }
  friend constexpr auto operator<=>(Symbol a, Symbol b) { return a.key_ <=> b.key_; }

 private:
  constexpr Symbol(SymbolKind kind, int i, int j, int k)
      : key_((static_cast<std::uint32_t>(kind) << 24) | (static_cast<std::uint32_t>(i & 0xff) << 16) |
             (static_cast<std::uint32_t>(j & 0xff) << 8) | static_cast<std::uint32_t>(k & 0xff)) {}

  std::uint32_t key_ = 0;
};

/// Parses a symbol name as produced by Symbol::name().
inline Symbol parse_symbol(std::string_view text) {
  const std::string s(text);
  auto fail = [&]() -> Symbol { throw InputError("unknown symbol '" + s + "'"); };
  auto to_int = [&](const std::string& v) {
    if (v.empty() || !std::all_of(v.begin(), v.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      fail();
    return std::stoi(v);
  };
  if (s == "s") return Symbol::freq();
  if (s.rfind("lambda_", 0) == 0) return Symbol::rate(to_int(s.substr(7)));
  if (s.rfind("k_", 0) == 0) return Symbol::wave(to_int(s.substr(2)));
  if (s.rfind("x_", 0) == 0) return Symbol::coord(to_int(s.substr(2)));
  if (s.rfind("sin(x_", 0) == 0 && s.back() == ')') return Symbol::sin_of(to_int(s.substr(6, s.size() - 7)));
  if (s.rfind("cos(x_", 0) == 0 && s.back() == ')') return Symbol::cos_of(to_int(s.substr(6, s.size() - 7)));
  if (s.rfind("u_{", 0) == 0 && s.back() == '}') {
    const std::string body = s.substr(3, s.size() - 4);
    const auto comma = body.find(',');
    if (comma == std::string::npos) fail();
    const int i = to_int(body.substr(0, comma));
    const std::string rest = body.substr(comma + 1);
    if (auto c2 = rest.find(','); c2 != std::string::npos)
      return Symbol::jet(i, to_int(rest.substr(0, c2)), to_int(rest.substr(c2 + 1)));
    if (rest.size() == 1) return Symbol::jet(i, to_int(rest));
    if (rest.size() == 2) return Symbol::jet(i, to_int(rest.substr(0, 1)), to_int(rest.substr(1)));
    fail();
  }
  if (s.rfind("u_", 0) == 0) return Symbol::jet(to_int(s.substr(2)));
  return fail();
}

/// Registry bound to an ambient dimension: validates indices and caps jet order.
class SymbolTable {
 public:
  explicit SymbolTable(int dimension, int max_jet_order = 2) : dim_(dimension), max_jet_order_(max_jet_order) {
    if (dimension < 1) throw DimensionMismatch("dimension must be >= 1");
    if (max_jet_order < 0 || max_jet_order > 2) throw InputError("max jet order must be 0, 1 or 2");
  }

  [[nodiscard]] int dimension() const { return dim_; }
  [[nodiscard]] int max_jet_order() const { return max_jet_order_; }
  [[nodiscard]] int max_planes() const { return dim_ / 2; }

  [[nodiscard]] Symbol coord(int i) const { return Symbol::coord(axis(i)); }
  [[nodiscard]] Symbol rate(int i) const {
    if (i < 1 || i > max_planes()) throw DimensionMismatch("rate index " + std::to_string(i) + " out of range");
    return Symbol::rate(i);
  }
  [[nodiscard]] Symbol jet(int i) const { return Symbol::jet(axis(i)); }
  [[nodiscard]] Symbol jet(int i, int j) const {
    require_order(1);
    return Symbol::jet(axis(i), axis(j));
  }
  [[nodiscard]] Symbol jet(int i, int j, int k) const {
    require_order(2);
    return Symbol::jet(axis(i), axis(j), axis(k));
  }

  /// True when every index of `s` is within range for this table.
  [[nodiscard]] bool contains(Symbol s) const {
    auto ok = [&](int v) { return v >= 1 && v <= dim_; };
    switch (s.kind()) {
      case SymbolKind::Freq: return true;
      case SymbolKind::Rate: return s.i() >= 1 && s.i() <= max_planes();
      case SymbolKind::Jet1: return max_jet_order_ >= 1 && ok(s.i()) && ok(s.j());
      case SymbolKind::Jet2: return max_jet_order_ >= 2 && ok(s.i()) && ok(s.j()) && ok(s.k());
      default: return ok(s.i());
    }
  }

 private:
  int axis(int i) const {
    if (i < 1 || i > dim_) throw DimensionMismatch("axis " + std::to_string(i) + " out of range 1.." + std::to_string(dim_));
    return i;
  }
  void require_order(int order) const {
    if (order > max_jet_order_) throw JetOrderOverflow("jet order " + std::to_string(order) + " exceeds table maximum");
  }

  int dim_;
  int max_jet_order_;
};

}  // namespace rotflow
