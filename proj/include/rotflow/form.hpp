#pragma once
// Exterior algebra on Euclidean d-space with exact polynomial coefficients.
//
// Orientation is dx_1 ^ ... ^ dx_d and the metric is Euclidean, so the Hodge
// star of a basis form is the permutation sign of (I, I^c) times dx_{I^c}.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "rotflow/scalar_expr.hpp"

namespace rotflow {

inline constexpr int kMaxDimension = 16;

/// Strictly increasing tuple of 1-based axis labels, stored as a bit set.
class MultiIndex {
 public:
  constexpr MultiIndex() = default;
  MultiIndex(std::initializer_list<int> axes) {
    int prev = 0;
    for (int a : axes) {
      if (a <= prev || a > kMaxDimension) throw DegreeError("multi-index must be strictly increasing and within range");
      mask_ |= bit(a);
      prev = a;
    }
  }
  static constexpr MultiIndex from_mask(std::uint32_t mask) {
    MultiIndex m;
    m.mask_ = mask;
    return m;
  }
  static MultiIndex from_axes(const std::vector<int>& axes) {
    MultiIndex m;
    for (int a : axes) {
      if (a < 1 || a > kMaxDimension || (m.mask_ & bit(a))) throw DegreeError("invalid or repeated axis in multi-index");
      m.mask_ |= bit(a);
    }
    return m;
  }
  static constexpr std::uint32_t bit(int axis) { return 1u << (axis - 1); }

  [[nodiscard]] constexpr std::uint32_t mask() const { return mask_; }
  [[nodiscard]] constexpr int degree() const { return std::popcount(mask_); }
  [[nodiscard]] constexpr bool contains(int axis) const { return (mask_ & bit(axis)) != 0; }
  [[nodiscard]] constexpr int max_axis() const { return mask_ == 0 ? 0 : 32 - std::countl_zero(mask_); }

  [[nodiscard]] std::vector<int> axes() const {
    std::vector<int> out;
    for (std::uint32_t m = mask_; m != 0; m &= m - 1) out.push_back(std::countr_zero(m) + 1);
    return out;
  }

  /// Complement within {1..d}.
  [[nodiscard]] MultiIndex complement(int d) const {
    const std::uint32_t all = d >= 32 ? ~0u : ((1u << d) - 1u);
    return from_mask(all & ~mask_);
  }

  /// Sign of the permutation sorting the concatenation (a, b); 0 if they overlap.
  static constexpr int merge_sign(MultiIndex a, MultiIndex b) {
    if (a.mask_ & b.mask_) return 0;
    int inversions = 0;
    for (std::uint32_t m = b.mask_; m != 0; m &= m - 1) {
      const std::uint32_t low = m & (~m + 1);
      // elements of a greater than this element of b
      inversions += std::popcount(a.mask_ & ~(low | (low - 1)));
    }
    return (inversions & 1) ? -1 : 1;
  }

  [[nodiscard]] std::string to_string() const {
    std::string s = "dx";
    bool wide = max_axis() >= 10;
    bool first = true;
    for (int a : axes()) {
      if (wide && !first) s += "_";
      s += std::to_string(a);
      first = false;
    }
    if (mask_ == 0) s = "1";
    return s;
  }

  friend constexpr bool operator==(MultiIndex a, MultiIndex b) { return a.mask_ == b.mask_; }
  /// Lexicographic order on the sorted axis tuples.
  friend bool operator<(MultiIndex a, MultiIndex b) {
    const auto x = a.axes();
    const auto y = b.axes();
    return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
  }

 private:
  std::uint32_t mask_ = 0;
};

/// A vector field with symbolic components.
class VectorFieldSym {
 public:
  explicit VectorFieldSym(std::vector<ScalarExpr> components) : components_(std::move(components)) {}

  /// The generic velocity field sum_i u_i d/dx_i in jet symbols.
  static VectorFieldSym velocity(int d) {
    std::vector<ScalarExpr> c;
    c.reserve(static_cast<std::size_t>(d));
    for (int i = 1; i <= d; ++i) c.emplace_back(Symbol::jet(i));
    return VectorFieldSym(std::move(c));
  }

  [[nodiscard]] int dimension() const { return static_cast<int>(components_.size()); }
  [[nodiscard]] const ScalarExpr& operator[](int axis) const { return components_.at(static_cast<std::size_t>(axis - 1)); }
  [[nodiscard]] const std::vector<ScalarExpr>& components() const { return components_; }

 private:
  std::vector<ScalarExpr> components_;
};

/// Degree-k differential form in dimension d with exact coefficients.
/// Zero coefficients are never stored.
class DifferentialForm {
 public:
  using TermMap = std::map<MultiIndex, ScalarExpr>;

  DifferentialForm(int dimension, int degree) : dim_(dimension), degree_(degree) {
    if (dimension < 1 || dimension > kMaxDimension) throw DimensionMismatch("dimension out of supported range");
    if (degree < 0) throw DegreeError("negative form degree");
  }

  static DifferentialForm zero(int d, int k) { return DifferentialForm(d, k); }
  static DifferentialForm scalar(int d, const ScalarExpr& f) {
    DifferentialForm w(d, 0);
    w.add(MultiIndex{}, f);
    return w;
  }
  /// coeff * dx_{axes...}; axes need not be sorted (the sign is applied).
  static DifferentialForm basis(int d, const std::vector<int>& axes, const ScalarExpr& coeff = ScalarExpr(1)) {
    DifferentialForm w(d, static_cast<int>(axes.size()));
    for (int a : axes)
      if (a < 1 || a > d) throw DimensionMismatch("axis out of range in basis form");
    // sign of the sorting permutation
    int sign = 1;
    for (std::size_t i = 0; i < axes.size(); ++i)
      for (std::size_t j = i + 1; j < axes.size(); ++j) {
        if (axes[i] == axes[j]) return w;
        if (axes[i] > axes[j]) sign = -sign;
      }
    w.add(MultiIndex::from_axes(axes), sign > 0 ? coeff : -coeff);
    return w;
  }
  /// U = sum_i u_i dx_i.
  static DifferentialForm velocity_one_form(int d) {
    DifferentialForm w(d, 1);
    for (int i = 1; i <= d; ++i) w.add(MultiIndex{i}, ScalarExpr(Symbol::jet(i)));
    return w;
  }
  /// X = sum_i x_i dx_i.
  static DifferentialForm position_one_form(int d) {
    DifferentialForm w(d, 1);
    for (int i = 1; i <= d; ++i) w.add(MultiIndex{i}, ScalarExpr(Symbol::coord(i)));
    return w;
  }
  /// Exact 1-form df.
  static DifferentialForm differential(int d, const ScalarExpr& f);

  [[nodiscard]] int dimension() const { return dim_; }
  [[nodiscard]] int degree() const { return degree_; }
  [[nodiscard]] const TermMap& terms() const { return terms_; }
  [[nodiscard]] bool is_zero() const { return terms_.empty(); }
  [[nodiscard]] ScalarExpr coefficient(MultiIndex I) const {
    auto it = terms_.find(I);
    return it == terms_.end() ? ScalarExpr() : it->second;
  }

  void add(MultiIndex I, const ScalarExpr& c) {
    if (I.degree() != degree_) throw DegreeError("basis index degree does not match form degree");
    if (I.max_axis() > dim_) throw DimensionMismatch("basis index exceeds ambient dimension");
    if (c.is_zero()) return;
    auto [it, inserted] = terms_.try_emplace(I, c);
    if (!inserted) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  DifferentialForm& operator+=(const DifferentialForm& o) {
    check_same(o);
    for (const auto& [I, c] : o.terms_) add(I, c);
    return *this;
  }
  DifferentialForm& operator-=(const DifferentialForm& o) {
    check_same(o);
    for (const auto& [I, c] : o.terms_) add(I, -c);
    return *this;
  }
  friend DifferentialForm operator+(DifferentialForm a, const DifferentialForm& b) { return a += b; }
  friend DifferentialForm operator-(DifferentialForm a, const DifferentialForm& b) { return a -= b; }
  friend DifferentialForm operator-(DifferentialForm a) { return a * ScalarExpr(-1); }
  friend DifferentialForm operator*(const DifferentialForm& a, const ScalarExpr& f) {
    DifferentialForm out(a.dim_, a.degree_);
    for (const auto& [I, c] : a.terms_) out.add(I, c * f);
    return out;
  }
  friend DifferentialForm operator*(const ScalarExpr& f, const DifferentialForm& a) { return a * f; }

  friend bool operator==(const DifferentialForm& a, const DifferentialForm& b) {
    return a.dim_ == b.dim_ && (a.degree_ == b.degree_ || (a.is_zero() && b.is_zero())) && a.terms_ == b.terms_;
  }

  /// Applies `fn` to every coefficient.
  template <class Fn>
  [[nodiscard]] DifferentialForm map_coefficients(Fn fn) const {
    DifferentialForm out(dim_, degree_);
    for (const auto& [I, c] : terms_) out.add(I, fn(c));
    return out;
  }

  [[nodiscard]] std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (const auto& [I, c] : terms_) {
      if (!s.empty()) s += " + ";
      s += "(" + c.to_string() + ")";
      if (I.degree() > 0) s += " " + I.to_string();
    }
    return s;
  }

  /// {d, k, terms: [{index: [...], coeff: "..."}]}
  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [I, c] : terms_) terms.push_back({{"index", I.axes()}, {"coeff", c.to_string()}});
    return {{"d", dim_}, {"k", degree_}, {"terms", terms}};
  }

 private:
  void check_same(const DifferentialForm& o) const {
    if (o.dim_ != dim_) throw DimensionMismatch("forms live in different dimensions");
    if (o.degree_ != degree_) throw DegreeError("cannot add forms of different degree");
  }

  int dim_;
  int degree_;
  TermMap terms_;
};

inline DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b) {
  if (a.dimension() != b.dimension()) throw DimensionMismatch("wedge of forms in different dimensions");
  const int d = a.dimension();
  DifferentialForm out(d, a.degree() + b.degree());
  if (a.degree() + b.degree() > d) return out;
  for (const auto& [I, f] : a.terms())
    for (const auto& [J, g] : b.terms()) {
      const int sign = MultiIndex::merge_sign(I, J);
      if (sign == 0) continue;
      ScalarExpr c = f * g;
      if (sign < 0) c = -c;
      out.add(MultiIndex::from_mask(I.mask() | J.mask()), c);
    }
  return out;
}

/// a^n (n-fold wedge power); a^0 is the constant 1.
inline DifferentialForm wedge_power(const DifferentialForm& a, int n) {
  DifferentialForm out = DifferentialForm::scalar(a.dimension(), ScalarExpr(1));
  for (int i = 0; i < n; ++i) out = wedge(out, a);
  return out;
}

inline DifferentialForm exterior_derivative(const DifferentialForm& a) {
  const int d = a.dimension();
  DifferentialForm out(d, a.degree() + 1);
  if (a.degree() + 1 > d) return out;
  for (const auto& [I, f] : a.terms())
    for (int axis = 1; axis <= d; ++axis) {
      if (I.contains(axis)) continue;
      ScalarExpr df = f.partial(axis);
      if (df.is_zero()) continue;
      const int sign = MultiIndex::merge_sign(MultiIndex::from_mask(MultiIndex::bit(axis)), I);
      out.add(MultiIndex::from_mask(I.mask() | MultiIndex::bit(axis)), sign > 0 ? df : -df);
    }
  return out;
}

inline DifferentialForm DifferentialForm::differential(int d, const ScalarExpr& f) {
  return exterior_derivative(scalar(d, f));
}

/// Contraction of v into the first slot of a.
inline DifferentialForm interior_product(const VectorFieldSym& v, const DifferentialForm& a) {
  if (v.dimension() != a.dimension()) throw DimensionMismatch("vector field and form dimensions differ");
  if (a.degree() == 0) throw DegreeError("interior product of a 0-form is undefined");
  DifferentialForm out(a.dimension(), a.degree() - 1);
  for (const auto& [I, f] : a.terms()) {
    int position = 0;
    for (int axis : I.axes()) {
      const ScalarExpr& vi = v[axis];
      if (!vi.is_zero()) {
        ScalarExpr c = vi * f;
        out.add(MultiIndex::from_mask(I.mask() & ~MultiIndex::bit(axis)), (position % 2 == 0) ? c : -c);
      }
      ++position;
    }
  }
  return out;
}

inline DifferentialForm hodge_star(const DifferentialForm& a) {
  const int d = a.dimension();
  DifferentialForm out(d, d - a.degree());
  if (a.degree() > d) return DifferentialForm(d, 0);
  for (const auto& [I, f] : a.terms()) {
    const MultiIndex Ic = I.complement(d);
    const int sign = MultiIndex::merge_sign(I, Ic);
    out.add(Ic, sign > 0 ? f : -f);
  }
  return out;
}

/// Cartan formula L_v a = i_v da + d i_v a.
inline DifferentialForm lie_derivative(const VectorFieldSym& v, const DifferentialForm& a) {
  if (v.dimension() != a.dimension()) throw DimensionMismatch("vector field and form dimensions differ");
  DifferentialForm out = a.degree() + 1 <= a.dimension() ? interior_product(v, exterior_derivative(a))
                                                           : DifferentialForm(a.dimension(), a.degree());
  if (a.degree() > 0) out += exterior_derivative(interior_product(v, a));
  return out;
}

/// Jet-degree range over all monomials of all coefficients.
struct JetDegreeRange {
  int min = 0;
  int max = 0;
  bool empty = true;  // the zero form has no terms
};

inline JetDegreeRange u_degree_classify(const DifferentialForm& a) {
  JetDegreeRange r;
  for (const auto& [I, c] : a.terms())
    for (const auto& [m, q] : c.terms()) {
      const int deg = m.jet_degree();
      if (r.empty) {
        r.min = r.max = deg;
        r.empty = false;
      } else {
        r.min = std::min(r.min, deg);
        r.max = std::max(r.max, deg);
      }
    }
  return r;
}

/// Numeric coefficient map of a form under the given bindings.
using NumericForm = std::map<MultiIndex, double>;

inline NumericForm evaluate(const DifferentialForm& a, const Bindings& b) {
  NumericForm out;
  for (const auto& [I, c] : a.terms()) out[I] = c.evaluate(b);
  return out;
}

/// Wedge of numeric coefficient maps.
inline NumericForm wedge(const NumericForm& a, const NumericForm& b) {
  NumericForm out;
  for (const auto& [I, x] : a)
    for (const auto& [J, y] : b) {
      const int s = MultiIndex::merge_sign(I, J);
      if (s != 0) out[MultiIndex::from_mask(I.mask() | J.mask())] += s * x * y;
    }
  return out;
}

/// A form with coefficients lowered to double precision for repeated evaluation.
/// Symbols are looked up in a flat slot array filled by the caller.
class CompiledForm {
 public:
  CompiledForm() = default;
  explicit CompiledForm(const DifferentialForm& a) : dim_(a.dimension()), degree_(a.degree()) {
    for (const auto& [I, c] : a.terms()) {
      Component comp{I, {}};
      for (const auto& [m, q] : c.terms()) {
        Term t{q.get_d(), {}};
        for (const auto& f : m.factors()) t.factors.push_back({slot_of(f.symbol), f.exponent});
        comp.terms.push_back(std::move(t));
      }
      components_.push_back(std::move(comp));
    }
  }

  [[nodiscard]] int dimension() const { return dim_; }
  [[nodiscard]] int degree() const { return degree_; }
  [[nodiscard]] const std::vector<Symbol>& symbols() const { return symbols_; }
  [[nodiscard]] std::size_t component_count() const { return components_.size(); }
  [[nodiscard]] MultiIndex index(std::size_t c) const { return components_[c].index; }

  /// Evaluates component coefficients given one value per entry of symbols().
  void evaluate(const std::vector<double>& slot_values, std::vector<double>& out) const {
    out.assign(components_.size(), 0.0);
    for (std::size_t c = 0; c < components_.size(); ++c) {
      double total = 0.0;
      for (const auto& t : components_[c].terms) {
        double v = t.coeff;
        for (const auto& [slot, e] : t.factors) {
          const double x = slot_values[slot];
          v *= e == 1 ? x : (e == 2 ? x * x : std::pow(x, e));
        }
        total += v;
      }
      out[c] = total;
    }
  }

  /// Slot values from bindings (for callers that do not fill slots directly).
  [[nodiscard]] std::vector<double> slots_from(const Bindings& b) const {
    std::vector<double> v;
    v.reserve(symbols_.size());
    for (Symbol s : symbols_) v.push_back(b.at(s));
    return v;
  }

 private:
  struct Term {
    double coeff;
    std::vector<std::pair<std::size_t, int>> factors;
  };
  struct Component {
    MultiIndex index;
    std::vector<Term> terms;
  };

  std::size_t slot_of(Symbol s) {
    for (std::size_t i = 0; i < symbols_.size(); ++i)
      if (symbols_[i] == s) return i;
    symbols_.push_back(s);
    return symbols_.size() - 1;
  }

  int dim_ = 0;
  int degree_ = 0;
  std::vector<Symbol> symbols_;
  std::vector<Component> components_;
};

/// Kernel of the skew matrix of a 2-form at a point.
struct TwoFormKernel {
  int dimension = 0;
  int rank = 0;
  int kernel_dimension = 0;
  Eigen::MatrixXd basis;  // d x kernel_dimension, orthonormal columns
};

inline Eigen::MatrixXd two_form_matrix(const NumericForm& a, int d) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d, d);
  for (const auto& [I, v] : a) {
    if (I.degree() != 2) throw DegreeError("expected a 2-form");
    const auto ax = I.axes();
    A(ax[0] - 1, ax[1] - 1) = v;
    A(ax[1] - 1, ax[0] - 1) = -v;
  }
  return A;
}

inline TwoFormKernel kernel_of_two_form(const DifferentialForm& a, const Bindings& b, double rel_tol = 1e-10) {
  if (a.degree() != 2) throw DegreeError("kernel_of_two_form needs a 2-form");
  const int d = a.dimension();
  const Eigen::MatrixXd A = two_form_matrix(evaluate(a, b), d);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? rel_tol * sv(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff && sv(i) > 0.0) ++rank;
  TwoFormKernel k;
  k.dimension = d;
  k.rank = rank;
  k.kernel_dimension = d - rank;
  k.basis = svd.matrixV().rightCols(d - rank);
  return k;
}

}  // namespace rotflow
