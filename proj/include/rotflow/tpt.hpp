#pragma once
// Taylor-Proudman constraint derivation: the fast-rotation limit of
// d i_u (Omega_R^k) -> 0, combined or split order by order (dominant balance),
// plus consistency checks and a reduced-model classifier.

#include <algorithm>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rotflow/form.hpp"
#include "rotflow/row_space.hpp"
#include "rotflow/spectral.hpp"

namespace rotflow {

enum class BalanceMode { Combined, DominantBalance };

inline std::string to_string(BalanceMode m) { return m == BalanceMode::Combined ? "combined" : "dominant_balance"; }
inline BalanceMode parse_balance(const std::string& s) {
  if (s == "combined") return BalanceMode::Combined;
  if (s == "dominant_balance" || s == "dominant") return BalanceMode::DominantBalance;
  throw InputError("unknown balance mode '" + s + "'");
}

inline bool is_rate(Symbol s) { return s.kind() == SymbolKind::Rate; }

/// Canonical form of a homogeneous linear relation in jet symbols:
/// common rate monomial removed, integer-primitive, and the smallest jet
/// symbol's leading coefficient positive.  Returns nullopt for zero.
inline std::optional<ScalarExpr> normalize_constraint(const ScalarExpr& e) {
  if (e.is_zero()) return std::nullopt;
  std::optional<Monomial> content;
  for (const auto& [m, c] : e.terms()) {
    if (m.jet_degree() != 1) throw Error("constraint is not linear in jet symbols: " + e.to_string());
    const Monomial rest = m.without([](Symbol s) { return s.is_jet(); });
    content = content ? Monomial::gcd(*content, rest) : rest;
  }
  mpz_class num_gcd = 0;
  mpz_class den_lcm = 1;
  for (const auto& [m, c] : e.terms()) {
    mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), c.get_num().get_mpz_t());
    mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), c.get_den().get_mpz_t());
  }
  ScalarExpr out;
  for (const auto& [m, c] : e.terms()) {
    Rational q = c * Rational(den_lcm) / Rational(num_gcd);
    q.canonicalize();
    out.add_term(*m.divided_by(*content), q);
  }
  // sign: smallest jet symbol, first monomial carrying it
  std::optional<Symbol> smallest;
  for (const auto& [m, c] : out.terms())
    for (const auto& f : m.factors())
      if (f.symbol.is_jet() && (!smallest || f.symbol < *smallest)) smallest = f.symbol;
  for (const auto& [m, c] : out.terms()) {
    if (m.exponent_of(*smallest) == 0) continue;
    if (c < 0) out *= Rational(-1);
    break;
  }
  return out;
}

/// Relation text in the familiar layout, e.g. "u_{1,1} + u_{2,2} = 0".
inline std::string relation_text(const ScalarExpr& e) {
  std::map<Symbol, ScalarExpr> by_jet;
  for (const auto& [m, c] : e.terms()) {
    Symbol jet;
    for (const auto& f : m.factors())
      if (f.symbol.is_jet()) jet = f.symbol;
    by_jet[jet].add_term(m.without([](Symbol s) { return s.is_jet(); }), c);
  }
  std::string out;
  for (const auto& [jet, coeff] : by_jet) {
    std::string term;
    bool negative = false;
    if (coeff.is_constant()) {
      Rational q = coeff.constant_term();
      negative = q < 0;
      if (abs(q) != 1) term = Rational(abs(q)).get_str() + "*";
    } else if (coeff.size() == 1) {
      Rational q = coeff.terms().begin()->second;
      negative = q < 0;
      if (abs(q) != 1) term = Rational(abs(q)).get_str() + "*";
      term += coeff.terms().begin()->first.to_string() + "*";
    } else {
      term = "(" + coeff.to_string() + ")*";
    }
    term += jet.name();
    if (out.empty()) {
      out = (negative ? "-" : "") + term;
    } else {
      out += (negative ? " - " : " + ") + term;
    }
  }
  return out + " = 0";
}

struct Constraint {
  ScalarExpr expr;      // normalized, linear in jets
  MultiIndex origin;    // basis form whose coefficient produced it
  int order_class = 0;  // epsilon exponent (lambda_i ~ eps^-o_i) of the balance that produced it

  [[nodiscard]] std::string text() const { return relation_text(expr); }

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json coeffs = nlohmann::json::object();
    for (const auto& [m, c] : expr.terms()) coeffs[m.to_string()] = c.get_str();
    return {{"coeffs", coeffs}, {"order_class", order_class}, {"origin_index", origin.axes()}};
  }
};

inline Constraint constraint_from_json(const nlohmann::json& j) {
  Constraint c;
  for (const auto& [k, v] : j.at("coeffs").items()) c.expr.add_term(parse_monomial(k), parse_rational(v.get<std::string>()));
  c.order_class = j.value("order_class", 0);
  if (j.contains("origin_index")) c.origin = MultiIndex::from_axes(j.at("origin_index").get<std::vector<int>>());
  return c;
}

struct ConstraintSet {
  RotationSpec spec{1, {}};
  int kelvin_order = 1;
  BalanceMode balance = BalanceMode::Combined;
  bool null_constraint = false;  // Omega_R^k vanished identically
  std::vector<Constraint> constraints;
  std::vector<std::string> notes;

  [[nodiscard]] int dimension() const { return spec.dimension(); }

  [[nodiscard]] std::vector<ScalarExpr> exprs() const {
    std::vector<ScalarExpr> v;
    for (const auto& c : constraints) v.push_back(c.expr);
    return v;
  }

  [[nodiscard]] RowSpace row_space() const {
    RowSpace rs;
    for (const auto& c : constraints) rs.add(c.expr);
    return rs;
  }

  /// Order-independent comparison of the normalized relations.
  [[nodiscard]] bool same_relations(const std::vector<ScalarExpr>& expected) const {
    std::vector<std::string> a;
    std::vector<std::string> b;
    for (const auto& c : constraints) a.push_back(c.expr.to_string());
    for (const auto& e : expected) {
      auto n = normalize_constraint(e);
      b.push_back(n ? n->to_string() : "0");
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
  }

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : constraints) arr.push_back(c.to_json());
    return arr;
  }

  [[nodiscard]] nlohmann::json to_json_with_metadata() const {
    return {{"spec", spec.to_json()},
            {"kelvin_order", kelvin_order},
            {"balance", to_string(balance)},
            {"null_constraint", null_constraint},
            {"constraints", to_json()},
            {"notes", notes}};
  }

  /// Aligned table: order class, origin, relation.
  [[nodiscard]] std::string text_table() const {
    std::ostringstream os;
    os << "# d=" << dimension() << " kelvin_order=" << kelvin_order << " balance=" << to_string(balance) << "\n";
    if (null_constraint) os << "# null constraint: Omega_R^" << kelvin_order << " vanishes identically\n";
    std::size_t w = 6;
    for (const auto& c : constraints) w = std::max(w, c.origin.to_string().size());
    os << "class  " << std::string("origin") << std::string(w - 6 + 2, ' ') << "relation\n";
    for (const auto& c : constraints) {
      std::string cls = std::to_string(c.order_class);
      os << cls << std::string(7 - std::min<std::size_t>(cls.size(), 6), ' ') << c.origin.to_string()
         << std::string(w - c.origin.to_string().size() + 2, ' ') << c.text() << "\n";
    }
    for (const auto& n : notes) os << "# note: " << n << "\n";
    return os.str();
  }
};

inline ConstraintSet constraint_set_from_json(const nlohmann::json& arr, const RotationSpec& spec, int k, BalanceMode mode) {
  ConstraintSet cs;
  cs.spec = spec;
  cs.kelvin_order = k;
  cs.balance = mode;
  for (const auto& j : arr) cs.constraints.push_back(constraint_from_json(j));
  return cs;
}

/// Result of d i_u (Omega_R^k).
struct CoriolisClosure {
  DifferentialForm form;
  bool null_constraint = false;
  std::string warning;
};

inline CoriolisClosure coriolis_closure(const RotationSpec& spec, int k) {
  const int d = spec.dimension();
  if (k < 1) throw InputError("Kelvin order must be >= 1");
  CoriolisClosure out{DifferentialForm(d, std::min(2 * k, d)), false, {}};
  if (2 * k > d) {
    out.null_constraint = true;
    out.warning = "Omega_R^" + std::to_string(k) + " vanishes: 2k exceeds d";
    return out;
  }
  const DifferentialForm omega_k = wedge_power(rotation_two_form(spec), k);
  if (omega_k.is_zero()) {
    out.form = DifferentialForm(d, 2 * k);
    out.null_constraint = true;
    out.warning = "Omega_R^" + std::to_string(k) + " vanishes: fewer than k active rotation planes";
    return out;
  }
  out.form = exterior_derivative(interior_product(VectorFieldSym::velocity(d), omega_k));
  return out;
}

/// Sum of o_i * (exponent of lambda_i): the power of 1/epsilon carried by a monomial.
inline int epsilon_power(const Monomial& m, const RotationSpec& spec) {
  int p = 0;
  for (const auto& f : m.factors())
    if (is_rate(f.symbol)) p += spec.planes().at(static_cast<std::size_t>(f.symbol.i() - 1)).order_class * f.exponent;
  return p;
}

/// The symbolic spec used for derivations: rates become lambda_i, class-0 planes vanish.
inline RotationSpec derivation_spec(const RotationSpec& spec) {
  auto planes = spec.planes();
  for (auto& p : planes) {
    const bool active = !p.rate || *p.rate != 0;
    if (!active) p.order_class = 0;
    p.rate = p.order_class == 0 ? std::optional<Rational>(Rational(0)) : std::nullopt;
  }
  return {spec.dimension(), std::move(planes)};
}

inline ConstraintSet derive_constraints(const RotationSpec& spec, int k, BalanceMode balance) {
  const RotationSpec sym = derivation_spec(spec);
  bool any_fast = false;
  for (std::size_t i = 0; i < sym.plane_count(); ++i) any_fast = any_fast || sym.planes()[i].order_class > 0;
  if (!any_fast) throw InputError("no fast rotation plane: at least one positive order class is required");
  if (k > spec.dimension() / 2) throw InputError("Kelvin order capped at floor(d/2)");

  ConstraintSet cs;
  cs.spec = sym;
  cs.kelvin_order = k;
  cs.balance = balance;
  const CoriolisClosure closure = coriolis_closure(sym, k);
  cs.null_constraint = closure.null_constraint;
  if (!closure.warning.empty()) cs.notes.push_back(closure.warning);

  std::vector<Constraint> raw;
  for (const auto& [I, coeff] : closure.form.terms()) {
    if (balance == BalanceMode::Combined) {
      int lead = 0;
      for (const auto& [m, c] : coeff.terms()) lead = std::max(lead, epsilon_power(m, sym));
      if (auto n = normalize_constraint(coeff)) raw.push_back({*n, I, lead});
      continue;
    }
    std::map<int, ScalarExpr, std::greater<>> graded;
    for (const auto& [m, c] : coeff.terms()) graded[epsilon_power(m, sym)].add_term(m, c);
    for (const auto& [p, piece] : graded)
      if (auto n = normalize_constraint(piece)) raw.push_back({*n, I, p});
  }

  RowSpace rs;
  for (auto& c : raw)
    if (rs.add(c.expr)) cs.constraints.push_back(std::move(c));

  if (spec.dimension() == 5 && k == 2 && sym.active_plane_count() == 2) {
    cs.notes.push_back(
        "k=2 in E5: the compact form sum_i u_{1,i} = 0 is not what the expansion gives; it "
        "yields the individual vanishings u_{1,5} = u_{2,5} = u_{3,5} = u_{4,5} = 0 plus sum_{i<=4} u_{i,i} = 0");
  }
  return cs;
}

/// Exact per-monomial substitution of rates by rationals (e.g. lambda_1 -> r lambda_2).
inline ConstraintSet substitute_rates(const ConstraintSet& cs, const std::map<int, ScalarExpr>& values) {
  ConstraintSet out = cs;
  out.constraints.clear();
  RowSpace rs;
  for (const auto& c : cs.constraints) {
    ScalarExpr e = c.expr.substitute([&](Symbol s) -> std::optional<ScalarExpr> {
      if (!is_rate(s)) return std::nullopt;
      if (auto it = values.find(s.i()); it != values.end()) return it->second;
      return std::nullopt;
    });
    if (auto n = normalize_constraint(e); n && rs.add(*n)) out.constraints.push_back({*n, c.origin, c.order_class});
  }
  return out;
}

/// Numeric rates of the spec substituted into a symbolic set.
inline ConstraintSet with_numeric_rates(const ConstraintSet& cs, const RotationSpec& numeric) {
  std::map<int, ScalarExpr> values;
  for (std::size_t i = 0; i < numeric.plane_count(); ++i)
    if (numeric.planes()[i].rate) values[static_cast<int>(i) + 1] = ScalarExpr(*numeric.planes()[i].rate);
  return substitute_rates(cs, values);
}

struct RescaleResult {
  ConstraintSet set;        // lambda_1 = r lambda_2 substituted
  ConstraintSet reference;  // r = 1 set mapped through x'_i = sqrt(r) x_i on the first plane
  bool equivalent = false;
};

/// Rescaling of a two-plane combined set by lambda_1 = r lambda_2, checked
/// against the unit-ratio set under the coordinate stretch of plane 1.
inline RescaleResult rescale_rates(const ConstraintSet& cs, const Rational& r) {
  if (r <= 0) throw InputError("rate ratio must be positive");
  if (cs.balance != BalanceMode::Combined) throw InputError("rescale_rates needs a combined-mode set");
  if (cs.spec.plane_count() != 2) throw InputError("rescale_rates needs exactly two planes");

  const ScalarExpr lam2(Symbol::rate(2));
  RescaleResult out{substitute_rates(cs, {{1, ScalarExpr(r) * lam2}}), substitute_rates(cs, {{1, lam2}}), false};

  const auto& p1 = cs.spec.planes()[0];
  auto stretched = [&](int axis) { return axis == p1.p || axis == p1.q ? 1 : 0; };
  // u'_{i,j} = r^{(s_i - s_j)/2} u_{i,j}; rows are scaled to integer powers of r.
  ConstraintSet mapped = out.reference;
  mapped.constraints.clear();
  bool representable = true;
  for (const auto& c : out.reference.constraints) {
    std::vector<std::pair<Monomial, std::pair<Rational, int>>> terms;
    std::set<int> parities;
    int min_half = 1 << 20;
    for (const auto& [m, q] : c.expr.terms()) {
      int half = 0;
      for (const auto& f : m.factors()) {
        if (f.symbol.kind() == SymbolKind::Jet1) half += stretched(f.symbol.i()) - stretched(f.symbol.j());
        if (f.symbol.kind() == SymbolKind::Jet0) half += stretched(f.symbol.i());
      }
      terms.push_back({m, {q, half}});
      parities.insert(((half % 2) + 2) % 2);
      min_half = std::min(min_half, half);
    }
    if (parities.size() > 1) {
      representable = false;
      continue;
    }
    ScalarExpr e;
    for (const auto& [m, qh] : terms) {
      Rational factor = 1;
      for (int i = 0; i < (qh.second - min_half) / 2; ++i) factor *= r;
      e.add_term(m, qh.first * factor);
    }
    if (auto n = normalize_constraint(e)) mapped.constraints.push_back({*n, c.origin, c.order_class});
  }
  out.reference = mapped;
  const RowSpace a = out.set.row_space();
  const RowSpace b = mapped.row_space();
  out.equivalent = representable && a.rank() == b.rank() && a.contains_all(mapped.exprs()) && b.contains_all(out.set.exprs());
  return out;
}

struct LeibnizCheck {
  bool holds = false;
  DifferentialForm residual;
};

/// d i_u(Omega^k) - k (d i_u Omega) ^ Omega^{k-1}, which must vanish.
inline LeibnizCheck verify_leibniz_reduction(const RotationSpec& spec, int k) {
  const int d = spec.dimension();
  if (k < 1 || 2 * k > d) throw InputError("verify_leibniz_reduction needs 1 <= k and 2k <= d");
  const DifferentialForm omega = rotation_two_form(spec);
  const VectorFieldSym u = VectorFieldSym::velocity(d);
  const DifferentialForm lhs = exterior_derivative(interior_product(u, wedge_power(omega, k)));
  const DifferentialForm first = exterior_derivative(interior_product(u, omega));
  DifferentialForm rhs = wedge(first, wedge_power(omega, k - 1)) * ScalarExpr(k);
  DifferentialForm res = lhs - rhs;
  return {res.is_zero(), res};
}

struct CorrectionDegree {
  JetDegreeRange correction;  // jet degrees of L_u(dU ^ dU_R)
  JetDegreeRange leading;     // jet degrees of d i_u Omega_R
  bool quadratic_or_higher = false;
};

inline CorrectionDegree higher_order_correction_degree(const RotationSpec& spec) {
  const int d = spec.dimension();
  if (d < 4) throw InputError("higher-order correction needs d >= 4");
  const VectorFieldSym u = VectorFieldSym::velocity(d);
  const DifferentialForm dU = exterior_derivative(DifferentialForm::velocity_one_form(d));
  const DifferentialForm dUR = exterior_derivative(rotating_velocity_form(spec));
  CorrectionDegree out;
  out.correction = u_degree_classify(lie_derivative(u, wedge(dU, dUR)));
  out.leading = u_degree_classify(exterior_derivative(interior_product(u, rotation_two_form(spec))));
  out.quadratic_or_higher = !out.correction.empty && out.correction.min >= 2;
  if (out.correction.empty) out.quadratic_or_higher = true;
  return out;
}

// ---------------------------------------------------------------------------
// Reduced-model classification

struct ComponentReport {
  int component = 0;
  std::vector<int> cylinder_axes;                 // j with u_{i,j} = 0 forced
  std::optional<std::pair<int, int>> plane_pair;  // in-plane incompressibility partner
  bool unconstrained = false;
  bool passive_scalar = false;

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json j = {{"component", component}, {"cylinder_axes", cylinder_axes}, {"unconstrained", unconstrained},
                        {"passive_scalar", passive_scalar}};
    j["plane_pair"] = plane_pair ? nlohmann::json({plane_pair->first, plane_pair->second}) : nlohmann::json(nullptr);
    return j;
  }
};

struct ReductionReport {
  std::vector<ComponentReport> components;
  std::vector<Constraint> plane_relations;
  std::vector<Constraint> appended;  // relations added by the incompressibility split
  ConstraintSet augmented;           // the constraint set including `appended`
  std::string structure_tag;
  std::string pressure_coupling;
  std::string passivity_verdict;
  std::string justification;

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : components) comps.push_back(c.to_json());
    nlohmann::json planes = nlohmann::json::array();
    for (const auto& c : plane_relations) planes.push_back(c.text());
    nlohmann::json app = nlohmann::json::array();
    for (const auto& c : appended) app.push_back(c.text());
    return {{"components", comps},           {"plane_relations", planes},
            {"appended", app},               {"structure_tag", structure_tag},
            {"pressure_coupling", pressure_coupling}, {"passivity_verdict", passivity_verdict},
            {"justification", justification}};
  }

  [[nodiscard]] std::string prose() const {
    std::ostringstream os;
    os << "structure: " << structure_tag << "\n";
    for (const auto& c : components) {
      os << "  u_" << c.component << ": ";
      if (c.unconstrained) {
        os << "no TPT constraint";
      } else {
        if (!c.cylinder_axes.empty()) {
          os << "independent of";
          for (int a : c.cylinder_axes) os << " x_" << a;
        }
        if (c.plane_pair) {
          if (!c.cylinder_axes.empty()) os << "; ";
          os << "incompressible in plane (" << c.plane_pair->first << "," << c.plane_pair->second << ")";
        }
        if (c.cylinder_axes.empty() && !c.plane_pair) os << "coupled relations only";
      }
      if (c.passive_scalar) os << " [passive scalar]";
      os << "\n";
    }
    std::vector<int> free;
    for (const auto& c : components)
      if (c.unconstrained) free.push_back(c.component);
    if (!free.empty()) {
      os << "There is no TPT constraint on";
      for (std::size_t i = 0; i < free.size(); ++i) os << (i == 0 ? " " : (i + 1 == free.size() ? " nor " : ", ")) << "u_" << free[i];
      os << "\n";
    }
    for (const auto& a : appended) os << "incompressibility split adds: " << a.text() << "\n";
    os << "pressure coupling: " << pressure_coupling << "\n";
    os << "verdict: " << passivity_verdict << "\n";
    os << "  " << justification << "\n";
    return os.str();
  }
};

namespace detail {

inline std::string count_word(std::size_t n) {
  static const char* words[] = {"zero", "one", "two", "three", "four", "five", "six", "seven", "eight"};
  return n < 9 ? words[n] : std::to_string(n);
}

}  // namespace detail

inline ReductionReport classify_reduction(const ConstraintSet& cs, bool incompressible) {
  if (cs.kelvin_order != 1) throw InputError("classify_reduction needs a first-order (k = 1) constraint set");
  for (const auto& c : cs.constraints)
    for (const auto& [m, q] : c.expr.terms())
      if (m.jet_degree() != 1 || m.degree_if([](Symbol s) { return s.kind() == SymbolKind::Jet1; }) != 1)
        throw InputError("malformed constraint set: relations must be linear in first jets");

  const RotationSpec& spec = cs.spec;
  const int d = spec.dimension();
  ReductionReport rep;
  rep.augmented = cs;

  std::vector<std::size_t> fast;
  for (std::size_t i = 0; i < spec.plane_count(); ++i)
    if (spec.plane_fast(i)) fast.push_back(i);
  std::uint32_t plane_axes = 0;
  for (std::size_t i : fast) plane_axes |= MultiIndex::bit(spec.planes()[i].p) | MultiIndex::bit(spec.planes()[i].q);
  std::vector<int> vertical;
  for (int a = 1; a <= d; ++a)
    if (!(plane_axes & MultiIndex::bit(a))) vertical.push_back(a);

  if (incompressible) {
    ScalarExpr rest;
    for (int a : vertical) rest += ScalarExpr(Symbol::jet(a, a));
    if (auto n = normalize_constraint(rest)) {
      Constraint c{*n, MultiIndex{}, 0};
      rep.appended.push_back(c);
      RowSpace rs = rep.augmented.row_space();
      if (rs.add(c.expr)) rep.augmented.constraints.push_back(c);
    }
  }
  const RowSpace rs = rep.augmented.row_space();

  for (std::size_t i : fast) {
    const auto& pl = spec.planes()[i];
    ScalarExpr rel = ScalarExpr(Symbol::jet(pl.p, pl.p)) + ScalarExpr(Symbol::jet(pl.q, pl.q));
    if (rs.contains(rel)) rep.plane_relations.push_back({*normalize_constraint(rel), MultiIndex{pl.p, pl.q}, pl.order_class});
  }

  for (int i = 1; i <= d; ++i) {
    ComponentReport cr;
    cr.component = i;
    for (int j = 1; j <= d; ++j)
      if (rs.contains(ScalarExpr(Symbol::jet(i, j)))) cr.cylinder_axes.push_back(j);
    for (std::size_t pi : fast) {
      const auto& pl = spec.planes()[pi];
      if (i == pl.p || i == pl.q) {
        ScalarExpr rel = ScalarExpr(Symbol::jet(pl.p, pl.p)) + ScalarExpr(Symbol::jet(pl.q, pl.q));
        if (rs.contains(rel)) cr.plane_pair = std::make_pair(pl.p, pl.q);
      }
    }
    bool mentioned = false;
    for (const auto& c : cs.constraints)
      mentioned = mentioned || c.expr.mentions([&](Symbol s) { return s.kind() == SymbolKind::Jet1 && s.i() == i; });
    cr.unconstrained = !mentioned;
    rep.components.push_back(cr);
  }

  // class groups among fast planes (combined mode merges them into one)
  std::map<int, std::size_t> groups;
  for (std::size_t i : fast) ++groups[cs.balance == BalanceMode::Combined ? 1 : spec.planes()[i].order_class];
  const std::size_t nf = fast.size();
  const std::size_t z = vertical.size();
  std::ostringstream tag;
  std::string pressure = "undetermined";

  const bool single_passive = z == 1 && incompressible && nf >= 2;
  if (single_passive) rep.components[static_cast<std::size_t>(vertical[0] - 1)].passive_scalar = true;
  const std::string scalar_name = z == 1 ? "u" + std::to_string(vertical[0]) : "";

  if (nf == 1) {
    if (d == 3) {
      tag << "2D core + vertical component";
    } else {
      tag << "2D-2C horizontal core, " << z << "-component vertical, coupling via pressure undetermined";
    }
  } else if (groups.size() == 1) {
    if (z == 0) {
      tag << 2 * nf << "D coupled core, no simple reduced model";
    } else if (z == 1) {
      tag << 2 * nf << "D horizontal core + " << scalar_name << (incompressible ? " passive scalar" : " scalar (passivity needs incompressibility)");
    } else {
      tag << 2 * nf << "D horizontal core, " << z << "-component vertical, coupling via pressure undetermined";
    }
  } else {
    bool all_single = std::all_of(groups.begin(), groups.end(), [](const auto& g) { return g.second == 1; });
    if (all_single) {
      tag << detail::count_word(groups.size()) << " independent 2D cores";
    } else {
      tag << detail::count_word(groups.size()) << " independent cores (";
      bool first = true;
      for (auto it = groups.rbegin(); it != groups.rend(); ++it) {
        tag << (first ? "" : ", ") << 2 * it->second << "D";
        first = false;
      }
      tag << ")";
    }
    if (z == 0) {
      tag << ", separated pressure P = ";
      for (std::size_t g = 1; g <= groups.size(); ++g) tag << (g > 1 ? " + " : "") << "P" << g;
      pressure = "separated";
    } else if (z == 1) {
      tag << " + " << scalar_name << (incompressible ? " passive scalar" : " scalar (passivity needs incompressibility)");
      if (incompressible) pressure = "separated";
    } else {
      tag << ", " << z << "-component vertical, coupling via pressure undetermined";
    }
  }
  rep.structure_tag = tag.str();
  rep.pressure_coupling = pressure;
  rep.passivity_verdict = "no 3D passive scalar attainable";
  rep.justification =
      "cylinder conditions are forced only on components inside fast rotation planes; components along axes outside "
      "every fast plane receive no relation, so at most one non-rotating component (odd d with all planes fast) can "
      "decouple as a scalar, never a three-component group";
  return rep;
}

}  // namespace rotflow
