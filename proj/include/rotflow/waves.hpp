#pragma once
// Inertial-wave normal modes of the linearized rotating-frame Euler system:
// matrix assembly, exact dispersion polynomial, roots, branch labels,
// nullspaces and the vortical-mode/constraint consistency check.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "rotflow/spectral.hpp"
#include "rotflow/tpt.hpp"

namespace rotflow {

class IllConditioned : public Error {
 public:
  using Error::Error;
};

inline constexpr int kMaxWaveDimension = 10;

/// (d+1)x(d+1) system  i w u_i + 2 (i_u Omega_R)_i + i k_i Pi = 0,  k.u = 0.
class NormalModeMatrix {
 public:
  NormalModeMatrix(const RotationSpec& spec, std::vector<Rational> k) : spec_(spec), k_(std::move(k)) {
    const int d = spec.dimension();
    if (d > kMaxWaveDimension) throw InputError("dispersion limited to d <= " + std::to_string(kMaxWaveDimension));
    if (static_cast<int>(k_.size()) != d) throw DimensionMismatch("wavevector length must equal d");
    if (std::all_of(k_.begin(), k_.end(), [](const Rational& q) { return q == 0; })) throw InputError("zero wavevector");
    if (!spec.is_numeric()) throw InputError("dispersion needs numeric rates");
    b_.assign(static_cast<std::size_t>(d * d), Rational(0));
    for (std::size_t i = 0; i < spec.plane_count(); ++i) {
      const auto& pl = spec.planes()[i];
      const Rational two_l = 2 * *pl.rate;
      coupling(pl.p, pl.q) = -two_l;
      coupling(pl.q, pl.p) = two_l;
    }
  }

  [[nodiscard]] int dimension() const { return spec_.dimension(); }
  [[nodiscard]] const RotationSpec& spec() const { return spec_; }
  [[nodiscard]] const std::vector<Rational>& wavevector() const { return k_; }

  /// Rotation coupling B_{ij} (1-based): -2 lambda above, +2 lambda below the diagonal of each plane block.
  [[nodiscard]] const Rational& coupling(int i, int j) const { return b_[idx(i, j)]; }

  /// Numeric M(w).
  [[nodiscard]] Eigen::MatrixXcd at(std::complex<double> w) const {
    const int d = dimension();
    const std::complex<double> I(0, 1);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d + 1, d + 1);
    for (int i = 1; i <= d; ++i) {
      for (int j = 1; j <= d; ++j) m(i - 1, j - 1) = coupling(i, j).get_d();
      m(i - 1, i - 1) += I * w;
      m(i - 1, d) = I * k_[static_cast<std::size_t>(i - 1)].get_d();
      m(d, i - 1) = k_[static_cast<std::size_t>(i - 1)].get_d();
    }
    return m;
  }

  /// Real bordered matrix [[s I + B, k], [k^T, 0]] with s = i w; det M(w) = i det of this.
  [[nodiscard]] std::vector<std::vector<Rational>> bordered(const Rational& s) const {
    const int d = dimension();
    std::vector<std::vector<Rational>> a(static_cast<std::size_t>(d + 1), std::vector<Rational>(static_cast<std::size_t>(d + 1), Rational(0)));
    for (int i = 1; i <= d; ++i) {
      for (int j = 1; j <= d; ++j) a[i - 1][j - 1] = coupling(i, j);
      a[i - 1][i - 1] += s;
      a[i - 1][d] = k_[static_cast<std::size_t>(i - 1)];
      a[d][i - 1] = k_[static_cast<std::size_t>(i - 1)];
    }
    return a;
  }

  [[nodiscard]] std::string entry_text(int r, int c) const {
    const int d = dimension();
    if (r == d && c == d) return "0";
    if (r == d) return k_[static_cast<std::size_t>(c)].get_str();
    if (c == d) return "i*" + k_[static_cast<std::size_t>(r)].get_str();
    if (r == c) return "i*w";
    const Rational& b = coupling(r + 1, c + 1);
    return b == 0 ? "0" : b.get_str();
  }

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r <= dimension(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c <= dimension(); ++c) row.push_back(entry_text(r, c));
      rows.push_back(row);
    }
    nlohmann::json k = nlohmann::json::array();
    for (const auto& q : k_) k.push_back(q.get_str());
    return {{"d", dimension()}, {"k", k}, {"matrix", rows}};
  }

 private:
  [[nodiscard]] std::size_t idx(int i, int j) const { return static_cast<std::size_t>((i - 1) * dimension() + (j - 1)); }
  Rational& coupling(int i, int j) { return b_[idx(i, j)]; }

  RotationSpec spec_;
  std::vector<Rational> k_;
  std::vector<Rational> b_;
};

namespace detail {

/// Exact determinant by Gaussian elimination over Q.
inline Rational determinant(std::vector<std::vector<Rational>> a) {
  const std::size_t n = a.size();
  Rational det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && a[piv][c] == 0) ++piv;
    if (piv == n) return 0;
    if (piv != c) {
      std::swap(a[piv], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      if (a[r][c] == 0) continue;
      const Rational f = a[r][c] / a[c][c];
      for (std::size_t j = c; j < n; ++j) a[r][j] -= f * a[c][j];
    }
  }
  return det;
}

/// Exact inverse (Gauss-Jordan); the matrix must be nonsingular.
inline std::vector<std::vector<Rational>> inverse(std::vector<std::vector<Rational>> a) {
  const std::size_t n = a.size();
  std::vector<std::vector<Rational>> inv(n, std::vector<Rational>(n, Rational(0)));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && a[piv][c] == 0) ++piv;
    if (piv == n) throw Error("singular matrix in exact inverse");
    std::swap(a[piv], a[c]);
    std::swap(inv[piv], inv[c]);
    const Rational p = a[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      a[c][j] /= p;
      inv[c][j] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c] == 0) continue;
      const Rational f = a[r][c];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

/// Coefficients (ascending) of the polynomial through (xs[i], ys[i]), Newton form expanded.
inline std::vector<Rational> interpolate(const std::vector<Rational>& xs, const std::vector<Rational>& ys) {
  const std::size_t n = xs.size();
  std::vector<Rational> dd = ys;
  for (std::size_t lvl = 1; lvl < n; ++lvl)
    for (std::size_t i = n - 1; i >= lvl; --i) dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - lvl]);
  std::vector<Rational> poly(n, Rational(0));
  for (std::size_t i = n; i-- > 0;) {
    // poly = poly * (x - xs[i]) + dd[i]
    std::vector<Rational> next(n, Rational(0));
    for (std::size_t j = 0; j + 1 < n; ++j) {
      next[j + 1] += poly[j];
      next[j] -= poly[j] * xs[i];
    }
    next[0] += dd[i];
    poly = std::move(next);
  }
  return poly;
}

}  // namespace detail

/// D(s) = det [[s I + B, k], [k^T, 0]] exactly, ascending coefficients in s.
inline std::vector<Rational> bordered_determinant_polynomial(const NormalModeMatrix& m) {
  const int d = m.dimension();
  std::vector<Rational> xs;
  std::vector<Rational> ys;
  for (int i = 0; i < d; ++i) {
    xs.emplace_back(i);
    ys.push_back(detail::determinant(m.bordered(Rational(i))));
  }
  return detail::interpolate(xs, ys);
}

/// Real dispersion polynomial P(w), ascending coefficients, with det M(w) = i^d P(w) up to sign;
/// normalized so the leading coefficient is positive.
inline std::vector<Rational> dispersion_polynomial(const NormalModeMatrix& m) {
  const int d = m.dimension();
  const std::vector<Rational> ds = bordered_determinant_polynomial(m);
  std::vector<Rational> p(ds.size(), Rational(0));
  for (std::size_t n = 0; n < ds.size(); ++n) {
    if (ds[n] == 0) continue;
    const int shift = static_cast<int>(n) - (d - 1);
    if (shift % 2 != 0) throw Error("dispersion determinant lost its parity structure");
    // s^n = i^n w^n and i^n = i^(d-1) * i^shift with i^shift = (-1)^(shift/2)
    p[n] = ((shift / 2) % 2 == 0) ? ds[n] : Rational(-ds[n]);
  }
  while (!p.empty() && p.back() == 0) p.pop_back();
  if (!p.empty() && p.back() < 0)
    for (auto& c : p) c = -c;
  return p;
}

/// Multiplicity of w = 0 that persists for every wavevector (exact, symbolic in k).
/// Uses D(s, k) = -k^T adj(s I + B) k: the s^n coefficient vanishes for all k
/// iff the symmetric part of the s^n coefficient of adj(s I + B) is zero.
inline int generic_zero_multiplicity(const RotationSpec& spec) {
  const int d = spec.dimension();
  std::vector<Rational> kk(static_cast<std::size_t>(d), Rational(0));
  kk[0] = 1;
  const NormalModeMatrix m(spec, kk);
  std::vector<Rational> xs;
  std::vector<std::vector<std::vector<Rational>>> adj;
  for (int t = 1; t <= d; ++t) {
    std::vector<std::vector<Rational>> a(static_cast<std::size_t>(d), std::vector<Rational>(static_cast<std::size_t>(d)));
    for (int i = 1; i <= d; ++i)
      for (int j = 1; j <= d; ++j) a[i - 1][j - 1] = m.coupling(i, j) + (i == j ? Rational(t) : Rational(0));
    const Rational det = detail::determinant(a);
    auto inv = detail::inverse(a);
    for (auto& row : inv)
      for (auto& v : row) v *= det;
    xs.emplace_back(t);
    adj.push_back(std::move(inv));
  }
  int lowest = d;
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      std::vector<Rational> ys;
      for (const auto& a : adj) ys.push_back(a[i][j] + a[j][i]);
      const auto poly = detail::interpolate(xs, ys);
      for (int n = 0; n < lowest && n < static_cast<int>(poly.size()); ++n)
        if (poly[static_cast<std::size_t>(n)] != 0) {
          lowest = n;
          break;
        }
    }
  }
  return lowest;
}

enum class Branch { NaturalVortical, ImposedVortical, Wave };

inline std::string to_string(Branch b) {
  switch (b) {
    case Branch::NaturalVortical: return "natural_vortical";
    case Branch::ImposedVortical: return "imposed_vortical";
    case Branch::Wave: return "wave";
  }
  return "?";
}

struct DispersionRoot {
  double value = 0;
  int multiplicity = 1;
  Branch branch = Branch::Wave;
  std::vector<Eigen::VectorXcd> nullspace;  // columns (u_1..u_d, Pi)
  double nullspace_residual = 0;
};

struct DispersionResult {
  std::vector<Rational> polynomial;  // ascending in w
  std::vector<DispersionRoot> roots;
  int zero_multiplicity = 0;
  int generic_zero_multiplicity = 0;

  [[nodiscard]] int degree() const { return static_cast<int>(polynomial.size()) - 1; }

  [[nodiscard]] std::vector<double> nonzero_roots() const {
    std::vector<double> v;
    for (const auto& r : roots)
      if (r.branch == Branch::Wave)
        for (int i = 0; i < r.multiplicity; ++i) v.push_back(r.value);
    std::sort(v.begin(), v.end());
    return v;
  }

  [[nodiscard]] std::vector<const DispersionRoot*> vortical() const {
    std::vector<const DispersionRoot*> v;
    for (const auto& r : roots)
      if (r.branch != Branch::Wave) v.push_back(&r);
    return v;
  }

  [[nodiscard]] bool has(Branch b) const {
    return std::any_of(roots.begin(), roots.end(), [&](const DispersionRoot& r) { return r.branch == b; });
  }

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json poly = nlohmann::json::array();
    for (const auto& c : polynomial) poly.push_back(c.get_str());
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : roots)
      rs.push_back({{"root", r.value}, {"multiplicity", r.multiplicity}, {"branch", to_string(r.branch)},
                    {"nullspace_dimension", r.nullspace.size()}, {"nullspace_residual", r.nullspace_residual}});
    return {{"polynomial", poly}, {"roots", rs}};
  }
};

struct Nullspace {
  std::vector<Eigen::VectorXcd> basis;
  double residual = 0;
};

/// SVD nullspace with relative threshold.
inline Nullspace nullspace_at(const NormalModeMatrix& m, double w, double rel_tol = 1e-10) {
  const Eigen::MatrixXcd a = m.at({w, 0.0});
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  Nullspace out;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > rel_tol * smax) continue;
    Eigen::VectorXcd v = svd.matrixV().col(i);
    out.residual = std::max(out.residual, (a * v).cwiseAbs().maxCoeff());
    out.basis.push_back(std::move(v));
  }
  if (out.basis.empty()) {
    std::ostringstream os;
    os << "no nullspace at w = " << w << " (condition estimate " << smax / sv(sv.size() - 1) << ")";
    throw IllConditioned(os.str());
  }
  return out;
}

namespace detail {

inline long double horner(const std::vector<long double>& c, long double x) {
  long double v = 0;
  for (std::size_t i = c.size(); i-- > 0;) v = v * x + c[i];
  return v;
}

/// Real nonnegative roots of a polynomial in s (ascending coefficients), Newton-polished.
inline std::vector<double> real_roots_in_s(const std::vector<Rational>& q) {
  const std::size_t n = q.size() - 1;
  std::vector<long double> c;
  for (const auto& r : q) c.push_back(static_cast<long double>(r.get_d()));
  if (n == 0) return {};
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const double lead = q.back().get_d();
  for (std::size_t i = 0; i < n; ++i) comp(0, static_cast<Eigen::Index>(i)) = -q[n - 1 - i].get_d() / lead;
  for (std::size_t i = 1; i < n; ++i) comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1;
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  std::vector<long double> dc(n);
  for (std::size_t i = 1; i <= n; ++i) dc[i - 1] = c[i] * static_cast<long double>(i);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    long double s = es.eigenvalues()(i).real();
    for (int it = 0; it < 50; ++it) {
      const long double f = horner(c, s);
      const long double fp = horner(dc, s);
      if (fp == 0) break;
      const long double step = f / fp;
      const long double next = s - step;
      if (std::fabs(horner(c, next)) >= std::fabs(f)) break;
      s = next;
    }
    out.push_back(static_cast<double>(std::max<long double>(s, 0)));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// Roots of the dispersion polynomial with branch labels and nullspaces.
inline DispersionResult dispersion_roots(const NormalModeMatrix& m, bool with_nullspace = true) {
  DispersionResult res;
  res.polynomial = dispersion_polynomial(m);
  std::size_t m0 = 0;
  while (m0 < res.polynomial.size() && res.polynomial[m0] == 0) ++m0;
  res.zero_multiplicity = static_cast<int>(m0);
  res.generic_zero_multiplicity = std::min<int>(generic_zero_multiplicity(m.spec()), res.zero_multiplicity);

  // remaining factor is even in w: substitute s = w^2
  std::vector<Rational> q;
  for (std::size_t n = m0; n < res.polynomial.size(); n += 2) q.push_back(res.polynomial[n]);
  const std::vector<double> s_roots = detail::real_roots_in_s(q);

  auto push = [&](double w, int mult, Branch b) {
    DispersionRoot r;
    r.value = w;
    r.multiplicity = mult;
    r.branch = b;
    if (with_nullspace) {
      Nullspace ns = nullspace_at(m, w);
      r.nullspace = std::move(ns.basis);
      r.nullspace_residual = ns.residual;
    }
    res.roots.push_back(std::move(r));
  };
  if (res.generic_zero_multiplicity > 0) push(0.0, res.generic_zero_multiplicity, Branch::NaturalVortical);
  if (res.zero_multiplicity > res.generic_zero_multiplicity)
    push(0.0, res.zero_multiplicity - res.generic_zero_multiplicity, Branch::ImposedVortical);
  for (std::size_t i = 0; i < s_roots.size();) {
    std::size_t j = i + 1;
    while (j < s_roots.size() && std::fabs(s_roots[j] - s_roots[i]) <= 1e-8 * std::max(1.0, s_roots[i])) ++j;
    const double w = std::sqrt(s_roots[i]);
    push(w, static_cast<int>(j - i), Branch::Wave);
    push(-w, static_cast<int>(j - i), Branch::Wave);
    i = j;
  }
  std::stable_sort(res.roots.begin(), res.roots.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
  return res;
}

/// Positive frequency 2 sqrt(l2^2 (k1^2+k2^2) + l1^2 (k3^2+k4^2)) / |k| for double rotation in E4.
inline double e4_reference_frequency(double l1, double l2, const std::vector<double>& k) {
  const double kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2] + k[3] * k[3];
  return 2 * std::sqrt((l2 * l2 * k[0] * k[0] + l2 * l2 * k[1] * k[1]) + (l1 * l1 * k[2] * k[2] + l1 * l1 * k[3] * k[3])) / std::sqrt(kk);
}

/// Closed-form E5 double-rotation frequency (outer branch), expanded term by term.
inline double e5_reference_frequency(double lambda_1, double lambda_2, const std::vector<double>& k) {
  const double l1 = lambda_1, l2 = lambda_2;
  const double k1 = k[0], k2 = k[1], k3 = k[2], k4 = k[3], k5 = k[4];
  auto p = [](double x, int n) { return std::pow(x, n); };
  const double inner =
      p(l2, 4) * p(k1, 4) + p(l2, 4) * p(k2, 4) + p(l2, 4) * p(k5, 4) + p(l1, 4) * p(k3, 4) + p(l1, 4) * p(k4, 4) +
      p(l1, 4) * p(k5, 4) + 2 * p(l2, 4) * p(k2, 2) * p(k5, 2) + 2 * p(l2, 4) * p(k2, 2) * p(k1, 2) +
      2 * p(l2, 4) * p(k5, 2) * p(k1, 2) + 2 * p(l1, 4) * p(k4, 2) * p(k3, 2) + 2 * p(l1, 4) * p(k4, 2) * p(k5, 2) +
      2 * p(l1, 4) * p(k3, 2) * p(k5, 2) + 2 * p(l2, 2) * p(k2, 2) * p(l1, 2) * p(k4, 2) +
      2 * p(l2, 2) * p(k2, 2) * p(l1, 2) * p(k3, 2) + 2 * p(l1, 2) * p(k4, 2) * p(l2, 2) * p(k1, 2) +
      2 * p(l1, 2) * p(k3, 2) * p(l2, 2) * p(k1, 2) - 2 * p(k5, 2) * p(l1, 2) * p(l2, 2) * p(k1, 2) -
      2 * p(k5, 2) * p(l1, 2) * p(l2, 2) * p(k2, 2) - 2 * p(k5, 2) * p(l1, 2) * p(l2, 2) * p(k3, 2) -
      2 * p(k5, 2) * p(l1, 2) * p(l2, 2) * p(k4, 2) - 2 * p(k5, 4) * p(l1, 2) * p(l2, 2);
  const double outer = std::sqrt(inner) + p(l2, 2) * p(k1, 2) + p(l2, 2) * p(k2, 2) + p(l2, 2) * p(k5, 2) +
                       p(l1, 2) * p(k3, 2) + p(l1, 2) * p(k4, 2) + p(l1, 2) * p(k5, 2);
  return std::sqrt(2.0) * std::sqrt(outer) / std::sqrt(p(k5, 2) + p(k4, 2) + p(k3, 2) + p(k2, 2) + p(k1, 2));
}

struct ConsistencyReport {
  double max_residual = 0;
  std::size_t vectors_checked = 0;
  std::vector<double> per_constraint;  // max over vectors
};

/// Substitutes u_{i,j} -> i k_j u_i for each vortical nullspace vector into every
/// constraint (rates bound to the matrix's numeric values); residuals are relative
/// to |k|_inf |u|.
inline ConsistencyReport check_tpt_consistency(const DispersionResult& result, const NormalModeMatrix& m, const ConstraintSet& cs,
                                               std::optional<Branch> only = std::nullopt) {
  const int d = m.dimension();
  if (cs.dimension() != d) throw DimensionMismatch("constraint set and matrix differ in dimension");
  double kinf = 0;
  for (const auto& q : m.wavevector()) kinf = std::max(kinf, std::fabs(q.get_d()));
  Bindings rates;
  for (std::size_t i = 0; i < m.spec().plane_count(); ++i) rates.set(Symbol::rate(static_cast<int>(i) + 1), m.spec().rate_value(i));

  ConsistencyReport rep;
  rep.per_constraint.assign(cs.constraints.size(), 0.0);
  for (const DispersionRoot* root : result.vortical()) {
    if (only && root->branch != *only) continue;
    if (root->nullspace.empty()) throw IllConditioned("empty nullspace for vortical root");
    for (const auto& v : root->nullspace) {
      const double unorm = v.head(d).norm();
      if (unorm < 1e-300) continue;
      ++rep.vectors_checked;
      for (std::size_t ci = 0; ci < cs.constraints.size(); ++ci) {
        std::complex<double> acc = 0;
        for (const auto& [mono, c] : cs.constraints[ci].expr.terms()) {
          std::complex<double> term = c.get_d();
          for (const auto& f : mono.factors()) {
            const Symbol s = f.symbol;
            std::complex<double> val;
            if (s.kind() == SymbolKind::Jet1) {
              val = std::complex<double>(0, m.wavevector()[static_cast<std::size_t>(s.j() - 1)].get_d()) * v(s.i() - 1);
            } else if (s.kind() == SymbolKind::Rate) {
              val = rates.at(s);
            } else {
              throw InputError("constraint symbol " + s.name() + " has no Fourier substitute");
            }
            for (int e = 0; e < f.exponent; ++e) term *= val;
          }
          acc += term;
        }
        const double r = std::abs(acc) / (kinf * unorm);
        rep.per_constraint[ci] = std::max(rep.per_constraint[ci], r);
        rep.max_residual = std::max(rep.max_residual, r);
      }
    }
  }
  if (rep.vectors_checked == 0) throw IllConditioned("no vortical nullspace vectors to check");
  return rep;
}

/// Wave-branch residual of the same substitution (negative control).
inline double wave_branch_residual(const DispersionResult& result, const NormalModeMatrix& m, const ConstraintSet& cs) {
  DispersionResult waves = result;
  waves.roots.clear();
  for (const auto& r : result.roots) {
    if (r.branch != Branch::Wave) continue;
    waves.roots.push_back(r);
    waves.roots.back().branch = Branch::ImposedVortical;
  }
  return check_tpt_consistency(waves, m, cs).max_residual;
}

}  // namespace rotflow
