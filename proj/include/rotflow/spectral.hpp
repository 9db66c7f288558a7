#pragma once
// Rotation generators: block diagonalization of skew matrices into planes and
// rates, the rotation 2-form, the frame velocity 1-form and fastness classes.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rotflow/form.hpp"

namespace rotflow {

class SkewnessViolation : public InputError {
 public:
  using InputError::InputError;
};

class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

/// Real d x d matrix with A + A^T = 0.  Ingest tolerates and removes
/// asymmetric noise up to `tolerance` per entry.
class SkewMatrix {
 public:
  explicit SkewMatrix(const Eigen::MatrixXd& a, double tolerance = 1e-12) {
    if (a.rows() != a.cols()) throw DimensionMismatch("matrix must be square");
    if (a.rows() < 1) throw DimensionMismatch("matrix must be non-empty");
    const double violation = (a + a.transpose()).cwiseAbs().maxCoeff();
    if (violation > tolerance)
      throw SkewnessViolation("matrix is not skew-symmetric: max |A + A^T| = " + std::to_string(violation));
    a_ = 0.5 * (a - a.transpose());
  }

  [[nodiscard]] const Eigen::MatrixXd& matrix() const { return a_; }
  [[nodiscard]] int dimension() const { return static_cast<int>(a_.rows()); }

 private:
  Eigen::MatrixXd a_;
};

/// Reads a matrix from a plain text file (one row per line, whitespace or
/// comma separated, '#' comments) or from JSON ({"matrix": [[...]]} or [[...]]).
inline Eigen::MatrixXd parse_matrix_text(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw InputError("bad matrix entry '" + tok + "'");
      } catch (const std::logic_error&) {
        throw InputError("bad matrix entry '" + tok + "'");
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError("matrix file has no rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw InputError("ragged matrix rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

inline Eigen::MatrixXd parse_matrix_json(const nlohmann::json& j) {
  const nlohmann::json& rows = j.is_object() ? j.at("matrix") : j;
  if (!rows.is_array() || rows.empty()) throw InputError("JSON matrix must be a non-empty array of rows");
  const auto n = rows.size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < n; ++i) {
    if (!rows[i].is_array() || rows[i].size() != rows[0].size()) throw InputError("ragged JSON matrix");
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k].get<double>();
  }
  return m;
}

inline Eigen::MatrixXd read_matrix_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open matrix file " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) {
    try {
      return parse_matrix_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("malformed JSON matrix: ") + e.what());
    }
  }
  return parse_matrix_text(text);
}

/// A = Q Lambda Q^T with Lambda made of [[0, rate], [-rate, 0]] blocks on
/// consecutive column pairs followed by zero axes.
struct SpectralDecomposition {
  Eigen::MatrixXd q;
  std::vector<std::pair<int, int>> planes;  // 1-based column pairs of Q
  std::vector<double> rates;                // descending, > 0
  std::vector<int> zero_axes;               // 1-based columns of Q
  double residual = 0.0;                    // max |A - Q Lambda Q^T|
  double det_q = 1.0;

  [[nodiscard]] int dimension() const { return static_cast<int>(q.rows()); }

  [[nodiscard]] Eigen::MatrixXd canonical_block_matrix() const {
    const int d = dimension();
    Eigen::MatrixXd lam = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = 0; i < planes.size(); ++i) {
      lam(planes[i].first - 1, planes[i].second - 1) = rates[i];
      lam(planes[i].second - 1, planes[i].first - 1) = -rates[i];
    }
    return lam;
  }

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json qrows = nlohmann::json::array();
    for (int i = 0; i < q.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int j = 0; j < q.cols(); ++j) row.push_back(q(i, j));
      qrows.push_back(row);
    }
    nlohmann::json pl = nlohmann::json::array();
    for (auto [p, r] : planes) pl.push_back({p, r});
    return {{"Q", qrows}, {"planes", pl}, {"rates", rates}, {"zero_axes", zero_axes}, {"residual", residual},
            {"det_Q", det_q}};
  }
};

inline SpectralDecomposition block_diagonalize(const SkewMatrix& skew, double snap_rel = 1e-12) {
  const Eigen::MatrixXd& a = skew.matrix();
  const int d = skew.dimension();
  const double scale = a.cwiseAbs().maxCoeff();

  SpectralDecomposition out;
  if (scale == 0.0) {
    out.q = Eigen::MatrixXd::Identity(d, d);
    for (int i = 1; i <= d; ++i) out.zero_axes.push_back(i);
    return out;
  }

  Eigen::RealSchur<Eigen::MatrixXd> schur(d);
  schur.compute(a);
  if (schur.info() != Eigen::Success)
    throw ConvergenceFailure("real Schur iteration did not converge within " +
                             std::to_string(schur.getMaxIterations()) + " iterations");
  Eigen::MatrixXd q = schur.matrixU();
  const Eigen::MatrixXd t = q.transpose() * a * q;

  struct Block {
    int first;  // 0-based column
    double rate;
  };
  std::vector<Block> blocks;
  std::vector<int> singles;
  for (int i = 0; i < d;) {
    if (i + 1 < d && schur.matrixT()(i + 1, i) != 0.0) {
      double rate = 0.5 * (t(i, i + 1) - t(i + 1, i));
      if (rate < 0) {
        q.col(i).swap(q.col(i + 1));
        rate = -rate;
      }
      blocks.push_back({i, rate});
      i += 2;
    } else {
      singles.push_back(i);
      i += 1;
    }
  }
  double max_rate = 0.0;
  for (const auto& b : blocks) max_rate = std::max(max_rate, b.rate);
  std::vector<Block> kept;
  for (const auto& b : blocks) {
    if (b.rate <= snap_rel * max_rate) {
      singles.push_back(b.first);
      singles.push_back(b.first + 1);
    } else {
      kept.push_back(b);
    }
  }
  std::stable_sort(kept.begin(), kept.end(), [](const Block& x, const Block& y) { return x.rate > y.rate; });
  std::sort(singles.begin(), singles.end());

  Eigen::MatrixXd ordered(d, d);
  int col = 0;
  for (const auto& b : kept) {
    ordered.col(col) = q.col(b.first);
    ordered.col(col + 1) = q.col(b.first + 1);
    out.planes.emplace_back(col + 1, col + 2);
    out.rates.push_back(b.rate);
    col += 2;
  }
  for (int s : singles) {
    ordered.col(col) = q.col(s);
    out.zero_axes.push_back(col + 1);
    ++col;
  }
  out.q = ordered;
  out.det_q = out.q.determinant();
  if (out.det_q < 0 && !out.zero_axes.empty()) {
    out.q.col(out.zero_axes.back() - 1) *= -1.0;
    out.det_q = -out.det_q;
  }
  out.residual = (a - out.q * out.canonical_block_matrix() * out.q.transpose()).cwiseAbs().maxCoeff();
  return out;
}

/// Groups positive rates into asymptotic order classes: sorted descending, a
/// new (lower) class starts whenever the ratio to the previous rate reaches
/// `ratio_threshold`.  The slowest positive cluster is class 1, zeros get 0.
inline std::vector<int> classify_fastness(const std::vector<double>& rates, double ratio_threshold = 10.0) {
  if (ratio_threshold <= 1.0) throw InputError("ratio threshold must exceed 1");
  for (double r : rates)
    if (r < 0 || !std::isfinite(r)) throw InputError("rates must be finite and nonnegative");
  std::vector<std::size_t> order(rates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rates[a] > rates[b]; });
  if (rates.empty() || rates[order[0]] == 0.0) throw InputError("all rates are zero: no fast rotation");

  std::vector<int> cluster(rates.size(), -1);
  int current = 0;
  double prev = rates[order[0]];
  for (std::size_t idx : order) {
    const double r = rates[idx];
    if (r == 0.0) break;
    if (prev / r >= ratio_threshold) ++current;
    cluster[idx] = current;
    prev = r;
  }
  std::vector<int> classes(rates.size(), 0);
  for (std::size_t i = 0; i < rates.size(); ++i)
    if (cluster[i] >= 0) classes[i] = current - cluster[i] + 1;
  return classes;
}

/// One rotation plane: axes p < q (1-based), rate (numeric, or symbolic
/// lambda_i when unset) and asymptotic order class (0 = not fast).
struct PlaneRotation {
  int p = 0;
  int q = 0;
  std::optional<Rational> rate;
  int order_class = 1;
};

class RotationSpec {
 public:
  RotationSpec(int dimension, std::vector<PlaneRotation> planes) : dim_(dimension), planes_(std::move(planes)) {
    if (dimension < 1 || dimension > kMaxDimension) throw DimensionMismatch("dimension out of range");
    std::uint32_t used = 0;
    for (auto& pl : planes_) {
      if (pl.rate) pl.rate->canonicalize();
      if (pl.p < 1 || pl.q > dim_ || pl.p >= pl.q) throw InputError("plane axes must satisfy 1 <= p < q <= d");
      const std::uint32_t bits = MultiIndex::bit(pl.p) | MultiIndex::bit(pl.q);
      if (used & bits) throw InputError("rotation planes must be pairwise disjoint");
      used |= bits;
      if (pl.order_class < 0) throw InputError("order class must be nonnegative");
      if (pl.rate && *pl.rate < 0) throw InputError("rates must be nonnegative");
    }
  }

  /// Planes (1,2), (3,4), ... with symbolic rates and the given classes.
  static RotationSpec symbolic(int d, const std::vector<int>& classes) {
    if (static_cast<int>(classes.size()) > d / 2) throw InputError("more planes than fit in dimension");
    std::vector<PlaneRotation> planes;
    for (std::size_t i = 0; i < classes.size(); ++i) {
      const int p = 2 * static_cast<int>(i) + 1;
      planes.push_back({p, p + 1, std::nullopt, classes[i]});
    }
    return {d, std::move(planes)};
  }

  /// Planes (1,2), (3,4), ... with numeric rates.  Classes default to
  /// classify_fastness(rates) when not given.
  static RotationSpec canonical(int d, const std::vector<Rational>& rates, std::optional<std::vector<int>> classes = std::nullopt,
                                double ratio_threshold = 10.0) {
    if (static_cast<int>(rates.size()) > d / 2) throw InputError("more rates than planes fit in dimension");
    std::vector<int> cls;
    if (classes) {
      if (classes->size() != rates.size()) throw InputError("orders and rates differ in length");
      cls = *classes;
    } else {
      std::vector<double> r;
      for (const auto& q : rates) r.push_back(q.get_d());
      cls = classify_fastness(r, ratio_threshold);
    }
    std::vector<PlaneRotation> planes;
    for (std::size_t i = 0; i < rates.size(); ++i) {
      const int p = 2 * static_cast<int>(i) + 1;
      planes.push_back({p, p + 1, rates[i], rates[i] == 0 ? 0 : cls[i]});
    }
    return {d, std::move(planes)};
  }

  static RotationSpec from_decomposition(const SpectralDecomposition& dec, double ratio_threshold = 10.0) {
    std::vector<Rational> rates;
    for (double r : dec.rates) rates.push_back(rational_from_double(r));
    if (rates.empty()) return {dec.dimension(), {}};
    return canonical(dec.dimension(), rates, std::nullopt, ratio_threshold);
  }

  [[nodiscard]] int dimension() const { return dim_; }
  [[nodiscard]] const std::vector<PlaneRotation>& planes() const { return planes_; }
  [[nodiscard]] std::size_t plane_count() const { return planes_.size(); }

  /// Rate of plane i (0-based) as an expression: the numeric value, or lambda_{i+1}.
  [[nodiscard]] ScalarExpr rate_expr(std::size_t i) const {
    const auto& pl = planes_.at(i);
    return pl.rate ? ScalarExpr(*pl.rate) : ScalarExpr(Symbol::rate(static_cast<int>(i) + 1));
  }
  [[nodiscard]] double rate_value(std::size_t i) const {
    const auto& pl = planes_.at(i);
    if (!pl.rate) throw UnboundSymbol("plane " + std::to_string(i + 1) + " has a symbolic rate");
    return pl.rate->get_d();
  }
  [[nodiscard]] bool is_numeric() const {
    return std::all_of(planes_.begin(), planes_.end(), [](const PlaneRotation& p) { return p.rate.has_value(); });
  }

  /// A plane takes part in the rotation when its rate is symbolic or nonzero.
  [[nodiscard]] bool plane_active(std::size_t i) const { return !planes_[i].rate || *planes_[i].rate != 0; }
  [[nodiscard]] bool plane_fast(std::size_t i) const { return plane_active(i) && planes_[i].order_class > 0; }
  [[nodiscard]] int active_plane_count() const {
    int n = 0;
    for (std::size_t i = 0; i < planes_.size(); ++i) n += plane_active(i) ? 1 : 0;
    return n;
  }
  [[nodiscard]] bool is_simple() const { return active_plane_count() == 1; }

  /// Axes not covered by any active plane.
  [[nodiscard]] std::vector<int> free_axes() const {
    std::uint32_t used = 0;
    for (std::size_t i = 0; i < planes_.size(); ++i)
      if (plane_active(i)) used |= MultiIndex::bit(planes_[i].p) | MultiIndex::bit(planes_[i].q);
    std::vector<int> out;
    for (int a = 1; a <= dim_; ++a)
      if (!(used & MultiIndex::bit(a))) out.push_back(a);
    return out;
  }

  /// Same layout and classes with every rate symbolic.
  [[nodiscard]] RotationSpec as_symbolic() const {
    auto planes = planes_;
    for (auto& p : planes) {
      if (p.rate && *p.rate == 0) p.order_class = 0;
      p.rate.reset();
    }
    return {dim_, std::move(planes)};
  }

  /// Drops planes whose class is 0 (subdominant rotation treated as vanishing).
  [[nodiscard]] RotationSpec fast_part() const {
    auto planes = planes_;
    for (auto& p : planes)
      if (p.order_class == 0) p.rate = Rational(0);
    return {dim_, std::move(planes)};
  }

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json pl = nlohmann::json::array();
    for (const auto& p : planes_) {
      nlohmann::json e = {{"axes", {p.p, p.q}}, {"order_class", p.order_class}};
      e["rate"] = p.rate ? nlohmann::json(p.rate->get_str()) : nlohmann::json("symbolic");
      pl.push_back(e);
    }
    return {{"d", dim_}, {"planes", pl}};
  }

 private:
  int dim_;
  std::vector<PlaneRotation> planes_;
};

/// Omega_R = sum_i rate_i dx_p ^ dx_q.
inline DifferentialForm rotation_two_form(const RotationSpec& spec) {
  DifferentialForm w(spec.dimension(), 2);
  for (std::size_t i = 0; i < spec.plane_count(); ++i) {
    const auto& pl = spec.planes()[i];
    w.add(MultiIndex{pl.p, pl.q}, spec.rate_expr(i));
  }
  return w;
}

/// U_R = star(star(Omega_R) ^ X).  Checks d U_R = 2 Omega_R.
inline DifferentialForm rotating_velocity_form(const RotationSpec& spec) {
  const int d = spec.dimension();
  const DifferentialForm omega = rotation_two_form(spec);
  DifferentialForm ur = hodge_star(wedge(hodge_star(omega), DifferentialForm::position_one_form(d)));
  if (!(exterior_derivative(ur) == omega * ScalarExpr(2)))
    throw Error("internal: d U_R != 2 Omega_R (Hodge sign convention broken)");
  return ur;
}

/// The two Cartan summands of L_u U_R: d(i_u U_R) (centrifugal, exact) and
/// i_u d U_R (Coriolis, equal to 2 i_u Omega_R).
struct CentrifugalCoriolisSplit {
  DifferentialForm exact_part;
  DifferentialForm interior_part;
  ScalarExpr potential;  // i_u U_R, so exact_part = d(potential)
};

inline CentrifugalCoriolisSplit centrifugal_coriolis_split(const RotationSpec& spec) {
  const int d = spec.dimension();
  const VectorFieldSym u = VectorFieldSym::velocity(d);
  const DifferentialForm ur = rotating_velocity_form(spec);
  const DifferentialForm iu = interior_product(u, ur);
  return {exterior_derivative(iu), interior_product(u, exterior_derivative(ur)), iu.coefficient(MultiIndex{})};
}

}  // namespace rotflow
