#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "oracles/oracles.hpp"
#include "rotflow/io.hpp"
#include "rotflow/spectral.hpp"
#include "rotflow/tpt.hpp"

using namespace rotflow;

namespace {

ScalarExpr J(int i, int j) { return sym(Symbol::jet(i, j)); }
ScalarExpr X(int i) { return sym(Symbol::coord(i)); }
ScalarExpr L(int i) { return sym(Symbol::rate(i)); }
DifferentialForm dx(int d, std::vector<int> axes, const ScalarExpr& c = ScalarExpr(1)) { return DifferentialForm::basis(d, axes, c); }

Eigen::MatrixXd random_orthogonal(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = g(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ();
}

oracle::Mat to_oracle(const Eigen::MatrixXd& a) {
  oracle::Mat m = oracle::zeros(static_cast<int>(a.rows()));
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) m[i][j] = a(i, j);
  return m;
}

// Rates of a skew matrix: its singular values, each appearing twice.
std::vector<double> oracle_rates(const Eigen::MatrixXd& a) {
  std::vector<double> sv = oracle::singular_values(to_oracle(a));
  std::sort(sv.rbegin(), sv.rend());
  std::vector<double> rates;
  const double top = sv.empty() ? 0.0 : sv[0];
  for (std::size_t i = 0; i + 1 < sv.size(); i += 2)
    if (sv[i] > 1e-12 * top) rates.push_back(0.5 * (sv[i] + sv[i + 1]));
  return rates;
}

RotationSpec sym_spec(int d, std::vector<int> classes) { return RotationSpec::symbolic(d, classes); }

}  // namespace

// ---------------------------------------------------------------------------
// Spectral decomposition

TEST(BlockDiagonalize, SinglePlaneInThree) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 1) = 2.5;
  a(1, 0) = -2.5;
  const auto dec = block_diagonalize(SkewMatrix(a));
  ASSERT_EQ(dec.rates.size(), 1u);
  EXPECT_NEAR(dec.rates[0], 2.5, 1e-14);
  EXPECT_EQ(dec.zero_axes.size(), 1u);
  EXPECT_LT(dec.residual, 1e-14);
  EXPECT_NEAR(dec.det_q, 1.0, 1e-12);
}

TEST(BlockDiagonalize, DoublePlaneInFiveKeepsZeroAxis) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(5, 5);
  a(0, 1) = 2;
  a(1, 0) = -2;
  a(2, 3) = 1.5;
  a(3, 2) = -1.5;
  const auto dec = block_diagonalize(SkewMatrix(a));
  ASSERT_EQ(dec.rates.size(), 2u);
  EXPECT_NEAR(dec.rates[0], 2.0, 1e-14);
  EXPECT_NEAR(dec.rates[1], 1.5, 1e-14);
  ASSERT_EQ(dec.zero_axes.size(), 1u);
  EXPECT_EQ(dec.zero_axes[0], 5);
  EXPECT_NEAR(std::fabs(dec.q(4, 4)), 1.0, 1e-14);
}

TEST(BlockDiagonalize, RandomSixAgainstOracle) {
  std::mt19937_64 rng(101);
  Eigen::MatrixXd lam = Eigen::MatrixXd::Zero(6, 6);
  const double rates[] = {3, 2, 0.5};
  for (int i = 0; i < 3; ++i) {
    lam(2 * i, 2 * i + 1) = rates[i];
    lam(2 * i + 1, 2 * i) = -rates[i];
  }
  const Eigen::MatrixXd q = random_orthogonal(6, rng);
  const Eigen::MatrixXd a = q * lam * q.transpose();
  const auto dec = block_diagonalize(SkewMatrix(a, 1e-10));
  const auto ref = oracle_rates(a);
  ASSERT_EQ(dec.rates.size(), 3u);
  ASSERT_EQ(ref.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(dec.rates[i], rates[i], 1e-9 * rates[i]);
    EXPECT_NEAR(ref[i], rates[i], 1e-9 * rates[i]);
  }
}

TEST(BlockDiagonalize, ThousandRandomMatrices) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 1 + trial % 10;
    Eigen::MatrixXd b(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) b(i, j) = g(rng);
    const Eigen::MatrixXd a = b - b.transpose();
    const auto dec = block_diagonalize(SkewMatrix(a));
    const double scale = a.cwiseAbs().maxCoeff();
    EXPECT_LT(dec.residual, 1e-10 * std::max(scale, 1e-300)) << trial;
    EXPECT_LT((dec.q.transpose() * dec.q - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(2 * dec.rates.size() + dec.zero_axes.size(), static_cast<std::size_t>(d));
    EXPECT_TRUE(std::is_sorted(dec.rates.rbegin(), dec.rates.rend()));
    const auto ref = oracle_rates(a);
    ASSERT_EQ(ref.size(), dec.rates.size()) << trial;
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(dec.rates[i], ref[i], 1e-9 * ref[i]) << trial;
    // conjugation invariance
    const Eigen::MatrixXd r = random_orthogonal(d, rng);
    const Eigen::MatrixXd c = r * a * r.transpose();
    const auto dec2 = block_diagonalize(SkewMatrix(c, 1e-10));
    ASSERT_EQ(dec2.rates.size(), dec.rates.size());
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(dec2.rates[i], dec.rates[i], 1e-9 * dec.rates[i]);
  }
}

TEST(BlockDiagonalize, ZeroMatrix) {
  const auto dec = block_diagonalize(SkewMatrix(Eigen::MatrixXd::Zero(4, 4)));
  EXPECT_TRUE(dec.rates.empty());
  EXPECT_EQ(dec.zero_axes.size(), 4u);
}

TEST(SkewMatrix, RejectsNonSkew) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 1) = 1;
  a(1, 0) = -0.5;
  EXPECT_THROW(SkewMatrix{a}, SkewnessViolation);
  EXPECT_THROW(SkewMatrix{Eigen::MatrixXd::Zero(2, 3)}, DimensionMismatch);
}

TEST(SkewMatrix, TextAndJsonIngest) {
  const auto m = parse_matrix_text("# comment\n0, 1\n-1 0\n");
  ASSERT_EQ(m.rows(), 2);
  EXPECT_DOUBLE_EQ(m(0, 1), 1);
  EXPECT_DOUBLE_EQ(m(1, 0), -1);
  const auto j = parse_matrix_json(nlohmann::json::parse(R"({"matrix": [[0, 2], [-2, 0]]})"));
  EXPECT_DOUBLE_EQ(j(0, 1), 2);
  EXPECT_THROW(parse_matrix_text("0 1\n-1\n"), InputError);
}

TEST(ClassifyFastness, Examples) {
  EXPECT_EQ(classify_fastness({5, 5}), (std::vector<int>{1, 1}));
  EXPECT_EQ(classify_fastness({1000, 5}), (std::vector<int>{2, 1}));
  EXPECT_EQ(classify_fastness({7, 0}), (std::vector<int>{1, 0}));
  EXPECT_EQ(classify_fastness({5, 1000}), (std::vector<int>{1, 2}));
  EXPECT_EQ(classify_fastness({100, 9, 1}), (std::vector<int>{2, 1, 1}));
  EXPECT_EQ(classify_fastness({100, 9, 1}, 200), (std::vector<int>{1, 1, 1}));
}

TEST(ClassifyFastness, Errors) {
  EXPECT_THROW(classify_fastness({0, 0}), InputError);
  EXPECT_THROW(classify_fastness({1, 2}, 1.0), InputError);
  EXPECT_THROW(classify_fastness({-1, 2}), InputError);
}

TEST(RotationForms, Examples) {
  EXPECT_EQ(rotation_two_form(sym_spec(3, {1})), dx(3, {1, 2}, L(1)));
  EXPECT_EQ(rotation_two_form(sym_spec(4, {1, 1})), dx(4, {1, 2}, L(1)) + dx(4, {3, 4}, L(2)));
  EXPECT_EQ(rotation_two_form(RotationSpec::canonical(4, {Rational(3), Rational(0)})), dx(4, {1, 2}, ScalarExpr(3)));
  EXPECT_EQ(rotating_velocity_form(sym_spec(3, {1})), dx(3, {2}, L(1) * X(1)) - dx(3, {1}, L(1) * X(2)));
  EXPECT_EQ(rotating_velocity_form(sym_spec(4, {1, 1})),
            dx(4, {2}, L(1) * X(1)) - dx(4, {1}, L(1) * X(2)) + dx(4, {4}, L(2) * X(3)) - dx(4, {3}, L(2) * X(4)));
}

TEST(RotationForms, ExteriorDerivativeOfRotatingVelocityOnRandomLayouts) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 + trial % 7;
    std::vector<int> axes(static_cast<std::size_t>(d));
    std::iota(axes.begin(), axes.end(), 1);
    std::shuffle(axes.begin(), axes.end(), rng);
    const int n = std::uniform_int_distribution<int>(0, d / 2)(rng);
    std::vector<PlaneRotation> planes;
    for (int i = 0; i < n; ++i) {
      int p = axes[2 * i], q = axes[2 * i + 1];
      if (p > q) std::swap(p, q);
      planes.push_back({p, q, std::nullopt, 1});
    }
    const RotationSpec spec(d, planes);
    EXPECT_EQ(exterior_derivative(rotating_velocity_form(spec)), rotation_two_form(spec) * ScalarExpr(2)) << trial;
  }
}

TEST(RotationSpec, UnreducedRatesAreCanonicalized) {
  const RotationSpec spec = RotationSpec::canonical(6, {Rational(2, 2), Rational(2, 3), Rational(2, 4)}, std::vector<int>{1, 1, 1});
  EXPECT_EQ(spec.planes()[2].rate->get_str(), "1/2");
  EXPECT_NO_THROW(rotating_velocity_form(spec));
  ScalarExpr e(Rational(3, 6));
  e.add_term(Monomial{}, Rational(4, 8));
  EXPECT_EQ(e, ScalarExpr(1));
}

TEST(RotationSpec, Validation) {
  EXPECT_THROW(RotationSpec(4, {{1, 2, std::nullopt, 1}, {2, 3, std::nullopt, 1}}), InputError);
  EXPECT_THROW(RotationSpec(3, {{2, 1, std::nullopt, 1}}), InputError);
  EXPECT_THROW(RotationSpec::canonical(3, {Rational(1), Rational(2)}), InputError);
}

TEST(CentrifugalCoriolis, Split) {
  for (int d : {3, 4, 5}) {
    const RotationSpec spec = sym_spec(d, std::vector<int>(static_cast<std::size_t>(d / 2), 1));
    const auto split = centrifugal_coriolis_split(spec);
    const auto u = VectorFieldSym::velocity(d);
    EXPECT_EQ(split.exact_part + split.interior_part, lie_derivative(u, rotating_velocity_form(spec)));
    EXPECT_EQ(split.interior_part, interior_product(u, rotation_two_form(spec)) * ScalarExpr(2));
    EXPECT_EQ(split.exact_part, DifferentialForm::differential(d, split.potential));
  }
}

// ---------------------------------------------------------------------------
// Constraint derivation

TEST(CoriolisClosure, ThreeDimensional) {
  const auto c = coriolis_closure(sym_spec(3, {1}), 1);
  const auto expect = dx(3, {1, 2}, L(1) * (J(1, 1) + J(2, 2))) + dx(3, {3, 2}, L(1) * J(1, 3)) + dx(3, {1, 3}, L(1) * J(2, 3));
  EXPECT_EQ(c.form, expect);
  EXPECT_FALSE(c.null_constraint);
}

TEST(CoriolisClosure, DoubleRotationSecondOrder) {
  const auto c = coriolis_closure(sym_spec(4, {1, 1}), 2);
  const auto trace = J(1, 1) + J(2, 2) + J(3, 3) + J(4, 4);
  EXPECT_EQ(c.form, dx(4, {1, 2, 3, 4}, Rational(2) * L(1) * L(2) * trace));
}

TEST(CoriolisClosure, SimpleRotationSecondOrderIsNull) {
  const auto c = coriolis_closure(RotationSpec::canonical(4, {Rational(1), Rational(0)}), 2);
  EXPECT_TRUE(c.null_constraint);
  EXPECT_TRUE(c.form.is_zero());
  EXPECT_FALSE(c.warning.empty());
  EXPECT_THROW(coriolis_closure(sym_spec(4, {1, 1}), 0), InputError);
}

TEST(Derive, SimultaneousDoubleInFour) {
  const auto cs = derive_constraints(sym_spec(4, {1, 1}), 1, BalanceMode::Combined);
  EXPECT_TRUE(cs.same_relations({J(1, 1) + J(2, 2), J(3, 3) + J(4, 4), L(1) * J(1, 3) + L(2) * J(4, 2), L(1) * J(2, 3) - L(2) * J(4, 1),
                                 L(1) * J(1, 4) - L(2) * J(3, 2), L(1) * J(2, 4) + L(2) * J(3, 1)}))
      << cs.text_table();
}

TEST(Derive, IndependentDoubleInFour) {
  const auto cs = derive_constraints(sym_spec(4, {2, 1}), 1, BalanceMode::DominantBalance);
  std::vector<ScalarExpr> expect = {J(1, 1) + J(2, 2), J(3, 3) + J(4, 4)};
  for (auto [i, j] : std::vector<std::pair<int, int>>{{1, 3}, {4, 2}, {2, 3}, {4, 1}, {1, 4}, {3, 2}, {2, 4}, {3, 1}}) expect.push_back(J(i, j));
  EXPECT_TRUE(cs.same_relations(expect)) << cs.text_table();
  for (const auto& c : cs.constraints) EXPECT_GE(c.order_class, 1);
}

TEST(Derive, SimpleRotationInFour) {
  const auto cs = derive_constraints(RotationSpec::canonical(4, {Rational(1), Rational(0)}), 1, BalanceMode::Combined);
  EXPECT_TRUE(cs.same_relations({J(1, 1) + J(2, 2), J(1, 3), J(1, 4), J(2, 3), J(2, 4)})) << cs.text_table();
}

TEST(Derive, DoubleInFive) {
  const auto cs = derive_constraints(sym_spec(5, {1, 1}), 1, BalanceMode::Combined);
  EXPECT_TRUE(cs.same_relations({J(1, 1) + J(2, 2), J(3, 3) + J(4, 4), L(1) * J(1, 3) + L(2) * J(4, 2), L(1) * J(2, 3) - L(2) * J(4, 1),
                                 L(1) * J(1, 4) - L(2) * J(3, 2), L(1) * J(2, 4) + L(2) * J(3, 1), J(1, 5), J(2, 5), J(3, 5), J(4, 5)}))
      << cs.text_table();
}

TEST(Derive, MatchesGoldenFiles) {
  namespace fs = std::filesystem;
  int seen = 0;
  for (const auto& e : fs::directory_iterator(ROTFLOW_GOLDEN_DIR)) {
    if (e.path().extension() != ".json") continue;
    const auto j = nlohmann::json::parse(read_text_file(e.path().string()));
    const RotationSpec spec = sym_spec(j.at("dim").get<int>(), j.at("orders").get<std::vector<int>>());
    const auto cs = derive_constraints(spec, j.value("kelvin_order", 1), parse_balance(j.value("balance", "combined")));
    std::vector<ScalarExpr> expect;
    for (const auto& r : j.at("relations")) expect.push_back(constraint_from_json(r).expr);
    EXPECT_TRUE(cs.same_relations(expect)) << e.path() << "\n" << cs.text_table();
    ++seen;
  }
  EXPECT_GE(seen, 5);
}

TEST(Derive, RowSpaceNonRedundant) {
  for (auto classes : std::vector<std::vector<int>>{{1}, {1, 1}, {2, 1}, {1, 1, 1}, {3, 2, 1}}) {
    const int d = static_cast<int>(classes.size()) * 2 + 1;
    for (auto mode : {BalanceMode::Combined, BalanceMode::DominantBalance}) {
      const auto cs = derive_constraints(sym_spec(d, classes), 1, mode);
      EXPECT_EQ(cs.row_space().rank(), cs.constraints.size());
      for (const auto& c : cs.constraints) {
        auto again = normalize_constraint(c.expr);
        ASSERT_TRUE(again);
        EXPECT_EQ(*again, c.expr);
      }
    }
  }
}

TEST(Derive, Errors) {
  EXPECT_THROW(derive_constraints(RotationSpec::canonical(4, {Rational(0), Rational(0)}, std::vector<int>{0, 0}), 1, BalanceMode::Combined),
               InputError);
  EXPECT_THROW(derive_constraints(sym_spec(4, {1, 1}), 3, BalanceMode::Combined), InputError);
}

TEST(Rescale, RatioThreeMatchesStretchedUnitSet) {
  const auto cs = derive_constraints(sym_spec(4, {1, 1}), 1, BalanceMode::Combined);
  const auto r3 = rescale_rates(cs, Rational(3));
  EXPECT_TRUE(r3.equivalent);
  EXPECT_EQ(r3.set.constraints.size(), 6u);
}

TEST(Rescale, UnitRatio) {
  const auto cs = derive_constraints(sym_spec(4, {1, 1}), 1, BalanceMode::Combined);
  const auto r1 = rescale_rates(cs, Rational(1));
  const RowSpace rs = r1.set.row_space();
  EXPECT_TRUE(rs.contains(L(2) * (J(1, 3) + J(4, 2))) || rs.contains(J(1, 3) + J(4, 2)));
  EXPECT_TRUE(rs.contains(L(2) * (J(2, 3) - J(4, 1))) || rs.contains(J(2, 3) - J(4, 1)));
  const auto again = rescale_rates(r1.set, Rational(1));
  EXPECT_TRUE(again.set.same_relations(r1.set.exprs()));
  EXPECT_THROW(rescale_rates(cs, Rational(-1)), InputError);
  EXPECT_THROW(rescale_rates(derive_constraints(sym_spec(4, {2, 1}), 1, BalanceMode::DominantBalance), Rational(2)), InputError);
}

TEST(Leibniz, Reduction) {
  EXPECT_TRUE(verify_leibniz_reduction(sym_spec(4, {1, 1}), 2).holds);
  EXPECT_TRUE(verify_leibniz_reduction(sym_spec(5, {1, 1}), 2).holds);
  EXPECT_TRUE(verify_leibniz_reduction(sym_spec(6, {1, 1, 1}), 3).holds);
  EXPECT_TRUE(verify_leibniz_reduction(sym_spec(3, {1}), 1).holds);
  EXPECT_TRUE(verify_leibniz_reduction(RotationSpec::canonical(4, {Rational(2), Rational(7)}), 2).residual.is_zero());
  EXPECT_THROW(verify_leibniz_reduction(sym_spec(4, {1, 1}), 3), InputError);
}

TEST(HigherOrder, CorrectionIsAtLeastQuadratic) {
  for (int d : {4, 5}) {
    const auto r = higher_order_correction_degree(sym_spec(d, {1, 1}));
    EXPECT_TRUE(r.quadratic_or_higher);
    EXPECT_GE(r.correction.min, 2);
    EXPECT_EQ(r.leading.min, 1);
    EXPECT_EQ(r.leading.max, 1);
  }
  EXPECT_THROW(higher_order_correction_degree(sym_spec(3, {1})), InputError);
}

TEST(HigherOrder, SecondOrderSetsAreImpliedByFirstOrder) {
  for (auto classes : std::vector<std::vector<int>>{{1, 1}, {2, 1}}) {
    for (int d : {4, 5}) {
      const auto first = derive_constraints(sym_spec(d, classes), 1, BalanceMode::DominantBalance);
      const auto second = derive_constraints(sym_spec(d, classes), 2, BalanceMode::DominantBalance);
      // substitute generic rates so lambda-dependent relations can be compared as plain linear forms
      const RotationSpec num = RotationSpec::canonical(d, {Rational(7, 3), Rational(5, 2)}, classes);
      const RowSpace rs = with_numeric_rates(first, num).row_space();
      for (const auto& c : with_numeric_rates(second, num).constraints) EXPECT_TRUE(rs.contains(c.expr)) << c.text();
    }
  }
}

// ---------------------------------------------------------------------------
// Reduced-model classification

TEST(Reduction, SimpleRotationInFour) {
  const auto cs = derive_constraints(RotationSpec::canonical(4, {Rational(1), Rational(0)}), 1, BalanceMode::Combined);
  const auto rep = classify_reduction(cs, false);
  EXPECT_TRUE(rep.components[2].unconstrained);
  EXPECT_TRUE(rep.components[3].unconstrained);
  EXPECT_FALSE(rep.components[0].unconstrained);
  EXPECT_EQ(rep.components[0].cylinder_axes, (std::vector<int>{3, 4}));
  EXPECT_NE(rep.prose().find("There is no TPT constraint on u_3 nor u_4"), std::string::npos) << rep.prose();
  EXPECT_EQ(rep.structure_tag, "2D-2C horizontal core, 2-component vertical, coupling via pressure undetermined");
}

TEST(Reduction, ThreeDimensional) {
  const auto rep = classify_reduction(derive_constraints(sym_spec(3, {1}), 1, BalanceMode::Combined), true);
  EXPECT_EQ(rep.structure_tag, "2D core + vertical component");
  EXPECT_EQ(rep.passivity_verdict, "no 3D passive scalar attainable");
}

TEST(Reduction, SimultaneousDoubleInFiveWithIncompressibility) {
  const auto cs = derive_constraints(sym_spec(5, {1, 1}), 1, BalanceMode::Combined);
  const auto rep = classify_reduction(cs, true);
  ASSERT_EQ(rep.appended.size(), 1u);
  EXPECT_EQ(rep.appended[0].expr, J(5, 5));
  EXPECT_TRUE(rep.components[4].passive_scalar);
  EXPECT_EQ(rep.plane_relations.size(), 2u);
  EXPECT_EQ(rep.structure_tag, "4D horizontal core + u5 passive scalar");
  EXPECT_EQ(rep.augmented.constraints.size(), cs.constraints.size() + 1);
  // every reported plane relation belongs to the augmented set
  const RowSpace rs = rep.augmented.row_space();
  for (const auto& c : rep.plane_relations) EXPECT_TRUE(rs.contains(c.expr));

  const auto plain = classify_reduction(cs, false);
  EXPECT_FALSE(plain.components[4].passive_scalar);
  EXPECT_TRUE(plain.appended.empty());
}

TEST(Reduction, IndependentDoubleInFourSeparatesPressure) {
  const auto rep = classify_reduction(derive_constraints(sym_spec(4, {2, 1}), 1, BalanceMode::DominantBalance), false);
  EXPECT_EQ(rep.structure_tag, "two independent 2D cores, separated pressure P = P1 + P2");
  EXPECT_EQ(rep.pressure_coupling, "separated");
  for (int i = 0; i < 4; ++i) EXPECT_EQ(rep.components[static_cast<std::size_t>(i)].cylinder_axes.size(), 2u) << i;
}

TEST(Reduction, IndependentDoubleInFive) {
  const auto rep = classify_reduction(derive_constraints(sym_spec(5, {2, 1}), 1, BalanceMode::DominantBalance), true);
  EXPECT_EQ(rep.structure_tag, "two independent 2D cores + u5 passive scalar");
  EXPECT_TRUE(rep.components[4].passive_scalar);
}

TEST(Reduction, NoThreeComponentPassiveGroup) {
  for (int d = 3; d <= 8; ++d)
    for (int n = 1; n <= d / 2; ++n) {
      const auto rep = classify_reduction(derive_constraints(sym_spec(d, std::vector<int>(static_cast<std::size_t>(n), 1)), 1, BalanceMode::Combined), true);
      int passive = 0;
      for (const auto& c : rep.components) passive += c.passive_scalar ? 1 : 0;
      EXPECT_LE(passive, 1) << d << " " << n;
    }
}

TEST(Reduction, RejectsHigherOrderSets) {
  EXPECT_THROW(classify_reduction(derive_constraints(sym_spec(4, {1, 1}), 2, BalanceMode::Combined), false), InputError);
}
