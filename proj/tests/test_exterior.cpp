#include <gtest/gtest.h>

#include <random>

#include "rotflow/form.hpp"
#include "rotflow/spectral.hpp"

using namespace rotflow;

namespace {

ScalarExpr J(int i, int j) { return sym(Symbol::jet(i, j)); }
ScalarExpr U(int i) { return sym(Symbol::jet(i)); }
ScalarExpr X(int i) { return sym(Symbol::coord(i)); }
ScalarExpr L(int i) { return sym(Symbol::rate(i)); }
DifferentialForm dx(int d, std::vector<int> axes, const ScalarExpr& c = ScalarExpr(1)) { return DifferentialForm::basis(d, axes, c); }

// Random form with coefficients of degree <= 1 in coordinates.
DifferentialForm random_form(int d, int k, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coin(0, 2), small(-3, 3), axis(1, d);
  DifferentialForm w(d, k);
  for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
    if (std::popcount(mask) != k || coin(rng) == 0) continue;
    ScalarExpr c(small(rng));
    c += X(axis(rng)) * Rational(small(rng));
    w.add(MultiIndex::from_mask(mask), c);
  }
  return w;
}

}  // namespace

TEST(Wedge, BasisProduct) {
  const auto w = wedge(dx(3, {1}), dx(3, {2}));
  EXPECT_EQ(w, dx(3, {1, 2}));
  EXPECT_EQ(w.degree(), 2);
}

TEST(Wedge, RepeatedFactorVanishes) { EXPECT_TRUE(wedge(dx(3, {1}), dx(3, {1})).is_zero()); }

TEST(Wedge, DoubleRotationSquare) {
  const DifferentialForm om = dx(4, {1, 2}, L(1)) + dx(4, {3, 4}, L(2));
  EXPECT_EQ(wedge(om, om), dx(4, {1, 2, 3, 4}, Rational(2) * L(1) * L(2)));
}

TEST(Wedge, UnsortedBasisCarriesSign) {
  EXPECT_EQ(dx(3, {3, 2}), -dx(3, {2, 3}));
  EXPECT_EQ(dx(4, {2, 1, 4, 3}), dx(4, {1, 2, 3, 4}));
}

TEST(ExteriorDerivative, VelocityOneForm) {
  const DifferentialForm dU = exterior_derivative(DifferentialForm::velocity_one_form(3));
  DifferentialForm expect(3, 2);
  for (int i = 1; i <= 3; ++i)
    for (int j = i + 1; j <= 3; ++j) expect += dx(3, {i, j}, J(j, i) - J(i, j));
  EXPECT_EQ(dU, expect);
  EXPECT_TRUE(exterior_derivative(dU).is_zero());
}

TEST(ExteriorDerivative, RotatingVelocity) {
  const DifferentialForm ur = dx(3, {2}, L(1) * X(1)) - dx(3, {1}, L(1) * X(2));
  EXPECT_EQ(exterior_derivative(ur), dx(3, {1, 2}, Rational(2) * L(1)));
}

TEST(ExteriorDerivative, SecondJetOverflowIsAnError) {
  const DifferentialForm w = DifferentialForm::scalar(3, sym(Symbol::jet(1, 2, 3)));
  EXPECT_THROW(exterior_derivative(w), JetOrderOverflow);
}

TEST(InteriorProduct, PlaneRotation) {
  const auto u = VectorFieldSym::velocity(3);
  EXPECT_EQ(interior_product(u, dx(3, {1, 2}, L(1))), dx(3, {2}, L(1) * U(1)) - dx(3, {1}, L(1) * U(2)));
}

TEST(InteriorProduct, TwiceVanishes) {
  std::mt19937_64 rng(7);
  for (int d = 2; d <= 6; ++d) {
    const auto u = VectorFieldSym::velocity(d);
    const auto a = random_form(d, 2, rng);
    EXPECT_TRUE(interior_product(u, interior_product(u, a)).is_zero()) << d;
  }
}

TEST(InteriorProduct, FourFormSigns) {
  // alternating sum computed by hand: i_u dx1234 = sum_m (-1)^(m-1) u_m dx_{1234 \ m}
  const auto got = interior_product(VectorFieldSym::velocity(4), dx(4, {1, 2, 3, 4}));
  DifferentialForm expect(4, 3);
  expect += dx(4, {2, 3, 4}, U(1));
  expect -= dx(4, {1, 3, 4}, U(2));
  expect += dx(4, {1, 2, 4}, U(3));
  expect -= dx(4, {1, 2, 3}, U(4));
  EXPECT_EQ(got, expect);
}

TEST(InteriorProduct, ZeroFormRejected) {
  EXPECT_THROW(interior_product(VectorFieldSym::velocity(3), DifferentialForm::scalar(3, X(1))), DegreeError);
}

TEST(Hodge, TwoFormInThree) { EXPECT_EQ(hodge_star(dx(3, {1, 2})), dx(3, {3})); }

TEST(Hodge, RotatingVelocityConstruction) {
  const auto omega = dx(3, {1, 2}, L(1));
  const auto ur = hodge_star(wedge(hodge_star(omega), DifferentialForm::position_one_form(3)));
  EXPECT_EQ(ur, dx(3, {2}, L(1) * X(1)) - dx(3, {1}, L(1) * X(2)));
}

TEST(Hodge, InvolutionSign) {
  std::mt19937_64 rng(11);
  for (int d = 1; d <= 6; ++d)
    for (int k = 0; k <= d; ++k) {
      const auto a = random_form(d, k, rng);
      const int sign = (k * (d - k)) % 2 == 0 ? 1 : -1;
      EXPECT_EQ(hodge_star(hodge_star(a)), a * ScalarExpr(sign)) << d << " " << k;
    }
}

TEST(Lie, ClosedFormReducesToExactPart) {
  const RotationSpec spec = RotationSpec::symbolic(5, {1, 1});
  const auto om = rotation_two_form(spec);
  const auto u = VectorFieldSym::velocity(5);
  EXPECT_EQ(lie_derivative(u, om), exterior_derivative(interior_product(u, om)));
  const auto om2 = wedge(om, om);
  EXPECT_EQ(lie_derivative(u, om2), exterior_derivative(interior_product(u, om2)));
}

TEST(Lie, Leibniz) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const int d = 2 + trial % 4;
    const int ka = trial % 2, kb = 1;
    const auto a = random_form(d, ka, rng);
    const auto b = random_form(d, kb, rng);
    const auto u = VectorFieldSym::velocity(d);
    const auto lhs = lie_derivative(u, wedge(a, b));
    const auto rhs = wedge(lie_derivative(u, a), b) + wedge(a, lie_derivative(u, b));
    EXPECT_EQ(lhs, rhs) << trial;
  }
}

TEST(Evaluate, RotatingVelocityAtPoint) {
  const auto ur = dx(3, {2}, L(1) * X(1)) - dx(3, {1}, L(1) * X(2));
  Bindings b;
  b.set_point({1, 0, 0}).set_rates({3});
  const NumericForm v = evaluate(ur, b);
  EXPECT_DOUBLE_EQ(v.at(MultiIndex{2}), 3.0);
  EXPECT_DOUBLE_EQ(v.at(MultiIndex{1}), 0.0);
}

TEST(Evaluate, DU) {
  const auto dU = exterior_derivative(DifferentialForm::velocity_one_form(3));
  Bindings b;
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) b.set(Symbol::jet(i, j), 0.0);
  b.set(Symbol::jet(2, 1), 1.0);
  const NumericForm v = evaluate(dU, b);
  EXPECT_DOUBLE_EQ(v.at(MultiIndex{1, 2}), 1.0);
  EXPECT_DOUBLE_EQ(v.at(MultiIndex{1, 3}), 0.0);
  EXPECT_DOUBLE_EQ(v.at(MultiIndex{2, 3}), 0.0);
}

TEST(Evaluate, OmegaSquared) {
  const DifferentialForm om = dx(4, {1, 2}, L(1)) + dx(4, {3, 4}, L(2));
  Bindings b;
  b.set_rates({2, 5});
  EXPECT_DOUBLE_EQ(evaluate(wedge(om, om), b).at(MultiIndex{1, 2, 3, 4}), 20.0);
}

TEST(Evaluate, Homomorphism) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> x(-2, 2);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 + trial % 5;
    std::uniform_int_distribution<int> deg(0, d);
    const int ka = deg(rng);
    const int kb = std::uniform_int_distribution<int>(0, d - ka)(rng);
    const auto a = random_form(d, ka, rng);
    const auto b = random_form(d, kb, rng);
    std::vector<double> p(static_cast<std::size_t>(d));
    for (auto& v : p) v = x(rng);
    Bindings bind;
    bind.set_point(p);
    const NumericForm sym_side = evaluate(wedge(a, b), bind);
    const NumericForm num_side = wedge(evaluate(a, bind), evaluate(b, bind));
    double scale = 1;
    for (const auto& [I, v] : num_side) scale = std::max(scale, std::fabs(v));
    for (const auto& [I, v] : num_side) {
      const double s = sym_side.count(I) ? sym_side.at(I) : 0.0;
      EXPECT_LE(std::fabs(s - v), 1e-12 * scale) << trial;
    }
  }
}

TEST(Evaluate, UnboundSymbolThrows) {
  Bindings b;
  EXPECT_THROW(evaluate(dx(3, {1}, X(2)), b), UnboundSymbol);
}

TEST(Kernel, GenericVorticityInFive) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> g(-1, 1);
  const auto dU = exterior_derivative(DifferentialForm::velocity_one_form(5));
  Bindings b;
  for (int i = 1; i <= 5; ++i)
    for (int j = 1; j <= 5; ++j) b.set(Symbol::jet(i, j), g(rng));
  const auto k = kernel_of_two_form(dU, b);
  EXPECT_EQ(k.kernel_dimension, 1);
  EXPECT_EQ(k.rank, 4);
  const Eigen::MatrixXd A = two_form_matrix(evaluate(dU, b), 5);
  EXPECT_LT((A * k.basis).norm(), 1e-12);
}

TEST(Kernel, SimpleRotationInFour) {
  const RotationSpec spec = RotationSpec::canonical(4, {Rational(3), Rational(0)});
  const auto k = kernel_of_two_form(rotation_two_form(spec), Bindings{});
  ASSERT_EQ(k.kernel_dimension, 2);
  // spans d/dx3, d/dx4
  EXPECT_NEAR(k.basis.topRows(2).norm(), 0.0, 1e-14);
  EXPECT_NEAR(std::fabs((k.basis.transpose() * k.basis).determinant()), 1.0, 1e-12);
}

TEST(Kernel, ZeroForm) { EXPECT_EQ(kernel_of_two_form(DifferentialForm(4, 2), Bindings{}).kernel_dimension, 4); }

TEST(JetDegree, Examples) {
  const RotationSpec spec = RotationSpec::symbolic(4, {1, 1});
  const auto om = rotation_two_form(spec);
  const auto lead = u_degree_classify(exterior_derivative(interior_product(VectorFieldSym::velocity(4), om)));
  EXPECT_EQ(lead.min, 1);
  EXPECT_EQ(lead.max, 1);
  const auto zero = u_degree_classify(om);
  EXPECT_EQ(zero.min, 0);
  EXPECT_EQ(zero.max, 0);
  const auto u = VectorFieldSym::velocity(4);
  const auto dU = exterior_derivative(DifferentialForm::velocity_one_form(4));
  const auto dUR = exterior_derivative(rotating_velocity_form(spec));
  const auto corr = u_degree_classify(lie_derivative(u, wedge(dU, dUR)));
  EXPECT_FALSE(corr.empty);
  EXPECT_GE(corr.min, 2);
  EXPECT_TRUE(u_degree_classify(DifferentialForm(4, 2)).empty);
}

TEST(Properties, Nilpotency) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 6;
    const int k = std::uniform_int_distribution<int>(0, d)(rng);
    DifferentialForm a = random_form(d, k, rng);
    // quadratic coordinate terms so the second derivative is exercised
    if (k <= d) a.add(MultiIndex::from_mask((1u << k) - 1u), X(1) * X(d) * X(1));
    EXPECT_TRUE(exterior_derivative(exterior_derivative(a)).is_zero()) << trial;
  }
}

TEST(Properties, Antisymmetry) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + trial % 6;
    const int ka = std::uniform_int_distribution<int>(0, d)(rng);
    const int kb = std::uniform_int_distribution<int>(0, d)(rng);
    const auto a = random_form(d, ka, rng);
    const auto b = random_form(d, kb, rng);
    const int sign = (ka * kb) % 2 == 0 ? 1 : -1;
    const auto ab = wedge(a, b);
    const auto ba = wedge(b, a) * ScalarExpr(sign);
    if (ab.is_zero()) {
      EXPECT_TRUE(ba.is_zero());
    } else {
      EXPECT_EQ(ab, ba) << trial;
    }
  }
}

TEST(Properties, CartanOnClosedForms) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const int d = 2 + trial % 5;
    const int k = std::uniform_int_distribution<int>(0, d - 1)(rng);
    const auto closed = exterior_derivative(random_form(d, k, rng));
    const auto u = VectorFieldSym::velocity(d);
    EXPECT_EQ(lie_derivative(u, closed), exterior_derivative(interior_product(u, closed))) << trial;
  }
}

TEST(Properties, CanonicalizationIdempotent) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_form(4, 2, rng);
    const auto twice = (a + a) - a;
    EXPECT_EQ(twice, a);
    EXPECT_EQ(twice.to_json(), a.to_json());
  }
  EXPECT_EQ(sym(Symbol::jet(1, 3, 2)), sym(Symbol::jet(1, 2, 3)));
}

TEST(Serialization, JsonShape) {
  const auto w = dx(3, {1, 2}, Rational(3, 2) * L(1));
  const auto j = w.to_json();
  EXPECT_EQ(j["d"], 3);
  EXPECT_EQ(j["k"], 2);
  ASSERT_EQ(j["terms"].size(), 1u);
  EXPECT_EQ(j["terms"][0]["index"], nlohmann::json::array({1, 2}));
  EXPECT_EQ(j["terms"][0]["coeff"].get<std::string>(), (Rational(3, 2) * L(1)).to_string());
}

TEST(Errors, MismatchedDimensions) {
  EXPECT_THROW(wedge(dx(3, {1}), dx(4, {1})), DimensionMismatch);
  EXPECT_THROW(dx(3, {4}), DimensionMismatch);
  EXPECT_THROW(DifferentialForm(17, 1), DimensionMismatch);
  DifferentialForm a = dx(3, {1});
  EXPECT_THROW(a += dx(3, {1, 2}), DegreeError);
}
