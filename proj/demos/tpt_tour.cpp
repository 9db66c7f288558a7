// Fast-rotation constraint sets for the standard rotation layouts in d = 3, 4, 5.
#include <iostream>

#include "rotflow/tpt.hpp"

using namespace rotflow;

static void show(const std::string& title, const RotationSpec& spec, int k, BalanceMode mode) {
  const ConstraintSet cs = derive_constraints(spec, k, mode);
  std::cout << "== " << title << "\n" << cs.text_table();
  if (k == 1) std::cout << classify_reduction(cs, true).prose();
  std::cout << "\n";
}

int main() {
  show("d=3, one fast plane", RotationSpec::symbolic(3, {1}), 1, BalanceMode::Combined);
  show("d=4, simultaneously fast double rotation", RotationSpec::symbolic(4, {1, 1}), 1, BalanceMode::Combined);
  show("d=4, independently fast double rotation", RotationSpec::symbolic(4, {2, 1}), 1, BalanceMode::DominantBalance);
  show("d=4, simple rotation", RotationSpec::symbolic(4, {1}), 1, BalanceMode::Combined);
  show("d=5, double rotation", RotationSpec::symbolic(5, {1, 1}), 1, BalanceMode::Combined);
  show("d=5, double rotation, second Kelvin order", RotationSpec::symbolic(5, {1, 1}), 2, BalanceMode::Combined);

  // lambda_1 = 3 lambda_2 is the unit-ratio set after stretching plane (1,2)
  const ConstraintSet e4 = derive_constraints(RotationSpec::symbolic(4, {1, 1}), 1, BalanceMode::Combined);
  const RescaleResult rr = rescale_rates(e4, Rational(3));
  std::cout << "== lambda_1 = 3 lambda_2\n";
  for (const auto& c : rr.set.constraints) std::cout << "  " << c.text() << "\n";
  std::cout << "equivalent to the stretched unit-ratio set: " << (rr.equivalent ? "yes" : "no") << "\n";

  const CorrectionDegree cd = higher_order_correction_degree(RotationSpec::symbolic(4, {1, 1}));
  std::cout << "jet degree of the leading term: " << cd.leading.min << ", of L_u(dU ^ dU_R): " << cd.correction.min << ".."
            << cd.correction.max << "\n";
}
