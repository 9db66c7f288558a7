// Inertial-wave frequencies for a double rotation in d = 4 as the wavevector
// turns from plane (1,2) into plane (3,4), and the two wave pairs in d = 5.
#include <cmath>
#include <iomanip>
#include <iostream>
#include <numbers>

#include "rotflow/waves.hpp"

using namespace rotflow;

int main() {
  const Rational l1(2), l2(1);
  const RotationSpec e4 = RotationSpec::canonical(4, {l1, l2}, std::vector<int>{1, 1});
  std::cout << "theta      w_solver        w_closed_form   zero_root\n" << std::setprecision(12);
  for (int i = 0; i <= 8; ++i) {
    // k = (cos t, 0, sin t, 0), rationalized
    const double t = i * std::numbers::pi / 16;
    const std::vector<Rational> k = {rational_from_double(std::cos(t)), 0, rational_from_double(std::sin(t)), 0};
    const DispersionResult res = dispersion_roots(NormalModeMatrix(e4, k), false);
    const auto w = res.nonzero_roots();
    std::vector<double> kd;
    for (const auto& q : k) kd.push_back(q.get_d());
    std::cout << std::setw(8) << t << "  " << std::setw(14) << (w.empty() ? 0.0 : w.back()) << "  " << std::setw(14)
              << e4_reference_frequency(2, 1, kd) << "  " << (res.has(Branch::NaturalVortical) ? "natural" : "-") << "\n";
  }

  const RotationSpec e5 = RotationSpec::canonical(5, {Rational(3), Rational(2)}, std::vector<int>{1, 1});
  const std::vector<Rational> k = {1, 2, 3, 4, 5};
  const DispersionResult res = dispersion_roots(NormalModeMatrix(e5, k), false);
  std::cout << "\nd=5, lambda=(3,2), k=(1,2,3,4,5): positive roots";
  for (double w : res.nonzero_roots())
    if (w > 0) std::cout << " " << w;
  std::cout << "\nclosed form (outer branch): " << e5_reference_frequency(3, 2, {1, 2, 3, 4, 5}) << "\n";
}
