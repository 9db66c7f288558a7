// Circulation of a material circuit in Taylor-Green cells: conservation over
// t = 1, and the share of the rotation term sum 2 lambda_i A_i as lambda grows.
#include <iomanip>
#include <iostream>

#include "rotflow/kelvin.hpp"

using namespace rotflow;

int main() {
  const std::vector<double> center = {0.3, 0.2, 0.1}, eu = {1, 0.2, 0.5}, ev = {0.1, 1, -0.4};
  const Circuit c0 = Circuit::circle(center, 1.0, eu, ev, 1024);
  std::cout << "lambda   circulation(0)   circulation(1)   rel.drift   rotation share\n" << std::setprecision(6);
  for (int lam : {1, 4, 16, 64, 256}) {
    const RotationSpec spec = RotationSpec::canonical(3, {Rational(lam)});
    const FlowField tg = flow_catalog("taylor_green_plane", spec);
    const double g0 = circulation(c0, tg, spec);
    Circuit c = c0;
    AdvectOptions opt;
    opt.dt = 1e-3;
    advect_points(c.pts, tg, step_count(1.0, opt.dt), opt);
    const double g1 = circulation(c, tg, spec);
    const ProjectionAreas pa = projection_areas(c, spec);
    std::cout << std::setw(6) << lam << "  " << std::setw(15) << g0 << "  " << std::setw(15) << g1 << "  " << std::setw(10)
              << std::fabs(g1 - g0) / std::fabs(g0) << "  " << pa.weighted / g1 << "\n";
  }
}
