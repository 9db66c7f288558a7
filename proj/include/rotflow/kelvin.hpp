#pragma once
// Material circuits and 3-chains advected through closed-form rotating-frame
// flows; circulation, projected areas, first-order Lie estimate and the
// third-order chain invariant.

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <nlohmann/json.hpp>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "rotflow/form.hpp"
#include "rotflow/spectral.hpp"

namespace rotflow {

class StepRejected : public Error {
 public:
  using Error::Error;
};

class ChainDegenerate : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Deterministic data-parallel helpers

inline unsigned default_threads() {
  const unsigned h = std::thread::hardware_concurrency();
  return h == 0 ? 1 : std::min(h, 16u);
}

/// Calls f(i) for i in [0, n) on `threads` workers with static contiguous chunks.
template <class F>
void parallel_for(std::size_t n, F&& f, unsigned threads = 0) {
  if (threads == 0) threads = default_threads();
  if (threads <= 1 || n < 256) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  const std::size_t chunk = (n + threads - 1) / threads;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&f, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

/// Pairwise (cascade) summation; fixed tree shape, so independent of thread count.
inline double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}
inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

// ---------------------------------------------------------------------------
// Flow catalog

enum class FlowKind { Rigid, TaylorGreen, Shear };

class FlowField {
 public:
  FlowField(FlowKind kind, RotationSpec spec, int plane = 1) : kind_(kind), spec_(std::move(spec)), plane_(plane) {
    const int d = spec_.dimension();
    if (!spec_.is_numeric()) throw InputError("flows need numeric rates");
    if (kind_ != FlowKind::Rigid) {
      if (plane_ < 1 || plane_ > static_cast<int>(spec_.plane_count())) throw InputError("flow plane index out of range");
      a_ = spec_.planes()[static_cast<std::size_t>(plane_ - 1)].p;
      b_ = spec_.planes()[static_cast<std::size_t>(plane_ - 1)].q;
      for (int c = d; c >= 1 && c_ == 0; --c)
        if (c != a_ && c != b_) c_ = c;
      if (kind_ == FlowKind::Shear && c_ == 0) throw InputError("shear_nonsolution needs an axis outside the plane");
    }
    build_symbolic();
  }

  [[nodiscard]] int dimension() const { return spec_.dimension(); }
  [[nodiscard]] const RotationSpec& spec() const { return spec_; }
  [[nodiscard]] FlowKind kind() const { return kind_; }
  [[nodiscard]] bool is_rotating_frame_euler_solution() const { return euler_; }
  [[nodiscard]] const VectorFieldSym& symbolic() const { return sym_; }

  [[nodiscard]] std::string name() const {
    switch (kind_) {
      case FlowKind::Rigid: return "rigid";
      case FlowKind::TaylorGreen: return "taylor_green_plane(" + std::to_string(plane_) + ")";
      case FlowKind::Shear: return "shear_nonsolution";
    }
    return "?";
  }

  void velocity(const double* x, double* u) const {
    std::fill(u, u + dimension(), 0.0);
    if (kind_ == FlowKind::TaylorGreen) {
      const double xa = x[a_ - 1], xb = x[b_ - 1];
      u[a_ - 1] = std::cos(xa) * std::sin(xb);
      u[b_ - 1] = -std::sin(xa) * std::cos(xb);
    } else if (kind_ == FlowKind::Shear) {
      u[a_ - 1] = std::sin(x[c_ - 1]);
      u[c_ - 1] = std::sin(x[b_ - 1]);
    }
  }

  /// J[i*d + j] = d u_i / d x_j.
  void jacobian(const double* x, double* J) const {
    const int d = dimension();
    std::fill(J, J + d * d, 0.0);
    if (kind_ == FlowKind::TaylorGreen) {
      const double ca = std::cos(x[a_ - 1]), sa = std::sin(x[a_ - 1]);
      const double cb = std::cos(x[b_ - 1]), sb = std::sin(x[b_ - 1]);
      J[(a_ - 1) * d + (a_ - 1)] = -sa * sb;
      J[(a_ - 1) * d + (b_ - 1)] = ca * cb;
      J[(b_ - 1) * d + (a_ - 1)] = -ca * cb;
      J[(b_ - 1) * d + (b_ - 1)] = sa * sb;
    } else if (kind_ == FlowKind::Shear) {
      J[(a_ - 1) * d + (c_ - 1)] = std::cos(x[c_ - 1]);
      J[(c_ - 1) * d + (b_ - 1)] = std::cos(x[b_ - 1]);
    }
  }

  [[nodiscard]] std::vector<double> velocity(const std::vector<double>& x) const {
    std::vector<double> u(static_cast<std::size_t>(dimension()));
    velocity(x.data(), u.data());
    return u;
  }

 private:
  void build_symbolic() {
    const int d = dimension();
    std::vector<ScalarExpr> comps(static_cast<std::size_t>(d));
    if (kind_ == FlowKind::TaylorGreen) {
      comps[a_ - 1] = sym(Symbol::cos_of(a_)) * sym(Symbol::sin_of(b_));
      comps[b_ - 1] = -(sym(Symbol::sin_of(a_)) * sym(Symbol::cos_of(b_)));
    } else if (kind_ == FlowKind::Shear) {
      comps[a_ - 1] = sym(Symbol::sin_of(c_));
      comps[c_ - 1] = sym(Symbol::sin_of(b_));
    }
    sym_ = VectorFieldSym(comps);

    DifferentialForm U(d, 1);
    for (int i = 1; i <= d; ++i) U += DifferentialForm::basis(d, {i}, comps[i - 1]);
    const DifferentialForm omega = rotation_two_form(spec_);
    if (kind_ == FlowKind::TaylorGreen) {
      const ScalarExpr lam = spec_.rate_expr(static_cast<std::size_t>(plane_ - 1));
      const ScalarExpr psi = -(sym(Symbol::cos_of(a_)) * sym(Symbol::cos_of(b_)));
      const DifferentialForm gap = interior_product(sym_, omega) * ScalarExpr(2) - DifferentialForm::differential(d, psi) * (ScalarExpr(2) * lam);
      if (!gap.is_zero()) throw Error("Taylor-Green Coriolis form is not exact: " + gap.to_string());
    }
    ScalarExpr div;
    for (int i = 1; i <= d; ++i) div += comps[i - 1].partial(i);
    const DifferentialForm closure = exterior_derivative(interior_product(sym_, exterior_derivative(U) + omega * ScalarExpr(2)));
    euler_ = div.is_zero() && closure.is_zero();
  }

  FlowKind kind_;
  RotationSpec spec_;
  int plane_ = 1;
  int a_ = 0, b_ = 0, c_ = 0;
  VectorFieldSym sym_{std::vector<ScalarExpr>{}};
  bool euler_ = false;
};

inline FlowField flow_catalog(const std::string& name, const RotationSpec& spec, int plane = 1) {
  if (name == "rigid") return {FlowKind::Rigid, spec};
  if (name == "taylor_green_plane" || name == "taylor_green") return {FlowKind::TaylorGreen, spec, plane};
  if (name == "shear_nonsolution" || name == "shear") return {FlowKind::Shear, spec, plane};
  throw InputError("unknown flow '" + name + "'");
}

// ---------------------------------------------------------------------------
// Point sets: circuits (periodic in one parameter) and 3-chains (periodic in three)

/// N nodes in d dimensions, stored node-major.
struct PointSet {
  int d = 0;
  std::size_t n = 0;
  std::vector<double> x;

  [[nodiscard]] const double* node(std::size_t i) const { return x.data() + i * static_cast<std::size_t>(d); }
  double* node(std::size_t i) { return x.data() + i * static_cast<std::size_t>(d); }
};

struct Circuit {
  PointSet pts;

  [[nodiscard]] int dimension() const { return pts.d; }
  [[nodiscard]] std::size_t size() const { return pts.n; }

  static Circuit from_nodes(int d, std::vector<double> xs) {
    if (d < 1 || xs.size() % static_cast<std::size_t>(d) != 0) throw InputError("node list length is not a multiple of d");
    Circuit c;
    c.pts = {d, xs.size() / static_cast<std::size_t>(d), std::move(xs)};
    if (c.pts.n < 64) throw InputError("circuits need at least 64 nodes");
    return c;
  }

  /// center + r (cos 2 pi t e_u + sin 2 pi t e_v) with e_u, e_v orthonormalized.
  static Circuit circle(std::vector<double> center, double radius, std::vector<double> eu, std::vector<double> ev, std::size_t n) {
    const int d = static_cast<int>(center.size());
    if (eu.size() != center.size() || ev.size() != center.size()) throw DimensionMismatch("circle vectors differ in length");
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
      double s = 0;
      for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
      return s;
    };
    const double nu = std::sqrt(dot(eu, eu));
    if (nu == 0) throw InputError("degenerate circle orientation");
    for (auto& v : eu) v /= nu;
    const double proj = dot(eu, ev);
    for (std::size_t i = 0; i < ev.size(); ++i) ev[i] -= proj * eu[i];
    const double nv = std::sqrt(dot(ev, ev));
    if (nv == 0) throw InputError("degenerate circle orientation");
    for (auto& v : ev) v /= nv;
    std::vector<double> xs(n * static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < n; ++i) {
      const double t = 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
      for (int j = 0; j < d; ++j) xs[i * d + j] = center[j] + radius * (std::cos(t) * eu[j] + std::sin(t) * ev[j]);
    }
    return from_nodes(d, std::move(xs));
  }

  static Circuit planar_circle(int d, int p, int q, double radius, std::size_t n, std::vector<double> center = {}) {
    if (center.empty()) center.assign(static_cast<std::size_t>(d), 0.0);
    std::vector<double> eu(static_cast<std::size_t>(d), 0.0), ev(static_cast<std::size_t>(d), 0.0);
    eu[p - 1] = 1;
    ev[q - 1] = 1;
    return circle(std::move(center), radius, std::move(eu), std::move(ev), n);
  }

  /// Closed curve center + sum_m (a_m cos 2 pi m t + b_m sin 2 pi m t), m = 1..modes,
  /// coefficients drawn by `draw` (called 2 d modes times) and damped by 1/m^2.
  template <class Draw>
  static Circuit random_fourier(int d, int modes, std::size_t n, double scale, Draw&& draw) {
    std::vector<std::vector<double>> a(static_cast<std::size_t>(modes)), b(static_cast<std::size_t>(modes));
    std::vector<double> center(static_cast<std::size_t>(d));
    for (auto& c : center) c = draw();
    for (int m = 0; m < modes; ++m) {
      for (int j = 0; j < d; ++j) a[m].push_back(scale * draw() / ((m + 1.0) * (m + 1.0)));
      for (int j = 0; j < d; ++j) b[m].push_back(scale * draw() / ((m + 1.0) * (m + 1.0)));
    }
    std::vector<double> xs(n * static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < n; ++i) {
      const double t = 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
      for (int j = 0; j < d; ++j) {
        double v = center[j];
        for (int m = 0; m < modes; ++m) v += a[m][j] * std::cos((m + 1) * t) + b[m][j] * std::sin((m + 1) * t);
        xs[i * d + j] = v;
      }
    }
    return from_nodes(d, std::move(xs));
  }
};

/// Spectral derivative d/dtheta (theta in [0,1)) of each coordinate of a periodic node sequence.
inline std::vector<double> spectral_tangents(const PointSet& pts) {
  const std::size_t n = pts.n;
  const int d = pts.d;
  std::vector<double> out(pts.x.size());
  std::vector<double> line(n);
  std::vector<std::complex<double>> spec(n / 2 + 1);
  const int ni = static_cast<int>(n);
  fftw_plan fwd = fftw_plan_dft_r2c_1d(ni, line.data(), reinterpret_cast<fftw_complex*>(spec.data()), FFTW_ESTIMATE);
  fftw_plan bwd = fftw_plan_dft_c2r_1d(ni, reinterpret_cast<fftw_complex*>(spec.data()), line.data(), FFTW_ESTIMATE);
  for (int j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) line[i] = pts.x[i * d + j];
    fftw_execute(fwd);
    for (std::size_t m = 0; m < spec.size(); ++m) {
      const double w = 2 * std::numbers::pi * static_cast<double>(m);
      spec[m] *= std::complex<double>(0, w) / static_cast<double>(n);
    }
    if (n % 2 == 0) spec.back() = 0;
    fftw_execute(bwd);
    for (std::size_t i = 0; i < n; ++i) out[i * d + j] = line[i];
  }
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(bwd);
  return out;
}

/// 3-chain on an M^3 periodic grid (a 3-torus embedding).
struct Chain3 {
  PointSet pts;
  std::size_t m = 0;

  [[nodiscard]] std::size_t at(std::size_t i, std::size_t j, std::size_t k) const { return (i * m + j) * m + k; }

  /// x1 + i x2 = r1 e^{2 pi i t1}, x3 + i x4 = r2 e^{2 pi i t2},
  /// (r1, r2) = (R1, R2) + rho (cos 2 pi t3, sin 2 pi t3); remaining axes at `offset`.
  /// A nonzero tilt (d >= 5) rotates the x1 direction toward x_d by that angle.
  static Chain3 torus(int d, std::size_t m, double R1, double R2, double rho, double tilt = 0.0, std::vector<double> offset = {}) {
    if (d < 4) throw InputError("the 3-torus chain needs d >= 4");
    if (m < 8) throw InputError("chains need at least 8 nodes per axis");
    if (rho >= std::min(R1, R2)) throw InputError("torus tube radius must be below both core radii");
    if (tilt != 0.0 && d < 5) throw InputError("a tilted chain needs d >= 5");
    if (offset.empty()) offset.assign(static_cast<std::size_t>(d), 0.0);
    Chain3 c;
    c.m = m;
    c.pts = {d, m * m * m, std::vector<double>(m * m * m * static_cast<std::size_t>(d))};
    const double tau = 2 * std::numbers::pi;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = 0; k < m; ++k) {
          const double t1 = tau * i / m, t2 = tau * j / m, t3 = tau * k / m;
          const double r1 = R1 + rho * std::cos(t3), r2 = R2 + rho * std::sin(t3);
          double* x = c.pts.node(c.at(i, j, k));
          for (int a = 0; a < d; ++a) x[a] = offset[a];
          x[0] += r1 * std::cos(t1) * std::cos(tilt);
          x[1] += r1 * std::sin(t1);
          x[2] += r2 * std::cos(t2);
          x[3] += r2 * std::sin(t2);
          if (d >= 5) x[d - 1] += r1 * std::cos(t1) * std::sin(tilt);
        }
    return c;
  }
};

// ---------------------------------------------------------------------------
// Advection

struct AdvectOptions {
  double dt = 1e-3;
  double max_step_displacement = 1.0;
  unsigned threads = 0;
};

/// Classical RK4 on every node, in place, for `steps` steps.
inline void advect_points(PointSet& pts, const FlowField& flow, std::size_t steps, const AdvectOptions& opt) {
  const int d = pts.d;
  if (d != flow.dimension()) throw DimensionMismatch("points and flow differ in dimension");
  if (opt.dt <= 0) throw InputError("dt must be positive");
  std::vector<double> disp(pts.n, 0.0);
  for (std::size_t s = 0; s < steps; ++s) {
    parallel_for(
        pts.n,
        [&](std::size_t i) {
          double* x = pts.node(i);
          double k1[kMaxDimension], k2[kMaxDimension], k3[kMaxDimension], k4[kMaxDimension], y[kMaxDimension];
          const double h = opt.dt;
          flow.velocity(x, k1);
          for (int a = 0; a < d; ++a) y[a] = x[a] + 0.5 * h * k1[a];
          flow.velocity(y, k2);
          for (int a = 0; a < d; ++a) y[a] = x[a] + 0.5 * h * k2[a];
          flow.velocity(y, k3);
          for (int a = 0; a < d; ++a) y[a] = x[a] + h * k3[a];
          flow.velocity(y, k4);
          double dd = 0;
          for (int a = 0; a < d; ++a) {
            const double dx = h / 6.0 * (k1[a] + 2 * k2[a] + 2 * k3[a] + k4[a]);
            x[a] += dx;
            dd += dx * dx;
          }
          disp[i] = std::sqrt(dd);
        },
        opt.threads);
    const double worst = *std::max_element(disp.begin(), disp.end());
    if (worst > opt.max_step_displacement)
      throw StepRejected("node moved " + std::to_string(worst) + " in one step (limit " + std::to_string(opt.max_step_displacement) +
                         "): dt too large");
  }
}

inline std::size_t step_count(double t_end, double dt) {
  if (t_end < 0) throw InputError("t_end must be nonnegative");
  if (dt <= 0) throw InputError("dt must be positive");
  const double s = t_end / dt;
  const double r = std::round(s);
  if (std::fabs(s - r) > 1e-9 * std::max(1.0, s)) throw InputError("t_end must be an integer multiple of dt");
  return static_cast<std::size_t>(r);
}

struct Snapshot {
  double t = 0;
  PointSet pts;
};

/// Trajectory with snapshots every `every` steps (and at the end).
inline std::vector<Snapshot> advect(const PointSet& start, const FlowField& flow, double t_end, const AdvectOptions& opt,
                                    std::size_t every = 0) {
  const std::size_t steps = step_count(t_end, opt.dt);
  if (every == 0) every = std::max<std::size_t>(steps, 1);
  std::vector<Snapshot> out{{0.0, start}};
  PointSet cur = start;
  std::size_t done = 0;
  while (done < steps) {
    const std::size_t chunk = std::min(every, steps - done);
    advect_points(cur, flow, chunk, opt);
    done += chunk;
    out.push_back({static_cast<double>(done) * opt.dt, cur});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Circulation and areas

/// Integrand pieces of U + U_R at each node: u(x) + u_R(x), u_R from the rotating velocity form.
class CirculationIntegrand {
 public:
  CirculationIntegrand(const FlowField& flow, const RotationSpec& spec)
      : flow_(&flow), ur_(rotating_velocity_form(spec)), d_(spec.dimension()) {
    if (flow.dimension() != d_) throw DimensionMismatch("flow and spec differ in dimension");
    for (std::size_t c = 0; c < ur_.component_count(); ++c) axis_.push_back(ur_.index(c).axes()[0]);
  }

  /// Writes the covector (u + u_R) at x into out; gauge adds grad(sin x_1) when set.
  void covector(const double* x, double* out, bool with_flow = true, bool gauge = false) const {
    if (with_flow) {
      flow_->velocity(x, out);
    } else {
      std::fill(out, out + d_, 0.0);
    }
    std::vector<double> slots(ur_.symbols().size());
    for (std::size_t s = 0; s < slots.size(); ++s) slots[s] = x[ur_.symbols()[s].i() - 1];
    std::vector<double> vals;
    ur_.evaluate(slots, vals);
    for (std::size_t c = 0; c < vals.size(); ++c) out[axis_[c] - 1] += vals[c];
    if (gauge) out[0] += std::cos(x[0]);
  }

 private:
  const FlowField* flow_;
  CompiledForm ur_;
  int d_;
  std::vector<int> axis_;
};

struct CirculationOptions {
  bool include_flow = true;  // false: the rotating part U_R alone
  bool gauge = false;        // add grad(sin x_1) to u
  unsigned threads = 0;
};

/// Trapezoid rule with spectral tangents of the line integral of (u + u_R).dr.
inline double circulation(const Circuit& c, const FlowField& flow, const RotationSpec& spec, const CirculationOptions& opt = {}) {
  const CirculationIntegrand integrand(flow, spec);
  const std::vector<double> tang = spectral_tangents(c.pts);
  const int d = c.dimension();
  std::vector<double> contrib(c.size());
  parallel_for(
      c.size(),
      [&](std::size_t i) {
        double w[kMaxDimension];
        integrand.covector(c.pts.node(i), w, opt.include_flow, opt.gauge);
        double s = 0;
        for (int a = 0; a < d; ++a) s += w[a] * tang[i * d + a];
        contrib[i] = s;
      },
      opt.threads);
  return pairwise_sum(contrib) / static_cast<double>(c.size());
}

struct ProjectionAreas {
  std::vector<double> areas;  // signed area per plane of the spec
  double weighted = 0;        // sum 2 lambda_i A_i
  double rotating_circulation = 0;
  double residual = 0;  // |weighted - rotating_circulation|
};

/// A_i from the Fourier coefficients of z = x_p + i x_q (A = pi sum n |c_n|^2),
/// compared with the quadrature of U_R.
inline ProjectionAreas projection_areas(const Circuit& c, const RotationSpec& spec) {
  const std::size_t n = c.size();
  const int d = c.dimension();
  ProjectionAreas out;
  std::vector<std::complex<double>> z(n), zh(n);
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(z.data()), reinterpret_cast<fftw_complex*>(zh.data()),
                                    FFTW_FORWARD, FFTW_ESTIMATE);
  for (std::size_t pi = 0; pi < spec.plane_count(); ++pi) {
    const auto& pl = spec.planes()[pi];
    for (std::size_t i = 0; i < n; ++i) z[i] = {c.pts.x[i * d + pl.p - 1], c.pts.x[i * d + pl.q - 1]};
    fftw_execute(plan);
    std::vector<double> terms;
    for (std::size_t m = 1; m < n; ++m) {
      const double freq = m <= n / 2 ? static_cast<double>(m) : static_cast<double>(m) - static_cast<double>(n);
      if (n % 2 == 0 && m == n / 2) continue;
      terms.push_back(freq * std::norm(zh[m] / static_cast<double>(n)));
    }
    out.areas.push_back(std::numbers::pi * pairwise_sum(terms));
    out.weighted += 2 * spec.rate_value(pi) * out.areas.back();
  }
  fftw_destroy_plan(plan);
  const FlowField still(FlowKind::Rigid, spec);
  out.rotating_circulation = circulation(c, still, spec, {false, false, 0});
  out.residual = std::fabs(out.weighted - out.rotating_circulation);
  return out;
}

// ---------------------------------------------------------------------------
// First-order Lie estimate

struct LieCheck {
  std::vector<double> times;
  std::vector<double> errors;
  double lie_rate = 0;  // integral of L_u(U + U_R) over c(0)
  double slope = 0;
};

inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Slot values for a compiled form in jets u_i, u_{i,j} and coordinates, from the flow at x.
inline void fill_flow_slots(const CompiledForm& f, const FlowField& flow, const double* x, std::vector<double>& slots) {
  const int d = flow.dimension();
  double u[kMaxDimension];
  double J[kMaxDimension * kMaxDimension];
  flow.velocity(x, u);
  flow.jacobian(x, J);
  slots.resize(f.symbols().size());
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const Symbol sy = f.symbols()[s];
    switch (sy.kind()) {
      case SymbolKind::Coord: slots[s] = x[sy.i() - 1]; break;
      case SymbolKind::Jet0: slots[s] = u[sy.i() - 1]; break;
      case SymbolKind::Jet1: slots[s] = J[(sy.i() - 1) * d + (sy.j() - 1)]; break;
      default: throw UnboundSymbol("no flow value for " + sy.name());
    }
  }
}

inline LieCheck lie_first_order_check(const Circuit& c0, const FlowField& flow, const RotationSpec& spec,
                                      const std::vector<double>& times = {1e-1, 1e-2, 1e-3}, int substeps = 20) {
  const int d = c0.dimension();
  const DifferentialForm total = DifferentialForm::velocity_one_form(d) + rotating_velocity_form(spec);
  const CompiledForm lie(lie_derivative(VectorFieldSym::velocity(d), total));
  const std::vector<double> tang = spectral_tangents(c0.pts);
  std::vector<double> contrib(c0.size());
  parallel_for(c0.size(), [&](std::size_t i) {
    std::vector<double> slots, vals;
    fill_flow_slots(lie, flow, c0.pts.node(i), slots);
    lie.evaluate(slots, vals);
    double s = 0;
    for (std::size_t k = 0; k < vals.size(); ++k) s += vals[k] * tang[i * d + lie.index(k).axes()[0] - 1];
    contrib[i] = s;
  });
  LieCheck out;
  out.lie_rate = pairwise_sum(contrib) / static_cast<double>(c0.size());
  const double g0 = circulation(c0, flow, spec);
  for (double t : times) {
    Circuit ct = c0;
    AdvectOptions opt;
    opt.dt = t / substeps;
    advect_points(ct.pts, flow, static_cast<std::size_t>(substeps), opt);
    const double gt = circulation(ct, flow, spec);
    out.times.push_back(t);
    out.errors.push_back(std::fabs(gt - g0 - t * out.lie_rate));
  }
  bool positive = std::all_of(out.errors.begin(), out.errors.end(), [](double e) { return e > 0; });
  out.slope = positive ? loglog_slope(out.times, out.errors) : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Third-order chain invariant

/// The 3-form (U + U_R) ^ d(U + U_R), compiled for pointwise evaluation.
inline CompiledForm compile_helicity_form(const RotationSpec& spec) {
  const int d = spec.dimension();
  const DifferentialForm a = DifferentialForm::velocity_one_form(d) + rotating_velocity_form(spec);
  return CompiledForm(wedge(a, exterior_derivative(a)));
}

struct ChainIntegral {
  double value = 0;
  double min_volume = 0;  // smallest |t1 ^ t2 ^ t3| over nodes
};

/// Node quadrature of the pulled-back 3-form; tangents by periodic central
/// differences on the grid (4-point stencil, or 2-point when `stencil` is 2).
inline ChainIntegral chain_integral(const Chain3& ch, const FlowField& flow, const CompiledForm& h, unsigned threads = 0, int stencil = 4) {
  if (stencil != 2 && stencil != 4) throw InputError("stencil must be 2 or 4");
  const int d = ch.pts.d;
  const std::size_t m = ch.m;
  const double inv_h = static_cast<double>(m);
  std::vector<double> contrib(ch.pts.n), vol(ch.pts.n);
  std::vector<std::array<int, 3>> comps;
  for (std::size_t c = 0; c < h.component_count(); ++c) {
    const auto ax = h.index(c).axes();
    comps.push_back({ax[0] - 1, ax[1] - 1, ax[2] - 1});
  }
  parallel_for(
      ch.pts.n,
      [&](std::size_t id) {
        const std::size_t idx[3] = {id / (m * m), (id / m) % m, id % m};
        auto shifted = [&](int axis, long off) {
          std::size_t p[3] = {idx[0], idx[1], idx[2]};
          p[axis] = static_cast<std::size_t>((static_cast<long>(p[axis]) + off + 2 * static_cast<long>(m)) % static_cast<long>(m));
          return ch.pts.node(ch.at(p[0], p[1], p[2]));
        };
        double t[3][kMaxDimension];
        for (int a = 0; a < 3; ++a) {
          const double* p1 = shifted(a, 1);
          const double* m1 = shifted(a, -1);
          if (stencil == 2) {
            for (int c = 0; c < d; ++c) t[a][c] = (p1[c] - m1[c]) * inv_h / 2.0;
          } else {
            const double* p2 = shifted(a, 2);
            const double* m2 = shifted(a, -2);
            for (int c = 0; c < d; ++c) t[a][c] = (8.0 * (p1[c] - m1[c]) - (p2[c] - m2[c])) * inv_h / 12.0;
          }
        }
        std::vector<double> slots, vals;
        fill_flow_slots(h, flow, ch.pts.node(id), slots);
        h.evaluate(slots, vals);
        double s = 0;
        double v2 = 0;
        for (std::size_t c = 0; c < comps.size(); ++c) {
          const auto [p, q, r] = comps[c];
          const double det = t[0][p] * (t[1][q] * t[2][r] - t[1][r] * t[2][q]) - t[0][q] * (t[1][p] * t[2][r] - t[1][r] * t[2][p]) +
                             t[0][r] * (t[1][p] * t[2][q] - t[1][q] * t[2][p]);
          s += vals[c] * det;
        }
        // Gram volume over all 3-subsets
        for (int p = 0; p < d; ++p)
          for (int q = p + 1; q < d; ++q)
            for (int r = q + 1; r < d; ++r) {
              const double det = t[0][p] * (t[1][q] * t[2][r] - t[1][r] * t[2][q]) - t[0][q] * (t[1][p] * t[2][r] - t[1][r] * t[2][p]) +
                                 t[0][r] * (t[1][p] * t[2][q] - t[1][q] * t[2][p]);
              v2 += det * det;
            }
        contrib[id] = s;
        vol[id] = std::sqrt(v2);
      },
      threads);
  ChainIntegral out;
  out.value = pairwise_sum(contrib) / static_cast<double>(ch.pts.n);
  out.min_volume = *std::min_element(vol.begin(), vol.end());
  return out;
}

struct ChainDrift {
  double initial = 0;
  double final_value = 0;
  double drift = 0;  // relative
};

inline ChainDrift chain_invariant(const Chain3& ch0, const FlowField& flow, const RotationSpec& spec, double t_end, double dt,
                                  unsigned threads = 0, int stencil = 4) {
  const CompiledForm h = compile_helicity_form(spec);
  const ChainIntegral i0 = chain_integral(ch0, flow, h, threads, stencil);
  Chain3 ch = ch0;
  AdvectOptions opt;
  opt.dt = dt;
  opt.threads = threads;
  advect_points(ch.pts, flow, step_count(t_end, dt), opt);
  const ChainIntegral i1 = chain_integral(ch, flow, h, threads, stencil);
  if (i1.min_volume < 1e-6 * i0.min_volume)
    throw ChainDegenerate("chain cell collapsed: volume element " + std::to_string(i1.min_volume) + " vs initial " +
                          std::to_string(i0.min_volume));
  ChainDrift out;
  out.initial = i0.value;
  out.final_value = i1.value;
  out.drift = std::fabs(i1.value - i0.value) / std::max(std::fabs(i0.value), 1e-300);
  return out;
}

}  // namespace rotflow
