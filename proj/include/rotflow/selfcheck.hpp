#pragma once
// Self-check suite: golden constraint sets plus the exact and numeric
// property checks, each reported as one named pass/fail item.

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <complex>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rotflow/io.hpp"
#include "rotflow/kelvin.hpp"
#include "rotflow/tpt.hpp"
#include "rotflow/waves.hpp"

namespace rotflow {

struct CheckResult {
  int id = 0;
  std::string key;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0;
  nlohmann::json metrics = nlohmann::json::object();

  [[nodiscard]] nlohmann::json to_json() const {
    return {{"id", id}, {"key", key}, {"title", title}, {"passed", passed}, {"detail", detail}, {"metrics", metrics}};
  }
  [[nodiscard]] std::string line() const {
    std::ostringstream os;
    os << (passed ? "PASS" : "FAIL") << " [" << id << "] " << key << ": " << detail;
    return os.str();
  }
};

struct SelfCheckOptions {
  std::string filter;      // comma-separated substrings of check keys; empty runs all
  std::string golden_dir;  // directory of golden constraint files
  std::uint64_t seed = 20240611;
  unsigned threads = 0;
};

namespace check {

using Rng = std::mt19937_64;

inline Rational random_rational(Rng& rng, int num_lo, int num_hi, int den_hi) {
  std::uniform_int_distribution<int> num(num_lo, num_hi), den(1, den_hi);
  return {num(rng), den(rng)};
}

inline Rational random_nonzero(Rng& rng, int bound, int den_hi) {
  Rational q;
  do q = random_rational(rng, -bound, bound, den_hi);
  while (q == 0);
  q.canonicalize();
  return q;
}

inline double rel_err(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// 1. goldens

struct GoldenCase {
  std::string file;
  std::string name;
  RotationSpec spec{1, {}};
  int kelvin_order = 1;
  BalanceMode balance = BalanceMode::Combined;
  std::vector<ScalarExpr> relations;
};

inline GoldenCase read_golden(const std::filesystem::path& path) {
  const nlohmann::json j = nlohmann::json::parse(read_text_file(path.string()));
  GoldenCase g;
  g.file = path.filename().string();
  g.name = j.value("name", path.stem().string());
  g.spec = RotationSpec::symbolic(j.at("dim").get<int>(), j.at("orders").get<std::vector<int>>());
  g.kelvin_order = j.value("kelvin_order", 1);
  g.balance = parse_balance(j.value("balance", "combined"));
  for (const auto& r : j.at("relations")) g.relations.push_back(constraint_from_json(r).expr);
  return g;
}

inline CheckResult goldens(const SelfCheckOptions& opt) {
  CheckResult r{1, "golden", "golden constraint sets"};
  namespace fs = std::filesystem;
  if (opt.golden_dir.empty() || !fs::is_directory(opt.golden_dir)) {
    r.detail = "golden directory '" + opt.golden_dir + "' not found";
    return r;
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(opt.golden_dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    r.detail = "no golden files in " + opt.golden_dir;
    return r;
  }
  std::vector<std::string> failures;
  for (const auto& f : files) {
    try {
      const GoldenCase g = read_golden(f);
      const ConstraintSet cs = derive_constraints(g.spec, g.kelvin_order, g.balance);
      if (!cs.same_relations(g.relations)) {
        std::string got;
        for (const auto& c : cs.constraints) got += (got.empty() ? "" : "; ") + c.text();
        failures.push_back(g.file + " mismatch (derived: " + got + ")");
      }
      r.metrics["files"].push_back({{"file", g.file}, {"relations", g.relations.size()}});
    } catch (const std::exception& e) {
      failures.push_back(f.filename().string() + " unreadable: " + e.what());
    }
  }
  r.passed = failures.empty();
  if (r.passed) {
    r.detail = std::to_string(files.size()) + " golden sets reproduced";
  } else {
    for (const auto& s : failures) r.detail += (r.detail.empty() ? "" : " | ") + s;
  }
  return r;
}

// ---------------------------------------------------------------------------
// 2. d U_R = 2 Omega_R for every plane layout

inline void enumerate_matchings(int d, int next, std::uint32_t used, std::vector<PlaneRotation>& cur,
                                const std::function<void(const std::vector<PlaneRotation>&)>& visit) {
  while (next <= d && (used & MultiIndex::bit(next))) ++next;
  if (next > d) {
    visit(cur);
    return;
  }
  // `next` stays unpaired
  enumerate_matchings(d, next + 1, used | MultiIndex::bit(next), cur, visit);
  for (int q = next + 1; q <= d; ++q) {
    if (used & MultiIndex::bit(q)) continue;
    cur.push_back({next, q, std::nullopt, 1});
    enumerate_matchings(d, next + 1, used | MultiIndex::bit(next) | MultiIndex::bit(q), cur, visit);
    cur.pop_back();
  }
}

inline CheckResult lemma2(const SelfCheckOptions&) {
  CheckResult r{2, "lemma2", "dU_R - 2 Omega_R = 0 for all layouts, d <= 8"};
  std::size_t count = 0, bad = 0;
  std::string first_bad;
  for (int d = 2; d <= 8; ++d) {
    std::vector<PlaneRotation> cur;
    enumerate_matchings(d, 1, 0, cur, [&](const std::vector<PlaneRotation>& planes) {
      const RotationSpec spec(d, planes);
      const DifferentialForm res = exterior_derivative(rotating_velocity_form(spec)) - rotation_two_form(spec) * ScalarExpr(2);
      ++count;
      if (!res.is_zero()) {
        ++bad;
        if (first_bad.empty()) first_bad = spec.to_json().dump();
      }
    });
  }
  r.passed = bad == 0;
  r.metrics = {{"layouts", count}, {"failures", bad}};
  r.detail = std::to_string(count) + " layouts, " + std::to_string(bad) + " nonzero" + (first_bad.empty() ? "" : " (first: " + first_bad + ")");
  return r;
}

// ---------------------------------------------------------------------------
// 3. spectral decomposition

inline Eigen::MatrixXd random_orthogonal(int d, Rng& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = g(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ();
}

inline CheckResult spectral(const SelfCheckOptions& opt) {
  CheckResult r{3, "spectral", "block diagonalization of random skew matrices"};
  Rng rng(opt.seed ^ 0x3);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> dim(1, 10);
  double worst_rec = 0, worst_rate = 0, worst_orth = 0;
  std::size_t failures = 0;
  const int samples = 1000;
  for (int s = 0; s < samples; ++s) {
    const int d = dim(rng);
    Eigen::MatrixXd a(d, d);
    if (s % 3 == 2) {
      // prescribed rates with repeats and zero blocks
      const Eigen::MatrixXd q = random_orthogonal(d, rng);
      Eigen::MatrixXd lam = Eigen::MatrixXd::Zero(d, d);
      const double pool[] = {0.0, 0.5, 2.0, 2.0, 3.0};
      std::uniform_int_distribution<int> pick(0, 4);
      for (int i = 0; i + 1 < d; i += 2) {
        const double v = pool[pick(rng)];
        lam(i, i + 1) = v;
        lam(i + 1, i) = -v;
      }
      a = q * lam * q.transpose();
      a = 0.5 * (a - a.transpose());
    } else {
      Eigen::MatrixXd m(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = g(rng);
      a = m - m.transpose();
    }
    const double scale = d > 0 ? a.cwiseAbs().maxCoeff() : 0.0;
    const SpectralDecomposition dec = block_diagonalize(SkewMatrix(a));
    const double rec = dec.residual / std::max(scale, 1e-300);
    const double orth = (dec.q.transpose() * dec.q - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff();

    // oracle: |Im| of complex eigenvalues, each positive rate appearing twice
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(a.cast<std::complex<double>>());
    std::vector<double> oracle;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) oracle.push_back(std::fabs(es.eigenvalues()(i).imag()));
    std::vector<double> mine;
    for (double v : dec.rates) {
      mine.push_back(v);
      mine.push_back(v);
    }
    while (mine.size() < oracle.size()) mine.push_back(0.0);
    std::sort(oracle.begin(), oracle.end());
    std::sort(mine.begin(), mine.end());
    double rate_err = 0;
    const double top = oracle.empty() ? 0.0 : oracle.back();
    for (std::size_t i = 0; i < oracle.size(); ++i) rate_err = std::max(rate_err, std::fabs(mine[i] - oracle[i]) / std::max(top, 1e-300));
    if (scale == 0.0) rate_err = 0;
    worst_rec = std::max(worst_rec, rec);
    worst_rate = std::max(worst_rate, rate_err);
    worst_orth = std::max(worst_orth, orth);
    if (rec >= 1e-10 || rate_err >= 1e-9 || orth >= 1e-10) ++failures;
  }
  r.passed = failures == 0;
  r.metrics = {{"samples", samples}, {"max_reconstruction", worst_rec}, {"max_rate_error", worst_rate}, {"max_orthogonality", worst_orth}};
  r.detail = std::to_string(samples) + " matrices; reconstruction " + fmt(worst_rec) + " (< 1e-10), rates " + fmt(worst_rate) +
             " (< 1e-9), failures " + std::to_string(failures);
  return r;
}

// ---------------------------------------------------------------------------
// 4-6. normal modes

inline std::vector<Rational> random_wavevector(int d, Rng& rng, const std::vector<int>& zero_axes = {}) {
  std::vector<Rational> k(static_cast<std::size_t>(d));
  for (;;) {
    bool nonzero = false;
    for (int i = 0; i < d; ++i) {
      const bool forced = std::find(zero_axes.begin(), zero_axes.end(), i + 1) != zero_axes.end();
      k[i] = forced ? Rational(0) : random_rational(rng, -9, 9, 4);
      k[i].canonicalize();
      nonzero = nonzero || k[i] != 0;
    }
    if (nonzero) return k;
  }
}

inline std::vector<double> to_double(const std::vector<Rational>& v) {
  std::vector<double> out;
  for (const auto& q : v) out.push_back(q.get_d());
  return out;
}

inline Rational random_rate(Rng& rng) {
  Rational q = random_rational(rng, 1, 50, 7);
  q.canonicalize();
  return q;
}

inline CheckResult dispersion_e4(const SelfCheckOptions& opt) {
  CheckResult r{4, "dispersion_e4", "E4 double rotation and E3 reduction against closed forms"};
  Rng rng(opt.seed ^ 0x4);
  double worst4 = 0, worst3 = 0;
  std::size_t failures = 0;
  std::string first;
  const int samples = 1000;
  for (int s = 0; s < samples; ++s) {
    const Rational l1 = random_rate(rng), l2 = random_rate(rng);
    const RotationSpec spec = RotationSpec::canonical(4, {l1, l2}, std::vector<int>{1, 1});
    const auto k = random_wavevector(4, rng);
    const NormalModeMatrix m(spec, k);
    const DispersionResult res = dispersion_roots(m, false);
    const double w = e4_reference_frequency(l1.get_d(), l2.get_d(), to_double(k));
    const auto waves = res.nonzero_roots();
    double err = 1.0;
    if (waves.size() == 2) err = std::max(rel_err(waves[0], -w), rel_err(waves[1], w));
    const bool natural = res.has(Branch::NaturalVortical);
    worst4 = std::max(worst4, err);
    if (err > 1e-12 || !natural) {
      ++failures;
      if (first.empty()) first = "E4 lambda=(" + l1.get_str() + "," + l2.get_str() + ")";
    }
  }
  for (int s = 0; s < samples; ++s) {
    const Rational l = random_rate(rng);
    const RotationSpec spec = RotationSpec::canonical(3, {l}, std::vector<int>{1});
    std::vector<Rational> k;
    do k = random_wavevector(3, rng);
    while (k[2] == 0);
    const NormalModeMatrix m(spec, k);
    const DispersionResult res = dispersion_roots(m, false);
    const auto kd = to_double(k);
    const double w = 2 * l.get_d() * std::fabs(kd[2]) / std::sqrt(kd[0] * kd[0] + kd[1] * kd[1] + kd[2] * kd[2]);
    const auto waves = res.nonzero_roots();
    double err = 1.0;
    if (waves.size() == 2) err = std::max(rel_err(waves[0], -w), rel_err(waves[1], w));
    worst3 = std::max(worst3, err);
    if (err > 1e-12) {
      ++failures;
      if (first.empty()) first = "E3 lambda=" + l.get_str();
    }
  }
  r.passed = failures == 0;
  r.metrics = {{"samples_e4", samples}, {"samples_e3", samples}, {"max_rel_e4", worst4}, {"max_rel_e3", worst3}};
  r.detail = "E4 max rel " + fmt(worst4) + ", E3 max rel " + fmt(worst3) + " (< 1e-12), natural zero root present; failures " +
             std::to_string(failures) + (first.empty() ? "" : " first " + first);
  return r;
}

inline CheckResult dispersion_e5(const SelfCheckOptions& opt) {
  CheckResult r{5, "dispersion_e5", "E5 double rotation against the closed form"};
  Rng rng(opt.seed ^ 0x5);
  double worst = 0;
  std::size_t failures = 0;
  const int samples = 500;
  for (int s = 0; s < samples; ++s) {
    const Rational l1 = random_rate(rng), l2 = random_rate(rng);
    const RotationSpec spec = RotationSpec::canonical(5, {l1, l2}, std::vector<int>{1, 1});
    const auto k = random_wavevector(5, rng);
    const DispersionResult res = dispersion_roots(NormalModeMatrix(spec, k), false);
    const auto waves = res.nonzero_roots();
    const double w = e5_reference_frequency(l1.get_d(), l2.get_d(), to_double(k));
    const double err = waves.empty() ? 1.0 : rel_err(waves.back(), w);
    worst = std::max(worst, err);
    if (err > 1e-10) ++failures;
  }
  r.passed = failures == 0;
  r.metrics = {{"samples", samples}, {"max_rel", worst}};
  r.detail = std::to_string(samples) + " samples, largest root vs formula max rel " + fmt(worst) + " (< 1e-10), failures " +
             std::to_string(failures);
  return r;
}

inline CheckResult vortical(const SelfCheckOptions& opt) {
  CheckResult r{6, "vortical", "zero-frequency modes satisfy the constraint sets"};
  Rng rng(opt.seed ^ 0x6);
  struct Case {
    std::string label;
    int d;
    std::vector<Rational> rates;
    std::vector<int> zero_k;
    Branch branch;
  };
  const std::vector<Case> cases = {
      {"d4 simultaneous natural", 4, {Rational(3, 2), Rational(1)}, {}, Branch::NaturalVortical},
      {"d4 simple natural", 4, {Rational(2), Rational(0)}, {}, Branch::NaturalVortical},
      {"d4 simple imposed k3=k4=0", 4, {Rational(2), Rational(0)}, {3, 4}, Branch::ImposedVortical},
      {"d5 double imposed k5=0", 5, {Rational(3, 2), Rational(1)}, {5}, Branch::ImposedVortical},
  };
  const int per_case = 25;
  double worst = 0, control = 0;
  std::size_t failures = 0;
  std::string detail;
  for (const auto& c : cases) {
    const RotationSpec spec = RotationSpec::canonical(c.d, c.rates, std::nullopt);
    const ConstraintSet cs = derive_constraints(spec, 1, BalanceMode::Combined);
    double case_worst = 0;
    std::size_t checked = 0;
    for (int s = 0; s < per_case; ++s) {
      const auto k = random_wavevector(c.d, rng, c.zero_k);
      const NormalModeMatrix m(spec, k);
      const DispersionResult res = dispersion_roots(m);
      try {
        const ConsistencyReport rep = check_tpt_consistency(res, m, cs, c.branch);
        case_worst = std::max(case_worst, rep.max_residual);
        checked += rep.vectors_checked;
        if (rep.max_residual >= 1e-10) ++failures;
        if (res.has(Branch::Wave)) control = std::max(control, wave_branch_residual(res, m, cs));
      } catch (const IllConditioned& e) {
        ++failures;
        detail += c.label + ": " + e.what() + "; ";
      }
    }
    worst = std::max(worst, case_worst);
    r.metrics["cases"].push_back({{"case", c.label}, {"max_residual", case_worst}, {"vectors", checked}});
  }
  r.passed = failures == 0;
  r.metrics["wave_branch_residual"] = control;
  r.detail = detail + std::to_string(cases.size()) + " cases x " + std::to_string(per_case) + " wavevectors, max residual " + fmt(worst) +
             " (< 1e-10); wave-branch control " + fmt(control);
  return r;
}

// ---------------------------------------------------------------------------
// 7. higher Kelvin orders are implied by the first-order dominant set

/// Every relation of `other` lies in the row space of `base`: exactly over
/// Q(lambda), or failing that at several generic rational rate values.
inline bool implied_by(const ConstraintSet& base, const ConstraintSet& other, Rng& rng) {
  if (other.constraints.empty()) return true;
  if (base.row_space().contains_all(other.exprs())) return true;
  for (int trial = 0; trial < 3; ++trial) {
    std::map<int, ScalarExpr> values;
    for (std::size_t i = 0; i < base.spec.plane_count(); ++i) values[static_cast<int>(i) + 1] = ScalarExpr(random_rate(rng));
    const ConstraintSet b = substitute_rates(base, values);
    const ConstraintSet o = substitute_rates(other, values);
    if (!b.row_space().contains_all(o.exprs())) return false;
  }
  return true;
}

inline CheckResult higher_order(const SelfCheckOptions& opt) {
  CheckResult r{7, "higher_order", "higher-order sets redundant, corrections at least quadratic"};
  Rng rng(opt.seed ^ 0x7);
  std::size_t specs = 0, inclusions = 0, failures = 0, corrections = 0;
  int min_degree = 1 << 20;
  std::string first;
  for (int d = 2; d <= 6; ++d) {
    for (int n = 1; n <= d / 2; ++n) {
      std::vector<int> cls(static_cast<std::size_t>(n), 0);
      for (;;) {
        const bool any_fast = std::any_of(cls.begin(), cls.end(), [](int c) { return c > 0; });
        if (any_fast) {
          ++specs;
          const RotationSpec spec = RotationSpec::symbolic(d, cls);
          const ConstraintSet base = derive_constraints(spec, 1, BalanceMode::DominantBalance);
          for (int k = 1; k <= d / 2; ++k)
            for (BalanceMode mode : {BalanceMode::Combined, BalanceMode::DominantBalance}) {
              const ConstraintSet cs = derive_constraints(spec, k, mode);
              ++inclusions;
              if (!implied_by(base, cs, rng)) {
                ++failures;
                if (first.empty()) first = "d=" + std::to_string(d) + " k=" + std::to_string(k) + " " + to_string(mode);
              }
            }
          if (d >= 4) {
            const CorrectionDegree cd = higher_order_correction_degree(spec);
            ++corrections;
            if (!cd.correction.empty) min_degree = std::min(min_degree, cd.correction.min);
            if (!cd.quadratic_or_higher) {
              ++failures;
              if (first.empty()) first = "correction degree d=" + std::to_string(d);
            }
          }
        }
        std::size_t i = 0;
        while (i < cls.size() && cls[i] == 2) cls[i++] = 0;
        if (i == cls.size()) break;
        ++cls[i];
      }
    }
  }
  r.passed = failures == 0;
  r.metrics = {{"specs", specs}, {"inclusions", inclusions}, {"correction_checks", corrections}, {"min_correction_degree", min_degree}};
  r.detail = std::to_string(specs) + " specs, " + std::to_string(inclusions) + " inclusions, min correction jet degree " +
             std::to_string(min_degree) + " (>= 2); failures " + std::to_string(failures) + (first.empty() ? "" : " first " + first);
  return r;
}

// ---------------------------------------------------------------------------
// 8-11. numerics

inline RotationSpec kelvin_spec(int d) {
  return d == 3 ? RotationSpec::canonical(3, {Rational(2)}) : RotationSpec::canonical(5, {Rational(2), Rational(3, 2)}, std::vector<int>{1, 1});
}

/// A circle tilted out of every coordinate plane.
inline Circuit generic_circle(int d, std::size_t n) {
  std::vector<double> c(static_cast<std::size_t>(d), 0.0), eu(static_cast<std::size_t>(d), 0.0), ev(static_cast<std::size_t>(d), 0.0);
  const double cu[] = {1.0, 0.2, 0.5, 0.3, -0.4};
  const double cv[] = {0.1, 1.0, -0.4, 0.5, 0.6};
  const double cc[] = {0.3, 0.2, 0.1, -0.2, 0.25};
  for (int i = 0; i < d && i < 5; ++i) {
    eu[i] = cu[i];
    ev[i] = cv[i];
    c[i] = cc[i];
  }
  return Circuit::circle(c, 1.0, eu, ev, n);
}

inline double circulation_drift(const Circuit& c0, const FlowField& flow, const RotationSpec& spec, double dt, unsigned threads) {
  const double g0 = circulation(c0, flow, spec, {true, false, threads});
  Circuit c = c0;
  AdvectOptions o;
  o.dt = dt;
  o.threads = threads;
  advect_points(c.pts, flow, step_count(1.0, dt), o);
  const double g1 = circulation(c, flow, spec, {true, false, threads});
  return std::fabs(g1 - g0) / std::max(std::fabs(g0), 1e-300);
}

inline CheckResult kelvin(const SelfCheckOptions& opt) {
  CheckResult r{8, "kelvin", "circulation conservation for Taylor-Green in a rotating plane"};
  std::size_t failures = 0;
  std::ostringstream os;
  const std::vector<double> dts = {0.2, 0.1, 0.05, 0.025};
  for (int d : {3, 5}) {
    const RotationSpec spec = kelvin_spec(d);
    const Circuit c0 = generic_circle(d, 1024);
    const FlowField tg = flow_catalog("taylor_green_plane", spec, 1);
    const double drift = circulation_drift(c0, tg, spec, 1e-3, opt.threads);
    std::vector<double> errs;
    for (double dt : dts) errs.push_back(circulation_drift(c0, tg, spec, dt, opt.threads));
    const double order = loglog_slope(dts, errs);
    const double control = circulation_drift(c0, flow_catalog("shear_nonsolution", spec, 1), spec, 1e-3, opt.threads);
    const bool ok = drift < 1e-8 && order >= 3.9 && control > 1e-2;
    if (!ok) ++failures;
    os << "d=" << d << " drift " << fmt(drift) << " order " << fmt(order) << " control " << fmt(control) << "; ";
    r.metrics["d" + std::to_string(d)] = {{"drift", drift}, {"order", order}, {"control_drift", control}, {"dt_errors", errs}};
  }
  r.passed = failures == 0;
  r.detail = os.str() + "limits: drift < 1e-8, order >= 3.9, control > 1e-2";
  return r;
}

inline CheckResult lemma3(const SelfCheckOptions& opt) {
  CheckResult r{9, "lemma3", "rotating circulation equals sum of 2 lambda_i A_i"};
  Rng rng(opt.seed ^ 0x9);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> dim(2, 8);
  double worst = 0;
  const int samples = 100;
  for (int s = 0; s < samples; ++s) {
    const int d = dim(rng);
    std::vector<Rational> rates;
    for (int i = 0; i < d / 2; ++i) rates.push_back(random_rate(rng) / 10);
    const RotationSpec spec = RotationSpec::canonical(d, rates);
    const Circuit c = Circuit::random_fourier(d, 6, 4096, 1.0, [&] { return g(rng); });
    worst = std::max(worst, projection_areas(c, spec).residual);
  }
  r.passed = worst < 1e-10;
  r.metrics = {{"samples", samples}, {"max_residual", worst}};
  r.detail = std::to_string(samples) + " random circuits (N=4096), max |sum 2 lambda A - circulation| " + fmt(worst) + " (< 1e-10)";
  return r;
}

inline CheckResult lie(const SelfCheckOptions&) {
  CheckResult r{10, "lie", "first-order Lie estimate of the circulation"};
  std::ostringstream os;
  std::size_t failures = 0;
  for (int d : {3, 5}) {
    const RotationSpec spec = kelvin_spec(d);
    const LieCheck lc = lie_first_order_check(generic_circle(d, 1024), flow_catalog("shear_nonsolution", spec, 1), spec);
    if (!(lc.slope >= 1.9 && lc.slope <= 2.1)) ++failures;
    os << "d=" << d << " slope " << fmt(lc.slope) << "; ";
    r.metrics["d" + std::to_string(d)] = {{"slope", lc.slope}, {"errors", lc.errors}, {"lie_rate", lc.lie_rate}};
  }
  r.passed = failures == 0;
  r.detail = os.str() + "limits [1.9, 2.1]";
  return r;
}

inline CheckResult chain(const SelfCheckOptions& opt) {
  CheckResult r{11, "chain", "third-order chain invariant"};
  const RotationSpec spec = kelvin_spec(5);
  auto drift = [&](const std::string& flow, std::size_t m) {
    return chain_invariant(Chain3::torus(5, m, 0.3, 1.0, 0.15, 0.5), flow_catalog(flow, spec, 1), spec, 1.0, 1e-2, opt.threads).drift;
  };
  const double rigid = drift("rigid", 16);
  const double d16 = drift("taylor_green_plane", 16);
  const double d32 = drift("taylor_green_plane", 32);
  const double order = std::log2(d16 / d32);
  const double control = drift("shear_nonsolution", 16);
  r.passed = rigid <= 1e-12 && d16 < 1e-4 && order >= 2.0 && control > 1e-2;
  r.metrics = {{"rigid_drift", rigid}, {"tg_drift_m16", d16}, {"tg_drift_m32", d32}, {"order", order}, {"control_drift", control}};
  r.detail = "rigid " + fmt(rigid) + " (<= 1e-12), TG M=16 " + fmt(d16) + " (< 1e-4), order 16->32 " + fmt(order) + " (>= 2), control " +
             fmt(control) + " (> 1e-2)";
  return r;
}

// ---------------------------------------------------------------------------
// 12. exterior algebra identities

struct FormDraw {
  Rng& rng;
  int d;
  bool with_jets = true;

  ScalarExpr scalar() {
    std::uniform_int_distribution<int> nterms(1, 3), nfac(0, 2), kind(0, with_jets ? 4 : 2), axis(1, d), rate(1, 2);
    ScalarExpr e;
    const int t = nterms(rng);
    for (int i = 0; i < t; ++i) {
      ScalarExpr m(random_nonzero(rng, 5, 3));
      const int f = nfac(rng);
      for (int j = 0; j < f; ++j) {
        switch (kind(rng)) {
          case 0: m *= ScalarExpr(Symbol::coord(axis(rng))); break;
          case 1: m *= ScalarExpr(Symbol::rate(rate(rng))); break;
          case 2: m *= ScalarExpr(Symbol::sin_of(axis(rng))); break;
          case 3: m *= ScalarExpr(Symbol::jet(axis(rng))); break;
          default: m *= ScalarExpr(Symbol::cos_of(axis(rng))); break;
        }
      }
      e += m;
    }
    return e;
  }

  DifferentialForm form(int k) {
    DifferentialForm w(d, k);
    if (k > d) return w;
    std::uniform_int_distribution<int> nterms(1, 3);
    const int t = nterms(rng);
    for (int i = 0; i < t; ++i) {
      std::vector<int> axes(static_cast<std::size_t>(d));
      std::iota(axes.begin(), axes.end(), 1);
      std::shuffle(axes.begin(), axes.end(), rng);
      axes.resize(static_cast<std::size_t>(k));
      w += DifferentialForm::basis(d, axes, scalar());
    }
    return w;
  }
};

inline CheckResult algebra(const SelfCheckOptions& opt) {
  CheckResult r{12, "algebra", "exterior algebra identities, exact"};
  Rng rng(opt.seed ^ 0xC);
  std::uniform_int_distribution<int> dim(1, 6);
  const int per_identity = 2000;
  std::map<std::string, std::size_t> fails;
  auto degree = [&](int hi) { return std::uniform_int_distribution<int>(0, std::max(0, hi))(rng); };
  for (int s = 0; s < per_identity; ++s) {
    {
      const int d = dim(rng);
      FormDraw draw{rng, d};
      const DifferentialForm a = draw.form(degree(d));
      if (!exterior_derivative(exterior_derivative(a)).is_zero()) ++fails["d_squared"];
    }
    {
      const int d = dim(rng);
      FormDraw draw{rng, d};
      const int p = degree(d);
      const int q = degree(d - p);
      const DifferentialForm a = draw.form(p), b = draw.form(q);
      const DifferentialForm lhs = wedge(a, b);
      const DifferentialForm rhs = (p * q) % 2 == 0 ? wedge(b, a) : -wedge(b, a);
      if (!(lhs - rhs).is_zero()) ++fails["antisymmetry"];
    }
    {
      const int d = dim(rng);
      FormDraw draw{rng, d};
      const DifferentialForm a = exterior_derivative(draw.form(degree(d - 1)));
      const VectorFieldSym u = VectorFieldSym::velocity(d);
      if (!(lie_derivative(u, a) - exterior_derivative(interior_product(u, a))).is_zero()) ++fails["cartan"];
    }
    {
      const int d = dim(rng);
      FormDraw draw{rng, d};
      const int k = degree(d);
      const DifferentialForm a = draw.form(k);
      const DifferentialForm twice = hodge_star(hodge_star(a));
      const DifferentialForm expect = (k * (d - k)) % 2 == 0 ? a : -a;
      if (!(twice - expect).is_zero()) ++fails["hodge"];
    }
    {
      const int d = dim(rng);
      FormDraw draw{rng, d};
      const int p = degree(d);
      const int q = degree(d - p);
      const DifferentialForm a = draw.form(p), b = draw.form(q);
      const VectorFieldSym u = VectorFieldSym::velocity(d);
      const DifferentialForm lhs = lie_derivative(u, wedge(a, b));
      const DifferentialForm rhs = wedge(lie_derivative(u, a), b) + wedge(a, lie_derivative(u, b));
      if (!(lhs - rhs).is_zero()) ++fails["leibniz"];
    }
  }
  std::size_t total = 0;
  for (const auto& [k, v] : fails) total += v;
  r.passed = total == 0;
  r.metrics = {{"cases", 5 * per_identity}, {"failures", total}};
  std::ostringstream os;
  os << 5 * per_identity << " cases (d^2, antisymmetry, Cartan, Hodge, Leibniz), failures " << total;
  for (const auto& [k, v] : fails) os << " " << k << "=" << v;
  r.detail = os.str();
  return r;
}

struct Entry {
  const char* key;
  CheckResult (*run)(const SelfCheckOptions&);
  double time_limit;  // seconds, 0 = none
};

inline const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      {"golden", goldens, 1.0},
      {"lemma2", lemma2, 10.0},
      {"spectral", spectral, 30.0},
      {"dispersion_e4", dispersion_e4, 0},
      {"dispersion_e5", dispersion_e5, 0},
      {"vortical", vortical, 0},
      {"higher_order", higher_order, 60.0},
      {"kelvin", kelvin, 0},
      {"lemma3", lemma3, 0},
      {"lie", lie, 0},
      {"chain", chain, 0},
      {"algebra", algebra, 0},
  };
  return entries;
}

}  // namespace check

inline std::vector<std::string> selfcheck_keys() {
  std::vector<std::string> keys;
  for (const auto& e : check::registry()) keys.emplace_back(e.key);
  return keys;
}

inline bool selfcheck_selected(const std::string& key, const std::string& filter) {
  if (filter.empty()) return true;
  for (const auto& f : split_list(filter))
    if (key.find(f) != std::string::npos) return true;
  return false;
}

/// Runs the selected checks in order; `on_result` sees each result as it completes.
inline std::vector<CheckResult> run_selfcheck(const SelfCheckOptions& opt, const std::function<void(const CheckResult&)>& on_result = {}) {
  std::vector<CheckResult> out;
  bool any = false;
  const auto& reg = check::registry();
  for (std::size_t i = 0; i < reg.size(); ++i) {
    const auto& e = reg[i];
    if (!selfcheck_selected(e.key, opt.filter)) continue;
    any = true;
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    try {
      r = e.run(opt);
    } catch (const std::exception& ex) {
      r.id = static_cast<int>(i) + 1;
      r.key = e.key;
      r.detail = std::string("exception: ") + ex.what();
      r.passed = false;
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (e.time_limit > 0 && r.seconds > e.time_limit) {
      r.passed = false;
      r.detail += "; runtime " + check::fmt(r.seconds) + " s exceeds " + check::fmt(e.time_limit) + " s";
    }
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  if (!any) throw InputError("filter '" + opt.filter + "' matches no check");
  return out;
}

}  // namespace rotflow
