// rotflow command-line tool: decompose, tpt, dispersion, kelvin, selfcheck.
// Exit codes: 0 success, 1 assertion failure, 2 input error.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "rotflow/io.hpp"
#include "rotflow/scenario.hpp"
#include "rotflow/selfcheck.hpp"
#include "rotflow/spectral.hpp"
#include "rotflow/tpt.hpp"
#include "rotflow/waves.hpp"

#ifndef ROTFLOW_GOLDEN_DIR
#define ROTFLOW_GOLDEN_DIR "tests/golden"
#endif

namespace {

using namespace rotflow;

constexpr int kOk = 0;
constexpr int kAssertion = 1;
constexpr int kInput = 2;

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------

struct DecomposeArgs {
  std::string matrix;
  double threshold = 10.0;
  std::string out;
};

int cmd_decompose(const DecomposeArgs& a) {
  const std::string path = std::filesystem::absolute(a.matrix).string();
  RunConfig cfg("decompose", {{"matrix", path}, {"ratio_threshold", std::to_string(a.threshold)}});
  const SkewMatrix skew(read_matrix_file(path));
  const SpectralDecomposition dec = block_diagonalize(skew);
  nlohmann::json j = {{"meta", cfg.meta()}, {"decomposition", dec.to_json()}, {"warnings", nlohmann::json::array()}};
  if (dec.rates.empty()) {
    j["warnings"].push_back("zero rotation: every axis is a zero axis");
    std::cerr << "warning: zero rotation matrix, no rotation planes\n";
  } else {
    j["spec"] = RotationSpec::from_decomposition(dec, a.threshold).to_json();
  }
  write_output(a.out, dump(j));
  return kOk;
}

// ---------------------------------------------------------------------------

struct TptArgs {
  int dim = 0;
  std::string rates;
  std::string orders;
  int kelvin_order = 1;
  std::string balance = "auto";
  bool incompressible = false;
  std::string format = "text";
  double threshold = 10.0;
  std::string out;
};

int cmd_tpt(const TptArgs& a) {
  RunConfig cfg("tpt", {{"dim", std::to_string(a.dim)},
                        {"rates", a.rates},
                        {"orders", a.orders},
                        {"kelvin_order", std::to_string(a.kelvin_order)},
                        {"balance", a.balance},
                        {"incompressible", a.incompressible ? "1" : "0"},
                        {"ratio_threshold", std::to_string(a.threshold)}});
  std::optional<std::vector<int>> orders;
  if (!a.orders.empty()) orders = parse_int_list(a.orders);
  std::optional<RotationSpec> numeric;
  RotationSpec spec{a.dim, {}};
  if (!a.rates.empty()) {
    numeric = RotationSpec::canonical(a.dim, parse_rational_list(a.rates), orders, a.threshold);
    spec = *numeric;
  } else if (orders) {
    spec = RotationSpec::symbolic(a.dim, *orders);
  } else {
    throw InputError("give --rates and/or --orders");
  }

  BalanceMode mode = BalanceMode::Combined;
  if (a.balance == "auto") {
    std::set<int> classes;
    for (std::size_t i = 0; i < spec.plane_count(); ++i)
      if (spec.plane_fast(i)) classes.insert(spec.planes()[i].order_class);
    mode = classes.size() > 1 ? BalanceMode::DominantBalance : BalanceMode::Combined;
  } else {
    mode = parse_balance(a.balance);
  }

  const ConstraintSet cs = derive_constraints(spec, a.kelvin_order, mode);
  std::optional<ReductionReport> report;
  if (a.kelvin_order == 1) report = classify_reduction(cs, a.incompressible);
  std::optional<ConstraintSet> with_rates;
  if (numeric) with_rates = with_numeric_rates(cs, *numeric);

  if (a.format == "json") {
    nlohmann::json j = {{"meta", cfg.meta()}, {"constraint_set", cs.to_json_with_metadata()}};
    j["reduction"] = report ? report->to_json() : nlohmann::json(nullptr);
    nlohmann::json rel = nlohmann::json::array();
    for (const auto& c : cs.constraints) rel.push_back(c.text());
    j["relations"] = rel;
    if (with_rates) {
      nlohmann::json nrel = nlohmann::json::array();
      for (const auto& c : with_rates->constraints) nrel.push_back(c.text());
      j["relations_at_rates"] = nrel;
    }
    write_output(a.out, dump(j));
  } else if (a.format == "text") {
    std::ostringstream os;
    os << cfg.header_line();
    os << cs.text_table();
    if (with_rates && with_rates->constraints.size() > 0) {
      os << "# at the given rates:\n";
      for (const auto& c : with_rates->constraints) os << c.text() << "\n";
    }
    if (report) os << report->prose();
    write_output(a.out, os.str());
  } else {
    throw InputError("unknown format '" + a.format + "' (json or text)");
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct DispersionArgs {
  int dim = 0;
  std::string rates;
  std::string k;
  std::string k_grid;
  std::string emit = "csv";
  bool verify_e5 = false;
  int samples = 200;
  std::uint64_t seed = 1;
  std::string out;
};

std::vector<std::vector<Rational>> grid_vectors(int d, const std::string& spec) {
  const auto values = parse_rational_list(spec);
  if (values.empty()) throw InputError("empty --k-grid");
  std::vector<std::vector<Rational>> out;
  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  for (;;) {
    std::vector<Rational> k;
    bool nonzero = false;
    for (std::size_t i : idx) {
      k.push_back(values[i]);
      nonzero = nonzero || values[i] != 0;
    }
    if (nonzero) out.push_back(std::move(k));
    std::size_t a = 0;
    while (a < idx.size() && ++idx[a] == values.size()) idx[a++] = 0;
    if (a == idx.size()) break;
  }
  return out;
}

/// Closed-form positive wave frequency where one is known.
std::optional<double> reference_frequency(const RotationSpec& spec, const std::vector<double>& k) {
  const int d = spec.dimension();
  std::vector<double> r;
  for (std::size_t i = 0; i < spec.plane_count(); ++i) r.push_back(spec.rate_value(i));
  while (r.size() < 2) r.push_back(0.0);
  if (d == 3) {
    const double n = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    return 2 * r[0] * std::fabs(k[2]) / n;
  }
  if (d == 4) return e4_reference_frequency(r[0], r[1], k);
  if (d == 5) return e5_reference_frequency(r[0], r[1], k);
  return std::nullopt;
}

int cmd_dispersion(const DispersionArgs& a) {
  RunConfig cfg("dispersion", {{"dim", std::to_string(a.dim)},
                               {"rates", a.rates},
                               {"k", a.k},
                               {"k_grid", a.k_grid},
                               {"emit", a.emit},
                               {"verify_e5_formula", a.verify_e5 ? "1" : "0"},
                               {"samples", std::to_string(a.samples)},
                               {"seed", std::to_string(a.seed)}});
  if (a.emit != "csv" && a.emit != "json") throw InputError("--emit must be csv or json");
  const RotationSpec spec = RotationSpec::canonical(a.dim, parse_rational_list(a.rates));
  if (a.verify_e5 && (a.dim != 5 || spec.plane_count() != 2)) throw InputError("--verify-e5-formula needs --dim 5 and two rates");

  std::vector<std::vector<Rational>> ks;
  if (!a.k.empty()) ks.push_back(parse_rational_list(a.k));
  if (!a.k_grid.empty()) {
    auto g = grid_vectors(a.dim, a.k_grid);
    ks.insert(ks.end(), g.begin(), g.end());
  }
  if (ks.empty() && a.verify_e5) {
    std::mt19937_64 rng(a.seed);
    for (int s = 0; s < a.samples; ++s) ks.push_back(check::random_wavevector(a.dim, rng));
  }
  if (ks.empty()) throw InputError("give --k, --k-grid, or --verify-e5-formula");

  std::ostringstream csv;
  csv << cfg.header_line() << "sample";
  for (int i = 1; i <= a.dim; ++i) csv << ",k_" << i;
  csv << ",root,multiplicity,branch,reference\n";
  csv.precision(17);
  nlohmann::json rows = nlohmann::json::array();
  double max_dev = 0;
  for (std::size_t s = 0; s < ks.size(); ++s) {
    const auto& k = ks[s];
    const NormalModeMatrix m(spec, k);
    const DispersionResult res = dispersion_roots(m, false);
    std::vector<double> kd;
    for (const auto& q : k) kd.push_back(q.get_d());
    const auto ref = reference_frequency(spec, kd);
    if (a.verify_e5) {
      const auto waves = res.nonzero_roots();
      const double dev = waves.empty() ? 1.0 : std::fabs(waves.back() - *ref) / std::max(*ref, 1e-300);
      max_dev = std::max(max_dev, dev);
    }
    double top = 0;
    for (const auto& r : res.roots)
      if (r.branch == Branch::Wave) top = std::max(top, std::fabs(r.value));
    for (const auto& r : res.roots) {
      csv << s;
      for (const auto& q : k) csv << "," << q.get_str();
      csv << "," << r.value << "," << r.multiplicity << "," << to_string(r.branch) << ",";
      // the d=5 closed form covers the outer branch only
      const bool covered = r.branch == Branch::Wave && (a.dim != 5 || std::fabs(r.value) == top);
      if (ref && covered) csv << (r.value < 0 ? -*ref : *ref);
      csv << "\n";
    }
    nlohmann::json kj = nlohmann::json::array();
    for (const auto& q : k) kj.push_back(q.get_str());
    nlohmann::json row = {{"k", kj}, {"result", res.to_json()}};
    if (ref) row["reference_frequency"] = *ref;
    rows.push_back(row);
  }
  const bool failed = a.verify_e5 && max_dev >= 1e-10;
  if (a.emit == "csv") {
    if (a.verify_e5) csv << "# e5 formula max relative deviation " << max_dev << (failed ? " FAIL" : " ok") << "\n";
    write_output(a.out, csv.str());
  } else {
    nlohmann::json j = {{"meta", cfg.meta()}, {"spec", spec.to_json()}, {"rows", rows}};
    if (a.verify_e5) j["e5_formula"] = {{"max_relative_deviation", max_dev}, {"tolerance", 1e-10}, {"passed", !failed}};
    write_output(a.out, dump(j));
  }
  if (failed) std::cerr << "E5 formula deviation " << max_dev << " exceeds 1e-10\n";
  return failed ? kAssertion : kOk;
}

// ---------------------------------------------------------------------------

struct KelvinArgs {
  std::string scenario;
  std::string csv;
  std::string json;
};

int cmd_kelvin(const KelvinArgs& a) {
  const std::filesystem::path path = std::filesystem::absolute(a.scenario);
  KelvinScenario sc = parse_kelvin_scenario(read_text_file(path.string()), path.parent_path().string());
  const KelvinReport rep = run_kelvin_scenario(sc);
  if (!a.csv.empty()) write_output(a.csv, rep.csv);
  if (!a.json.empty() && a.json != "-") write_output(a.json, dump(rep.summary));
  std::cout << dump(rep.summary);
  if (rep.conservation_failed) std::cerr << "circulation drift exceeds tolerance for an Euler solution\n";
  return rep.conservation_failed ? kAssertion : kOk;
}

// ---------------------------------------------------------------------------

struct SelfcheckArgs {
  std::string filter;
  std::string golden_dir = ROTFLOW_GOLDEN_DIR;
  std::uint64_t seed = SelfCheckOptions{}.seed;
  unsigned threads = 0;
  std::string json;
};

int cmd_selfcheck(const SelfcheckArgs& a) {
  RunConfig cfg("selfcheck", {{"filter", a.filter}, {"golden_dir", a.golden_dir}, {"seed", std::to_string(a.seed)}});
  SelfCheckOptions opt;
  opt.filter = a.filter;
  opt.golden_dir = a.golden_dir;
  opt.seed = a.seed;
  opt.threads = a.threads;
  std::cout << cfg.header_line();
  const auto results = run_selfcheck(opt, [](const CheckResult& r) { std::cout << r.line() << std::endl; });
  std::size_t passed = 0;
  nlohmann::json items = nlohmann::json::array();
  for (const auto& r : results) {
    passed += r.passed ? 1 : 0;
    items.push_back(r.to_json());
  }
  const bool ok = passed == results.size();
  std::cout << passed << "/" << results.size() << " checks passed\n";
  if (!a.json.empty()) write_output(a.json, dump({{"meta", cfg.meta()}, {"passed", ok}, {"checks", items}}));
  return ok ? kOk : kAssertion;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rotflow: rotating-frame flow constraints, inertial waves and circulation checks"};
  app.set_version_flag("--version", rotflow::version());
  app.require_subcommand(1);

  DecomposeArgs dec;
  auto* c_dec = app.add_subcommand("decompose", "block-diagonalize a skew-symmetric rotation matrix");
  c_dec->add_option("matrix", dec.matrix, "matrix file (text rows or JSON)")->required();
  c_dec->add_option("--ratio-threshold", dec.threshold, "rate ratio that separates fastness classes");
  c_dec->add_option("-o,--out", dec.out, "output file (default stdout)");

  TptArgs tpt;
  auto* c_tpt = app.add_subcommand("tpt", "derive fast-rotation constraints");
  c_tpt->add_option("--dim", tpt.dim, "dimension")->required();
  c_tpt->add_option("--rates", tpt.rates, "plane rates, e.g. 1,3/2");
  c_tpt->add_option("--orders", tpt.orders, "asymptotic order class per plane, e.g. 2,1");
  c_tpt->add_option("--kelvin-order", tpt.kelvin_order, "k in Omega_R^k");
  c_tpt->add_option("--balance", tpt.balance, "combined, dominant_balance or auto");
  c_tpt->add_flag("--incompressible", tpt.incompressible, "split total incompressibility");
  c_tpt->add_option("--format", tpt.format, "text or json");
  c_tpt->add_option("--ratio-threshold", tpt.threshold, "rate ratio that separates fastness classes");
  c_tpt->add_option("-o,--out", tpt.out, "output file (default stdout)");

  DispersionArgs dis;
  auto* c_dis = app.add_subcommand("dispersion", "normal-mode frequencies of the linearized rotating Euler equations");
  c_dis->add_option("--dim", dis.dim, "dimension")->required();
  c_dis->add_option("--rates", dis.rates, "plane rates")->required();
  c_dis->add_option("--k", dis.k, "wavevector, e.g. 1,0,0,0");
  c_dis->add_option("--k-grid", dis.k_grid, "values taken by every component, e.g. -1,0,1");
  c_dis->add_option("--emit", dis.emit, "csv or json");
  c_dis->add_flag("--verify-e5-formula", dis.verify_e5, "compare the largest root with the closed E5 formula");
  c_dis->add_option("--samples", dis.samples, "random wavevectors for --verify-e5-formula");
  c_dis->add_option("--seed", dis.seed, "random seed");
  c_dis->add_option("-o,--out", dis.out, "output file (default stdout)");

  KelvinArgs kel;
  auto* c_kel = app.add_subcommand("kelvin", "advect a circuit and track its circulation");
  c_kel->add_option("scenario", kel.scenario, "scenario file")->required();
  c_kel->add_option("--csv", kel.csv, "time series output");
  c_kel->add_option("--json", kel.json, "summary output (also printed)");

  SelfcheckArgs sc;
  auto* c_sc = app.add_subcommand("selfcheck", "run the golden and property checks");
  c_sc->add_option("--filter", sc.filter, "comma-separated substrings of check names");
  c_sc->add_option("--golden-dir", sc.golden_dir, "directory of golden constraint sets");
  c_sc->add_option("--seed", sc.seed, "random seed");
  c_sc->add_option("--threads", sc.threads, "worker threads (0 = hardware)");
  c_sc->add_option("--json", sc.json, "machine-readable summary file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInput;
  }

  try {
    if (*c_dec) return cmd_decompose(dec);
    if (*c_tpt) return cmd_tpt(tpt);
    if (*c_dis) return cmd_dispersion(dis);
    if (*c_kel) return cmd_kelvin(kel);
    if (*c_sc) return cmd_selfcheck(sc);
  } catch (const rotflow::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const rotflow::DimensionMismatch& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kAssertion;
  }
  return kInput;
}
