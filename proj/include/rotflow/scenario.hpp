#pragma once
// Kelvin scenario files: flow + rotation + circuit definition, run to a CSV
// time series and a JSON summary.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "rotflow/io.hpp"
#include "rotflow/kelvin.hpp"

namespace rotflow {

struct KelvinScenario {
  RunConfig config;
  RotationSpec spec{1, {}};
  std::string flow_name = "rigid";
  int plane = 1;
  Circuit circuit;
  double dt = 1e-3;
  double t_end = 1.0;
  std::size_t output_every = 100;
  double tolerance = 1e-8;
  unsigned threads = 0;
};

/// Reads the spec part (dim, rates, orders, ratio_threshold) of a config.
inline RotationSpec spec_from_config(const RunConfig& cfg) {
  const int d = std::stoi(cfg.require("dim"));
  const auto rates = parse_rational_list(cfg.get("rates", ""));
  std::optional<std::vector<int>> orders;
  if (cfg.has("orders")) orders = parse_int_list(cfg.get("orders"));
  const double threshold = std::stod(cfg.get("ratio_threshold", "10"));
  return RotationSpec::canonical(d, rates, orders, threshold);
}

inline KelvinScenario parse_kelvin_scenario(const std::string& text, const std::string& base_dir = ".") {
  KelvinScenario sc;
  sc.config = RunConfig("kelvin", parse_key_values(text));
  const RunConfig& c = sc.config;
  sc.spec = spec_from_config(c);
  const int d = sc.spec.dimension();
  sc.flow_name = c.get("flow", "rigid");
  sc.plane = std::stoi(c.get("plane", "1"));
  sc.dt = std::stod(c.get("dt", "1e-3"));
  sc.t_end = std::stod(c.get("t_end", "1"));
  sc.output_every = std::stoul(c.get("output_every", "100"));
  sc.tolerance = std::stod(c.get("tolerance", "1e-8"));
  sc.threads = static_cast<unsigned>(std::stoul(c.get("threads", "0")));
  const std::size_t n = std::stoul(c.get("nodes", "1024"));

  const std::string kind = c.get("circuit", "circle");
  if (kind == "circle") {
    std::vector<double> center = c.has("center") ? parse_double_list(c.get("center")) : std::vector<double>(static_cast<std::size_t>(d), 0.0);
    if (static_cast<int>(center.size()) != d) throw InputError("center must have dim entries");
    const double radius = std::stod(c.get("radius", "1"));
    std::vector<double> eu, ev;
    if (c.has("span_u") || c.has("span_v")) {
      eu = parse_double_list(c.require("span_u"));
      ev = parse_double_list(c.require("span_v"));
    } else {
      const auto pq = parse_int_list(c.get("orientation", "1,2"));
      if (pq.size() != 2 || pq[0] < 1 || pq[1] < 1 || pq[0] > d || pq[1] > d || pq[0] == pq[1])
        throw InputError("orientation must name two distinct axes");
      eu.assign(static_cast<std::size_t>(d), 0.0);
      ev.assign(static_cast<std::size_t>(d), 0.0);
      eu[static_cast<std::size_t>(pq[0] - 1)] = 1;
      ev[static_cast<std::size_t>(pq[1] - 1)] = 1;
    }
    sc.circuit = Circuit::circle(center, radius, eu, ev, n);
  } else if (kind == "nodes") {
    std::string path = c.require("node_file");
    if (!path.empty() && path[0] != '/') path = base_dir + "/" + path;
    std::vector<double> xs;
    std::istringstream in(read_text_file(path));
    std::string line;
    while (std::getline(in, line)) {
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      for (char& ch : line)
        if (ch == ',') ch = ' ';
      std::istringstream ls(line);
      double v = 0;
      while (ls >> v) xs.push_back(v);
    }
    sc.circuit = Circuit::from_nodes(d, std::move(xs));
  } else {
    throw InputError("unknown circuit kind '" + kind + "'");
  }
  for (double v : sc.circuit.pts.x)
    if (std::fabs(v) > 10.0) throw InputError("circuit nodes must stay within |x| <= 10");
  return sc;
}

struct KelvinReport {
  std::string csv;
  nlohmann::json summary;
  bool conservation_failed = false;
};

inline KelvinReport run_kelvin_scenario(const KelvinScenario& sc) {
  const FlowField flow = flow_catalog(sc.flow_name, sc.spec, sc.plane);
  AdvectOptions opt;
  opt.dt = sc.dt;
  opt.threads = sc.threads;
  const auto snaps = advect(sc.circuit.pts, flow, sc.t_end, opt, sc.output_every);

  std::ostringstream csv;
  csv << sc.config.header_line();
  csv << "t,circulation";
  for (std::size_t i = 0; i < sc.spec.plane_count(); ++i) csv << ",A_" << i + 1;
  csv << ",drift\n";
  csv.precision(17);
  double g0 = 0, max_drift = 0, g_last = 0;
  for (std::size_t s = 0; s < snaps.size(); ++s) {
    Circuit c;
    c.pts = snaps[s].pts;
    const double g = circulation(c, flow, sc.spec, {true, false, sc.threads});
    const ProjectionAreas pa = projection_areas(c, sc.spec);
    if (s == 0) g0 = g;
    const double drift = std::fabs(g - g0) / std::max(std::fabs(g0), 1e-300);
    max_drift = std::max(max_drift, drift);
    g_last = g;
    csv << snaps[s].t << "," << g;
    for (double a : pa.areas) csv << "," << a;
    csv << "," << drift << "\n";
  }
  KelvinReport rep;
  rep.csv = csv.str();
  const bool solution = flow.is_rotating_frame_euler_solution();
  rep.conservation_failed = solution && max_drift > sc.tolerance;
  rep.summary = {{"meta", sc.config.meta()},
                 {"flow", flow.name()},
                 {"euler_solution", solution},
                 {"d", sc.spec.dimension()},
                 {"nodes", sc.circuit.size()},
                 {"dt", sc.dt},
                 {"t_end", sc.t_end},
                 {"initial_circulation", g0},
                 {"final_circulation", g_last},
                 {"max_relative_drift", max_drift},
                 {"tolerance", sc.tolerance},
                 {"status", solution ? (rep.conservation_failed ? "fail" : "conserved") : "control (not a solution)"}};
  return rep;
}

}  // namespace rotflow
