#include "cli.hpp"

#include <CLI11.hpp>

#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "recip/bridge.hpp"
#include "recip/characteristics.hpp"
#include "recip/error.hpp"
#include "recip/expansion.hpp"
#include "recip/io.hpp"
#include "recip/presets.hpp"
#include "recip/simulator.hpp"

namespace recip {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::vector<VertexId> vertex_list(const DirectedGraph& g, const std::string& s, const char* option) {
  std::vector<VertexId> v;
  for (const std::string& name : split(s, ',')) {
    auto id = g.find(name);
    if (!id) throw DomainError(std::string(option) + ": unknown vertex \"" + name + "\"");
    v.push_back(*id);
  }
  return v;
}

VertexId vertex(const DirectedGraph& g, const std::string& name, const char* option) {
  auto id = g.find(name);
  if (!id) throw DomainError(std::string(option) + ": unknown vertex \"" + name + "\"");
  return *id;
}

Json walk_json(const DirectedGraph& g, const std::vector<VertexId>& v) {
  Json a = Json::array();
  for (VertexId z : v) a.push_back(g.name(z));
  return a;
}

struct Loaded {
  GraphPtr graph;
  std::shared_ptr<const IntensitySpec> intensity;
};

Loaded load(const std::string& graph_path, const std::string& intensity_path) {
  GraphPtr g = parse_graph(read_json_file(graph_path));
  auto k = std::make_shared<const IntensitySpec>(parse_intensity(read_json_file(intensity_path), g));
  return {g, k};
}

Json report_json(const ClassReport& r, const Tolerances& tol) {
  Json doc;
  doc["equal"] = r.equal;
  doc["max_arc_residual"] = r.max_arc_residual;
  doc["max_cycle_residual"] = r.max_cycle_residual;
  doc["arcs_checked"] = r.arcs_checked;
  doc["cycles_checked"] = r.cycles_checked;
  doc["tolerances"] = Json{{"arc", tol.arc}, {"cycle", tol.cycle}};
  if (r.violation_time) {
    doc["violation"] = Json{{"t", *r.violation_time}, {"object", r.violation_object}};
  } else {
    doc["violation"] = nullptr;
  }
  return doc;
}

// ---------------------------------------------------------------------------

struct ChiArgs {
  std::string graph, intensity, cycles = "basis";
  std::size_t grid = 257;
  double delta = 1e-3;
};

int run_chi(const ChiArgs& a, std::ostream& out) {
  Loaded in = load(a.graph, a.intensity);
  const DirectedGraph& g = *in.graph;
  std::vector<ClosedWalk> cycles;
  if (a.cycles == "basis") {
    cycles = t_basis(g, spanning_tree(g, default_root(g))).all();
  } else {
    std::string rest;
    if (a.cycles.rfind("all<=", 0) == 0) {
      rest = a.cycles.substr(5);
    } else if (a.cycles.rfind("all≤", 0) == 0) {
      rest = a.cycles.substr(std::string("all≤").size());
    } else {
      throw DomainError("--cycles: expected \"basis\" or \"all<=L\"");
    }
    std::size_t L = 0;
    try {
      L = std::stoul(rest);
    } catch (const std::exception&) {
      throw DomainError("--cycles: bad length \"" + rest + "\"");
    }
    if (L < 2 || L > 8) throw DomainError("--cycles: length must lie in [2, 8]");
    cycles = enumerate_closed_walks(g, L);
  }
  CsvWriter csv(out, {"t", "kind", "object", "chi"});
  for (double t : default_time_grid(a.grid, a.delta)) {
    std::vector<double> ca = chi_arc_all(*in.intensity, t);
    for (ArcId e = 0; e < g.num_arcs(); ++e) csv.row({t, std::string("arc"), g.arc_label(e), ca[e]});
    for (const ClosedWalk& c : cycles) {
      csv.row({t, std::string("cycle"), walk_label(g, c.walk()), chi_cycle(*in.intensity, t, c)});
    }
  }
  return kExitOk;
}

struct SameClassArgs {
  std::string graph, j, k;
  std::size_t grid = 257;
  double delta = 1e-3;
  double tol_arc = 0.0, tol_cycle = 0.0;
};

int run_same_class(const SameClassArgs& a, std::ostream& out) {
  GraphPtr g = parse_graph(read_json_file(a.graph));
  IntensitySpec j = parse_intensity(read_json_file(a.j), g);
  IntensitySpec k = parse_intensity(read_json_file(a.k), g);
  ClassCheck check = default_class_check(j, k);
  check.grid = default_time_grid(a.grid, a.delta);
  if (a.tol_arc > 0.0) check.tol.arc = a.tol_arc;
  if (a.tol_cycle > 0.0) check.tol.cycle = a.tol_cycle;
  ClassReport r = same_class(j, k, check);
  out << dump_json(report_json(r, check.tol));
  return r.equal ? kExitOk : kExitNotEqual;
}

struct BridgeArgs {
  std::string graph, intensity, from, to, csv;
  double delta = 1e-3;
  std::size_t grid = 4097;
};

int run_bridge(const BridgeArgs& a, std::ostream& out) {
  Loaded in = load(a.graph, a.intensity);
  const DirectedGraph& g = *in.graph;
  const VertexId x = vertex(g, a.from, "--from");
  const VertexId y = vertex(g, a.to, "--to");
  BridgeOptions opt;
  opt.delta = a.delta;
  BridgeSolution sol = BridgeSolution::solve(in.intensity, x, y, opt);
  ClassCheck check = default_class_check(*in.intensity, sol);
  check.grid = default_time_grid(257, a.delta);
  check.tol = {1e-4, 1e-6};
  ClassReport r = same_class(*in.intensity, sol, check);
  Json doc;
  doc["from"] = a.from;
  doc["to"] = a.to;
  doc["delta"] = a.delta;
  doc["nodes"] = sol.num_nodes();
  doc["hjb_residual"] = hjb_residual(sol);
  doc["gradient_residual"] = gradient_residual(sol, check.basis);
  doc["characteristics"] = report_json(r, check.tol);
  if (!a.csv.empty()) {
    std::ostringstream s;
    CsvWriter csv(s, {"t", "src", "dst", "rate"});
    const double end = 1.0 - a.delta;
    for (std::size_t i = 0; i < a.grid; ++i) {
      const double t = a.grid == 1 ? 0.0 : end * static_cast<double>(i) / static_cast<double>(a.grid - 1);
      std::vector<double> rates = sol.rates(t);
      for (ArcId e = 0; e < g.num_arcs(); ++e) {
        csv.row({t, g.name(g.arc(e).src), g.name(g.arc(e).dst), rates[e]});
      }
    }
    write_text_file(a.csv, s.str());
    doc["csv"] = a.csv;
  }
  out << dump_json(doc);
  return kExitOk;
}

struct SimulateArgs {
  std::string graph, intensity, from, bridge_to;
  std::size_t paths = 0;
  std::optional<std::uint64_t> seed;
  double t_start = 0.0, t_end = 1.0, delta = 1e-3;
  std::size_t threads = 0;
};

int run_simulate(const SimulateArgs& a, std::ostream& out) {
  if (!a.seed) throw DomainError("--seed is required");
  Loaded in = load(a.graph, a.intensity);
  const DirectedGraph& g = *in.graph;
  const VertexId x = vertex(g, a.from, "--from");
  std::vector<PathSample> paths;
  if (!a.bridge_to.empty()) {
    const VertexId y = vertex(g, a.bridge_to, "--bridge-to");
    BridgeOptions opt;
    opt.delta = a.delta;
    BridgeSolution sol = BridgeSolution::solve(in.intensity, x, y, opt);
    paths = sample_bridges(sol, *a.seed, a.paths, a.threads);
  } else {
    paths = sample_paths(*in.intensity, x, *a.seed, a.paths, a.t_start, a.t_end, a.threads);
  }
  for (const PathSample& p : paths) out << path_to_json(g, p).dump() << '\n';
  return kExitOk;
}

struct VerifyArgs {
  std::string graph, intensity, arc, cycle, hs;
  double t = 0.3, tau = 0.5, mc_h = 0.1;
  std::size_t mc = 0;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
};

int run_verify(const VerifyArgs& a, std::ostream& out) {
  if (a.arc.empty() == a.cycle.empty()) throw DomainError("give exactly one of --arc or --cycle");
  if (a.mc > 0 && !a.seed) throw DomainError("--seed is required with --mc");
  Loaded in = load(a.graph, a.intensity);
  const DirectedGraph& g = *in.graph;
  std::vector<double> hs = default_h_grid();
  if (!a.hs.empty()) {
    hs.clear();
    for (const std::string& s : split(a.hs, ',')) {
      try {
        hs.push_back(std::stod(s));
      } catch (const std::exception&) {
        throw DomainError("--hs: bad number \"" + s + "\"");
      }
    }
  }
  Json doc;
  doc["t"] = a.t;
  ExpansionProbe probe;
  double reference = 0.0;
  std::optional<ExpansionTarget> target;
  if (!a.arc.empty()) {
    std::vector<VertexId> v = vertex_list(g, a.arc, "--arc");
    if (v.size() != 2) throw DomainError("--arc: expected two vertices a,b");
    auto e = g.find_arc(v[0], v[1]);
    if (!e) throw DomainError("--arc: not an arc of the graph");
    doc["target"] = Json{{"kind", "arc"}, {"walk", walk_json(g, v)}, {"tau", a.tau}};
    probe = probe_arc(*in.intensity, a.t, *e, hs, a.tau);
    reference = chi_arc(*in.intensity, a.t, *e);
    target = *e;
  } else {
    std::vector<VertexId> v = vertex_list(g, a.cycle, "--cycle");
    ClosedWalk c(v);
    validate_walk(g, c.walk());
    doc["target"] = Json{{"kind", "cycle"}, {"walk", walk_json(g, v)}};
    probe = probe_cycle(*in.intensity, a.t, c, hs);
    reference = chi_cycle(*in.intensity, a.t, c);
    target = c;
  }
  doc["h"] = probe.hs;
  doc["exact"] = probe.exact;
  doc["scaled"] = probe.scaled;
  FitResult f = fit_characteristic(probe);
  doc["fit"] = Json{{"chi", f.estimate}, {"intercept", f.intercept}, {"slope", f.slope}, {"max_residual", f.max_residual}};
  doc["reference_chi"] = reference;
  const double abs_err = std::abs(f.estimate - reference);
  doc["absolute_error"] = abs_err;
  doc["relative_error"] = reference != 0.0 ? abs_err / std::abs(reference) : abs_err;
  if (a.mc > 0) {
    McCheck m = mc_expansion_check(*in.intensity, a.t, a.mc_h, *target, a.mc, *a.seed, a.threads, a.tau);
    doc["mc"] = Json{{"h", a.mc_h},
                     {"paths", a.mc},
                     {"conditioned", m.mc.trials},
                     {"estimate", m.mc.p},
                     {"ci", Json::array({m.mc.lo, m.mc.hi})},
                     {"oracle", m.oracle},
                     {"consistent", m.consistent}};
  }
  out << dump_json(doc);
  return kExitOk;
}

struct PresetArgs {
  std::string name, emit;
  std::vector<std::string> params;
};

int run_preset(const PresetArgs& a, std::ostream& out) {
  std::map<std::string, std::string> params;
  for (const std::string& p : a.params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) throw DomainError("--param: expected key=value, got \"" + p + "\"");
    params[p.substr(0, eq)] = p.substr(eq + 1);
  }
  PresetDescriptor d = preset_by_name(a.name, params);
  if (a.emit.empty()) {
    Json doc;
    doc["name"] = d.name;
    doc["graph"] = graph_to_json(*d.graph);
    doc["intensity"] = intensity_to_json(d.intensity);
    if (d.partner) doc["partner"] = intensity_to_json(*d.partner);
    out << dump_json(doc);
    return kExitOk;
  }
  std::vector<std::string> files = split(a.emit, ',');
  if (files.size() < 2 || files.size() > 3) throw DomainError("--emit: expected graph.json,intensity.json[,partner.json]");
  if (files.size() == 3 && !d.partner) throw DomainError("--emit: preset \"" + d.name + "\" has no partner intensity");
  write_text_file(files[0], dump_json(graph_to_json(*d.graph)));
  write_text_file(files[1], dump_json(intensity_to_json(d.intensity)));
  if (files.size() == 3) write_text_file(files[2], dump_json(intensity_to_json(*d.partner)));
  Json doc{{"name", d.name}, {"files", files}};
  out << dump_json(doc);
  return kExitOk;
}

struct BasisArgs {
  std::string graph, root;
};

int run_basis(const BasisArgs& a, std::ostream& out) {
  GraphPtr gp = parse_graph(read_json_file(a.graph));
  const DirectedGraph& g = *gp;
  const VertexId root = a.root.empty() ? default_root(g) : vertex(g, a.root, "--root");
  SpanningTree tree = spanning_tree(g, root);
  CycleBasis basis = t_basis(g, tree);
  Json edges = Json::array();
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    if (v != root) edges.push_back(Json::array({g.name(tree.parent[v]), g.name(v)}));
  }
  Json ew = Json::array();
  for (const ClosedWalk& c : basis.edge_walks) ew.push_back(walk_json(g, c.vertices()));
  Json fc = Json::array();
  for (const ClosedWalk& c : basis.fundamental) fc.push_back(walk_json(g, c.vertices()));
  Json doc;
  doc["root"] = g.name(root);
  doc["tree_edges"] = std::move(edges);
  doc["edge_walks"] = std::move(ew);
  doc["fundamental"] = std::move(fc);
  doc["size"] = basis.size();
  doc["undirected_size"] = basis.undirected_size();
  out << dump_json(doc);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reciprocal classes of Markov jump processes on graphs", "recip"};
  app.require_subcommand(1);

  ChiArgs chi;
  auto* s_chi = app.add_subcommand("chi", "Tabulate reciprocal characteristics as CSV");
  s_chi->add_option("--graph", chi.graph, "Graph JSON")->required();
  s_chi->add_option("--intensity", chi.intensity, "Intensity JSON")->required();
  s_chi->add_option("--cycles", chi.cycles, "basis or all<=L");
  s_chi->add_option("--grid", chi.grid, "Time grid size")->check(CLI::Range(2, 1000000));
  s_chi->add_option("--delta", chi.delta, "Grid covers [delta, 1 - delta]")->check(CLI::Range(1e-9, 0.25));

  SameClassArgs sc;
  auto* s_sc = app.add_subcommand("same-class", "Decide whether two intensities share a reciprocal class");
  s_sc->add_option("--graph", sc.graph, "Graph JSON")->required();
  s_sc->add_option("--j", sc.j, "First intensity JSON")->required();
  s_sc->add_option("--k", sc.k, "Second intensity JSON")->required();
  s_sc->add_option("--grid", sc.grid, "Time grid size")->check(CLI::Range(2, 1000000));
  s_sc->add_option("--delta", sc.delta, "Grid covers [delta, 1 - delta]")->check(CLI::Range(1e-9, 0.25));
  s_sc->add_option("--tol-arc", sc.tol_arc, "Arc tolerance (absolute)")->check(CLI::PositiveNumber);
  s_sc->add_option("--tol-cycle", sc.tol_cycle, "Cycle tolerance (relative)")->check(CLI::PositiveNumber);

  BridgeArgs br;
  auto* s_br = app.add_subcommand("bridge", "Solve the bridge intensity between two vertices");
  s_br->add_option("--graph", br.graph, "Graph JSON")->required();
  s_br->add_option("--intensity", br.intensity, "Intensity JSON")->required();
  s_br->add_option("--from", br.from, "Start vertex")->required();
  s_br->add_option("--to", br.to, "End vertex")->required();
  s_br->add_option("--delta", br.delta, "Final-time cutoff")->check(CLI::Range(1e-6, 0.25));
  s_br->add_option("--grid", br.grid, "CSV time grid size")->check(CLI::Range(1, 1000000));
  s_br->add_option("--csv", br.csv, "Write (t, src, dst, rate) rows to this file");

  SimulateArgs sim;
  auto* s_sim = app.add_subcommand("simulate", "Sample paths as newline-delimited JSON");
  s_sim->add_option("--graph", sim.graph, "Graph JSON")->required();
  s_sim->add_option("--intensity", sim.intensity, "Intensity JSON")->required();
  s_sim->add_option("--from", sim.from, "Start vertex")->required();
  s_sim->add_option("--paths", sim.paths, "Number of paths")->required()->check(CLI::Range(1, 100000000));
  s_sim->add_option("--seed", sim.seed, "Random seed");
  s_sim->add_option("--bridge-to", sim.bridge_to, "Sample bridges ending at this vertex");
  s_sim->add_option("--t-start", sim.t_start, "Window start")->check(CLI::Range(0.0, 1.0));
  s_sim->add_option("--t-end", sim.t_end, "Window end")->check(CLI::Range(0.0, 1.0));
  s_sim->add_option("--delta", sim.delta, "Bridge cutoff")->check(CLI::Range(1e-6, 0.25));
  s_sim->add_option("--threads", sim.threads, "Worker threads (0: RECIP_THREADS or all cores)");

  VerifyArgs ver;
  auto* s_ver = app.add_subcommand("verify", "Check short-time expansions against quadrature and Monte Carlo");
  s_ver->add_option("--graph", ver.graph, "Graph JSON")->required();
  s_ver->add_option("--intensity", ver.intensity, "Intensity JSON")->required();
  s_ver->add_option("--t", ver.t, "Base time")->check(CLI::Range(0.0, 1.0));
  auto* o_arc = s_ver->add_option("--arc", ver.arc, "Arc a,b");
  auto* o_cyc = s_ver->add_option("--cycle", ver.cycle, "Closed walk a,b,...,a");
  o_arc->excludes(o_cyc);
  s_ver->add_option("--hs", ver.hs, "Decreasing h values, comma separated");
  s_ver->add_option("--tau", ver.tau, "Arc event fraction")->check(CLI::Range(1e-9, 1.0));
  s_ver->add_option("--mc", ver.mc, "Monte Carlo paths")->check(CLI::Range(1000, 100000000));
  s_ver->add_option("--mc-h", ver.mc_h, "Window length of the Monte Carlo check")->check(CLI::PositiveNumber);
  s_ver->add_option("--seed", ver.seed, "Random seed");
  s_ver->add_option("--threads", ver.threads, "Worker threads (0: RECIP_THREADS or all cores)");

  PresetArgs pre;
  auto* s_pre = app.add_subcommand("preset", "Write a preset graph and intensity");
  s_pre->add_option("--name", pre.name, "Preset name")->required();
  s_pre->add_option("--param", pre.params, "key=value, repeatable");
  s_pre->add_option("--emit", pre.emit, "graph.json,intensity.json[,partner.json]");

  BasisArgs bas;
  auto* s_bas = app.add_subcommand("basis", "Print a spanning tree and its T-basis");
  s_bas->add_option("--graph", bas.graph, "Graph JSON")->required();
  s_bas->add_option("--root", bas.root, "Tree root");

  if (argc > 1 && argv[1][0] != '-') {
    bool known = false;
    for (const CLI::App* s : app.get_subcommands({})) known = known || s->get_name() == argv[1];
    if (!known) {
      err << "recip: unknown subcommand \"" << argv[1] << "\"\n";
      return kExitUsage;
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "recip: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (s_chi->parsed()) return run_chi(chi, out);
    if (s_sc->parsed()) return run_same_class(sc, out);
    if (s_br->parsed()) return run_bridge(br, out);
    if (s_sim->parsed()) return run_simulate(sim, out);
    if (s_ver->parsed()) return run_verify(ver, out);
    if (s_pre->parsed()) return run_preset(pre, out);
    if (s_bas->parsed()) return run_basis(bas, out);
  } catch (const NumericalError& e) {
    err << "recip: numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    err << "recip: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace recip
