#include "recip/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "recip/error.hpp"

namespace recip {

namespace {

const Json& field(const Json& doc, const char* name, const std::string& where) {
  if (!doc.is_object() || !doc.contains(name)) throw ParseError(where + ": missing field \"" + name + "\"");
  return doc.at(name);
}

double number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  return v.get<double>();
}

std::string string_of(const Json& v, const std::string& where) {
  if (!v.is_string()) throw ParseError(where + ": expected a string");
  return v.get<std::string>();
}

double param(const Json& obj, const char* name, const std::string& where) {
  return number(field(obj, name, where), where + "." + name);
}

Profile parse_entry(const Json& e, const std::string& where) {
  if (e.is_number()) return Profile::constant(e.get<double>());
  if (e.is_array()) {
    std::vector<double> v;
    for (std::size_t i = 0; i < e.size(); ++i) v.push_back(number(e[i], where + "[" + std::to_string(i) + "]"));
    return Profile::grid(std::move(v));
  }
  if (!e.is_object()) throw ParseError(where + ": expected a number, an array or an object");
  const std::string form = string_of(field(e, "form", where), where + ".form");
  if (form == "constant") return Profile::constant(param(e, "value", where));
  if (form == "exponential") return Profile::exponential(param(e, "a", where), param(e, "c", where));
  if (form == "sinusoid") {
    return Profile::sinusoid(param(e, "a", where), param(e, "b", where), param(e, "omega", where),
                             e.contains("phase") ? param(e, "phase", where) : 0.0);
  }
  if (form == "linear") return Profile::linear(param(e, "a", where), param(e, "b", where));
  if (form == "grid") {
    const Json& vals = field(e, "values", where);
    if (!vals.is_array()) throw ParseError(where + ".values: expected an array");
    std::vector<double> v;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      v.push_back(number(vals[i], where + ".values[" + std::to_string(i) + "]"));
    }
    return Profile::grid(std::move(v), e.contains("h_fd") ? param(e, "h_fd", where) : 1e-4);
  }
  throw ParseError(where + ".form: unknown form \"" + form + "\"");
}

Json entry_to_json(const Profile& p) {
  const auto& q = p.params();
  switch (p.kind()) {
    case ProfileKind::constant:
      return q[0];
    case ProfileKind::exponential:
      return Json{{"form", "exponential"}, {"a", q[0]}, {"c", q[1]}};
    case ProfileKind::sinusoid:
      return Json{{"form", "sinusoid"}, {"a", q[0]}, {"b", q[1]}, {"omega", q[2]}, {"phase", q[3]}};
    case ProfileKind::linear:
      return Json{{"form", "linear"}, {"a", q[0]}, {"b", q[1]}};
    case ProfileKind::grid:
      if (p.h_fd() == 1e-4) return Json(p.grid_values());
      return Json{{"form", "grid"}, {"values", p.grid_values()}, {"h_fd", p.h_fd()}};
  }
  return nullptr;
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError(path + ": cannot write file");
  out << text;
  if (!out) throw DomainError(path + ": write failed");
}

GraphPtr parse_graph(const Json& doc) {
  const std::string where = "graph";
  const Json& vs = field(doc, "vertices", where);
  if (!vs.is_array()) throw ParseError("graph.vertices: expected an array");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < vs.size(); ++i) names.push_back(string_of(vs[i], "graph.vertices[" + std::to_string(i) + "]"));
  const Json& as = field(doc, "arcs", where);
  if (!as.is_array()) throw ParseError("graph.arcs: expected an array");
  std::vector<std::pair<std::string, std::string>> arcs;
  for (std::size_t i = 0; i < as.size(); ++i) {
    const std::string w = "graph.arcs[" + std::to_string(i) + "]";
    if (!as[i].is_array() || as[i].size() != 2) throw ParseError(w + ": expected a pair of vertex names");
    arcs.emplace_back(string_of(as[i][0], w), string_of(as[i][1], w));
  }
  bool symmetrize = false;
  if (doc.contains("symmetrize")) {
    if (!doc["symmetrize"].is_boolean()) throw ParseError("graph.symmetrize: expected a boolean");
    symmetrize = doc["symmetrize"].get<bool>();
  }
  std::optional<Truncation> trunc;
  std::vector<std::string> boundary_names;
  if (doc.contains("truncation")) {
    const Json& t = doc["truncation"];
    if (!t.is_object()) throw ParseError("graph.truncation: expected an object");
    trunc = Truncation{};
    if (t.contains("description")) trunc->description = string_of(t["description"], "graph.truncation.description");
    const Json& b = field(t, "boundary", "graph.truncation");
    if (!b.is_array()) throw ParseError("graph.truncation.boundary: expected an array");
    for (std::size_t i = 0; i < b.size(); ++i) {
      boundary_names.push_back(string_of(b[i], "graph.truncation.boundary[" + std::to_string(i) + "]"));
    }
    // boundary ids are resolved against the vertex list
    for (const std::string& n : boundary_names) {
      auto it = std::find(names.begin(), names.end(), n);
      if (it == names.end()) throw ParseError("graph.truncation.boundary: unknown vertex \"" + n + "\"");
      trunc->boundary.push_back(static_cast<VertexId>(it - names.begin()));
    }
  }
  return std::make_shared<const DirectedGraph>(DirectedGraph::build(std::move(names), arcs, symmetrize, trunc));
}

Json graph_to_json(const DirectedGraph& g) {
  Json doc;
  doc["vertices"] = g.names();
  Json arcs = Json::array();
  for (const Arc& a : g.arcs()) arcs.push_back(Json::array({g.name(a.src), g.name(a.dst)}));
  doc["arcs"] = std::move(arcs);
  doc["symmetrize"] = false;
  if (g.truncation()) {
    Json b = Json::array();
    for (VertexId v : g.truncation()->boundary) b.push_back(g.name(v));
    doc["truncation"] = Json{{"description", g.truncation()->description}, {"boundary", std::move(b)}};
  }
  return doc;
}

ArcId parse_arc_key(const DirectedGraph& g, const std::string& key) {
  for (std::size_t pos = key.find("->"); pos != std::string::npos; pos = key.find("->", pos + 1)) {
    auto s = g.find(key.substr(0, pos));
    auto d = g.find(key.substr(pos + 2));
    if (s && d) {
      if (auto a = g.find_arc(*s, *d)) return *a;
      throw DomainError("\"" + key + "\" is not an arc of the graph");
    }
  }
  throw DomainError("cannot resolve arc \"" + key + "\"");
}

IntensitySpec parse_intensity(const Json& doc, GraphPtr graph) {
  const std::string type = string_of(field(doc, "type", "intensity"), "intensity.type");
  if (type != "constant" && type != "closed_form" && type != "grid") {
    throw ParseError("intensity.type: unknown type \"" + type + "\"");
  }
  const DirectedGraph& g = *graph;
  std::vector<std::optional<Profile>> profiles(g.num_arcs());
  if (doc.contains("arcs")) {
    const Json& arcs = doc["arcs"];
    if (!arcs.is_object()) throw ParseError("intensity.arcs: expected an object keyed \"src->dst\"");
    for (const auto& [key, e] : arcs.items()) {
      ArcId a = 0;
      try {
        a = parse_arc_key(g, key);
      } catch (const DomainError& err) {
        throw ParseError(std::string("intensity.arcs: ") + err.what());
      }
      if (profiles[a]) throw ParseError("intensity.arcs: duplicate entry for \"" + key + "\"");
      profiles[a] = parse_entry(e, "intensity.arcs[\"" + key + "\"]");
    }
  }
  std::optional<Profile> fallback;
  if (doc.contains("default")) fallback = parse_entry(doc["default"], "intensity.default");
  std::vector<Profile> out;
  out.reserve(g.num_arcs());
  for (ArcId a = 0; a < g.num_arcs(); ++a) {
    if (profiles[a]) {
      out.push_back(*profiles[a]);
    } else if (fallback) {
      out.push_back(*fallback);
    } else {
      throw ParseError("intensity.arcs: no rate for arc \"" + g.arc_label(a) + "\" and no default");
    }
    const ProfileKind k = out.back().kind();
    if (type == "constant" && k != ProfileKind::constant) {
      throw ParseError("intensity.type: \"constant\" but arc \"" + g.arc_label(a) + "\" is time-dependent");
    }
    if (type == "closed_form" && k == ProfileKind::grid) {
      throw ParseError("intensity.type: \"closed_form\" but arc \"" + g.arc_label(a) + "\" is a grid");
    }
  }
  return IntensitySpec(std::move(graph), std::move(out));
}

Json intensity_to_json(const IntensitySpec& k) {
  const DirectedGraph& g = k.graph();
  std::string type = "constant";
  for (const Profile& p : k.profiles()) {
    if (p.kind() == ProfileKind::grid) {
      type = "grid";
      break;
    }
    if (p.kind() != ProfileKind::constant) type = "closed_form";
  }
  Json doc;
  doc["type"] = type;
  Json arcs = Json::object();
  for (ArcId a = 0; a < g.num_arcs(); ++a) {
    arcs[g.name(g.arc(a).src) + "->" + g.name(g.arc(a).dst)] = entry_to_json(k.profile(a));
  }
  doc["arcs"] = std::move(arcs);
  return doc;
}

Json path_to_json(const DirectedGraph& g, const PathSample& p) {
  Json jumps = Json::array();
  for (const auto& [t, v] : p.jumps) jumps.push_back(Json::array({t, g.name(v)}));
  return Json{{"x0", g.name(p.x0)}, {"jumps", std::move(jumps)}};
}

PathSample parse_path(const DirectedGraph& g, const Json& doc) {
  PathSample p;
  const std::string x0 = string_of(field(doc, "x0", "path"), "path.x0");
  auto v0 = g.find(x0);
  if (!v0) throw ParseError("path.x0: unknown vertex \"" + x0 + "\"");
  p.x0 = *v0;
  const Json& jumps = field(doc, "jumps", "path");
  if (!jumps.is_array()) throw ParseError("path.jumps: expected an array");
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    const std::string w = "path.jumps[" + std::to_string(i) + "]";
    if (!jumps[i].is_array() || jumps[i].size() != 2) throw ParseError(w + ": expected [t, vertex]");
    const std::string name = string_of(jumps[i][1], w);
    auto v = g.find(name);
    if (!v) throw ParseError(w + ": unknown vertex \"" + name + "\"");
    p.jumps.emplace_back(number(jumps[i][0], w), *v);
  }
  return p;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(out), width_(header.size()) {
  std::vector<Cell> cells(header.begin(), header.end());
  row(cells);
}

void CsvWriter::row(const std::vector<Cell>& cells) {
  if (cells.size() != width_) throw DomainError("CSV row width does not match the header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out_ << ',';
    if (const double* d = std::get_if<double>(&cells[i])) {
      out_ << format_double(*d);
    } else if (const long long* n = std::get_if<long long>(&cells[i])) {
      out_ << *n;
    } else {
      const std::string& s = std::get<std::string>(cells[i]);
      if (s.find_first_of(",\"\n") == std::string::npos) {
        out_ << s;
      } else {
        out_ << '"';
        for (char c : s) {
          if (c == '"') out_ << '"';
          out_ << c;
        }
        out_ << '"';
      }
    }
  }
  out_ << '\n';
}

std::string dump_json(const Json& doc, int indent) { return doc.dump(indent) + "\n"; }

}  // namespace recip
