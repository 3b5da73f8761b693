#pragma once

// File formats: graph and intensity JSON, CSV tables, NDJSON paths.

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "recip/graph.hpp"
#include "recip/intensity.hpp"
#include "recip/simulator.hpp"

namespace recip {

using Json = nlohmann::ordered_json;

// Throws ParseError on unreadable or malformed files.
Json read_json_file(const std::string& path);
// Throws DomainError when the file cannot be written.
void write_text_file(const std::string& path, const std::string& text);

// {"vertices": [...], "arcs": [[a, b], ...], "symmetrize": bool,
//  "truncation": {"description": str, "boundary": [...]}}
GraphPtr parse_graph(const Json& doc);
Json graph_to_json(const DirectedGraph& g);

// {"type": "constant" | "closed_form" | "grid", "default": entry, "arcs": {"a->b": entry}}
// entry: number (constant), array (grid values), or object with "form".
IntensitySpec parse_intensity(const Json& doc, GraphPtr graph);
Json intensity_to_json(const IntensitySpec& k);

// Resolves "src->dst" against the graph's vertex names.
ArcId parse_arc_key(const DirectedGraph& g, const std::string& key);

// {"x0": name, "jumps": [[t, name], ...]}
Json path_to_json(const DirectedGraph& g, const PathSample& p);
PathSample parse_path(const DirectedGraph& g, const Json& doc);

// 17 significant digits.
std::string format_double(double v);

// Comma-separated rows with a header; strings containing commas or quotes are quoted.
class CsvWriter {
 public:
  using Cell = std::variant<double, std::string, long long>;
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);
  void row(const std::vector<Cell>& cells);

 private:
  std::ostream& out_;
  std::size_t width_;
};

// Dump with sorted-as-inserted keys and a trailing newline.
std::string dump_json(const Json& doc, int indent = 2);

}  // namespace recip
