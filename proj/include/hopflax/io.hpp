#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hopflax/cost_functions.hpp"
#include "hopflax/error.hpp"
#include "hopflax/inequalities.hpp"
#include "hopflax/measures.hpp"
#include "hopflax/metric_space.hpp"

namespace hopflax::io {

using Json = nlohmann::ordered_json;

/// Shortest round-trip text for a double ("%.17g").
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Parses a JSON document; syntax errors become ParseError with the line.
inline Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i + 1 < upto; ++i)
      if (text[i] == '\n') ++line;
    fail(ErrorKind::ParseError, origin + ":" + std::to_string(line) + ": " + e.what());
  }
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::ParseError, path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str(), path);
}

namespace detail {

[[noreturn]] inline void bad(const std::string& what) { fail(ErrorKind::ValidationError, what); }

inline const Json& field(const Json& doc, const char* key, const char* what) {
  if (!doc.is_object()) bad(std::string(what) + " document must be a JSON object");
  auto it = doc.find(key);
  if (it == doc.end()) bad(std::string(what) + " document lacks \"" + key + "\"");
  return *it;
}

inline double number(const Json& v, const std::string& what) {
  if (!v.is_number()) bad(what + " must be a number");
  return v.get<double>();
}

inline std::size_t count(const Json& v, const std::string& what) {
  if (!v.is_number_integer() || v.get<long long>() < 0) bad(what + " must be a nonnegative integer");
  return v.get<std::size_t>();
}

inline std::vector<double> numbers(const Json& v, const std::string& what) {
  if (!v.is_array()) bad(what + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(number(v[i], what + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace detail

/// A space together with display names for its points.
struct LoadedSpace {
  MetricSpace space;
  std::vector<std::string> labels;
};

/// {"type":"matrix","distances":[[...]],"slope_radius":"nearest"|r,"labels":[...]},
/// {"type":"grid","dimension":d,"points_per_axis":N,"side_length":L},
/// {"type":"graph","n":n,"edges":[[i,j,w],...]}.
inline LoadedSpace space_from_json(const Json& doc) {
  const Json& type = detail::field(doc, "type", "space");
  if (!type.is_string()) detail::bad("space \"type\" must be a string");
  const std::string t = type.get<std::string>();
  LoadedSpace out;
  if (t == "matrix") {
    const Json& rows = detail::field(doc, "distances", "space");
    if (!rows.is_array()) detail::bad("\"distances\" must be an array of rows");
    std::vector<std::vector<double>> m;
    for (std::size_t i = 0; i < rows.size(); ++i)
      m.push_back(detail::numbers(rows[i], "distances[" + std::to_string(i) + "]"));
    SlopeRadiusPolicy policy = SlopeRadiusPolicy::nearest();
    if (auto it = doc.find("slope_radius"); it != doc.end()) {
      if (it->is_string()) {
        if (it->get<std::string>() != "nearest") detail::bad("slope_radius must be \"nearest\" or a number");
      } else {
        policy = SlopeRadiusPolicy::fixed(detail::number(*it, "slope_radius"));
      }
    }
    out.space = build_matrix_space(SquareMatrix::from_rows(m), policy);
  } else if (t == "grid") {
    const Json& dim = detail::field(doc, "dimension", "space");
    if (!dim.is_number_integer()) detail::bad("\"dimension\" must be 1 or 2");
    out.space = build_grid_space(dim.get<int>(),
                                 detail::count(detail::field(doc, "points_per_axis", "space"),
                                               "points_per_axis"),
                                 detail::number(detail::field(doc, "side_length", "space"),
                                                "side_length"));
  } else if (t == "graph") {
    const std::size_t n = detail::count(detail::field(doc, "n", "space"), "n");
    const Json& edges = detail::field(doc, "edges", "space");
    if (!edges.is_array()) detail::bad("\"edges\" must be an array of [i, j, w] triples");
    std::vector<WeightedEdge> es;
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const std::string name = "edges[" + std::to_string(k) + "]";
      if (!edges[k].is_array() || edges[k].size() != 3) detail::bad(name + " must be [i, j, w]");
      es.push_back({detail::count(edges[k][0], name), detail::count(edges[k][1], name),
                    detail::number(edges[k][2], name)});
    }
    out.space = build_graph_space(es, n);
  } else {
    detail::bad("unknown space type \"" + t + "\"");
  }
  if (auto it = doc.find("labels"); it != doc.end()) {
    if (!it->is_array() || it->size() != out.space.size())
      detail::bad("\"labels\" must list one string per point");
    for (const auto& l : *it) {
      if (!l.is_string()) detail::bad("labels must be strings");
      out.labels.push_back(l.get<std::string>());
    }
  } else {
    for (std::size_t i = 0; i < out.space.size(); ++i) out.labels.push_back(std::to_string(i));
  }
  return out;
}

inline Json space_to_json(const MetricSpace& space) {
  Json doc;
  doc["type"] = "matrix";
  Json rows = Json::array();
  for (const auto& r : space.distances().to_rows()) rows.push_back(r);
  doc["distances"] = rows;
  return doc;
}

/// {"kind":"power","p":2}, {"kind":"linear_capped","cap":1} or
/// {"kind":"custom","samples":[[h,a],...]}; an optional "scale" multiplies.
inline CostFunction cost_from_json(const Json& doc) {
  const Json& kind = detail::field(doc, "kind", "cost");
  if (!kind.is_string()) detail::bad("cost \"kind\" must be a string");
  const std::string k = kind.get<std::string>();
  CostFunction c = CostFunction::power(2.0);
  if (k == "power") {
    c = CostFunction::power(detail::number(detail::field(doc, "p", "cost"), "p"));
  } else if (k == "linear_capped") {
    c = CostFunction::linear_capped(detail::number(detail::field(doc, "cap", "cost"), "cap"));
  } else if (k == "custom") {
    const Json& s = detail::field(doc, "samples", "cost");
    if (!s.is_array()) detail::bad("\"samples\" must be an array of [h, alpha(h)] pairs");
    std::vector<std::pair<double, double>> samples;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto v = detail::numbers(s[i], "samples[" + std::to_string(i) + "]");
      if (v.size() != 2) detail::bad("samples[" + std::to_string(i) + "] must be [h, alpha(h)]");
      samples.emplace_back(v[0], v[1]);
    }
    c = CostFunction::custom(std::move(samples));
  } else {
    detail::bad("unknown cost kind \"" + k + "\"");
  }
  if (auto it = doc.find("scale"); it != doc.end()) c = c.scaled(detail::number(*it, "scale"));
  return c;
}

inline ProbMeasure measure_from_json(const Json& doc) {
  return ProbMeasure(detail::numbers(detail::field(doc, "weights", "measure"), "weights"));
}

inline ScalarField field_from_json(const Json& doc) {
  return ScalarField(detail::numbers(detail::field(doc, "values", "field"), "values"));
}

inline Json report_to_json(const InequalityReport& r) {
  Json doc;
  doc["name"] = std::string(to_string(r.name));
  doc["constant_estimate"] = r.constant_estimate;
  doc["bound_side"] = std::string(to_string(r.bound_side));
  switch (r.witness_kind) {
    case WitnessKind::none: doc["witness"] = nullptr; break;
    case WitnessKind::field: doc["witness"] = {{"values", r.witness}}; break;
    case WitnessKind::measure: doc["witness"] = {{"weights", r.witness}}; break;
  }
  doc["parameters"] = r.parameters;
  doc["trials"] = r.trials;
  doc["seed"] = r.seed;
  doc["family"] = r.family;
  return doc;
}

}  // namespace hopflax::io
