#pragma once

// JSON documents for configurations, filtrations, abstract filtered systems and
// plane arrangements. Rationals are always strings; subspaces are lists of
// row vectors in reduced row echelon form.

#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "upsilon/chern.hpp"
#include "upsilon/errors.hpp"
#include "upsilon/filtration.hpp"
#include "upsilon/rational.hpp"
#include "upsilon/stability.hpp"
#include "upsilon/subspace.hpp"
#include "upsilon/surface.hpp"

namespace upsilon {

using json = nlohmann::json;

struct ConfigDocument {
  DivisorConfiguration config;
  std::optional<FilteredConfiguration> filtrations;
  std::optional<FilteredSystemData> system;

  friend bool operator==(const ConfigDocument&, const ConfigDocument&) = default;
};

/// Two-space indentation, sorted keys, trailing newline.
inline std::string dump_canonical(const json& j) { return j.dump(2) + "\n"; }

inline json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file", path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), path + ": /");
  }
}

namespace detail {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  std::string where(const std::string& pointer) const {
    return source_ + ": " + (pointer.empty() ? std::string("/") : pointer);
  }

  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const {
    throw ParseError(message, where(pointer));
  }

  const json& field(const json& object, const char* key, const std::string& pointer) const {
    if (!object.is_object()) fail(pointer, "expected an object");
    auto it = object.find(key);
    if (it == object.end()) fail(pointer, std::string("missing field \"") + key + "\"");
    return *it;
  }

  const json& array(const json& j, const std::string& pointer) const {
    if (!j.is_array()) fail(pointer, "expected an array");
    return j;
  }

  Rat rational(const json& j, const std::string& pointer) const {
    if (j.is_number_integer()) return Rat(j.get<long>());
    if (!j.is_string()) fail(pointer, "expected a rational string such as \"3/4\"");
    try {
      return Rat::parse(j.get<std::string>());
    } catch (const ParseError& e) {
      fail(pointer, e.message());
    }
  }

  long integer(const json& j, const std::string& pointer) const {
    if (!j.is_number_integer()) fail(pointer, "expected an integer");
    return j.get<long>();
  }

  std::size_t count(const json& j, const std::string& pointer) const {
    long v = integer(j, pointer);
    if (v < 0) fail(pointer, "expected a non-negative integer");
    return static_cast<std::size_t>(v);
  }

  std::string string(const json& j, const std::string& pointer) const {
    if (!j.is_string()) fail(pointer, "expected a string");
    return j.get<std::string>();
  }

  Subspace subspace(const json& j, const std::string& pointer, std::optional<std::size_t> ambient) const {
    array(j, pointer);
    if (j.empty() && !ambient) fail(pointer, "cannot infer the ambient dimension of an empty basis");
    RatMatrix rows;
    for (std::size_t k = 0; k < j.size(); ++k) {
      const std::string at = pointer + "/" + std::to_string(k);
      array(j[k], at);
      RatVector row;
      for (std::size_t c = 0; c < j[k].size(); ++c) row.push_back(rational(j[k][c], at + "/" + std::to_string(c)));
      std::size_t want = ambient ? *ambient : rows.empty() ? row.size() : rows.front().size();
      if (row.size() != want || want == 0)
        throw DimensionMismatch("row has " + std::to_string(row.size()) + " entries, expected " + std::to_string(want),
                                where(at));
      rows.push_back(std::move(row));
    }
    std::size_t r = ambient ? *ambient : rows.front().size();
    return reduce(std::move(rows), r);
  }

  [[noreturn]] void relocate(const Error& e, const std::string& pointer) const {
    std::string at = where(e.location().empty() ? pointer : e.location());
    switch (e.kind()) {
      case ErrorKind::DimensionMismatch: throw DimensionMismatch(e.message(), at);
      case ErrorKind::Parse: throw ParseError(e.message(), at);
      default: throw ValidationError(e.message(), at);
    }
  }

 private:
  std::string source_;
};

inline Filtration read_filtration(const Reader& rd, const json& j, const std::string& pointer,
                                  std::optional<std::size_t>& ambient) {
  rd.array(j, pointer);
  if (j.empty()) throw ValidationError("filtration has no steps", rd.where(pointer));
  std::vector<FiltrationStep> steps;
  for (std::size_t s = 0; s < j.size(); ++s) {
    const std::string at = pointer + "/" + std::to_string(s);
    Rat w = rd.rational(rd.field(j[s], "weight", at), at + "/weight");
    Subspace v = rd.subspace(rd.field(j[s], "basis", at), at + "/basis", ambient);
    if (!ambient) ambient = v.ambient_dim();
    steps.push_back({std::move(w), std::move(v)});
  }
  if (auto v = find_step_violation(steps))
    throw ValidationError(v->message, rd.where(pointer + "/" + std::to_string(v->step)));
  return Filtration(std::move(steps));
}

inline GrSpectrum read_spectrum(const Reader& rd, const json& j, const std::string& pointer) {
  rd.array(j, pointer);
  GrSpectrum out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string at = pointer + "/" + std::to_string(k);
    out.push_back({rd.rational(rd.field(j[k], "weight", at), at + "/weight"),
                   rd.count(rd.field(j[k], "multiplicity", at), at + "/multiplicity")});
  }
  return out;
}

inline FilteredSystemData read_system(const Reader& rd, const json& j, const std::string& pointer,
                                      std::size_t components) {
  FilteredSystemData data;
  data.rank = rd.count(rd.field(j, "rank", pointer), pointer + "/rank");
  const json& tables = rd.array(rd.field(j, "component_tables", pointer), pointer + "/component_tables");
  if (tables.size() != components)
    throw DimensionMismatch("expected " + std::to_string(components) + " component tables, got " +
                                std::to_string(tables.size()),
                            rd.where(pointer + "/component_tables"));
  for (std::size_t i = 0; i < tables.size(); ++i)
    data.component_tables.push_back(read_spectrum(rd, tables[i], pointer + "/component_tables/" + std::to_string(i)));
  const json& crossings = rd.array(rd.field(j, "crossing_tables", pointer), pointer + "/crossing_tables");
  for (std::size_t q = 0; q < crossings.size(); ++q) {
    const std::string at = pointer + "/crossing_tables/" + std::to_string(q);
    const json& pair = rd.array(rd.field(crossings[q], "components", at), at + "/components");
    if (pair.size() != 2) rd.fail(at + "/components", "expected two component indices");
    CrossingTable t;
    t.first = rd.count(pair[0], at + "/components/0");
    t.second = rd.count(pair[1], at + "/components/1");
    if (t.second >= components) rd.fail(at + "/components/1", "component index out of range");
    const json& entries = rd.array(rd.field(crossings[q], "entries", at), at + "/entries");
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const std::string e = at + "/entries/" + std::to_string(k);
      t.entries.push_back({rd.rational(rd.field(entries[k], "alpha", e), e + "/alpha"),
                           rd.rational(rd.field(entries[k], "beta", e), e + "/beta"),
                           rd.count(rd.field(entries[k], "multiplicity", e), e + "/multiplicity")});
    }
    data.crossing_tables.push_back(std::move(t));
  }
  try {
    require_valid(data);
  } catch (const ValidationError& e) {
    rd.relocate(e, pointer);
  }
  return data;
}

}  // namespace detail

/// Reads a configuration document. A report carrying a "configuration" member
/// is accepted as well, so the best configuration of a search can be fed back.
inline ConfigDocument parse_config(const json& document, const std::string& source = "<input>") {
  detail::Reader rd(source);
  const json* root = &document;
  std::string base;
  if (document.is_object() && document.contains("configuration") && !document.contains("components")) {
    root = &document["configuration"];
    base = "/configuration";
  }
  const json& j = *root;
  if (!j.is_object()) rd.fail(base, "expected an object");

  ConfigDocument doc;
  const json& comps = rd.array(rd.field(j, "components", base), base + "/components");
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const std::string at = base + "/components/" + std::to_string(i);
    doc.config.components.push_back({rd.string(rd.field(comps[i], "name", at), at + "/name"),
                                     rd.rational(rd.field(comps[i], "degree", at), at + "/degree")});
  }
  const json& matrix = rd.array(rd.field(j, "intersection", base), base + "/intersection");
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    const std::string at = base + "/intersection/" + std::to_string(i);
    rd.array(matrix[i], at);
    std::vector<long> row;
    for (std::size_t k = 0; k < matrix[i].size(); ++k) row.push_back(rd.integer(matrix[i][k], at + "/" + std::to_string(k)));
    doc.config.intersection.push_back(std::move(row));
  }
  if (auto c = check(doc.config); !c) throw ValidationError(c.message, rd.where(base + c.path));

  if (auto it = j.find("filtrations"); it != j.end()) {
    const std::string at = base + "/filtrations";
    rd.array(*it, at);
    if (it->size() != doc.config.size())
      throw DimensionMismatch("expected one filtration per component (" + std::to_string(doc.config.size()) +
                                  "), got " + std::to_string(it->size()),
                              rd.where(at));
    std::optional<std::size_t> ambient;
    std::vector<Filtration> fs;
    for (std::size_t i = 0; i < it->size(); ++i)
      fs.push_back(detail::read_filtration(rd, (*it)[i], at + "/" + std::to_string(i), ambient));
    doc.filtrations.emplace(std::move(fs));
  }
  if (auto it = j.find("system"); it != j.end())
    doc.system = detail::read_system(rd, *it, base + "/system", doc.config.size());
  return doc;
}

inline PlaneArrangement parse_arrangement(const json& j, const std::string& source = "<input>") {
  detail::Reader rd(source);
  PlaneArrangement arr;
  const json& curves = rd.array(rd.field(j, "curves", ""), "/curves");
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const std::string at = "/curves/" + std::to_string(i);
    arr.curves.push_back({rd.string(rd.field(curves[i], "name", at), at + "/name"),
                          rd.integer(rd.field(curves[i], "degree", at), at + "/degree")});
  }
  const json& points = rd.array(rd.field(j, "points", ""), "/points");
  for (std::size_t p = 0; p < points.size(); ++p) {
    const std::string at = "/points/" + std::to_string(p);
    MultiplePoint pt{rd.string(rd.field(points[p], "id", at), at + "/id"), {}};
    const json& on = rd.array(rd.field(points[p], "curves", at), at + "/curves");
    for (std::size_t k = 0; k < on.size(); ++k) pt.curves.push_back(rd.string(on[k], at + "/curves/" + std::to_string(k)));
    arr.points.push_back(std::move(pt));
  }
  if (auto c = check(arr); !c) throw ValidationError(c.message, rd.where(c.path));
  return arr;
}

inline json to_json(const Rat& q) { return q.to_string(); }

inline json to_json(const Subspace& v) {
  json rows = json::array();
  for (const auto& row : v.basis()) {
    json r = json::array();
    for (const auto& x : row) r.push_back(x.to_string());
    rows.push_back(std::move(r));
  }
  return rows;
}

inline json to_json(const Filtration& f) {
  json steps = json::array();
  for (const auto& s : f.steps()) steps.push_back({{"weight", to_json(s.weight)}, {"basis", to_json(s.space)}});
  return steps;
}

inline json to_json(const FilteredConfiguration& fc) {
  json out = json::array();
  for (const auto& f : fc) out.push_back(to_json(f));
  return out;
}

inline json to_json(const DivisorConfiguration& c) {
  json comps = json::array();
  for (const auto& comp : c.components) comps.push_back({{"name", comp.name}, {"degree", to_json(comp.degree)}});
  return {{"components", comps}, {"intersection", c.intersection}};
}

inline json to_json(const FilteredSystemData& d) {
  json tables = json::array();
  for (const auto& t : d.component_tables) {
    json entries = json::array();
    for (const auto& e : t) entries.push_back({{"weight", to_json(e.weight)}, {"multiplicity", e.multiplicity}});
    tables.push_back(std::move(entries));
  }
  json crossings = json::array();
  for (const auto& t : d.crossing_tables) {
    json entries = json::array();
    for (const auto& e : t.entries)
      entries.push_back({{"alpha", to_json(e.alpha)}, {"beta", to_json(e.beta)}, {"multiplicity", e.multiplicity}});
    crossings.push_back({{"components", {t.first, t.second}}, {"entries", std::move(entries)}});
  }
  return {{"rank", d.rank}, {"component_tables", std::move(tables)}, {"crossing_tables", std::move(crossings)}};
}

inline json to_json(const ConfigDocument& doc) {
  json out = to_json(doc.config);
  if (doc.filtrations) out["filtrations"] = to_json(*doc.filtrations);
  if (doc.system) out["system"] = to_json(*doc.system);
  return out;
}

inline json to_json(const PlaneArrangement& arr) {
  json curves = json::array();
  for (const auto& c : arr.curves) curves.push_back({{"name", c.name}, {"degree", c.degree}});
  json points = json::array();
  for (const auto& p : arr.points) points.push_back({{"id", p.id}, {"curves", p.curves}});
  return {{"curves", std::move(curves)}, {"points", std::move(points)}};
}

inline json to_json(const ChernReport& r) {
  json c1 = json::array();
  for (const auto& c : r.c1_coefficients) c1.push_back(to_json(c));
  return {{"c1_coefficients", std::move(c1)},
          {"c1_squared", to_json(r.c1_squared)},
          {"self_term", to_json(r.self_term)},
          {"crossing_term", to_json(r.crossing_term)},
          {"c2_number", to_json(r.c2_number)}};
}

inline json to_json(const ObservedDegree& o) { return {{"basis", to_json(o.subspace)}, {"degree", to_json(o.degree)}}; }

inline json to_json(const StabilityVerdict& v, bool with_observed = true) {
  json out = {{"status", to_string(v.status)},
              {"certainty", to_string(v.certainty)},
              {"evaluated", v.evaluated},
              {"candidate_cap_hit", v.candidate_cap_hit},
              {"witness", v.witness ? to_json(*v.witness) : json(nullptr)},
              {"max_observed_degree", v.max_observed_degree ? to_json(*v.max_observed_degree) : json(nullptr)}};
  if (with_observed) {
    json observed = json::array();
    for (const auto& o : v.observed) observed.push_back(to_json(o));
    out["observed"] = std::move(observed);
  }
  return out;
}

inline std::string serialize_config(const ConfigDocument& doc) { return dump_canonical(to_json(doc)); }

inline std::string serialize_arrangement(const PlaneArrangement& arr) { return dump_canonical(to_json(arr)); }

}  // namespace upsilon
