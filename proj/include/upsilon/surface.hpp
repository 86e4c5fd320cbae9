#pragma once

// Surfaces with normal-crossings divisors, described only by intersection
// numbers and polarization degrees, plus the blow-up of plane arrangements at
// their multiple points.

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "upsilon/errors.hpp"
#include "upsilon/rational.hpp"

namespace upsilon {

struct DivisorComponent {
  std::string name;
  Rat degree;

  friend bool operator==(const DivisorComponent&, const DivisorComponent&) = default;
};

/// Components D_i with the matrix D_i·D_j and degrees deg(D_i).
struct DivisorConfiguration {
  std::vector<DivisorComponent> components;
  std::vector<std::vector<long>> intersection;

  std::size_t size() const noexcept { return components.size(); }
  long operator()(std::size_t i, std::size_t j) const { return intersection.at(i).at(j); }
  const Rat& degree(std::size_t i) const { return components.at(i).degree; }

  friend bool operator==(const DivisorConfiguration&, const DivisorConfiguration&) = default;
};

struct ConfigurationCheck {
  bool ok = true;
  std::string path;  // JSON pointer of the offending entry
  std::string message;

  explicit operator bool() const noexcept { return ok; }
};

/// First violated invariant of `config`, in document order.
inline ConfigurationCheck check(const DivisorConfiguration& config) {
  auto fail = [](std::string path, std::string message) {
    return ConfigurationCheck{false, std::move(path), std::move(message)};
  };
  const std::size_t n = config.size();
  if (n == 0) return fail("/components", "configuration has no components");
  std::set<std::string> names;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = config.components[i];
    const std::string at = "/components/" + std::to_string(i);
    if (c.name.empty()) return fail(at + "/name", "component name is empty");
    if (!names.insert(c.name).second) return fail(at + "/name", "duplicate component name \"" + c.name + "\"");
    if (c.degree.sign() < 0) return fail(at + "/degree", "degree " + c.degree.to_string() + " is negative");
  }
  if (config.intersection.size() != n)
    return fail("/intersection", "intersection matrix has " + std::to_string(config.intersection.size()) +
                                     " rows, expected " + std::to_string(n));
  for (std::size_t i = 0; i < n; ++i)
    if (config.intersection[i].size() != n)
      return fail("/intersection/" + std::to_string(i), "row has " + std::to_string(config.intersection[i].size()) +
                                                            " entries, expected " + std::to_string(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const std::string at = "/intersection/" + std::to_string(i) + "/" + std::to_string(j);
      if (config(i, j) != config(j, i))
        return fail(at, "intersection matrix is not symmetric: entry (" + std::to_string(i) + "," + std::to_string(j) +
                            ") = " + std::to_string(config(i, j)) + " but (" + std::to_string(j) + "," +
                            std::to_string(i) + ") = " + std::to_string(config(j, i)));
      if (i != j && config(i, j) < 0)
        return fail(at, "distinct components have negative intersection " + std::to_string(config(i, j)));
    }
  return {};
}

inline bool validate(const DivisorConfiguration& config) { return check(config).ok; }

inline void require_valid(const DivisorConfiguration& config) {
  if (auto c = check(config); !c) throw ValidationError(c.message, c.path);
}

/// A pair of components meeting in `count` transverse points; first < second.
struct Crossing {
  std::size_t first;
  std::size_t second;
  long count;

  friend bool operator==(const Crossing&, const Crossing&) = default;
};

inline std::vector<Crossing> crossing_points(const DivisorConfiguration& config) {
  require_valid(config);
  std::vector<Crossing> out;
  for (std::size_t i = 0; i < config.size(); ++i)
    for (std::size_t j = i + 1; j < config.size(); ++j)
      if (config(i, j) > 0) out.push_back({i, j, config(i, j)});
  return out;
}

struct PlaneCurve {
  std::string name;
  long degree = 1;

  friend bool operator==(const PlaneCurve&, const PlaneCurve&) = default;
};

struct MultiplePoint {
  std::string id;
  std::vector<std::string> curves;

  friend bool operator==(const MultiplePoint&, const MultiplePoint&) = default;
};

/// Plane curves and the points to be blown up. Each point is an ordinary
/// multiple point of its incident curves.
struct PlaneArrangement {
  std::vector<PlaneCurve> curves;
  std::vector<MultiplePoint> points;

  friend bool operator==(const PlaneArrangement&, const PlaneArrangement&) = default;
};

inline ConfigurationCheck check(const PlaneArrangement& arr) {
  auto fail = [](std::string path, std::string message) {
    return ConfigurationCheck{false, std::move(path), std::move(message)};
  };
  if (arr.curves.empty()) return fail("/curves", "arrangement has no curves");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < arr.curves.size(); ++i) {
    const auto& c = arr.curves[i];
    const std::string at = "/curves/" + std::to_string(i);
    if (c.name.empty()) return fail(at + "/name", "curve name is empty");
    if (!index.emplace(c.name, i).second) return fail(at + "/name", "duplicate curve name \"" + c.name + "\"");
    if (c.degree <= 0) return fail(at + "/degree", "curve degree must be positive");
  }
  std::set<std::string> ids;
  std::map<std::pair<std::size_t, std::size_t>, long> shared;
  for (std::size_t p = 0; p < arr.points.size(); ++p) {
    const auto& pt = arr.points[p];
    const std::string at = "/points/" + std::to_string(p);
    if (pt.id.empty()) return fail(at + "/id", "point id is empty");
    if (!ids.insert(pt.id).second) return fail(at + "/id", "duplicate point id \"" + pt.id + "\"");
    std::set<std::size_t> incident;
    for (std::size_t k = 0; k < pt.curves.size(); ++k) {
      auto it = index.find(pt.curves[k]);
      if (it == index.end())
        return fail(at + "/curves/" + std::to_string(k), "unknown curve \"" + pt.curves[k] + "\"");
      if (!incident.insert(it->second).second)
        return fail(at + "/curves/" + std::to_string(k), "curve \"" + pt.curves[k] + "\" listed twice");
    }
    if (incident.size() < 2) return fail(at + "/curves", "a multiple point needs at least two curves");
    for (auto a = incident.begin(); a != incident.end(); ++a)
      for (auto b = std::next(a); b != incident.end(); ++b) ++shared[{*a, *b}];
  }
  for (const auto& [pair, count] : shared) {
    long bound = arr.curves[pair.first].degree * arr.curves[pair.second].degree;
    if (count > bound)
      return fail("/points", "curves \"" + arr.curves[pair.first].name + "\" and \"" + arr.curves[pair.second].name +
                                 "\" share " + std::to_string(count) + " points, more than " + std::to_string(bound));
  }
  return {};
}

/// Blow up every listed point once. Components: the strict transforms, then one
/// exceptional curve "E_<id>" per point. Degrees are taken against H - ε ΣE_p.
inline DivisorConfiguration blow_up(const PlaneArrangement& arr, const Rat& epsilon = Rat(1, 100)) {
  if (epsilon.sign() <= 0) throw InvalidArgument("epsilon must be positive, got " + epsilon.to_string());
  if (auto c = check(arr); !c) throw ValidationError(c.message, c.path);

  const std::size_t n = arr.curves.size(), m = arr.points.size();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[arr.curves[i].name] = i;
  std::vector<std::vector<bool>> incident(n, std::vector<bool>(m, false));
  for (std::size_t p = 0; p < m; ++p)
    for (const auto& name : arr.points[p].curves) incident[index[name]][p] = true;

  DivisorConfiguration out;
  out.intersection.assign(n + m, std::vector<long>(n + m, 0));
  for (std::size_t i = 0; i < n; ++i) {
    long through = 0;
    for (std::size_t p = 0; p < m; ++p) through += incident[i][p] ? 1 : 0;
    Rat degree = Rat(arr.curves[i].degree) - epsilon * Rat(through);
    if (degree.sign() < 0)
      throw ValidationError("epsilon " + epsilon.to_string() + " makes the degree of \"" + arr.curves[i].name +
                            "\" negative");
    out.components.push_back({arr.curves[i].name, degree});
    for (std::size_t j = 0; j < n; ++j) {
      long both = 0;
      for (std::size_t p = 0; p < m; ++p) both += (incident[i][p] && incident[j][p]) ? 1 : 0;
      out.intersection[i][j] = arr.curves[i].degree * arr.curves[j].degree - both;
    }
    for (std::size_t p = 0; p < m; ++p) {
      long e = incident[i][p] ? 1 : 0;
      out.intersection[i][n + p] = e;
      out.intersection[n + p][i] = e;
    }
  }
  for (std::size_t p = 0; p < m; ++p) {
    out.components.push_back({"E_" + arr.points[p].id, epsilon});
    out.intersection[n + p][n + p] = -1;
  }
  return out;
}

}  // namespace upsilon
