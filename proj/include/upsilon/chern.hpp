#pragma once

// Chern numbers of filtered local systems on (X, D).
//
// The general formulas consume abstract graded-dimension tables; for the
// trivial local system the tables are derived from the filtrations and the
// closed form c2 = -1/2 Σ_{i,j} <F_i,F_j> D_i·D_j must agree with them.

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "upsilon/errors.hpp"
#include "upsilon/filtration.hpp"
#include "upsilon/rational.hpp"
#include "upsilon/surface.hpp"

namespace upsilon {

struct CrossingEntry {
  Rat alpha;
  Rat beta;
  std::size_t multiplicity = 0;

  friend bool operator==(const CrossingEntry&, const CrossingEntry&) = default;
};

/// dim gr_α^{F_first} gr_β^{F_second} at a point near one crossing of the pair.
struct CrossingTable {
  std::size_t first = 0;
  std::size_t second = 0;
  std::vector<CrossingEntry> entries;

  friend bool operator==(const CrossingTable&, const CrossingTable&) = default;
};

/// One table per component and one per crossing point (a pair with
/// D_i·D_j = k contributes k tables).
struct FilteredSystemData {
  std::size_t rank = 0;
  std::vector<GrSpectrum> component_tables;
  std::vector<CrossingTable> crossing_tables;

  friend bool operator==(const FilteredSystemData&, const FilteredSystemData&) = default;
};

inline void require_valid(const FilteredSystemData& data) {
  if (data.rank == 0) throw ValidationError("rank must be positive", "/system/rank");
  for (std::size_t i = 0; i < data.component_tables.size(); ++i) {
    std::size_t total = 0;
    for (const auto& e : data.component_tables[i]) total += e.multiplicity;
    if (total != data.rank)
      throw ValidationError("multiplicities sum to " + std::to_string(total) + ", expected rank " +
                                std::to_string(data.rank),
                            "/system/component_tables/" + std::to_string(i));
  }
  for (std::size_t q = 0; q < data.crossing_tables.size(); ++q) {
    const auto& t = data.crossing_tables[q];
    const std::string at = "/system/crossing_tables/" + std::to_string(q);
    if (t.first >= t.second) throw ValidationError("crossing pair must satisfy first < second", at + "/components");
    std::size_t total = 0;
    for (const auto& e : t.entries) total += e.multiplicity;
    if (total != data.rank)
      throw ValidationError(
          "multiplicities sum to " + std::to_string(total) + ", expected rank " + std::to_string(data.rank), at);
  }
}

struct ChernReport {
  std::vector<Rat> c1_coefficients;  // coefficient of D_i in c1
  Rat c1_squared;
  Rat self_term;      // -1/2 Σ_{i,α} dim gr_α · α² · D_i²
  Rat crossing_term;  // Σ_Q c2(L,F)_Q
  Rat c2_number;
};

/// Coefficient of D_i: -Σ_α α · dim gr_α^{F_i}.
inline std::vector<Rat> c1_cycle(const FilteredSystemData& data, const DivisorConfiguration& config) {
  if (data.component_tables.size() != config.size())
    throw DimensionMismatch("system has " + std::to_string(data.component_tables.size()) +
                            " component tables for " + std::to_string(config.size()) + " components");
  std::vector<Rat> out;
  for (const auto& table : data.component_tables) {
    Rat c;
    for (const auto& e : table) c -= e.weight * Rat(e.multiplicity);
    out.push_back(c);
  }
  return out;
}

/// c2(L,F)_Q = -Σ αβ dim gr_α gr_β.
inline Rat c2_local(const std::vector<CrossingEntry>& table) {
  Rat s;
  for (const auto& e : table) s -= e.alpha * e.beta * Rat(e.multiplicity);
  return s;
}

inline ChernReport c2_number(const FilteredSystemData& data, const DivisorConfiguration& config) {
  require_valid(config);
  require_valid(data);
  ChernReport report;
  report.c1_coefficients = c1_cycle(data, config);
  const std::size_t n = config.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      report.c1_squared += report.c1_coefficients[i] * report.c1_coefficients[j] * Rat(config(i, j));

  for (std::size_t i = 0; i < n; ++i) {
    Rat s;
    for (const auto& e : data.component_tables[i]) s += e.weight * e.weight * Rat(e.multiplicity);
    report.self_term -= s * Rat(config(i, i)) / 2;
  }

  std::map<std::pair<std::size_t, std::size_t>, long> seen;
  for (std::size_t q = 0; q < data.crossing_tables.size(); ++q) {
    const auto& t = data.crossing_tables[q];
    if (t.second >= n)
      throw DimensionMismatch("crossing table " + std::to_string(q) + " refers to component " +
                              std::to_string(t.second) + " of " + std::to_string(n));
    ++seen[{t.first, t.second}];
    report.crossing_term += c2_local(t.entries);
  }
  for (const auto& c : crossing_points(config)) {
    auto it = seen.find({c.first, c.second});
    long have = it == seen.end() ? 0 : it->second;
    if (have != c.count)
      throw ValidationError("components " + std::to_string(c.first) + " and " + std::to_string(c.second) + " meet in " +
                                std::to_string(c.count) + " points but " + std::to_string(have) +
                                " crossing tables were given",
                            "/system/crossing_tables");
    seen.erase(it);
  }
  if (!seen.empty()) {
    auto [pair, count] = *seen.begin();
    throw ValidationError("crossing tables given for components " + std::to_string(pair.first) + " and " +
                              std::to_string(pair.second) + ", which do not meet",
                          "/system/crossing_tables");
  }

  report.c2_number = report.c1_squared / 2 + report.self_term + report.crossing_term;
  return report;
}

inline void require_shape(const FilteredConfiguration& fc, const DivisorConfiguration& config) {
  if (fc.size() != config.size())
    throw DimensionMismatch("configuration has " + std::to_string(config.size()) + " components but " +
                            std::to_string(fc.size()) + " filtrations were given");
}

/// Tables of the trivial local system Q^r carrying the filtrations `fc`.
inline FilteredSystemData derive_tables(const FilteredConfiguration& fc, const DivisorConfiguration& config) {
  require_shape(fc, config);
  FilteredSystemData data;
  data.rank = fc.rank();
  for (const auto& f : fc) data.component_tables.push_back(gr_spectrum(f));
  for (const auto& c : crossing_points(config)) {
    const Filtration& f = fc[c.first];
    const Filtration& g = fc[c.second];
    auto m = joint_multiplicities(f, g);
    CrossingTable table{c.first, c.second, {}};
    for (std::size_t s = 0; s < f.step_count(); ++s)
      for (std::size_t t = 0; t < g.step_count(); ++t)
        if (m[s][t] != 0) table.entries.push_back({f.steps()[s].weight, g.steps()[t].weight, m[s][t]});
    for (long k = 0; k < c.count; ++k) data.crossing_tables.push_back(table);
  }
  return data;
}

inline Rat c2_trivial(const FilteredConfiguration& fc, const DivisorConfiguration& config) {
  require_shape(fc, config);
  require_valid(config);
  for (std::size_t i = 0; i < fc.size(); ++i)
    if (!is_balanced(fc[i]))
      throw ValidationError("filtration " + std::to_string(i) + " is not balanced", "/filtrations/" + std::to_string(i));
  Rat sum;
  for (std::size_t i = 0; i < fc.size(); ++i) {
    if (config(i, i) != 0) sum += product(fc[i], fc[i]) * Rat(config(i, i));
    for (std::size_t j = i + 1; j < fc.size(); ++j)
      if (config(i, j) != 0) sum += 2 * product(fc[i], fc[j]) * Rat(config(i, j));
  }
  return -sum / 2;
}

/// ‖F‖² = Σ_{i,α} α² dim gr_α^{F_i} deg(D_i).
inline Rat norm_sq(const FilteredConfiguration& fc, const DivisorConfiguration& config) {
  require_shape(fc, config);
  Rat out;
  for (std::size_t i = 0; i < fc.size(); ++i) {
    Rat s;
    for (const auto& e : gr_spectrum(fc[i])) s += e.weight * e.weight * Rat(e.multiplicity);
    out += s * config.degree(i);
  }
  return out;
}

}  // namespace upsilon
