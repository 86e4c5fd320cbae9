#pragma once

// Small configurations in P² with known answers.

#include <string>
#include <vector>

#include "upsilon/filtration.hpp"
#include "upsilon/io.hpp"
#include "upsilon/surface.hpp"

namespace upsilon::fixtures {

/// n lines in general position, all of degree 1.
inline DivisorConfiguration generic_lines(std::size_t n) {
  DivisorConfiguration c;
  for (std::size_t i = 0; i < n; ++i) c.components.push_back({"L" + std::to_string(i + 1), Rat(1)});
  c.intersection.assign(n, std::vector<long>(n, 1));
  return c;
}

/// Weights 1/2 on the given line, -1/2 on the quotient.
inline Filtration half_flag(const Subspace& line) {
  return Filtration::from_flag({line}, {Rat(1, 2), Rat(-1, 2)});
}

inline ConfigDocument two_lines() {
  ConfigDocument doc{generic_lines(2), std::nullopt, std::nullopt};
  doc.filtrations.emplace(std::vector<Filtration>{half_flag(span_of({{1, 0}}, 2)), half_flag(span_of({{0, 1}}, 2))});
  return doc;
}

inline ConfigDocument three_generic_lines() {
  ConfigDocument doc{generic_lines(3), std::nullopt, std::nullopt};
  doc.filtrations.emplace(std::vector<Filtration>{half_flag(span_of({{1, 0}}, 2)), half_flag(span_of({{0, 1}}, 2)),
                                                  half_flag(span_of({{1, 1}}, 2))});
  return doc;
}

/// Three lines through one point; the point is blown up.
inline PlaneArrangement concurrent_lines() {
  return {{{"L1", 1}, {"L2", 1}, {"L3", 1}}, {{"p", {"L1", "L2", "L3"}}}};
}

}  // namespace upsilon::fixtures
