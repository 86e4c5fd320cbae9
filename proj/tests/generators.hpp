#pragma once

// Seeded random instances, built twice: once as library values and once as
// oracle generator lists.

#include <algorithm>
#include <cstddef>
#include <vector>

#include "oracles.hpp"
#include "upsilon/filtration.hpp"
#include "upsilon/random.hpp"
#include "upsilon/subspace.hpp"
#include "upsilon/surface.hpp"

namespace gen {

using upsilon::Rat;
using upsilon::Rng;
using upsilon::uniform_int;

struct Instance {
  upsilon::DivisorConfiguration config;
  std::vector<upsilon::Filtration> filtrations;
  std::vector<oracle::Filt> oracle;
  std::vector<Rat> degrees;

  upsilon::FilteredConfiguration fc() const { return upsilon::FilteredConfiguration(filtrations); }
};

inline oracle::Rows full_rank_rows(std::size_t r, long height, Rng& rng) {
  for (;;) {
    oracle::Rows rows(r, oracle::Row(r));
    for (auto& row : rows)
      for (auto& x : row) x = Rat(uniform_int(rng, -height, height));
    if (oracle::rank(rows, r) == r) return rows;
  }
}

inline std::vector<std::size_t> random_chain(std::size_t r, Rng& rng) {
  std::vector<std::size_t> dims;
  for (std::size_t d = 1; d < r; ++d)
    if (upsilon::coin(rng, 0.5)) dims.push_back(d);
  dims.push_back(r);
  return dims;
}

/// Integer numerators over `den`, strictly decreasing, Σ w·mult = 0.
inline std::vector<Rat> balanced_weights(const std::vector<std::size_t>& mult, long den, Rng& rng) {
  const std::size_t k = mult.size();
  if (k == 1) return {Rat(0)};
  for (;;) {
    std::vector<long> n(k);
    long sum = 0;
    for (std::size_t s = 0; s + 1 < k; ++s) {
      n[s] = uniform_int(rng, -3 * den, 3 * den);
      sum += n[s] * static_cast<long>(mult[s]);
    }
    if (sum % static_cast<long>(mult[k - 1]) != 0) continue;
    n[k - 1] = -sum / static_cast<long>(mult[k - 1]);
    bool decreasing = true;
    for (std::size_t s = 1; s < k; ++s) decreasing = decreasing && n[s] < n[s - 1];
    if (!decreasing) continue;
    std::vector<Rat> w;
    for (long x : n) w.push_back(Rat(x, den));
    return w;
  }
}

struct FiltrationPair {
  upsilon::Filtration library;
  oracle::Filt reference;
};

inline FiltrationPair build(std::size_t r, const oracle::Rows& rows, const std::vector<std::size_t>& dims,
                            const std::vector<Rat>& weights) {
  std::vector<upsilon::FiltrationStep> steps;
  oracle::Filt ref{r, {}};
  std::size_t prev = 0;
  for (std::size_t s = 0; s < dims.size(); ++s) {
    upsilon::RatMatrix prefix(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(dims[s]));
    steps.push_back({weights[s], upsilon::reduce(prefix, r)});
    ref.steps.push_back({weights[s], oracle::Rows(rows.begin() + static_cast<std::ptrdiff_t>(prev),
                                                  rows.begin() + static_cast<std::ptrdiff_t>(dims[s]))});
    prev = dims[s];
  }
  return {upsilon::Filtration(std::move(steps)), std::move(ref)};
}

inline FiltrationPair random_filtration(std::size_t r, long den, Rng& rng, long height = 3, bool balanced = true) {
  auto dims = random_chain(r, rng);
  std::vector<std::size_t> mult;
  for (std::size_t s = 0; s < dims.size(); ++s) mult.push_back(dims[s] - (s ? dims[s - 1] : 0));
  std::vector<Rat> w;
  if (balanced) {
    w = balanced_weights(mult, den, rng);
  } else {
    long top = uniform_int(rng, -2 * den, 2 * den);
    for (std::size_t s = 0; s < dims.size(); ++s) {
      w.push_back(Rat(top, den));
      top -= uniform_int(rng, 1, den);
    }
  }
  return build(r, full_rank_rows(r, height, rng), dims, w);
}

inline upsilon::DivisorConfiguration random_divisors(std::size_t n, Rng& rng) {
  upsilon::DivisorConfiguration c;
  c.intersection.assign(n, std::vector<long>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    c.components.push_back({"D" + std::to_string(i), Rat(uniform_int(rng, 1, 6), uniform_int(rng, 1, 4))});
    c.intersection[i][i] = uniform_int(rng, -3, 3);
    for (std::size_t j = i + 1; j < n; ++j) c.intersection[i][j] = c.intersection[j][i] = uniform_int(rng, 0, 3);
  }
  return c;
}

/// Random configuration with r ≤ max_rank, ≤ max_components components.
inline Instance random_instance(Rng& rng, std::size_t max_rank = 3, std::size_t max_components = 5, long den = 12,
                                bool balanced = true) {
  Instance inst;
  const auto r = static_cast<std::size_t>(uniform_int(rng, 1, static_cast<long>(max_rank)));
  const auto n = static_cast<std::size_t>(uniform_int(rng, 1, static_cast<long>(max_components)));
  inst.config = random_divisors(n, rng);
  for (std::size_t i = 0; i < n; ++i) {
    auto p = random_filtration(r, den, rng, 3, balanced);
    inst.filtrations.push_back(std::move(p.library));
    inst.oracle.push_back(std::move(p.reference));
    inst.degrees.push_back(inst.config.degree(i));
  }
  return inst;
}

}  // namespace gen
