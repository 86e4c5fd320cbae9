#pragma once

// Slope stability of a filtered configuration on the trivial system Q^r:
// every proper subspace V must have negative parabolic degree
//   Σ_{i,α} α · dim gr_α^{F_i}(V) · deg(D_i).
//
// For r = 2 the degree of a line depends only on which flag lines contain it,
// so a finite check is exact. For r ≥ 3 the search is one-sided: witnesses
// prove non-stability, their absence is heuristic.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "upsilon/chern.hpp"
#include "upsilon/errors.hpp"
#include "upsilon/filtration.hpp"
#include "upsilon/parallel.hpp"
#include "upsilon/random.hpp"
#include "upsilon/subspace.hpp"
#include "upsilon/surface.hpp"

namespace upsilon {

enum class StabilityStatus { Stable, Semistable, Unstable };
enum class Certainty { Exact, Heuristic };

inline const char* to_string(StabilityStatus s) {
  switch (s) {
    case StabilityStatus::Stable: return "stable";
    case StabilityStatus::Semistable: return "semistable";
    case StabilityStatus::Unstable: return "unstable";
  }
  return "?";
}

inline const char* to_string(Certainty c) { return c == Certainty::Exact ? "exact" : "heuristic"; }

struct ObservedDegree {
  Subspace subspace;
  Rat degree;
};

struct StabilityVerdict {
  StabilityStatus status = StabilityStatus::Stable;
  Certainty certainty = Certainty::Exact;
  std::optional<ObservedDegree> witness;
  // Empty only when Q^r has no proper subspaces (r = 1).
  std::optional<Rat> max_observed_degree;
  std::vector<ObservedDegree> observed;  // filled when requested
  std::size_t evaluated = 0;
  bool candidate_cap_hit = false;
};

struct ExactRank2 {};
struct Heuristic {
  std::size_t samples = 2000;
  std::uint64_t seed = 0;
};
struct Auto {};
using StabilityMode = std::variant<Auto, ExactRank2, Heuristic>;

struct StabilityOptions {
  std::size_t closure_depth = 2;
  std::size_t candidate_cap = 256;
  long sample_height = 7;
  std::size_t default_samples = 2000;
  std::uint64_t default_seed = 0;
  std::size_t workers = 1;
  bool record_observations = true;
};

inline void require_positive_degrees(const FilteredConfiguration& fc, const DivisorConfiguration& config) {
  require_shape(fc, config);
  for (std::size_t i = 0; i < fc.size(); ++i)
    if (!fc[i].is_trivial() && config.degree(i).sign() <= 0)
      throw ValidationError("component \"" + config.components[i].name +
                                "\" carries a nontrivial filtration but has degree " + config.degree(i).to_string(),
                            "/components/" + std::to_string(i) + "/degree");
}

/// deg(D_i) · dim gr_s^{F_i}(V) for every component i and step s. The parabolic
/// degree of V is the pairing of these coefficients with the weights.
inline std::vector<std::vector<Rat>> degree_coefficients(const Subspace& v, const FilteredConfiguration& fc,
                                                         const DivisorConfiguration& config) {
  require_shape(fc, config);
  std::vector<std::vector<Rat>> out;
  for (std::size_t i = 0; i < fc.size(); ++i) {
    std::vector<Rat> row;
    for (std::size_t m : induced_multiplicities(fc[i], v)) row.push_back(config.degree(i) * Rat(m));
    out.push_back(std::move(row));
  }
  return out;
}

namespace detail {
inline Rat degree_unchecked(const Subspace& v, const FilteredConfiguration& fc, const DivisorConfiguration& config) {
  Rat d;
  for (std::size_t i = 0; i < fc.size(); ++i) {
    if (fc[i].is_trivial() || config.degree(i).is_zero()) continue;
    auto mult = induced_multiplicities(fc[i], v);
    Rat s;
    for (std::size_t k = 0; k < mult.size(); ++k)
      if (mult[k] != 0) s += fc[i].steps()[k].weight * Rat(mult[k]);
    d += s * config.degree(i);
  }
  return d;
}
}  // namespace detail

inline Rat parabolic_degree(const Subspace& v, const FilteredConfiguration& fc, const DivisorConfiguration& config) {
  require_shape(fc, config);
  if (v.ambient_dim() != fc.rank())
    throw DimensionMismatch("subspace lives in Q^" + std::to_string(v.ambient_dim()) + ", configuration in Q^" +
                            std::to_string(fc.rank()));
  if (!v.is_proper()) throw InvalidArgument("parabolic degree is defined for proper nonzero subspaces only");
  return detail::degree_unchecked(v, fc, config);
}

struct CandidateSet {
  std::vector<Subspace> subspaces;  // sorted, distinct, proper
  bool capped = false;
};

/// Proper flag steps closed under pairwise ∩ and +, at most `depth` rounds and
/// at most `cap` subspaces (the flag steps themselves are always kept).
inline CandidateSet candidate_subspaces(const FilteredConfiguration& fc, std::size_t depth, std::size_t cap = 256) {
  std::set<Subspace> found;
  for (const auto& f : fc)
    for (const auto& step : f.steps())
      if (step.space.is_proper()) found.insert(step.space);
  bool capped = false;
  for (std::size_t round = 0; round < depth && !capped; ++round) {
    std::vector<Subspace> current(found.begin(), found.end());
    std::size_t before = found.size();
    for (std::size_t a = 0; a < current.size() && !capped; ++a)
      for (std::size_t b = a + 1; b < current.size(); ++b) {
        for (Subspace s : {intersect(current[a], current[b]), subspace_sum(current[a], current[b])}) {
          if (!s.is_proper() || found.count(s)) continue;
          if (found.size() >= cap) {
            capped = true;
            break;
          }
          found.insert(std::move(s));
        }
        if (capped) break;
      }
    if (found.size() == before) break;
  }
  return {std::vector<Subspace>(found.begin(), found.end()), capped};
}

/// Random subspace of the given dimension spanned by integer vectors with
/// entries in [-height, height].
inline Subspace random_subspace(std::size_t ambient_dim, std::size_t dim, long height, Rng& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    RatMatrix rows(dim, RatVector(ambient_dim));
    for (auto& row : rows)
      for (auto& x : row) x = Rat(uniform_int(rng, -height, height));
    Subspace s = reduce(std::move(rows), ambient_dim);
    if (s.dim() == dim) return s;
  }
  throw NumericalError("could not sample a subspace of dimension " + std::to_string(dim));
}

/// A line of Q^2 different from every line in `avoid`.
inline Subspace generic_line(const std::vector<Subspace>& avoid) {
  for (long t = 0;; ++t) {
    Subspace candidate = reduce({{Rat(1), Rat(t)}}, 2);
    if (std::find(avoid.begin(), avoid.end(), candidate) == avoid.end()) return candidate;
  }
}

namespace detail {

inline StabilityVerdict fold_verdict(std::vector<ObservedDegree> observed, Certainty stable_certainty,
                                     bool keep_observed) {
  StabilityVerdict v;
  v.evaluated = observed.size();
  if (observed.empty()) {
    v.status = StabilityStatus::Stable;
    v.certainty = Certainty::Exact;
    return v;
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < observed.size(); ++k)
    if (observed[k].degree > observed[best].degree) best = k;
  const Rat& max = observed[best].degree;
  v.max_observed_degree = max;
  if (max.sign() > 0) {
    v.status = StabilityStatus::Unstable;
    v.certainty = Certainty::Exact;
    v.witness = observed[best];
  } else if (max.is_zero()) {
    v.status = StabilityStatus::Semistable;
    v.certainty = Certainty::Exact;
    v.witness = observed[best];
  } else {
    v.status = StabilityStatus::Stable;
    v.certainty = stable_certainty;
  }
  if (keep_observed) v.observed = std::move(observed);
  return v;
}

inline StabilityVerdict check_rank2(const FilteredConfiguration& fc, const DivisorConfiguration& config,
                                    const StabilityOptions& opts) {
  std::vector<Subspace> lines;
  for (const auto& f : fc)
    for (const auto& step : f.steps())
      if (step.space.is_proper() && std::find(lines.begin(), lines.end(), step.space) == lines.end())
        lines.push_back(step.space);
  lines.push_back(generic_line(lines));
  std::vector<ObservedDegree> observed;
  for (auto& line : lines) {
    Rat d = degree_unchecked(line, fc, config);
    observed.push_back({std::move(line), std::move(d)});
  }
  return fold_verdict(std::move(observed), Certainty::Exact, opts.record_observations);
}

inline StabilityVerdict check_heuristic(const FilteredConfiguration& fc, const DivisorConfiguration& config,
                                        const Heuristic& mode, const StabilityOptions& opts) {
  const std::size_t r = fc.rank();
  CandidateSet closure = candidate_subspaces(fc, opts.closure_depth, opts.candidate_cap);
  std::vector<ObservedDegree> observed;
  for (auto& s : closure.subspaces) {
    Rat d = degree_unchecked(s, fc, config);
    observed.push_back({std::move(s), std::move(d)});
  }
  const std::size_t jobs = mode.samples * (r - 1);
  auto sampled = parallel_map(jobs, opts.workers, [&](std::size_t job) {
    std::size_t dim = 1 + job / mode.samples;
    std::size_t index = job % mode.samples;
    Rng rng = make_rng(mode.seed, {0x5ab1e, dim, index});
    Subspace s = random_subspace(r, dim, opts.sample_height, rng);
    Rat d = degree_unchecked(s, fc, config);
    return ObservedDegree{std::move(s), std::move(d)};
  });
  observed.insert(observed.end(), std::make_move_iterator(sampled.begin()), std::make_move_iterator(sampled.end()));
  StabilityVerdict v = fold_verdict(std::move(observed), Certainty::Heuristic, opts.record_observations);
  v.candidate_cap_hit = closure.capped;
  return v;
}

}  // namespace detail

inline StabilityVerdict check_stability(const FilteredConfiguration& fc, const DivisorConfiguration& config,
                                        const StabilityMode& mode = Auto{}, const StabilityOptions& opts = {}) {
  require_valid(config);
  require_positive_degrees(fc, config);
  const std::size_t r = fc.rank();
  if (r == 1) return detail::fold_verdict({}, Certainty::Exact, opts.record_observations);
  if (std::holds_alternative<ExactRank2>(mode)) {
    if (r != 2) throw InvalidArgument("exact stability check requires rank 2, got rank " + std::to_string(r));
    return detail::check_rank2(fc, config, opts);
  }
  if (const auto* h = std::get_if<Heuristic>(&mode)) return detail::check_heuristic(fc, config, *h, opts);
  if (r == 2) return detail::check_rank2(fc, config, opts);
  return detail::check_heuristic(fc, config, Heuristic{opts.default_samples, opts.default_seed}, opts);
}

}  // namespace upsilon
