#pragma once

// Real-indexed decreasing filtrations of Q^r restricted to rational weights.
// A filtration is stored as its jumps: steps (w_1, V_1), ..., (w_k, V_k) with
// w_1 > ... > w_k and 0 ≠ V_1 ⊊ ... ⊊ V_k = Q^r, so that F_a = V_j for the
// largest j with w_j ≥ a and gr_{w_j} = V_j / V_{j-1}.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "upsilon/errors.hpp"
#include "upsilon/rational.hpp"
#include "upsilon/subspace.hpp"

namespace upsilon {

struct FiltrationStep {
  Rat weight;
  Subspace space;

  friend bool operator==(const FiltrationStep&, const FiltrationStep&) = default;
};

struct GrEntry {
  Rat weight;
  std::size_t multiplicity = 0;

  friend bool operator==(const GrEntry&, const GrEntry&) = default;
};

/// (weight, multiplicity) pairs in decreasing weight order.
using GrSpectrum = std::vector<GrEntry>;

struct StepViolation {
  std::size_t step;
  std::string message;
};

/// First violated invariant of a step list, if any.
inline std::optional<StepViolation> find_step_violation(const std::vector<FiltrationStep>& steps) {
  if (steps.empty()) return StepViolation{0, "filtration has no steps"};
  const std::size_t r = steps.front().space.ambient_dim();
  for (std::size_t s = 0; s < steps.size(); ++s) {
    const auto& step = steps[s];
    if (step.space.ambient_dim() != r)
      return StepViolation{s, "ambient dimension " + std::to_string(step.space.ambient_dim()) + " differs from " +
                                  std::to_string(r)};
    if (s == 0) {
      if (step.space.is_zero()) return StepViolation{s, "first step is the zero subspace"};
      continue;
    }
    const auto& prev = steps[s - 1];
    if (!(step.weight < prev.weight))
      return StepViolation{s, "weight " + step.weight.to_string() + " does not strictly decrease from " +
                                  prev.weight.to_string()};
    if (step.space.dim() <= prev.space.dim() || !step.space.contains(prev.space))
      return StepViolation{s, "subspace does not strictly contain the previous step"};
  }
  if (!steps.back().space.is_full()) return StepViolation{steps.size() - 1, "last step is not the full space"};
  return std::nullopt;
}

class Filtration {
 public:
  explicit Filtration(std::vector<FiltrationStep> steps) : steps_(std::move(steps)) {
    if (auto v = find_step_violation(steps_))
      throw ValidationError("step " + std::to_string(v->step) + ": " + v->message);
  }

  /// Single step: every vector has weight `weight`.
  static Filtration trivial(std::size_t ambient_dim, Rat weight = 0) {
    return Filtration({{std::move(weight), Subspace::full(ambient_dim)}});
  }

  /// Steps V_1 ⊊ ... ⊊ V_k taken from `flag` (the full space is appended when
  /// missing) and paired with `weights`.
  static Filtration from_flag(const std::vector<Subspace>& flag, std::vector<Rat> weights) {
    if (flag.empty()) throw InvalidArgument("flag is empty");
    std::vector<Subspace> chain = flag;
    if (!chain.back().is_full()) chain.push_back(Subspace::full(chain.back().ambient_dim()));
    if (weights.size() != chain.size())
      throw DimensionMismatch("flag has " + std::to_string(chain.size()) + " steps but " +
                              std::to_string(weights.size()) + " weights were given");
    std::vector<FiltrationStep> steps;
    for (std::size_t s = 0; s < chain.size(); ++s) steps.push_back({std::move(weights[s]), chain[s]});
    return Filtration(std::move(steps));
  }

  std::size_t ambient_dim() const noexcept { return steps_.front().space.ambient_dim(); }
  std::size_t step_count() const noexcept { return steps_.size(); }
  const std::vector<FiltrationStep>& steps() const noexcept { return steps_; }

  std::size_t multiplicity(std::size_t s) const {
    return steps_.at(s).space.dim() - (s == 0 ? 0 : steps_[s - 1].space.dim());
  }

  /// Every weight is zero.
  bool is_trivial() const { return steps_.size() == 1 && steps_.front().weight.is_zero(); }

  /// F_a: union of the steps with weight ≥ a.
  Subspace at(const Rat& a) const {
    const Subspace* out = nullptr;
    for (const auto& step : steps_)
      if (step.weight >= a) out = &step.space;
    return out ? *out : Subspace::zero(ambient_dim());
  }

  /// F_{>a}: union of the steps with weight > a.
  Subspace above(const Rat& a) const {
    const Subspace* out = nullptr;
    for (const auto& step : steps_)
      if (step.weight > a) out = &step.space;
    return out ? *out : Subspace::zero(ambient_dim());
  }

  std::vector<Rat> weights() const {
    std::vector<Rat> w;
    for (const auto& step : steps_) w.push_back(step.weight);
    return w;
  }

  /// Same subspaces, new weights.
  Filtration with_weights(const std::vector<Rat>& weights) const {
    if (weights.size() != steps_.size())
      throw DimensionMismatch("expected " + std::to_string(steps_.size()) + " weights, got " +
                              std::to_string(weights.size()));
    std::vector<FiltrationStep> steps = steps_;
    for (std::size_t s = 0; s < steps.size(); ++s) steps[s].weight = weights[s];
    return Filtration(std::move(steps));
  }

  friend bool operator==(const Filtration&, const Filtration&) = default;

 private:
  std::vector<FiltrationStep> steps_;
};

inline GrSpectrum gr_spectrum(const Filtration& f) {
  GrSpectrum out;
  for (std::size_t s = 0; s < f.step_count(); ++s) out.push_back({f.steps()[s].weight, f.multiplicity(s)});
  return out;
}

/// (λF)_α = F_{α/λ}: weights are multiplied by λ.
inline Filtration scale(const Rat& lambda, const Filtration& f) {
  if (lambda.sign() <= 0) throw InvalidArgument("scale factor must be positive, got " + lambda.to_string());
  std::vector<Rat> w = f.weights();
  for (auto& x : w) x *= lambda;
  return f.with_weights(w);
}

/// Σ α · dim gr_α.
inline Rat weighted_sum(const Filtration& f) {
  Rat s;
  for (std::size_t i = 0; i < f.step_count(); ++i) s += f.steps()[i].weight * Rat(f.multiplicity(i));
  return s;
}

inline bool is_balanced(const Filtration& f) { return weighted_sum(f).is_zero(); }

/// Tensoring with a rank-one system: shift every weight by -(Σ α·mult)/r.
inline Filtration balance_shift(const Filtration& f) {
  Rat c = -weighted_sum(f) / Rat(f.ambient_dim());
  std::vector<Rat> w = f.weights();
  for (auto& x : w) x += c;
  return f.with_weights(w);
}

namespace detail {
inline void require_same_ambient(const Filtration& f, const Filtration& g) {
  if (f.ambient_dim() != g.ambient_dim())
    throw DimensionMismatch("filtrations live on Q^" + std::to_string(f.ambient_dim()) + " and Q^" +
                            std::to_string(g.ambient_dim()));
}
}  // namespace detail

/// dim gr_a^F gr_b^G (Q^r) by bigraded inclusion-exclusion.
inline std::size_t joint_gr_dim(const Filtration& f, const Filtration& g, const Rat& a, const Rat& b) {
  detail::require_same_ambient(f, g);
  const Subspace fa = f.at(a), fa_above = f.above(a);
  const Subspace gb = g.at(b), gb_above = g.above(b);
  long d = static_cast<long>(intersection_dim(fa, gb)) - static_cast<long>(intersection_dim(fa_above, gb)) -
           static_cast<long>(intersection_dim(fa, gb_above)) +
           static_cast<long>(intersection_dim(fa_above, gb_above));
  return static_cast<std::size_t>(d);
}

/// m[s][t] = dim gr_s^F gr_t^G indexed by step positions.
inline std::vector<std::vector<std::size_t>> joint_multiplicities(const Filtration& f, const Filtration& g) {
  detail::require_same_ambient(f, g);
  const std::size_t k = f.step_count(), l = g.step_count();
  // d[s+1][t+1] = dim(V_s ∩ W_t); row/column 0 stand for the zero subspace.
  std::vector<std::vector<long>> d(k + 1, std::vector<long>(l + 1, 0));
  for (std::size_t s = 0; s < k; ++s)
    for (std::size_t t = 0; t < l; ++t)
      d[s + 1][t + 1] = static_cast<long>(intersection_dim(f.steps()[s].space, g.steps()[t].space));
  std::vector<std::vector<std::size_t>> m(k, std::vector<std::size_t>(l));
  for (std::size_t s = 0; s < k; ++s)
    for (std::size_t t = 0; t < l; ++t)
      m[s][t] = static_cast<std::size_t>(d[s + 1][t + 1] - d[s][t + 1] - d[s + 1][t] + d[s][t]);
  return m;
}

/// ⟨F,G⟩ = Σ αβ dim gr_α^F gr_β^G.
inline Rat product(const Filtration& f, const Filtration& g) {
  auto m = joint_multiplicities(f, g);
  Rat out;
  for (std::size_t s = 0; s < f.step_count(); ++s)
    for (std::size_t t = 0; t < g.step_count(); ++t)
      if (m[s][t] != 0) out += f.steps()[s].weight * g.steps()[t].weight * Rat(m[s][t]);
  return out;
}

/// dim(V ∩ V_s) - dim(V ∩ V_{s-1}) for every step s (zeros included).
inline std::vector<std::size_t> induced_multiplicities(const Filtration& f, const Subspace& v) {
  if (v.ambient_dim() != f.ambient_dim())
    throw DimensionMismatch("subspace lives in Q^" + std::to_string(v.ambient_dim()) + ", filtration in Q^" +
                            std::to_string(f.ambient_dim()));
  std::vector<std::size_t> out;
  std::size_t prev = 0;
  for (const auto& step : f.steps()) {
    std::size_t cur = intersection_dim(v, step.space);
    out.push_back(cur - prev);
    prev = cur;
  }
  return out;
}

/// gr_α^F(V) for the induced filtration on V; weights with multiplicity zero are omitted.
inline GrSpectrum induced_degree_vector(const Filtration& f, const Subspace& v) {
  auto mult = induced_multiplicities(f, v);
  GrSpectrum out;
  for (std::size_t s = 0; s < mult.size(); ++s)
    if (mult[s] != 0) out.push_back({f.steps()[s].weight, mult[s]});
  return out;
}

/// One filtration per divisor component, all on the same Q^r.
class FilteredConfiguration {
 public:
  explicit FilteredConfiguration(std::vector<Filtration> filtrations) : filtrations_(std::move(filtrations)) {
    if (filtrations_.empty()) throw InvalidArgument("configuration has no filtrations");
    for (std::size_t i = 1; i < filtrations_.size(); ++i)
      if (filtrations_[i].ambient_dim() != filtrations_[0].ambient_dim())
        throw DimensionMismatch("filtration " + std::to_string(i) + " lives in Q^" +
                                std::to_string(filtrations_[i].ambient_dim()) + ", expected Q^" +
                                std::to_string(filtrations_[0].ambient_dim()));
  }

  std::size_t rank() const noexcept { return filtrations_.front().ambient_dim(); }
  std::size_t size() const noexcept { return filtrations_.size(); }
  const Filtration& operator[](std::size_t i) const { return filtrations_.at(i); }
  const std::vector<Filtration>& filtrations() const noexcept { return filtrations_; }
  auto begin() const { return filtrations_.begin(); }
  auto end() const { return filtrations_.end(); }

  bool is_balanced() const {
    for (const auto& f : filtrations_)
      if (!upsilon::is_balanced(f)) return false;
    return true;
  }

  bool is_trivial() const {
    for (const auto& f : filtrations_)
      if (!f.is_trivial()) return false;
    return true;
  }

  friend bool operator==(const FilteredConfiguration&, const FilteredConfiguration&) = default;

 private:
  std::vector<Filtration> filtrations_;
};

inline FilteredConfiguration scale(const Rat& lambda, const FilteredConfiguration& fc) {
  std::vector<Filtration> out;
  for (const auto& f : fc) out.push_back(scale(lambda, f));
  return FilteredConfiguration(std::move(out));
}

/// Total order used to break ties between equally good configurations.
inline std::string lexicographic_key(const FilteredConfiguration& fc) {
  std::string key;
  for (const auto& f : fc) {
    key += '[';
    for (const auto& step : f.steps()) {
      key += step.weight.to_string();
      key += ':';
      for (const auto& row : step.space.basis()) {
        for (const auto& x : row) {
          key += x.to_string();
          key += ',';
        }
        key += ';';
      }
      key += '|';
    }
    key += ']';
  }
  return key;
}

}  // namespace upsilon
