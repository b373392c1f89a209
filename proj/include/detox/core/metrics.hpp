#pragma once

// Scalar metric formulas. Every toxicity argument is a classifier probability
// P(toxic | text); STA (non-toxicity) is derived from it with sta_of().

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>

#include "detox/core/errors.hpp"
#include "detox/core/types.hpp"

namespace detox {

namespace detail {
inline void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError(std::string(what) + " must lie in [0,1], got " + std::to_string(p));
  }
}
}  // namespace detail

/// Style transfer accuracy: 1 - P(toxic).
inline double sta_of(double p_toxic) {
  detail::require_probability(p_toxic, "p_toxic");
  return 1.0 - p_toxic;
}

/// Ranking score for few-shot demonstration pairs:
///   1 - ((1 - tox_x) / (1 - tox_y)) * (1 - sim)
/// High when the toxic side is very toxic, the neutral side is not, and
/// the two texts are close in meaning. Throws DomainError when tox_y == 1.
inline double fewshot_score(double tox_x, double tox_y, double sim) {
  detail::require_probability(tox_x, "tox_x");
  detail::require_probability(tox_y, "tox_y");
  detail::require_probability(sim, "sim");
  if (tox_y >= 1.0) throw DomainError("degenerate few-shot pair: neutral side has toxicity 1");
  // Written as sim + (1 - sim)(1 - ratio) so that ratio == 1 yields sim and
  // sim == 1 yields 1 exactly, and rounding stays monotone in tox_y.
  const double ratio = (1.0 - tox_x) / (1.0 - tox_y);
  return sim + (1.0 - sim) * (1.0 - ratio);
}

/// Relative toxicity reduction (tox_x - tox_y) / tox_x. Returns nullopt when
/// the source is not toxic at all, which callers treat as non-detoxifiable.
inline std::optional<double> detoxifiability(double tox_x, double tox_y) {
  detail::require_probability(tox_x, "tox_x");
  detail::require_probability(tox_y, "tox_y");
  if (tox_x <= 0.0) return std::nullopt;
  return (tox_x - tox_y) / tox_x;
}

inline constexpr double kDetoxifiabilityThreshold = 0.5;

inline bool is_detoxifiable(double tox_x, double tox_y, double threshold = kDetoxifiabilityThreshold) {
  auto d = detoxifiability(tox_x, tox_y);
  return d && *d >= threshold;
}

/// STA x SIM with negative similarity clamped to zero.
inline double rank_score(double sta_neutral, double sim) {
  return sta_neutral * std::max(sim, 0.0);
}

/// Mean over records of STA * max(SIM, 0) * FL.
inline double j_score(std::span<const EvalRecord> records) {
  if (records.empty()) throw DomainError("j_score of an empty record set");
  double total = 0.0;
  for (const auto& r : records) total += r.j_term();
  return total / static_cast<double>(records.size());
}

}  // namespace detox
