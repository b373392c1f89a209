#pragma once

// Character n-gram F-score (ChrF) over Unicode scalar values, character
// n-grams only. Whitespace is removed before n-gram extraction.

#include <algorithm>
#include <cstddef>
#include <string_view>
#include <unordered_map>

#include "detox/core/errors.hpp"
#include "detox/core/unicode.hpp"

namespace detox {

using NgramCounts = std::unordered_map<std::u32string, std::size_t>;

struct ChrfParams {
  int max_order = 6;
  double beta = 1.0;
};

namespace detail {

inline std::u32string strip_whitespace(std::string_view text) {
  std::u32string out;
  for (char32_t c : unicode::decode(text)) {
    if (!unicode::is_space(c)) out.push_back(c);
  }
  return out;
}

inline NgramCounts count_ngrams(const std::u32string& chars, std::size_t n) {
  NgramCounts counts;
  if (chars.size() < n) return counts;
  for (std::size_t i = 0; i + n <= chars.size(); ++i) ++counts[chars.substr(i, n)];
  return counts;
}

}  // namespace detail

/// Multiset of all length-n character substrings after whitespace removal.
inline NgramCounts char_ngrams(std::string_view text, int n) {
  if (n < 1) throw DomainError("n-gram order must be at least 1");
  return detail::count_ngrams(detail::strip_whitespace(text), static_cast<std::size_t>(n));
}

inline double chrf(std::string_view hyp, std::string_view ref, const ChrfParams& params = {}) {
  if (params.max_order < 1) throw DomainError("chrf max_order must be at least 1");
  if (!(params.beta > 0.0)) throw DomainError("chrf beta must be positive");

  const auto hyp_chars = detail::strip_whitespace(hyp);
  const auto ref_chars = detail::strip_whitespace(ref);
  const double beta2 = params.beta * params.beta;

  double f_sum = 0.0;
  int orders = 0;
  for (int order = 1; order <= params.max_order; ++order) {
    const auto n = static_cast<std::size_t>(order);
    const auto hyp_ngrams = detail::count_ngrams(hyp_chars, n);
    const auto ref_ngrams = detail::count_ngrams(ref_chars, n);
    const std::size_t hyp_total = hyp_chars.size() >= n ? hyp_chars.size() - n + 1 : 0;
    const std::size_t ref_total = ref_chars.size() >= n ? ref_chars.size() - n + 1 : 0;
    if (hyp_total == 0 && ref_total == 0) continue;

    std::size_t matched = 0;
    for (const auto& [gram, count] : hyp_ngrams) {
      if (auto it = ref_ngrams.find(gram); it != ref_ngrams.end()) matched += std::min(count, it->second);
    }
    const double precision = hyp_total ? static_cast<double>(matched) / static_cast<double>(hyp_total) : 0.0;
    const double recall = ref_total ? static_cast<double>(matched) / static_cast<double>(ref_total) : 0.0;
    const double denom = beta2 * precision + recall;
    f_sum += denom > 0.0 ? (1.0 + beta2) * precision * recall / denom : 0.0;
    ++orders;
  }

  if (orders == 0) return hyp_chars.empty() && ref_chars.empty() ? 1.0 : 0.0;
  return f_sum / static_cast<double>(orders);
}

}  // namespace detox
