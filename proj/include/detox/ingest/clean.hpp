#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "detox/core/errors.hpp"
#include "detox/core/types.hpp"
#include "detox/core/unicode.hpp"

namespace detox::ingest {

/// True iff strictly more than half of the votes are toxic. Ties are non-toxic.
inline bool is_majority_toxic(std::span<const int> votes) {
  if (votes.empty()) throw DomainError("majority vote over an empty label list");
  std::size_t toxic = 0;
  for (int v : votes) toxic += v != 0 ? 1 : 0;
  return 2 * toxic > votes.size();
}

/// Drops emoji and other-symbol code points, collapses whitespace runs to a
/// single space and trims the result.
inline std::string normalize(std::string_view text) {
  std::u32string out;
  bool pending_space = false;
  for (char32_t c : unicode::decode(text)) {
    if (unicode::is_symbol_or_emoji(c)) continue;
    if (unicode::is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(c);
  }
  return unicode::encode(out);
}

inline std::size_t word_count(std::string_view text) {
  std::size_t words = 0;
  bool in_word = false;
  for (char32_t c : unicode::decode(text)) {
    const bool space = unicode::is_space(c);
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return words;
}

inline constexpr std::size_t kMinWords = 5;
inline constexpr std::size_t kMaxWords = 30;

/// Inclusive word-count bounds.
inline bool length_ok(std::string_view text, std::size_t min_words = kMinWords, std::size_t max_words = kMaxWords) {
  const auto n = word_count(text);
  return n >= min_words && n <= max_words;
}

namespace detail {

inline bool is_terminator(char32_t c) { return c == U'.' || c == U'!' || c == U'?' || c == U'…'; }

inline bool is_closer(char32_t c) {
  return c == U'"' || c == U'\'' || c == U')' || c == U']' || c == U'»' || c == U'”' || c == U'’';
}

}  // namespace detail

/// Sentence boundaries as code point ranges, trimmed of surrounding
/// whitespace. A run of terminators (. ! ? …) plus closing quotes/brackets
/// ends a sentence when followed by whitespace or the end of the text; a
/// newline always ends one.
inline std::vector<Span> sentence_ranges(std::u32string_view chars) {
  std::vector<Span> ranges;
  const std::size_t n = chars.size();
  auto emit = [&](std::size_t start, std::size_t end) {
    while (start < end && unicode::is_space(chars[start])) ++start;
    while (end > start && unicode::is_space(chars[end - 1])) --end;
    if (start < end) ranges.push_back({start, end});
  };

  std::size_t start = 0;
  std::size_t i = 0;
  while (i < n) {
    if (chars[i] == U'\n') {
      emit(start, i);
      start = ++i;
      continue;
    }
    if (detail::is_terminator(chars[i])) {
      std::size_t j = i;
      while (j < n && detail::is_terminator(chars[j])) ++j;
      while (j < n && detail::is_closer(chars[j])) ++j;
      if (j == n || unicode::is_space(chars[j])) {
        emit(start, j);
        start = i = j;
        continue;
      }
      i = j;
      continue;
    }
    ++i;
  }
  emit(start, n);
  return ranges;
}

struct Segment {
  std::string text;
  std::size_t sentence_index = 0;
  Span range;
};

/// Returns the sentences that overlap at least one toxic span, verbatim and
/// in text order. Without spans the whole text is one segment.
inline std::vector<Segment> split_by_spans(std::string_view text, const std::vector<Span>& spans) {
  const auto chars = unicode::decode(text);
  if (!spans_valid(spans, chars.size())) throw DomainError("toxic span outside the text");
  if (spans.empty()) return {Segment{std::string(text), 0, Span{0, chars.size()}}};

  std::vector<Segment> out;
  const auto sentences = sentence_ranges(chars);
  for (std::size_t k = 0; k < sentences.size(); ++k) {
    const auto& s = sentences[k];
    bool overlaps = false;
    for (const auto& span : spans) {
      if (span.start < s.end && s.start < span.end) {
        overlaps = true;
        break;
      }
    }
    if (overlaps) {
      out.push_back({unicode::encode(std::u32string_view(chars).substr(s.start, s.end - s.start)), k, s});
    }
  }
  return out;
}

struct Partition {
  std::vector<ToxicSample> kept;
  std::vector<ToxicSample> rejected;
};

using Thresholds = std::map<LangTag, double>;

/// Keeps samples whose P(toxic) reaches the language threshold (inclusive).
inline Partition filter_by_toxicity(std::vector<ToxicSample> samples, const Thresholds& thresholds) {
  Partition out;
  for (auto& s : samples) {
    if (!s.p_toxic) throw PipelineError("sample " + s.id + " has not been scored for toxicity");
    auto it = thresholds.find(s.lang);
    if (it == thresholds.end()) throw ConfigError("no toxicity threshold configured for language '" + s.lang.code() + "'");
    (*s.p_toxic >= it->second ? out.kept : out.rejected).push_back(std::move(s));
  }
  return out;
}

}  // namespace detox::ingest
