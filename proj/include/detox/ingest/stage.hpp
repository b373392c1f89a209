#pragma once

#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "detox/ingest/clean.hpp"
#include "detox/ingest/source.hpp"
#include "detox/services/clients.hpp"

namespace detox::ingest {

struct IngestOptions {
  Thresholds thresholds;
  std::size_t min_words = kMinWords;
  std::size_t max_words = kMaxWords;
};

struct IngestStats {
  std::size_t loaded = 0;
  std::size_t malformed_rows = 0;
  std::size_t other_language = 0;
  std::size_t not_majority = 0;
  std::size_t empty_after_clean = 0;
  std::size_t below_threshold = 0;
  std::size_t segments = 0;
  std::size_t length_rejected = 0;
  std::size_t segment_below_threshold = 0;
  std::size_t kept = 0;
};

inline void to_json(json& j, const IngestStats& s) {
  j = json{{"loaded", s.loaded},
           {"malformed_rows", s.malformed_rows},
           {"other_language", s.other_language},
           {"not_majority", s.not_majority},
           {"empty_after_clean", s.empty_after_clean},
           {"below_threshold", s.below_threshold},
           {"segments", s.segments},
           {"length_rejected", s.length_rejected},
           {"segment_below_threshold", s.segment_below_threshold},
           {"kept", s.kept}};
}

/// Selection, cleaning, scoring, threshold filtering and span splitting for
/// the raw samples of one language. Output order follows input order, then
/// sentence order within a text.
///
/// Split segments that differ from their parent text are re-scored so that
/// every emitted sample carries the toxicity of its own text; they must pass
/// the language threshold again.
inline std::vector<ToxicSample> prepare_samples(std::vector<ToxicSample> raw, const ToxicityClient& scorer,
                                                const IngestOptions& options, IngestStats& stats) {
  stats.loaded += raw.size();

  std::vector<ToxicSample> selected;
  for (auto& s : raw) {
    if (!s.labels.empty() && !is_majority_toxic(s.labels)) {
      ++stats.not_majority;
      continue;
    }
    s.text = normalize(s.text);
    if (s.text.empty()) {
      ++stats.empty_after_clean;
      spdlog::debug("dropping {}: empty_after_clean", s.id);
      continue;
    }
    selected.push_back(std::move(s));
  }
  if (selected.empty()) return {};

  std::vector<std::string> texts;
  texts.reserve(selected.size());
  for (const auto& s : selected) texts.push_back(s.text);
  const auto scores = scorer.score(texts, selected.front().lang);
  for (std::size_t i = 0; i < selected.size(); ++i) {
    selected[i].p_toxic = scores[i].p_toxic;
    selected[i].spans = scores[i].spans;
  }

  auto partition = filter_by_toxicity(std::move(selected), options.thresholds);
  stats.below_threshold += partition.rejected.size();

  std::vector<ToxicSample> segments;
  std::vector<std::size_t> needs_rescore;
  for (const auto& parent : partition.kept) {
    for (auto& seg : split_by_spans(parent.text, parent.spans)) {
      ++stats.segments;
      if (!length_ok(seg.text, options.min_words, options.max_words)) {
        ++stats.length_rejected;
        continue;
      }
      ToxicSample child = parent;
      if (seg.text != parent.text) {
        child.id = parent.id + "#" + std::to_string(seg.sentence_index);
        child.text = std::move(seg.text);
        child.spans.clear();
        child.p_toxic.reset();
        needs_rescore.push_back(segments.size());
      }
      segments.push_back(std::move(child));
    }
  }

  if (!needs_rescore.empty()) {
    std::vector<std::string> seg_texts;
    for (auto idx : needs_rescore) seg_texts.push_back(segments[idx].text);
    const auto seg_scores = scorer.score(seg_texts, segments.front().lang);
    for (std::size_t k = 0; k < needs_rescore.size(); ++k) {
      segments[needs_rescore[k]].p_toxic = seg_scores[k].p_toxic;
      segments[needs_rescore[k]].spans = seg_scores[k].spans;
    }
  }

  auto final_partition = filter_by_toxicity(std::move(segments), options.thresholds);
  stats.segment_below_threshold += final_partition.rejected.size();
  stats.kept += final_partition.kept.size();
  return std::move(final_partition.kept);
}

}  // namespace detox::ingest
