#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "detox/core/metrics.hpp"
#include "detox/pipeline/generate.hpp"
#include "detox/util/io.hpp"

namespace detox::pipeline {

/// Best eligible candidate by rank score. Ties go to the backend listed
/// first in `priority` (unlisted backends rank last), then to the
/// lexicographically smaller text.
inline std::optional<DetoxCandidate> select_best(std::span<const DetoxCandidate> cands,
                                                 std::span<const std::string> priority = {}) {
  auto rank_of = [&](const std::string& model) {
    auto it = std::find(priority.begin(), priority.end(), model);
    return static_cast<std::size_t>(it - priority.begin());
  };
  const DetoxCandidate* best = nullptr;
  for (const auto& c : cands) {
    if (!c.eligible()) continue;
    if (best == nullptr) {
      best = &c;
      continue;
    }
    if (c.rank_score != best->rank_score) {
      if (c.rank_score > best->rank_score) best = &c;
      continue;
    }
    const auto rc = rank_of(c.model_id), rb = rank_of(best->model_id);
    if (rc != rb) {
      if (rc < rb) best = &c;
      continue;
    }
    if (c.text < best->text) best = &c;
  }
  if (best == nullptr) return std::nullopt;
  return *best;
}

struct ModelCounts {
  std::size_t accepted = 0;
  std::size_t generated = 0;
  std::size_t refusal = 0;
  std::size_t non_detoxifiable = 0;
  std::size_t empty = 0;
  std::size_t backend_failure = 0;
};

/// Per (model, language) acceptance counts.
struct ModelStats {
  std::map<std::string, std::map<LangTag, ModelCounts>> counts;

  ModelCounts& at(const std::string& model, const LangTag& lang) { return counts[model][lang]; }

  std::size_t accepted_total(const LangTag& lang) const {
    std::size_t n = 0;
    for (const auto& [model, by_lang] : counts) {
      if (auto it = by_lang.find(lang); it != by_lang.end()) n += it->second.accepted;
    }
    return n;
  }

  void merge(const ModelStats& other) {
    for (const auto& [model, by_lang] : other.counts) {
      for (const auto& [lang, c] : by_lang) {
        auto& mine = at(model, lang);
        mine.accepted += c.accepted;
        mine.generated += c.generated;
        mine.refusal += c.refusal;
        mine.non_detoxifiable += c.non_detoxifiable;
        mine.empty += c.empty;
        mine.backend_failure += c.backend_failure;
      }
    }
  }
};

inline void to_json(json& j, const ModelCounts& c) {
  j = json{{"accepted", c.accepted},   {"generated", c.generated},
           {"refusal", c.refusal},     {"non_detoxifiable", c.non_detoxifiable},
           {"empty", c.empty},         {"backend_failure", c.backend_failure}};
}

/// Table-shaped export: models -> language -> counts, plus per-language totals.
inline json stats_to_json(const ModelStats& stats) {
  json models = json::object();
  std::map<std::string, std::size_t> totals;
  for (const auto& [model, by_lang] : stats.counts) {
    json row = json::object();
    for (const auto& [lang, c] : by_lang) {
      row[lang.code()] = c;
      totals[lang.code()] += c.accepted;
    }
    models[model] = row;
  }
  return json{{"models", models}, {"accepted_totals", totals}};
}

/// Counts generated/refused/non-detoxifiable candidates per model.
inline void tally_candidates(std::span<const SourceCandidates> records, ModelStats& stats) {
  for (const auto& r : records) {
    for (const auto& c : r.candidates) {
      auto& counts = stats.at(c.model_id, r.source.lang);
      switch (c.reject_reason) {
        case RejectReason::backend_failure: ++counts.backend_failure; continue;
        case RejectReason::refusal: ++counts.refusal; break;
        case RejectReason::non_detoxifiable: ++counts.non_detoxifiable; break;
        case RejectReason::empty: ++counts.empty; break;
        case RejectReason::none: break;
      }
      ++counts.generated;
    }
  }
}

struct Selection {
  ToxicSample source;
  DetoxCandidate candidate;
};

struct ComposeResult {
  std::vector<ParallelPair> pairs;
  ModelStats stats;
  bool short_of_target = false;
};

inline constexpr std::size_t kDefaultPerLanguageTarget = 4000;

/// Orders selections by descending rank score (stable), keeps at most
/// `target` and credits each emitted pair to its model.
inline ComposeResult compose_dataset(std::vector<Selection> selected, std::size_t target = kDefaultPerLanguageTarget) {
  std::stable_sort(selected.begin(), selected.end(), [](const Selection& a, const Selection& b) {
    return a.candidate.rank_score > b.candidate.rank_score;
  });
  ComposeResult result;
  if (selected.size() < target) {
    result.short_of_target = true;
    spdlog::warn("only {} pairs available for a target of {}", selected.size(), target);
  }
  if (selected.size() > target) selected.resize(target);
  for (const auto& s : selected) {
    ParallelPair p;
    p.lang = s.source.lang;
    p.source_id = s.source.id;
    p.toxic_text = s.source.text;
    p.neutral_text = s.candidate.text;
    p.model_id = s.candidate.model_id;
    p.sta_toxic = sta_of(s.source.p_toxic.value_or(0.0));
    p.sta_neutral = sta_of(s.candidate.p_toxic);
    p.sim = s.candidate.sim;
    p.rank_score = s.candidate.rank_score;
    ++result.stats.at(p.model_id, p.lang).accepted;
    result.pairs.push_back(std::move(p));
  }
  return result;
}

/// select_best over every source, compose, and tally candidate outcomes.
inline ComposeResult compose_language(std::span<const SourceCandidates> records, std::size_t target,
                                      std::span<const std::string> priority) {
  std::vector<Selection> selected;
  std::size_t excluded = 0;
  for (const auto& r : records) {
    if (auto best = select_best(r.candidates, priority)) {
      selected.push_back({r.source, std::move(*best)});
    } else {
      ++excluded;
    }
  }
  if (excluded) spdlog::info("{} sources had no acceptable candidate", excluded);
  auto result = compose_dataset(std::move(selected), target);
  tally_candidates(records, result.stats);
  return result;
}

enum class EmitFormat { tsv, jsonl };

inline std::string escape_tsv(std::string_view field) {
  std::string out;
  out.reserve(field.size());
  for (char c : field) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string format_pairs(std::span<const ParallelPair> pairs, EmitFormat format) {
  if (format == EmitFormat::jsonl) return io::to_jsonl(pairs);
  std::string out;
  for (const auto& p : pairs) {
    out += escape_tsv(p.toxic_text);
    out += '\t';
    out += escape_tsv(p.neutral_text);
    out += '\t';
    out += p.lang.code();
    out += '\t';
    out += escape_tsv(p.model_id);
    out += '\n';
  }
  return out;
}

/// Writes `toxic<TAB>neutral<TAB>lang<TAB>model_id` rows (no header) or JSONL.
inline void emit(std::span<const ParallelPair> pairs, const std::filesystem::path& path, EmitFormat format) {
  io::write_file(path, format_pairs(pairs, format));
}

}  // namespace detox::pipeline
