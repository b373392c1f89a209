#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "detox/core/metrics.hpp"
#include "detox/services/clients.hpp"
#include "detox/util/io.hpp"

namespace detox::pipeline {

inline constexpr std::size_t kDefaultFewShotK = 10;

/// A candidate demonstration before scoring.
struct ParallelExample {
  std::string toxic;
  std::string neutral;
};

/// Top-k pairs by descending score; equal scores keep their input order.
inline std::vector<FewShotPair> mine_fewshot(std::vector<FewShotPair> pairs, long long k = kDefaultFewShotK) {
  if (k < 0) throw DomainError("few-shot k must be non-negative");
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const FewShotPair& a, const FewShotPair& b) { return a.score > b.score; });
  if (static_cast<std::size_t>(k) < pairs.size()) pairs.resize(static_cast<std::size_t>(k));
  return pairs;
}

/// Scores every pool pair with the few-shot ranking formula using service
/// toxicities and embedding similarity (negative cosine clamped to 0).
/// Pairs whose neutral side has toxicity 1 are dropped.
inline std::vector<FewShotPair> score_pool(const std::vector<ParallelExample>& pool, const LangTag& lang,
                                           const ToxicityClient& toxicity, const EmbeddingClient& embedder) {
  std::vector<std::string> toxic, neutral;
  for (const auto& p : pool) {
    toxic.push_back(p.toxic);
    neutral.push_back(p.neutral);
  }
  const auto tox_x = toxicity.score(toxic, lang);
  const auto tox_y = toxicity.score(neutral, lang);
  const auto emb_x = embedder.embed(toxic);
  const auto emb_y = embedder.embed(neutral);

  std::vector<FewShotPair> out;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (tox_y[i].p_toxic >= 1.0) {
      spdlog::warn("few-shot pool ({}): dropping degenerate pair {}", lang.code(), i);
      continue;
    }
    const double sim = std::max(cosine(emb_x[i], emb_y[i]), 0.0);
    out.push_back({lang, pool[i].toxic, pool[i].neutral, fewshot_score(tox_x[i].p_toxic, tox_y[i].p_toxic, sim)});
  }
  return out;
}

/// Reads a pool file: JSONL rows with "toxic" and "neutral" fields.
inline std::vector<ParallelExample> load_pool(const std::filesystem::path& path) {
  std::vector<ParallelExample> pool;
  for (const auto& row : io::read_jsonl(path)) {
    if (!row.contains("toxic") || !row.contains("neutral")) {
      throw IoError(path.string() + ": few-shot rows need 'toxic' and 'neutral'");
    }
    pool.push_back({row.at("toxic").get<std::string>(), row.at("neutral").get<std::string>()});
  }
  return pool;
}

}  // namespace detox::pipeline
