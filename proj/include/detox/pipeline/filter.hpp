#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <spdlog/spdlog.h>

#include "detox/core/metrics.hpp"
#include "detox/core/unicode.hpp"
#include "detox/services/clients.hpp"

namespace detox::pipeline {

/// Lowercase phrases that mark an LLM declining the task.
inline const std::vector<std::string>& default_refusal_patterns() {
  static const std::vector<std::string> patterns = {
      // en
      "i can't", "i cannot", "i can not", "i won't", "i will not", "i'm unable", "i am unable",
      "i'm not able to", "i am not able to", "i'm sorry, but", "i apologize, but", "as an ai",
      // fr
      "je ne peux pas", "je ne suis pas en mesure", "désolé, mais",
      // es
      "no puedo", "lo siento, pero", "no me es posible",
      // de
      "ich kann nicht", "ich kann diese", "es tut mir leid", "ich bin nicht in der lage",
      // ru
      "я не могу", "извините, но", "не могу выполнить",
  };
  return patterns;
}

/// Refusal check: a configured classifier first, the pattern list as a
/// fallback (also used when the classifier fails). Empty text is a refusal.
class RefusalDetector {
 public:
  RefusalDetector() = default;
  explicit RefusalDetector(const RefusalClient* client) : client_(client) {}

  bool operator()(std::string_view text) const {
    const auto trimmed = unicode::trim(text);
    if (trimmed.empty()) return true;
    if (client_ != nullptr) {
      try {
        return client_->classify(trimmed);
      } catch (const Error& e) {
        spdlog::warn("refusal classifier unavailable, falling back to patterns: {}", e.what());
      }
    }
    const auto lowered = unicode::to_lower(trimmed);
    for (const auto& p : default_refusal_patterns()) {
      if (lowered.find(p) != std::string::npos) return true;
    }
    return false;
  }

 private:
  const RefusalClient* client_ = nullptr;
};

inline bool is_refusal(std::string_view text, const RefusalClient* client = nullptr) {
  return RefusalDetector(client)(text);
}

/// Assigns the reject reason: empty, then refusal, then non-detoxifiable.
/// Every scored candidate carries rank_score = STA * max(SIM, 0); only
/// candidates with reason none are eligible. Backend failures pass through.
inline DetoxCandidate filter_candidate(DetoxCandidate cand, double tox_x,
                                       double threshold = kDetoxifiabilityThreshold,
                                       const RefusalDetector& refusal = RefusalDetector{}) {
  cand.rank_score = 0.0;
  if (cand.reject_reason == RejectReason::backend_failure) return cand;
  if (unicode::trim(cand.text).empty()) {
    cand.reject_reason = RejectReason::empty;
    return cand;
  }
  cand.rank_score = rank_score(sta_of(cand.p_toxic), cand.sim);
  const auto d = detoxifiability(tox_x, cand.p_toxic);
  cand.detoxifiability = std::max(d.value_or(0.0), 0.0);
  cand.refusal = refusal(cand.text);
  if (cand.refusal) {
    cand.reject_reason = RejectReason::refusal;
    return cand;
  }
  if (!d || *d < threshold) {
    cand.reject_reason = RejectReason::non_detoxifiable;
    return cand;
  }
  cand.reject_reason = RejectReason::none;
  return cand;
}

}  // namespace detox::pipeline
