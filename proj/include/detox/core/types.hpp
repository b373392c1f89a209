#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "detox/core/errors.hpp"
#include "detox/core/unicode.hpp"

namespace detox {

using json = nlohmann::json;

/// Two-letter lowercase language code.
class LangTag {
 public:
  LangTag() = default;
  explicit LangTag(std::string_view code) : code_(code) {
    if (code_.size() != 2 || code_[0] < 'a' || code_[0] > 'z' || code_[1] < 'a' || code_[1] > 'z') {
      throw ConfigError("invalid language code '" + code_ + "' (expected two lowercase letters)");
    }
  }

  const std::string& code() const noexcept { return code_; }

  /// English display name used in prompts; unknown codes fall back to the code itself.
  std::string display_name() const {
    static const std::map<std::string, std::string, std::less<>> names = {
        {"de", "German"}, {"en", "English"}, {"es", "Spanish"}, {"fr", "French"},
        {"ru", "Russian"}, {"uk", "Ukrainian"}, {"it", "Italian"}, {"am", "Amharic"},
        {"zh", "Chinese"}, {"ar", "Arabic"}, {"hi", "Hindi"}};
    auto it = names.find(code_);
    return it == names.end() ? code_ : it->second;
  }

  friend bool operator==(const LangTag&, const LangTag&) = default;
  friend auto operator<=>(const LangTag&, const LangTag&) = default;

 private:
  std::string code_;
};

inline void to_json(json& j, const LangTag& l) { j = l.code(); }
inline void from_json(const json& j, LangTag& l) { l = LangTag(j.get<std::string>()); }

inline const LangTag kEnglish{"en"};

/// Half-open character range [start, end) in code points.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const Span&, const Span&) = default;
};

inline void to_json(json& j, const Span& s) { j = json::array({s.start, s.end}); }
inline void from_json(const json& j, Span& s) {
  if (!j.is_array() || j.size() != 2) throw ProtocolError("span must be a [start, end] pair");
  s.start = j.at(0).get<std::size_t>();
  s.end = j.at(1).get<std::size_t>();
}

inline bool spans_valid(const std::vector<Span>& spans, std::size_t text_length) {
  for (const auto& s : spans) {
    if (!(s.start < s.end && s.end <= text_length)) return false;
  }
  return true;
}

struct ToxicSample {
  std::string id;
  LangTag lang;
  std::string text;
  std::string source;
  std::vector<int> labels;
  std::optional<double> p_toxic;
  std::vector<Span> spans;

  /// Throws PipelineError when the sample violates its invariants.
  void validate() const;
};

enum class RejectReason { none, refusal, non_detoxifiable, empty, backend_failure };

inline std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::none: return "none";
    case RejectReason::refusal: return "refusal";
    case RejectReason::non_detoxifiable: return "non_detoxifiable";
    case RejectReason::empty: return "empty";
    case RejectReason::backend_failure: return "backend_failure";
  }
  return "none";
}

inline RejectReason parse_reject_reason(std::string_view s) {
  if (s == "none") return RejectReason::none;
  if (s == "refusal") return RejectReason::refusal;
  if (s == "non_detoxifiable") return RejectReason::non_detoxifiable;
  if (s == "empty") return RejectReason::empty;
  if (s == "backend_failure") return RejectReason::backend_failure;
  throw PipelineError("unknown reject reason '" + std::string(s) + "'");
}

struct DetoxCandidate {
  std::string source_id;
  std::string model_id;
  std::string text;
  double p_toxic = 0.0;
  double sim = 0.0;
  bool refusal = false;
  double detoxifiability = 0.0;
  double rank_score = 0.0;
  RejectReason reject_reason = RejectReason::none;
  std::string error;  // backend failure message, if any

  bool eligible() const noexcept { return reject_reason == RejectReason::none; }
};

struct ParallelPair {
  LangTag lang;
  std::string source_id;
  std::string toxic_text;
  std::string neutral_text;
  std::string model_id;
  double sta_toxic = 0.0;
  double sta_neutral = 0.0;
  double sim = 0.0;
  double rank_score = 0.0;
};

struct FewShotPair {
  LangTag lang;
  std::string toxic_text;
  std::string neutral_text;
  double score = 0.0;
};

struct EvalRecord {
  std::string id;
  std::string input;
  std::string output;
  std::optional<std::string> reference;
  double sta = 0.0;
  double sim = 0.0;
  double fl = 0.0;

  double j_term() const noexcept { return sta * (sim > 0.0 ? sim : 0.0) * fl; }
};

struct EvalReport {
  LangTag lang;
  std::size_t n = 0;
  double mean_sta = 0.0;
  double mean_sim = 0.0;
  double mean_fl = 0.0;
  double j = 0.0;
  double mean_sta_times_sim = 0.0;
  double product_of_mean_sta_sim = 0.0;
  std::string fl_target;  // "reference" or "source"
};

inline void ToxicSample::validate() const {
  if (id.empty()) throw PipelineError("sample without id");
  const auto chars = unicode::decode(text);
  if (unicode::trim(std::u32string_view(chars)).empty()) throw PipelineError("sample " + id + " has empty text");
  if (!spans_valid(spans, chars.size())) throw PipelineError("sample " + id + " has out-of-range spans");
  if (p_toxic && (*p_toxic < 0.0 || *p_toxic > 1.0)) {
    throw PipelineError("sample " + id + " has p_toxic outside [0,1]");
  }
}

// JSON mappings for the record types that are written to disk.

inline void to_json(json& j, const ToxicSample& s) {
  j = json{{"id", s.id}, {"lang", s.lang}, {"text", s.text}, {"source", s.source}, {"spans", s.spans}};
  j["p_toxic"] = s.p_toxic ? json(*s.p_toxic) : json(nullptr);
  if (!s.labels.empty()) j["labels"] = s.labels;
}

inline void from_json(const json& j, ToxicSample& s) {
  s.id = j.at("id").get<std::string>();
  s.lang = j.at("lang").get<LangTag>();
  s.text = j.at("text").get<std::string>();
  s.source = j.value("source", std::string{});
  s.spans = j.value("spans", std::vector<Span>{});
  s.labels = j.value("labels", std::vector<int>{});
  if (auto it = j.find("p_toxic"); it != j.end() && !it->is_null()) s.p_toxic = it->get<double>();
}

inline void to_json(json& j, const DetoxCandidate& c) {
  j = json{{"source_id", c.source_id},
           {"model_id", c.model_id},
           {"text", c.text},
           {"p_toxic", c.p_toxic},
           {"sim", c.sim},
           {"refusal", c.refusal},
           {"detoxifiability", c.detoxifiability},
           {"rank_score", c.rank_score},
           {"reject_reason", to_string(c.reject_reason)}};
  if (!c.error.empty()) j["error"] = c.error;
}

inline void from_json(const json& j, DetoxCandidate& c) {
  c.source_id = j.at("source_id").get<std::string>();
  c.model_id = j.at("model_id").get<std::string>();
  c.text = j.at("text").get<std::string>();
  c.p_toxic = j.at("p_toxic").get<double>();
  c.sim = j.at("sim").get<double>();
  c.refusal = j.at("refusal").get<bool>();
  c.detoxifiability = j.at("detoxifiability").get<double>();
  c.rank_score = j.at("rank_score").get<double>();
  c.reject_reason = parse_reject_reason(j.at("reject_reason").get<std::string>());
  c.error = j.value("error", std::string{});
}

inline void to_json(json& j, const ParallelPair& p) {
  j = json{{"lang", p.lang},
           {"source_id", p.source_id},
           {"toxic_text", p.toxic_text},
           {"neutral_text", p.neutral_text},
           {"model_id", p.model_id},
           {"sta_toxic", p.sta_toxic},
           {"sta_neutral", p.sta_neutral},
           {"sim", p.sim},
           {"rank_score", p.rank_score}};
}

inline void from_json(const json& j, ParallelPair& p) {
  p.lang = j.at("lang").get<LangTag>();
  p.source_id = j.value("source_id", std::string{});
  p.toxic_text = j.at("toxic_text").get<std::string>();
  p.neutral_text = j.at("neutral_text").get<std::string>();
  p.model_id = j.value("model_id", std::string{});
  p.sta_toxic = j.value("sta_toxic", 0.0);
  p.sta_neutral = j.value("sta_neutral", 0.0);
  p.sim = j.value("sim", 0.0);
  p.rank_score = j.value("rank_score", 0.0);
}

inline void to_json(json& j, const FewShotPair& p) {
  j = json{{"lang", p.lang}, {"toxic", p.toxic_text}, {"neutral", p.neutral_text}, {"score", p.score}};
}

inline void from_json(const json& j, FewShotPair& p) {
  p.lang = j.at("lang").get<LangTag>();
  p.toxic_text = j.at("toxic").get<std::string>();
  p.neutral_text = j.at("neutral").get<std::string>();
  p.score = j.value("score", 0.0);
}

inline void to_json(json& j, const EvalRecord& r) {
  j = json{{"id", r.id},   {"input", r.input}, {"output", r.output}, {"sta", r.sta},
           {"sim", r.sim}, {"fl", r.fl},       {"j_term", r.j_term()}};
  if (r.reference) j["reference"] = *r.reference;
}

inline void to_json(json& j, const EvalReport& r) {
  j = json{{"lang", r.lang},
           {"n", r.n},
           {"mean_sta", r.mean_sta},
           {"mean_sim", r.mean_sim},
           {"mean_fl", r.mean_fl},
           {"j", r.j},
           {"mean_sta_times_sim", r.mean_sta_times_sim},
           {"product_of_mean_sta_sim", r.product_of_mean_sta_sim},
           {"fl_target", r.fl_target}};
}

inline void from_json(const json& j, EvalReport& r) {
  r.lang = j.at("lang").get<LangTag>();
  r.n = j.at("n").get<std::size_t>();
  r.mean_sta = j.at("mean_sta").get<double>();
  r.mean_sim = j.at("mean_sim").get<double>();
  r.mean_fl = j.at("mean_fl").get<double>();
  r.j = j.at("j").get<double>();
  r.mean_sta_times_sim = j.at("mean_sta_times_sim").get<double>();
  r.product_of_mean_sta_sim = j.at("product_of_mean_sta_sim").get<double>();
  r.fl_target = j.at("fl_target").get<std::string>();
}

}  // namespace detox
