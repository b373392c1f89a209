#pragma once

// Typed clients for the external capabilities. Every request carries a single
// text so that request fingerprints do not depend on batching or worker count.
//
// Native wire schema (POST, JSON body -> JSON body):
//   toxicity     {text, lang}                    -> {score, spans: [[start, end], ...]}
//   embedding    {text}                          -> {vector: [...]}
//   chat, judge  {model, messages, temperature,
//                 max_tokens[, seed]}            -> {text}  (OpenAI-style choices also accepted)
//   translation  {text, src, tgt}                -> {text}
//   refusal      {text}                          -> {refusal: bool} or {score}

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "detox/core/errors.hpp"
#include "detox/core/types.hpp"
#include "detox/core/unicode.hpp"
#include "detox/services/transport.hpp"
#include "detox/util/parallel.hpp"

namespace detox {

using Embedding = std::vector<double>;

struct ToxicityResult {
  double p_toxic = 0.0;
  std::vector<Span> spans;
};

struct GenerationParams {
  double temperature = 0.7;
  int max_tokens = 256;
  std::optional<std::uint64_t> seed;
};

namespace detail {

inline json parse_response(const ServiceProfile& profile, const std::string& body) {
  try {
    auto j = json::parse(body);
    if (!j.is_object()) throw ProtocolError("service '" + profile.id + "' returned a non-object body");
    return j;
  } catch (const json::parse_error& e) {
    throw ProtocolError("service '" + profile.id + "' returned malformed JSON: " + e.what());
  }
}

inline void require_kind(const ServiceProfile& profile, std::initializer_list<ServiceKind> kinds) {
  for (auto k : kinds) {
    if (profile.kind == k) return;
  }
  throw ConfigError("service '" + profile.id + "' has kind " + std::string(to_string(profile.kind)) +
                    ", which cannot serve this request");
}

}  // namespace detail

/// Cosine similarity. Throws DomainError on dimension mismatch or a zero vector.
inline double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DomainError("cosine of vectors with different dimensions");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw DomainError("cosine similarity is undefined for a zero vector");
  return std::clamp(dot / std::sqrt(nu * nv), -1.0, 1.0);
}

class ToxicityClient {
 public:
  ToxicityClient(Transport& transport, ServiceProfile profile, std::size_t jobs = 1)
      : transport_(transport), profile_(std::move(profile)), jobs_(jobs) {
    detail::require_kind(profile_, {ServiceKind::toxicity});
  }

  ToxicityResult score_one(const std::string& text, const LangTag& lang) const {
    const auto body = transport_.send(profile_, json{{"text", text}, {"lang", lang.code()}});
    const auto j = detail::parse_response(profile_, body);
    ToxicityResult result;
    try {
      result.p_toxic = j.at("score").get<double>();
      if (auto it = j.find("spans"); it != j.end() && !it->is_null()) result.spans = it->get<std::vector<Span>>();
    } catch (const json::exception& e) {
      throw ProtocolError("toxicity service '" + profile_.id + "': " + e.what());
    }
    if (!(result.p_toxic >= 0.0 && result.p_toxic <= 1.0)) {
      throw ProtocolError("toxicity service '" + profile_.id + "' returned score outside [0,1]");
    }
    if (!spans_valid(result.spans, unicode::length(text))) {
      throw ProtocolError("toxicity service '" + profile_.id + "' returned spans outside the text");
    }
    return result;
  }

  std::vector<ToxicityResult> score(const std::vector<std::string>& texts, const LangTag& lang) const {
    std::vector<ToxicityResult> out(texts.size());
    parallel_for(texts.size(), jobs_, [&](std::size_t i) { out[i] = score_one(texts[i], lang); });
    return out;
  }

  const ServiceProfile& profile() const noexcept { return profile_; }

 private:
  Transport& transport_;
  ServiceProfile profile_;
  std::size_t jobs_;
};

class EmbeddingClient {
 public:
  EmbeddingClient(Transport& transport, ServiceProfile profile, std::size_t jobs = 1)
      : transport_(transport), profile_(std::move(profile)), jobs_(jobs) {
    detail::require_kind(profile_, {ServiceKind::embedding});
  }

  Embedding embed_one(const std::string& text) const {
    const auto j = detail::parse_response(profile_, transport_.send(profile_, json{{"text", text}}));
    Embedding v;
    try {
      v = j.at("vector").get<Embedding>();
    } catch (const json::exception& e) {
      throw ProtocolError("embedding service '" + profile_.id + "': " + e.what());
    }
    if (v.empty()) throw ProtocolError("embedding service '" + profile_.id + "' returned an empty vector");
    return v;
  }

  std::vector<Embedding> embed(const std::vector<std::string>& texts) const {
    std::vector<Embedding> out(texts.size());
    parallel_for(texts.size(), jobs_, [&](std::size_t i) { out[i] = embed_one(texts[i]); });
    for (const auto& v : out) {
      if (v.size() != out.front().size()) {
        throw ProtocolError("embedding service '" + profile_.id + "' returned vectors of different dimensions");
      }
    }
    return out;
  }

  /// Cosine similarity between the embeddings of two texts.
  double similarity(const std::string& a, const std::string& b) const {
    const auto ea = embed_one(a);
    const auto eb = embed_one(b);
    if (ea.size() != eb.size()) {
      throw ProtocolError("embedding service '" + profile_.id + "' returned vectors of different dimensions");
    }
    return cosine(ea, eb);
  }

  const ServiceProfile& profile() const noexcept { return profile_; }

 private:
  Transport& transport_;
  ServiceProfile profile_;
  std::size_t jobs_;
};

class ChatClient {
 public:
  ChatClient(Transport& transport, ServiceProfile profile) : transport_(transport), profile_(std::move(profile)) {
    detail::require_kind(profile_, {ServiceKind::chat, ServiceKind::judge});
  }

  /// Returns the completion with surrounding whitespace removed. An empty
  /// completion is returned as "" and left for the caller to reject.
  std::string generate(const std::string& prompt, const GenerationParams& params = {}) const {
    if (prompt.empty()) throw DomainError("chat prompt must not be empty");
    json payload{{"model", profile_.model_id},
                 {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
                 {"temperature", params.temperature},
                 {"max_tokens", params.max_tokens}};
    if (params.seed) payload["seed"] = *params.seed;
    const auto j = detail::parse_response(profile_, transport_.send(profile_, payload));
    try {
      std::string text;
      if (auto it = j.find("text"); it != j.end()) {
        text = it->is_null() ? std::string{} : it->get<std::string>();
      } else {
        const auto& content = j.at("choices").at(0).at("message").at("content");
        text = content.is_null() ? std::string{} : content.get<std::string>();
      }
      return unicode::trim(text);
    } catch (const json::exception& e) {
      throw ProtocolError("chat service '" + profile_.id + "': " + e.what());
    }
  }

  const ServiceProfile& profile() const noexcept { return profile_; }

 private:
  Transport& transport_;
  ServiceProfile profile_;
};

class TranslationClient {
 public:
  TranslationClient(Transport& transport, ServiceProfile profile, std::size_t jobs = 1)
      : transport_(transport), profile_(std::move(profile)), jobs_(jobs) {
    detail::require_kind(profile_, {ServiceKind::translation});
  }

  void check_pair(const LangTag& src, const LangTag& tgt) const {
    if (src == tgt) throw ConfigError("translation source and target are both '" + src.code() + "'");
    if (profile_.languages.empty()) return;
    auto supported = [&](const LangTag& l) {
      return std::find(profile_.languages.begin(), profile_.languages.end(), l.code()) != profile_.languages.end();
    };
    if (!supported(src) || !supported(tgt)) {
      throw ConfigError("translation service '" + profile_.id + "' does not support " + src.code() + "->" +
                        tgt.code());
    }
  }

  std::string translate_one(const std::string& text, const LangTag& src, const LangTag& tgt) const {
    check_pair(src, tgt);
    const auto j = detail::parse_response(
        profile_, transport_.send(profile_, json{{"text", text}, {"src", src.code()}, {"tgt", tgt.code()}}));
    try {
      return j.at("text").get<std::string>();
    } catch (const json::exception& e) {
      throw ProtocolError("translation service '" + profile_.id + "': " + e.what());
    }
  }

  std::vector<std::string> translate(const std::vector<std::string>& texts, const LangTag& src,
                                     const LangTag& tgt) const {
    check_pair(src, tgt);
    std::vector<std::string> out(texts.size());
    parallel_for(texts.size(), jobs_, [&](std::size_t i) { out[i] = translate_one(texts[i], src, tgt); });
    return out;
  }

 private:
  Transport& transport_;
  ServiceProfile profile_;
  std::size_t jobs_;
};

/// Client for a refusal classifier: true when the text declines the task.
class RefusalClient {
 public:
  RefusalClient(Transport& transport, ServiceProfile profile) : transport_(transport), profile_(std::move(profile)) {
    detail::require_kind(profile_, {ServiceKind::refusal});
  }

  bool classify(const std::string& text) const {
    const auto j = detail::parse_response(profile_, transport_.send(profile_, json{{"text", text}}));
    try {
      if (auto it = j.find("refusal"); it != j.end()) return it->get<bool>();
      return j.at("score").get<double>() >= 0.5;
    } catch (const json::exception& e) {
      throw ProtocolError("refusal service '" + profile_.id + "': " + e.what());
    }
  }

 private:
  Transport& transport_;
  ServiceProfile profile_;
};

}  // namespace detox
