#pragma once

#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "detox/core/errors.hpp"
#include "detox/core/types.hpp"

namespace detox {

enum class ServiceKind { toxicity, embedding, chat, translation, judge, refusal };

inline std::string_view to_string(ServiceKind k) {
  switch (k) {
    case ServiceKind::toxicity: return "toxicity";
    case ServiceKind::embedding: return "embedding";
    case ServiceKind::chat: return "chat";
    case ServiceKind::translation: return "translation";
    case ServiceKind::judge: return "judge";
    case ServiceKind::refusal: return "refusal";
  }
  return "chat";
}

inline ServiceKind parse_service_kind(std::string_view s) {
  if (s == "toxicity") return ServiceKind::toxicity;
  if (s == "embedding") return ServiceKind::embedding;
  if (s == "chat") return ServiceKind::chat;
  if (s == "translation") return ServiceKind::translation;
  if (s == "judge") return ServiceKind::judge;
  if (s == "refusal") return ServiceKind::refusal;
  throw ConfigError("unknown service kind '" + std::string(s) + "'");
}

/// Endpoint, credentials and traffic limits for one external service.
/// `base_url` is the full endpoint URL the JSON request is POSTed to.
struct ServiceProfile {
  std::string id;
  ServiceKind kind = ServiceKind::chat;
  std::string base_url;
  std::string auth_token_env;  // name of the environment variable holding the token
  int timeout_ms = 30000;
  int max_retries = 3;
  int max_in_flight = 4;
  std::string model_id;
  int backoff_ms = 250;
  double rate_per_sec = 0.0;  // 0 disables the token bucket
  std::vector<std::string> languages;  // translation only; empty means any pair

  void validate() const {
    static const std::regex url_re(R"(^https?://[^/\s:]+(:[0-9]{1,5})?(/\S*)?$)");
    if (id.empty()) throw ConfigError("service profile without id");
    if (!std::regex_match(base_url, url_re)) {
      throw ConfigError("service '" + id + "': base_url '" + base_url + "' is not an absolute http(s) URL");
    }
    if (timeout_ms <= 0) throw ConfigError("service '" + id + "': timeout_ms must be positive");
    if (max_retries < 0 || max_retries > 10) throw ConfigError("service '" + id + "': max_retries must be in [0,10]");
    if (max_in_flight < 1) throw ConfigError("service '" + id + "': max_in_flight must be >= 1");
    if (backoff_ms < 0) throw ConfigError("service '" + id + "': backoff_ms must be >= 0");
    if (rate_per_sec < 0.0) throw ConfigError("service '" + id + "': rate_per_sec must be >= 0");
    if ((kind == ServiceKind::chat || kind == ServiceKind::judge) && model_id.empty()) {
      throw ConfigError("service '" + id + "': chat and judge profiles need a model_id");
    }
  }
};

inline void from_json(const json& j, ServiceProfile& p) {
  p.id = j.at("id").get<std::string>();
  p.kind = parse_service_kind(j.at("kind").get<std::string>());
  p.base_url = j.at("base_url").get<std::string>();
  p.auth_token_env = j.value("auth_token_env", std::string{});
  p.timeout_ms = j.value("timeout_ms", 30000);
  p.max_retries = j.value("max_retries", 3);
  p.max_in_flight = j.value("max_in_flight", 4);
  p.model_id = j.value("model_id", std::string{});
  p.backoff_ms = j.value("backoff_ms", 250);
  p.rate_per_sec = j.value("rate_per_sec", 0.0);
  p.languages = j.value("languages", std::vector<std::string>{});
  if (j.contains("auth_token")) {
    throw ConfigError("service '" + p.id + "': tokens are read from environment variables only (use auth_token_env)");
  }
  p.validate();
}

inline void to_json(json& j, const ServiceProfile& p) {
  j = json{{"id", p.id},
           {"kind", to_string(p.kind)},
           {"base_url", p.base_url},
           {"auth_token_env", p.auth_token_env},
           {"timeout_ms", p.timeout_ms},
           {"max_retries", p.max_retries},
           {"max_in_flight", p.max_in_flight},
           {"model_id", p.model_id},
           {"backoff_ms", p.backoff_ms},
           {"rate_per_sec", p.rate_per_sec},
           {"languages", p.languages}};
}

}  // namespace detox
