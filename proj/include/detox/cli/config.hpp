#pragma once

// Run configuration: a single JSON document with a `schema_version`.
// Relative paths are resolved against the directory of the config file.
// Secrets never live here; profiles name the environment variable instead.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "detox/core/chrf.hpp"
#include "detox/core/metrics.hpp"
#include "detox/ingest/clean.hpp"
#include "detox/ingest/source.hpp"
#include "detox/pipeline/compose.hpp"
#include "detox/pipeline/fewshot.hpp"
#include "detox/services/cassette.hpp"
#include "detox/services/profile.hpp"
#include "detox/util/io.hpp"

#ifndef DETOX_DATA_DIR
#define DETOX_DATA_DIR "data"
#endif

namespace detox::cli {

namespace fs = std::filesystem;

inline constexpr int kSchemaVersion = 1;

/// Minimum P(toxic) a source text needs, per language.
inline ingest::Thresholds default_thresholds() {
  return {{LangTag("ru"), 0.5}, {LangTag("de"), 0.3}, {LangTag("es"), 0.3}, {LangTag("fr"), 0.25}};
}

struct Services {
  std::optional<ServiceProfile> toxicity;
  std::optional<ServiceProfile> embedding;
  std::optional<ServiceProfile> translation;
  std::optional<ServiceProfile> judge;
  std::optional<ServiceProfile> refusal;
  std::optional<ServiceProfile> en_detox;  // English detoxifier for the backtranslation baseline
};

struct Config {
  int schema_version = kSchemaVersion;
  std::vector<LangTag> languages;
  std::vector<ingest::SourceSpec> sources;
  ingest::Thresholds thresholds = default_thresholds();
  double detox_threshold = kDetoxifiabilityThreshold;
  std::size_t fewshot_k = pipeline::kDefaultFewShotK;
  std::size_t min_words = ingest::kMinWords;
  std::size_t max_words = ingest::kMaxWords;
  std::size_t per_lang_target = pipeline::kDefaultPerLanguageTarget;
  std::vector<ServiceProfile> backends;
  Services services;
  ReplayMode replay_mode = ReplayMode::live;
  std::optional<fs::path> cassette;
  std::uint64_t seed = 0;
  GenerationParams generation;
  std::map<LangTag, fs::path> lexicons;
  std::map<LangTag, fs::path> fewshot_pools;
  fs::path data_dir = DETOX_DATA_DIR;
  std::optional<fs::path> prompt_template;
  std::string shot_format = std::string(pipeline::kDefaultShotFormat);
  std::optional<fs::path> judge_rubric;
  ChrfParams chrf;

  std::vector<std::string> backend_ids() const {
    std::vector<std::string> ids;
    for (const auto& b : backends) ids.push_back(b.id);
    return ids;
  }

  fs::path fewshot_pool(const LangTag& lang) const {
    if (auto it = fewshot_pools.find(lang); it != fewshot_pools.end()) return it->second;
    return data_dir / ("fewshots." + lang.code() + ".jsonl");
  }
};

namespace detail {

inline fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline void validate(const Config& c) {
  if (c.schema_version != kSchemaVersion) {
    throw ConfigError("unsupported schema_version " + std::to_string(c.schema_version));
  }
  if (c.languages.empty()) throw ConfigError("config lists no languages");
  for (const auto& l : c.languages) {
    if (!c.thresholds.count(l)) throw ConfigError("unknown language '" + l.code() + "' (no toxicity threshold)");
  }
  for (const auto& [lang, t] : c.thresholds) {
    if (!(t > 0.0 && t < 1.0)) throw ConfigError("threshold for '" + lang.code() + "' must lie in (0,1)");
  }
  if (!(c.detox_threshold > 0.0 && c.detox_threshold < 1.0)) throw ConfigError("detox_threshold must lie in (0,1)");
  if (c.min_words > c.max_words) throw ConfigError("min_words exceeds max_words");
  if (c.per_lang_target == 0) throw ConfigError("per_lang_target must be positive");
  std::set<std::string> ids;
  for (const auto& b : c.backends) {
    if (b.kind != ServiceKind::chat) throw ConfigError("backend '" + b.id + "' must have kind chat");
    if (!ids.insert(b.id).second) throw ConfigError("duplicate backend id '" + b.id + "'");
  }
  for (const auto& s : c.sources) {
    if (std::find(c.languages.begin(), c.languages.end(), s.lang) == c.languages.end()) {
      throw ConfigError("source '" + s.name + "' has language '" + s.lang.code() + "' not listed in languages");
    }
  }
  if (c.chrf.max_order < 1 || !(c.chrf.beta > 0.0)) throw ConfigError("invalid chrf parameters");
  if (c.generation.max_tokens < 1) throw ConfigError("generation.max_tokens must be positive");
}

inline Config parse_config(const json& j, const fs::path& base_dir) {
  static const std::set<std::string> known = {
      "schema_version", "languages",   "sources",       "thresholds",     "detox_threshold", "fewshot_k",
      "min_words",      "max_words",   "per_lang_target", "backends",     "services",        "replay_mode",
      "cassette",       "seed",        "generation",    "lexicons",       "fewshot_pools",   "data_dir",
      "prompt",         "judge_rubric", "chrf"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }

  Config c;
  try {
    c.schema_version = j.at("schema_version").get<int>();
  } catch (const json::exception&) {
    throw ConfigError("config needs an integer schema_version");
  }

  try {
    for (const auto& l : j.at("languages")) c.languages.emplace_back(l.get<std::string>());
    if (auto it = j.find("thresholds"); it != j.end()) {
      for (const auto& [code, value] : it->items()) c.thresholds[LangTag(code)] = value.get<double>();
    }
    c.detox_threshold = detail::get_or(j, "detox_threshold", c.detox_threshold);
    c.fewshot_k = detail::get_or(j, "fewshot_k", c.fewshot_k);
    c.min_words = detail::get_or(j, "min_words", c.min_words);
    c.max_words = detail::get_or(j, "max_words", c.max_words);
    c.per_lang_target = detail::get_or(j, "per_lang_target", c.per_lang_target);
    c.seed = detail::get_or(j, "seed", c.seed);
    c.replay_mode = parse_replay_mode(detail::get_or(j, "replay_mode", std::string("live")));
    if (auto it = j.find("cassette"); it != j.end() && !it->is_null()) {
      c.cassette = detail::resolve(base_dir, it->get<std::string>());
    }
    if (auto it = j.find("data_dir"); it != j.end()) c.data_dir = detail::resolve(base_dir, it->get<std::string>());

    for (const auto& s : j.value("sources", json::array())) {
      auto spec = s.get<ingest::SourceSpec>();
      spec.path = detail::resolve(base_dir, spec.path.string());
      c.sources.push_back(std::move(spec));
    }
    for (const auto& b : j.value("backends", json::array())) c.backends.push_back(b.get<ServiceProfile>());

    if (auto it = j.find("services"); it != j.end()) {
      static const std::set<std::string> roles = {"toxicity", "embedding", "translation", "judge", "refusal", "en_detox"};
      for (const auto& [role, value] : it->items()) {
        if (!roles.count(role)) throw ConfigError("unknown service role '" + role + "'");
        auto profile = value.get<ServiceProfile>();
        std::optional<ServiceProfile>* slot = nullptr;
        ServiceKind expected = ServiceKind::chat;
        if (role == "toxicity") slot = &c.services.toxicity, expected = ServiceKind::toxicity;
        if (role == "embedding") slot = &c.services.embedding, expected = ServiceKind::embedding;
        if (role == "translation") slot = &c.services.translation, expected = ServiceKind::translation;
        if (role == "judge") slot = &c.services.judge, expected = ServiceKind::judge;
        if (role == "refusal") slot = &c.services.refusal, expected = ServiceKind::refusal;
        if (role == "en_detox") slot = &c.services.en_detox, expected = ServiceKind::chat;
        if (profile.kind != expected) {
          throw ConfigError("service '" + role + "' must have kind " + std::string(to_string(expected)));
        }
        *slot = std::move(profile);
      }
    }

    if (auto it = j.find("generation"); it != j.end()) {
      c.generation.temperature = it->value("temperature", c.generation.temperature);
      c.generation.max_tokens = it->value("max_tokens", c.generation.max_tokens);
    }
    c.generation.seed = c.seed;

    for (const char* key : {"lexicons", "fewshot_pools"}) {
      if (auto it = j.find(key); it != j.end()) {
        auto& target = std::string_view(key) == "lexicons" ? c.lexicons : c.fewshot_pools;
        for (const auto& [code, path] : it->items()) {
          target[LangTag(code)] = detail::resolve(base_dir, path.get<std::string>());
        }
      }
    }
    if (auto it = j.find("prompt"); it != j.end()) {
      if (auto t = it->find("template"); t != it->end()) c.prompt_template = detail::resolve(base_dir, t->get<std::string>());
      c.shot_format = it->value("shot_format", c.shot_format);
    }
    if (auto it = j.find("judge_rubric"); it != j.end()) c.judge_rubric = detail::resolve(base_dir, it->get<std::string>());
    if (auto it = j.find("chrf"); it != j.end()) {
      c.chrf.max_order = it->value("max_order", c.chrf.max_order);
      c.chrf.beta = it->value("beta", c.chrf.beta);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  } catch (const ProtocolError& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }

  validate(c);
  return c;
}

inline Config load_config(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j, fs::absolute(path).parent_path());
}

}  // namespace detox::cli
