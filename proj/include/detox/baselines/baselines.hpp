#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "detox/core/errors.hpp"
#include "detox/core/types.hpp"
#include "detox/core/unicode.hpp"
#include "detox/pipeline/filter.hpp"
#include "detox/pipeline/prompt.hpp"
#include "detox/services/clients.hpp"

namespace detox::baselines {

/// Lowercase toxic word forms for one language.
class Lexicon {
 public:
  Lexicon() = default;

  Lexicon(LangTag lang, const std::vector<std::string>& entries) : lang_(std::move(lang)) {
    for (const auto& e : entries) add(e);
  }

  /// One entry per line, UTF-8. Blank lines and lines starting with '#' are skipped.
  static Lexicon load(const std::filesystem::path& path, LangTag lang) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open lexicon " + path.string());
    Lexicon lex;
    lex.lang_ = std::move(lang);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto trimmed = unicode::trim(line);
      if (trimmed.empty() || trimmed.front() == '#') continue;
      lex.add(trimmed);
    }
    return lex;
  }

  /// A token matches if its lowercase form, stripped of leading and trailing
  /// punctuation, is an entry.
  bool matches(std::string_view token) const {
    if (entries_.empty()) return false;
    const auto lowered = unicode::to_lower(unicode::decode(token));
    const auto core = unicode::strip_punct(lowered);
    if (core.empty()) return false;
    return entries_.count(unicode::encode(core)) > 0;
  }

  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }
  const LangTag& lang() const noexcept { return lang_; }

 private:
  void add(std::string_view entry) {
    const auto chars = unicode::decode(entry);
    for (char32_t c : chars) {
      if (unicode::is_space(c)) throw ConfigError("lexicon entry '" + std::string(entry) + "' contains whitespace");
    }
    entries_.insert(unicode::encode(unicode::to_lower(chars)));
  }

  LangTag lang_;
  std::set<std::string> entries_;
};

/// Whitespace-separated tokens, verbatim.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::u32string current;
  for (char32_t c : unicode::decode(text)) {
    if (unicode::is_space(c)) {
      if (!current.empty()) tokens.push_back(unicode::encode(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) tokens.push_back(unicode::encode(current));
  return tokens;
}

inline std::size_t count_matches(std::string_view text, const Lexicon& lexicon) {
  std::size_t n = 0;
  for (const auto& t : tokenize(text)) n += lexicon.matches(t) ? 1 : 0;
  return n;
}

/// Returns the input unchanged.
inline std::string duplicate(std::string_view text) { return std::string(text); }

/// Removes every token that matches the lexicon (with any punctuation attached
/// to it) and rejoins the rest with single spaces. An empty result means the
/// whole text was toxic.
inline std::string delete_toxic(std::string_view text, const Lexicon& lexicon) {
  if (lexicon.empty()) return std::string(text);
  std::string out;
  for (const auto& t : tokenize(text)) {
    if (lexicon.matches(t)) continue;
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

class BaselineError : public Error {
 public:
  using Error::Error;
};

/// Translate to English, detoxify with an English chat model, translate back.
/// Any stage failure, or a refusal from the detox model, raises BaselineError
/// for this sample.
inline std::string backtranslate_detox(const std::string& text, const LangTag& lang,
                                       const TranslationClient& translator, const ChatClient& en_detox,
                                       const pipeline::RefusalDetector& refusal = {},
                                       const GenerationParams& params = {}) {
  if (unicode::trim(text).empty()) throw BaselineError("backtranslation: empty input text");
  std::string english, detoxified;
  try {
    english = translator.translate_one(text, lang, kEnglish);
  } catch (const CassetteMiss&) {
    throw;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw BaselineError(std::string("backtranslation stage 1 (to English): ") + e.what());
  }
  static const pipeline::PromptTemplate prompt;
  try {
    detoxified = en_detox.generate(prompt.render(kEnglish, {}, english), params);
  } catch (const CassetteMiss&) {
    throw;
  } catch (const Error& e) {
    throw BaselineError(std::string("backtranslation stage 2 (detox): ") + e.what());
  }
  if (refusal(detoxified)) throw BaselineError("backtranslation stage 2 (detox): model refused");
  try {
    return translator.translate_one(detoxified, kEnglish, lang);
  } catch (const CassetteMiss&) {
    throw;
  } catch (const Error& e) {
    throw BaselineError(std::string("backtranslation stage 3 (from English): ") + e.what());
  }
}

}  // namespace detox::baselines
