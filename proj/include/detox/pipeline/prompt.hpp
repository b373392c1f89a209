#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "detox/core/errors.hpp"
#include "detox/core/types.hpp"

namespace detox::pipeline {

/// Default detoxification prompt. The few-shot block (header line plus one
/// line per demonstration) is spliced in before the final line and vanishes
/// entirely in the zero-shot case.
inline constexpr std::string_view kDefaultPromptBody =
    "Your task is text style transfer. Rewrite the following text into non-toxic language. "
    "You must match the target style and preserve the original meaning as much as possible. "
    "Do not include the input text in the response. Only generate the target text and nothing else. "
    "Make sure the response is completely non-toxic and neutral. Answer only in {language}.{few_shots}\n"
    "Toxic text: {toxic_text}. Neutral text:";

inline constexpr std::string_view kDefaultShotFormat = "Toxic text: {toxic}. Neutral text: {neutral}";

inline constexpr std::string_view kFewShotHeader = " Here are few examples:";

namespace detail {

struct Piece {
  bool placeholder = false;
  std::string text;  // literal text or placeholder name
};

/// Splits a template into literals and {name} placeholders. Every name must
/// be in `allowed` and occur exactly once.
inline std::vector<Piece> parse_template(std::string_view tmpl, std::initializer_list<std::string_view> allowed,
                                         std::string_view what) {
  std::vector<Piece> pieces;
  std::string literal;
  std::vector<std::string> seen;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] != '{') {
      literal += tmpl[i];
      continue;
    }
    const auto close = tmpl.find('}', i);
    if (close == std::string_view::npos) throw TemplateError(std::string(what) + ": unterminated placeholder");
    std::string name(tmpl.substr(i + 1, close - i - 1));
    bool known = false;
    for (auto a : allowed) known = known || a == name;
    if (!known) throw TemplateError(std::string(what) + ": unresolved placeholder {" + name + "}");
    for (const auto& s : seen) {
      if (s == name) throw TemplateError(std::string(what) + ": placeholder {" + name + "} appears twice");
    }
    seen.push_back(name);
    if (!literal.empty()) pieces.push_back({false, std::move(literal)});
    literal.clear();
    pieces.push_back({true, std::move(name)});
    i = close;
  }
  if (!literal.empty()) pieces.push_back({false, std::move(literal)});
  if (seen.size() != allowed.size()) {
    for (auto a : allowed) {
      bool found = false;
      for (const auto& s : seen) found = found || s == a;
      if (!found) throw TemplateError(std::string(what) + ": missing placeholder {" + std::string(a) + "}");
    }
  }
  return pieces;
}

}  // namespace detail

class PromptTemplate {
 public:
  explicit PromptTemplate(std::string body = std::string(kDefaultPromptBody),
                          std::string shot_format = std::string(kDefaultShotFormat))
      : body_(detail::parse_template(body, {"language", "few_shots", "toxic_text"}, "prompt template")),
        shot_(detail::parse_template(shot_format, {"toxic", "neutral"}, "shot format")) {}

  std::string render(const LangTag& lang, std::span<const FewShotPair> shots, std::string_view toxic_text) const {
    std::string block;
    if (!shots.empty()) {
      block += kFewShotHeader;
      for (const auto& shot : shots) {
        block += '\n';
        for (const auto& p : shot_) {
          if (!p.placeholder) block += p.text;
          else block += p.text == "toxic" ? shot.toxic_text : shot.neutral_text;
        }
      }
    }
    std::string out;
    for (const auto& p : body_) {
      if (!p.placeholder) out += p.text;
      else if (p.text == "language") out += lang.display_name();
      else if (p.text == "few_shots") out += block;
      else out += toxic_text;
    }
    return out;
  }

 private:
  std::vector<detail::Piece> body_;
  std::vector<detail::Piece> shot_;
};

inline std::string render_prompt(const PromptTemplate& tmpl, const LangTag& lang, std::span<const FewShotPair> shots,
                                 std::string_view toxic_text) {
  return tmpl.render(lang, shots, toxic_text);
}

}  // namespace detox::pipeline
