#pragma once

// Side-by-side comparison with a judge model. Each item is judged twice with
// the two answers in swapped positions and the per-run scores are averaged,
// so any fixed positional preference of the judge cancels out.

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include <spdlog/spdlog.h>

#include "detox/pipeline/prompt.hpp"
#include "detox/services/clients.hpp"
#include "detox/util/parallel.hpp"

namespace detox::eval {

inline constexpr std::string_view kDefaultRubric =
    "You are judging two rewrites of the same toxic text. A good rewrite is non-toxic, keeps the "
    "meaning of the original, and reads fluently.\n\n"
    "Original text: {input}\n\n"
    "Answer A: {answer_a}\n\n"
    "Answer B: {answer_b}\n\n"
    "Which answer is better? Reply with exactly one of: A, B, TIE.";

struct SbsItem {
  std::string id;
  std::string input;
  std::string output_a;
  std::string output_b;
};

inline void from_json(const json& j, SbsItem& s) {
  s.id = j.value("id", std::string{});
  s.input = j.at("input").get<std::string>();
  s.output_a = j.at("output_a").get<std::string>();
  s.output_b = j.at("output_b").get<std::string>();
}

enum class Preference { first, second, tie, invalid };

/// Strict parse: after trimming, case-insensitive "A", "B" or "TIE".
inline Preference parse_preference(std::string_view reply) {
  auto t = unicode::trim(reply);
  for (auto& c : t) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (t == "A") return Preference::first;
  if (t == "B") return Preference::second;
  if (t == "TIE") return Preference::tie;
  return Preference::invalid;
}

struct SbsRun {
  bool a_first = true;  // system A shown in position A
  std::string raw;
  Preference preference = Preference::invalid;
  double score_a = 0.5;
  double score_b = 0.5;
};

struct SbsVerdict {
  std::string item_id;
  double score_a = 0.5;
  double score_b = 0.5;
  std::array<SbsRun, 2> runs;
};

inline void to_json(json& j, const SbsRun& r) {
  static constexpr std::array<const char*, 4> names = {"A", "B", "TIE", "invalid"};
  j = json{{"order", r.a_first ? "a_b" : "b_a"},
           {"raw", r.raw},
           {"preference", names[static_cast<int>(r.preference)]},
           {"score_a", r.score_a},
           {"score_b", r.score_b}};
}

inline void to_json(json& j, const SbsVerdict& v) {
  j = json{{"item_id", v.item_id}, {"score_a", v.score_a}, {"score_b", v.score_b}, {"runs", v.runs}};
}

/// Maps a positional preference back to the two systems.
inline SbsRun score_run(bool a_first, std::string raw) {
  SbsRun run;
  run.a_first = a_first;
  run.preference = parse_preference(raw);
  run.raw = std::move(raw);
  if (run.preference == Preference::first || run.preference == Preference::second) {
    const bool a_wins = (run.preference == Preference::first) == a_first;
    run.score_a = a_wins ? 1.0 : 0.0;
    run.score_b = 1.0 - run.score_a;
  }
  return run;
}

class SbsJudge {
 public:
  SbsJudge(const ChatClient& judge, std::string rubric = std::string(kDefaultRubric), GenerationParams params = {0.0, 8, std::nullopt})
      : judge_(judge), rubric_(pipeline::detail::parse_template(rubric, {"input", "answer_a", "answer_b"}, "judge rubric")),
        params_(params) {}

  std::string render(std::string_view input, std::string_view first, std::string_view second) const {
    std::string out;
    for (const auto& p : rubric_) {
      if (!p.placeholder) out += p.text;
      else if (p.text == "input") out += input;
      else if (p.text == "answer_a") out += first;
      else out += second;
    }
    return out;
  }

  SbsVerdict compare(const SbsItem& item) const {
    SbsVerdict v;
    v.item_id = item.id;
    for (int k = 0; k < 2; ++k) {
      const bool a_first = k == 0;
      const auto prompt = a_first ? render(item.input, item.output_a, item.output_b)
                                  : render(item.input, item.output_b, item.output_a);
      v.runs[static_cast<std::size_t>(k)] = score_run(a_first, judge_.generate(prompt, params_));
      if (v.runs[static_cast<std::size_t>(k)].preference == Preference::invalid) {
        spdlog::warn("sbs item '{}': unparseable judge reply in run {}, scored as tie", item.id, k + 1);
      }
    }
    v.score_a = (v.runs[0].score_a + v.runs[1].score_a) / 2.0;
    v.score_b = (v.runs[0].score_b + v.runs[1].score_b) / 2.0;
    return v;
  }

 private:
  const ChatClient& judge_;
  std::vector<pipeline::detail::Piece> rubric_;
  GenerationParams params_;
};

inline std::vector<SbsVerdict> sbs_compare(const std::vector<SbsItem>& items, const ChatClient& judge,
                                           const std::string& rubric = std::string(kDefaultRubric),
                                           std::size_t jobs = 1) {
  SbsJudge j(judge, rubric);
  std::vector<SbsVerdict> out(items.size());
  parallel_for(items.size(), jobs, [&](std::size_t i) { out[i] = j.compare(items[i]); });
  return out;
}

struct SbsSummary {
  std::size_t n = 0;
  double mean_score_a = 0.0;
  double mean_score_b = 0.0;
  double win_rate_a = 0.0;
  double tie_rate = 0.0;
  double win_rate_b = 0.0;
};

/// Both aggregations: mean verdict scores and item-level win/tie/loss rates.
inline SbsSummary summarize(std::span<const SbsVerdict> verdicts) {
  SbsSummary s;
  s.n = verdicts.size();
  if (verdicts.empty()) return s;
  std::size_t wins_a = 0, ties = 0, wins_b = 0;
  for (const auto& v : verdicts) {
    s.mean_score_a += v.score_a;
    s.mean_score_b += v.score_b;
    if (v.score_a > v.score_b) ++wins_a;
    else if (v.score_b > v.score_a) ++wins_b;
    else ++ties;
  }
  const double n = static_cast<double>(verdicts.size());
  s.mean_score_a /= n;
  s.mean_score_b /= n;
  s.win_rate_a = static_cast<double>(wins_a) / n;
  s.tie_rate = static_cast<double>(ties) / n;
  s.win_rate_b = static_cast<double>(wins_b) / n;
  return s;
}

inline void to_json(json& j, const SbsSummary& s) {
  j = json{{"n", s.n},
           {"mean_score_a", s.mean_score_a},
           {"mean_score_b", s.mean_score_b},
           {"win_rate_a", s.win_rate_a},
           {"tie_rate", s.tie_rate},
           {"win_rate_b", s.win_rate_b}};
}

}  // namespace detox::eval
