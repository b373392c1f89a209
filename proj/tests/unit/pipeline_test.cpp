#include <gtest/gtest.h>

#include "detox/pipeline/compose.hpp"
#include "detox/pipeline/fewshot.hpp"
#include "detox/pipeline/generate.hpp"
#include "detox/testing/stub_backend.hpp"
#include "support.hpp"

namespace detox::pipeline {
namespace {

using test::profile;

FewShotPair pair(const std::string& name, double score) { return {LangTag("de"), name, name + "!", score}; }

// ---- few-shot mining -------------------------------------------------------

TEST(MineFewShot, TopKByScore) {
  const auto top = mine_fewshot({pair("a", 0.9), pair("b", 0.5), pair("c", 0.7)}, 2);
  ASSERT_EQ(top.size(), 2u);
  EXPECT_EQ(top[0].toxic_text, "a");
  EXPECT_EQ(top[1].toxic_text, "c");
}

TEST(MineFewShot, EdgeCases) {
  EXPECT_TRUE(mine_fewshot({pair("a", 0.9)}, 0).empty());
  EXPECT_EQ(mine_fewshot({pair("a", 0.9), pair("b", 0.1)}, 10).size(), 2u);
  EXPECT_THROW(mine_fewshot({pair("a", 0.9)}, -1), DomainError);
  const auto ties = mine_fewshot({pair("x", 0.5), pair("y", 0.5), pair("z", 0.5)}, 2);
  EXPECT_EQ(ties[0].toxic_text, "x");
  EXPECT_EQ(ties[1].toxic_text, "y");
}

TEST(MineFewShot, ScorePoolWithStubServices) {
  testing::StubTransport stub;
  ToxicityClient tox(stub, profile(ServiceKind::toxicity));
  EmbeddingClient emb(stub, profile(ServiceKind::embedding));
  const std::vector<ParallelExample> pool{{"Du Idiot, geh weg", "Du, geh bitte weg"},
                                          {"Du Idiot, geh weg", "Du Idiot, geh weg"}};
  const auto scored = score_pool(pool, LangTag("de"), tox, emb);
  ASSERT_EQ(scored.size(), 2u);
  // identical pair: sim 1 gives score 1 regardless of toxicity
  EXPECT_DOUBLE_EQ(scored[1].score, 1.0);
  EXPECT_GT(scored[0].score, 0.0);
  EXPECT_LT(scored[0].score, 1.0);
}

TEST(MineFewShot, BundledPoolsLoad) {
  for (const auto* lang : {"de", "es", "fr", "ru"}) {
    const auto pool = load_pool(std::filesystem::path(DETOX_DATA_DIR) /
                                (std::string("fewshots.") + lang + ".jsonl"));
    EXPECT_GE(pool.size(), 9u) << lang;
  }
}

// ---- prompts ---------------------------------------------------------------

TEST(Prompt, ZeroShotHasNoExampleBlock) {
  const PromptTemplate tmpl;
  const auto p = render_prompt(tmpl, LangTag("de"), {}, "Du Idiot");
  EXPECT_EQ(p.find("Here are few examples"), std::string::npos);
  EXPECT_NE(p.find("Answer only in German.\nToxic text: Du Idiot. Neutral text:"), std::string::npos);
  EXPECT_EQ(p.find('{'), std::string::npos);
}

TEST(Prompt, FewShotBlockInOrder) {
  const PromptTemplate tmpl;
  const std::vector<FewShotPair> shots{{LangTag("fr"), "t1", "n1", 0.9}, {LangTag("fr"), "t2", "n2", 0.8}};
  const auto p = render_prompt(tmpl, LangTag("fr"), shots, "x");
  EXPECT_NE(p.find("Answer only in French. Here are few examples:\nToxic text: t1. Neutral text: n1\n"
                   "Toxic text: t2. Neutral text: n2\nToxic text: x. Neutral text:"),
            std::string::npos)
      << p;
}

TEST(Prompt, TemplateErrors) {
  EXPECT_THROW(PromptTemplate("Write {lnguage} {few_shots} {toxic_text}"), TemplateError);
  EXPECT_THROW(PromptTemplate("{language} {toxic_text}"), TemplateError);
  EXPECT_THROW(PromptTemplate("{language} {few_shots} {toxic_text"), TemplateError);
  EXPECT_THROW(PromptTemplate(std::string(kDefaultPromptBody), "{toxic} only"), TemplateError);
  EXPECT_NO_THROW(PromptTemplate("{toxic_text} in {language}{few_shots}"));
}

// ---- refusal and filtering -------------------------------------------------

TEST(Refusal, Patterns) {
  EXPECT_TRUE(is_refusal("I'm sorry, but I cannot help with that."));
  EXPECT_TRUE(is_refusal("Je ne peux pas reformuler ce texte."));
  EXPECT_TRUE(is_refusal("Я не могу это сделать"));
  EXPECT_TRUE(is_refusal("   "));
  EXPECT_FALSE(is_refusal("Du bist anderer Meinung."));
  EXPECT_FALSE(is_refusal("No estoy de acuerdo contigo."));
}

TEST(Refusal, ClassifierFirstWithPatternFallback) {
  FunctionTransport says_yes([](const ServiceProfile&, const json&) { return std::string(R"({"refusal":true})"); });
  RefusalClient yes(says_yes, profile(ServiceKind::refusal));
  EXPECT_TRUE(is_refusal("perfectly fine", &yes));
  FunctionTransport broken([](const ServiceProfile&, const json&) -> std::string { throw ServiceError("down"); });
  RefusalClient down(broken, profile(ServiceKind::refusal));
  EXPECT_FALSE(is_refusal("perfectly fine", &down));
  EXPECT_TRUE(is_refusal("I cannot do that", &down));
}

DetoxCandidate candidate(const std::string& text, double p_toxic, double sim, const std::string& model = "m") {
  DetoxCandidate c;
  c.source_id = "s";
  c.model_id = model;
  c.text = text;
  c.p_toxic = p_toxic;
  c.sim = sim;
  return c;
}

TEST(Filter, DetoxifiabilityThreshold) {
  const auto ok = filter_candidate(candidate("fine text", 0.2, 0.9), 0.8);
  EXPECT_EQ(ok.reject_reason, RejectReason::none);
  EXPECT_NEAR(ok.detoxifiability, 0.75, 1e-12);
  EXPECT_NEAR(ok.rank_score, 0.8 * 0.9, 1e-12);

  const auto copy = filter_candidate(candidate("same text", 0.6, 1.0), 0.6);
  EXPECT_EQ(copy.reject_reason, RejectReason::non_detoxifiable);
  EXPECT_DOUBLE_EQ(copy.detoxifiability, 0.0);

  const auto zero = filter_candidate(candidate("x", 0.0, 0.5), 0.0);
  EXPECT_EQ(zero.reject_reason, RejectReason::non_detoxifiable);
}

TEST(Filter, EmptyThenRefusalThenDetoxifiability) {
  EXPECT_EQ(filter_candidate(candidate("  ", 0.9, 0.1), 0.8).reject_reason, RejectReason::empty);
  const auto r = filter_candidate(candidate("I cannot rewrite this.", 0.9, 0.1), 0.8);
  EXPECT_EQ(r.reject_reason, RejectReason::refusal);
  EXPECT_TRUE(r.refusal);
  auto failed = candidate("", 0.0, 0.0);
  failed.reject_reason = RejectReason::backend_failure;
  EXPECT_EQ(filter_candidate(failed, 0.8).reject_reason, RejectReason::backend_failure);
}

// ---- generation ------------------------------------------------------------

class Generation : public ::testing::Test {
 protected:
  Generation()
      : transport_([this](const ServiceProfile& p, const json& payload) {
          if (p.kind == ServiceKind::chat && p.model_id == "broken") throw ServiceError("backend down");
          return testing::StubBackend::handle(p.kind, payload).dump();
        }),
        tox_(transport_, profile(ServiceKind::toxicity)),
        emb_(transport_, profile(ServiceKind::embedding)),
        ctx_{transport_, tox_, emb_, RefusalDetector{}, PromptTemplate{}, GenerationParams{}} {}

  ToxicSample sample() const {
    ToxicSample s;
    s.id = "de:1";
    s.lang = LangTag("de");
    s.text = "Du bist ein Idiot und ein Trottel heute";
    s.p_toxic = testing::StubBackend::toxicity(s.text, "de").p_toxic;
    return s;
  }

  FunctionTransport transport_;
  ToxicityClient tox_;
  EmbeddingClient emb_;
  GenerationContext ctx_;
};

TEST_F(Generation, OneCandidatePerBackendInOrder) {
  const std::vector<ServiceProfile> backends{profile(ServiceKind::chat, "stub-delete"),
                                             profile(ServiceKind::chat, "stub-replace"),
                                             profile(ServiceKind::chat, "stub-echo")};
  const auto cands = generate_candidates(sample(), backends, {}, ctx_);
  ASSERT_EQ(cands.size(), 3u);
  EXPECT_EQ(cands[0].model_id, "stub-delete");
  EXPECT_EQ(cands[0].text, "Du bist ein und ein heute");
  EXPECT_EQ(cands[0].reject_reason, RejectReason::none);
  EXPECT_EQ(cands[1].text, "Du bist ein Mensch und ein Mensch heute");
  EXPECT_EQ(cands[2].reject_reason, RejectReason::non_detoxifiable);  // verbatim copy
  for (const auto& c : cands) EXPECT_EQ(c.source_id, "de:1");
}

TEST_F(Generation, FailingBackendIsIsolated) {
  const std::vector<ServiceProfile> backends{profile(ServiceKind::chat, "broken"),
                                             profile(ServiceKind::chat, "stub-delete")};
  const auto cands = generate_candidates(sample(), backends, {}, ctx_);
  ASSERT_EQ(cands.size(), 2u);
  EXPECT_EQ(cands[0].reject_reason, RejectReason::backend_failure);
  EXPECT_NE(cands[0].error.find("backend down"), std::string::npos);
  EXPECT_EQ(cands[1].reject_reason, RejectReason::none);
}

TEST_F(Generation, InputValidation) {
  EXPECT_THROW(generate_candidates(sample(), {}, {}, ctx_), ConfigError);
  auto unscored = sample();
  unscored.p_toxic.reset();
  const std::vector<ServiceProfile> backends{profile(ServiceKind::chat, "stub-delete")};
  EXPECT_THROW(generate_candidates(unscored, backends, {}, ctx_), PipelineError);
}

TEST_F(Generation, GenerateAllIsIndependentOfJobs) {
  const std::vector<ServiceProfile> backends{profile(ServiceKind::chat, "stub-delete"),
                                             profile(ServiceKind::chat, "stub-refuse")};
  std::vector<ToxicSample> samples;
  for (int i = 0; i < 12; ++i) {
    auto s = sample();
    s.id = "de:" + std::to_string(i);
    s.text += " Nummer " + std::to_string(i);
    s.p_toxic = testing::StubBackend::toxicity(s.text, "de").p_toxic;
    samples.push_back(s);
  }
  const auto a = json(generate_all(samples, backends, {}, ctx_, 1)).dump();
  const auto b = json(generate_all(samples, backends, {}, ctx_, 8)).dump();
  EXPECT_EQ(a, b);
}

// ---- selection and composition ---------------------------------------------

TEST(Select, HighestRankScore) {
  auto a = candidate("a", 0.1, 0.0, "m1");
  a.rank_score = 0.70;
  auto b = candidate("b", 0.1, 0.0, "m2");
  b.rank_score = 0.72;
  const std::vector<DetoxCandidate> cands{a, b};
  EXPECT_EQ(select_best(cands)->model_id, "m2");
  EXPECT_EQ(select_best(std::span(cands).first(1))->model_id, "m1");
}

TEST(Select, AllRejectedOrEmpty) {
  auto a = candidate("a", 0.1, 0.9);
  a.reject_reason = RejectReason::refusal;
  a.rank_score = 0.9;
  EXPECT_FALSE(select_best(std::vector<DetoxCandidate>{a}).has_value());
  EXPECT_FALSE(select_best(std::vector<DetoxCandidate>{}).has_value());
}

TEST(Select, TiesFollowBackendPriorityThenText) {
  auto a = candidate("zz", 0.1, 0.5, "m2");
  auto b = candidate("aa", 0.1, 0.5, "m1");
  a.rank_score = b.rank_score = 0.5;
  const std::vector<DetoxCandidate> cands{a, b};
  const std::vector<std::string> priority{"m2", "m1"};
  EXPECT_EQ(select_best(cands, priority)->model_id, "m2");
  EXPECT_EQ(select_best(cands)->text, "aa");
}

Selection selection(int i, double rank, const std::string& model) {
  Selection s;
  s.source.id = "de:" + std::to_string(i);
  s.source.lang = LangTag("de");
  s.source.text = "toxic " + std::to_string(i);
  s.source.p_toxic = 0.8;
  s.candidate = candidate("neutral " + std::to_string(i), 0.1, rank / 0.9, model);
  s.candidate.rank_score = rank;
  return s;
}

TEST(Compose, KeepsTopTargetByRank) {
  std::vector<Selection> sel;
  const double ranks[] = {0.3, 0.9, 0.5, 0.7, 0.1};
  for (int i = 0; i < 5; ++i) sel.push_back(selection(i, ranks[i], i % 2 ? "m1" : "m2"));
  const auto r = compose_dataset(sel, 3);
  ASSERT_EQ(r.pairs.size(), 3u);
  EXPECT_EQ(r.pairs[0].source_id, "de:1");
  EXPECT_EQ(r.pairs[1].source_id, "de:3");
  EXPECT_EQ(r.pairs[2].source_id, "de:2");
  EXPECT_FALSE(r.short_of_target);
  EXPECT_EQ(r.stats.accepted_total(LangTag("de")), 3u);
  EXPECT_NEAR(r.pairs[0].sta_toxic, 0.2, 1e-12);
  EXPECT_NEAR(r.pairs[0].sta_neutral, 0.9, 1e-12);
}

TEST(Compose, ShortOfTarget) {
  std::vector<Selection> sel{selection(0, 0.5, "m1"), selection(1, 0.4, "m2")};
  const auto r = compose_dataset(sel, 2);
  EXPECT_EQ(r.pairs.size(), 2u);
  EXPECT_FALSE(r.short_of_target);
  const auto s = compose_dataset(sel, 10);
  EXPECT_TRUE(s.short_of_target);
  EXPECT_EQ(s.stats.counts.at("m1").at(LangTag("de")).accepted + s.stats.counts.at("m2").at(LangTag("de")).accepted,
            s.pairs.size());
}

TEST(Compose, LanguageTallies) {
  SourceCandidates rec;
  rec.source = selection(0, 0.0, "x").source;
  auto good = candidate("good", 0.1, 0.8, "m1");
  good.rank_score = 0.72;
  auto refused = candidate("no", 0.1, 0.8, "m2");
  refused.reject_reason = RejectReason::refusal;
  rec.candidates = {good, refused};
  SourceCandidates none;
  none.source = selection(1, 0.0, "x").source;
  auto failed = candidate("", 0, 0, "m1");
  failed.reject_reason = RejectReason::backend_failure;
  none.candidates = {failed};
  const std::vector<SourceCandidates> records{rec, none};
  const auto r = compose_language(records, 10, {});
  ASSERT_EQ(r.pairs.size(), 1u);
  const auto& m1 = r.stats.counts.at("m1").at(LangTag("de"));
  const auto& m2 = r.stats.counts.at("m2").at(LangTag("de"));
  EXPECT_EQ(m1.accepted, 1u);
  EXPECT_EQ(m1.backend_failure, 1u);
  EXPECT_EQ(m2.refusal, 1u);
  EXPECT_EQ(m2.accepted, 0u);
}

// ---- emit ------------------------------------------------------------------

TEST(Emit, TsvRowsWithoutHeader) {
  std::vector<Selection> sel{selection(0, 0.5, "m1"), selection(1, 0.4, "m2")};
  const auto pairs = compose_dataset(sel, 2).pairs;
  EXPECT_EQ(format_pairs(pairs, EmitFormat::tsv), "toxic 0\tneutral 0\tde\tm1\ntoxic 1\tneutral 1\tde\tm2\n");
  EXPECT_EQ(format_pairs({}, EmitFormat::tsv), "");
  const auto dir = test::temp_dir("emit");
  emit(pairs, dir / "out.jsonl", EmitFormat::jsonl);
  const auto rows = io::read_jsonl(dir / "out.jsonl");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].at("neutral_text"), "neutral 1");
}

TEST(Emit, EscapesTabsAndNewlines) {
  auto s = selection(0, 0.5, "m1");
  s.source.text = "a\tb\nc\\d";
  const auto pairs = compose_dataset({s}, 1).pairs;
  EXPECT_EQ(format_pairs(pairs, EmitFormat::tsv), "a\\tb\\nc\\\\d\tneutral 0\tde\tm1\n");
}

}  // namespace
}  // namespace detox::pipeline
