#include <gtest/gtest.h>

#include "detox/cli/app.hpp"
#include "support.hpp"

namespace detox::cli {
namespace {

const std::string kConfig = (test::fixtures() / "config.json").string();

int detox(std::vector<std::string> args) {
  args.push_back("--log-level");
  args.push_back("error");
  return run(std::move(args));
}

std::size_t line_count(const fs::path& p) {
  const auto s = io::read_file(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

/// Writes a variant of the fixture config with one key changed.
std::string config_with(const std::string& name, const std::function<void(json&)>& edit) {
  auto j = json::parse(io::read_file(kConfig));
  edit(j);
  const auto dir = test::temp_dir("cli_cfg_" + name);
  // keep relative paths valid by pointing them at the fixture directory
  j["cassette"] = (test::fixtures() / "cassettes" / "pipeline.cassette.jsonl").string();
  j["data_dir"] = DETOX_DATA_DIR;
  for (auto& s : j["sources"]) s["path"] = (test::fixtures() / s["path"].get<std::string>()).string();
  for (auto& [lang, path] : j["lexicons"].items()) path = (test::fixtures() / path.get<std::string>()).string();
  io::write_file(dir / "config.json", j.dump(2));
  return (dir / "config.json").string();
}

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run({"--help"}), kOk);
  EXPECT_EQ(detox({"--config", kConfig, "frobnicate"}), kConfigError);
  EXPECT_EQ(detox({"--config", kConfig}), kConfigError);  // no subcommand
  EXPECT_EQ(detox({"ingest"}), kConfigError);              // no --config
  EXPECT_EQ(detox({"--config", kConfig, "baseline"}), kConfigError);
  EXPECT_EQ(detox({"--config", kConfig, "--jobs", "many", "ingest"}), kConfigError);
}

TEST(Cli, ConfigErrors) {
  const auto out = test::temp_dir("cli_cfg_err").string();
  EXPECT_EQ(detox({"--config", "/nonexistent/config.json", "--out", out, "ingest"}), kConfigError);
  EXPECT_EQ(detox({"--config", config_with("unknown", [](json& j) { j["tresholds"] = json::object(); }), "--out", out,
                   "ingest"}),
            kConfigError);
  EXPECT_EQ(detox({"--config", config_with("dup", [](json& j) { j["backends"].push_back(j["backends"][0]); }), "--out",
                   out, "ingest"}),
            kConfigError);
  EXPECT_EQ(detox({"--config", config_with("thr", [](json& j) { j["thresholds"]["de"] = 1.5; }), "--out", out,
                   "ingest"}),
            kConfigError);
  EXPECT_EQ(detox({"--config", config_with("schema", [](json& j) { j["schema_version"] = 2; }), "--out", out,
                   "ingest"}),
            kConfigError);
  EXPECT_EQ(detox({"--config", config_with("lang", [](json& j) { j["languages"] = {"de", "it"}; }), "--out", out,
                   "ingest"}),
            kConfigError);
  EXPECT_EQ(detox({"--config", kConfig, "--out", out, "--lang", "it", "ingest"}), kConfigError);
  EXPECT_EQ(detox({"--config", kConfig, "--out", out, "--mode", "offline", "ingest"}), kConfigError);
  EXPECT_EQ(detox({"--config", kConfig, "--out", out, "--log-level", "loud", "ingest"}), kConfigError);
}

TEST(Cli, ConfigParsingDetails) {
  const auto cfg = load_config(kConfig);
  EXPECT_EQ(cfg.languages.size(), 4u);
  EXPECT_EQ(cfg.backend_ids(), (std::vector<std::string>{"stub-delete", "stub-replace", "stub-echo", "stub-refuse"}));
  EXPECT_EQ(cfg.fewshot_k, 5u);
  EXPECT_EQ(cfg.generation.seed, 7u);
  EXPECT_EQ(cfg.replay_mode, ReplayMode::replay);
  EXPECT_TRUE(cfg.sources[0].path.is_absolute());
  EXPECT_DOUBLE_EQ(cfg.thresholds.at(LangTag("fr")), 0.25);
  EXPECT_EQ(cfg.fewshot_pool(LangTag("de")).filename(), "fewshots.de.jsonl");
}

TEST(Cli, CassetteMissExitsWithServiceError) {
  const auto dir = test::temp_dir("cli_miss");
  EXPECT_EQ(detox({"--config", kConfig, "--out", dir.string(), "--cassette", (dir / "empty.jsonl").string(), "--lang",
                   "de", "ingest"}),
            kServiceError);
}

TEST(Cli, MissingPredecessorArtifact) {
  const auto dir = test::temp_dir("cli_order");
  EXPECT_EQ(detox({"--config", kConfig, "--out", dir.string(), "--lang", "de", "generate"}), kFailure);
  EXPECT_EQ(detox({"--config", kConfig, "--out", dir.string(), "--lang", "de", "compose"}), kFailure);
  EXPECT_EQ(detox({"--config", kConfig, "--out", dir.string(), "sbs"}), kConfigError);  // sbs needs --input
}

class Pipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    out_ = new fs::path(test::temp_dir("cli_pipeline"));
    for (const char* stage : {"ingest", "mine-fewshot", "generate", "compose", "eval"}) {
      ASSERT_EQ(detox({"--config", kConfig, "--out", out_->string(), "--jobs", "4", stage}), kOk) << stage;
    }
  }
  static void TearDownTestSuite() { delete out_; }
  static fs::path file(const std::string& name) { return *out_ / name; }
  static std::string out() { return out_->string(); }

  static fs::path* out_;
};

fs::path* Pipeline::out_ = nullptr;

TEST_F(Pipeline, StageArtifacts) {
  for (const auto* lang : {"de", "es", "fr", "ru"}) {
    const std::string l = lang;
    for (const auto& name : {"samples." + l + ".jsonl", "ingest_stats." + l + ".json", "fewshots." + l + ".jsonl",
                             "candidates." + l + ".jsonl", "generation_stats." + l + ".json", "sdm." + l + ".tsv",
                             "sdm." + l + ".jsonl", "stats." + l + ".json", "eval." + l + ".jsonl",
                             "report." + l + ".json"}) {
      EXPECT_TRUE(fs::exists(file(name))) << name;
    }
    EXPECT_EQ(line_count(file("sdm." + l + ".tsv")), line_count(file("samples." + l + ".jsonl"))) << l;
    EXPECT_EQ(io::read_jsonl(file("fewshots." + l + ".jsonl")).size(), 5u);
  }
  EXPECT_EQ(line_count(file("samples.de.jsonl")), 7u);
  for (const auto* name : {"stats.json", "report.json", "report.md"}) EXPECT_TRUE(fs::exists(file(name))) << name;
}

TEST_F(Pipeline, IngestStatsAccountForEveryRow) {
  const auto s = json::parse(io::read_file(file("ingest_stats.de.json")));
  EXPECT_EQ(s.at("loaded"), 13);
  EXPECT_EQ(s.at("malformed_rows"), 1);
  EXPECT_EQ(s.at("not_majority"), 2);
  EXPECT_EQ(s.at("kept"), 7);
  const auto ru = json::parse(io::read_file(file("ingest_stats.ru.json")));
  EXPECT_EQ(ru.at("other_language"), 1);
}

TEST_F(Pipeline, StatsSumToEmitted) {
  const auto stats = json::parse(io::read_file(file("stats.json")));
  for (const auto* lang : {"de", "es", "fr", "ru"}) {
    EXPECT_EQ(stats.at("accepted_totals").at(lang), stats.at("emitted").at(lang)) << lang;
  }
}

TEST_F(Pipeline, Baselines) {
  EXPECT_EQ(detox({"--config", kConfig, "--out", out(), "--lang", "de", "baseline", "duplicate"}), kOk);
  EXPECT_EQ(detox({"--config", kConfig, "--out", out(), "--lang", "de", "baseline", "delete"}), kOk);
  EXPECT_EQ(detox({"--config", kConfig, "--out", out(), "--lang", "de", "baseline", "backtranslate"}), kOk);
  const auto dup = io::read_jsonl(file("baseline.duplicate.de.jsonl"));
  ASSERT_EQ(dup.size(), 7u);
  for (const auto& r : dup) EXPECT_EQ(r.at("input"), r.at("output"));
  const auto lex = baselines::Lexicon::load(test::fixtures() / "lexicons" / "de.txt", LangTag("de"));
  for (const auto& r : io::read_jsonl(file("baseline.delete.de.jsonl"))) {
    EXPECT_EQ(baselines::count_matches(r.at("output").get<std::string>(), lex), 0u);
  }
  EXPECT_TRUE(fs::exists(file("baseline.backtranslate.de.jsonl")));

  // evaluate the duplicate baseline: SIM is exactly 1
  EXPECT_EQ(detox({"--config", kConfig, "--out", out(), "--lang", "de", "--input",
                   file("baseline.duplicate.de.jsonl").string(), "eval"}),
            kOk);
  const auto report = json::parse(io::read_file(file("report.de.json")));
  EXPECT_EQ(report.at("mean_sim").get<double>(), 1.0);

  // several languages without --lang is a usage error for file inputs
  EXPECT_EQ(detox({"--config", kConfig, "--out", out(), "--input", file("baseline.duplicate.de.jsonl").string(),
                   "baseline", "delete"}),
            kConfigError);
}

TEST_F(Pipeline, SideBySide) {
  EXPECT_EQ(detox({"--config", kConfig, "--out", out(), "--input", (test::fixtures() / "sbs_items.jsonl").string(),
                   "sbs"}),
            kOk);
  EXPECT_EQ(io::read_jsonl(file("sbs.jsonl")).size(), 6u);
  const auto summary = json::parse(io::read_file(file("sbs_summary.json")));
  EXPECT_EQ(summary.at("n"), 6);
  EXPECT_NEAR(summary.at("mean_score_a").get<double>() + summary.at("mean_score_b").get<double>(), 1.0, 1e-12);
}

TEST_F(Pipeline, Analyses) {
  EXPECT_EQ(detox({"--config", kConfig, "--out", out(), "--lang", "fr", "analyze", "lexicon"}), kOk);
  const auto lex = json::parse(io::read_file(file("lexicon_stats.fr.json")));
  EXPECT_GT(lex.at("toxic").at("total").get<int>(), 0);
  EXPECT_EQ(detox({"--config", kConfig, "--out", out(), "--lang", "fr", "--bins", "5", "analyze", "histogram"}), kOk);
  EXPECT_EQ(line_count(file("sta_histogram.toxic.fr.csv")), 6u);
  EXPECT_EQ(line_count(file("sta_histogram.neutral.fr.csv")), 6u);
  EXPECT_EQ(detox({"--config", kConfig, "--out", out(), "--lang", "fr", "--input", file("eval.fr.jsonl").string(),
                   "--smooth", "1", "analyze", "histogram"}),
            kOk);
  EXPECT_EQ(line_count(file("sta_histogram.fr.csv")), 21u);
}

}  // namespace
}  // namespace detox::cli
