#pragma once

// Subcommand front-end. Each stage reads its predecessor's artifacts from the
// output directory and writes its own, so stages can be re-run individually.
//
// Exit codes: 0 success, 2 configuration/usage error, 3 service error or
// cassette miss, 1 anything else.

#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "detox/baselines/baselines.hpp"
#include "detox/cli/config.hpp"
#include "detox/eval/analysis.hpp"
#include "detox/eval/evaluate.hpp"
#include "detox/eval/sbs.hpp"
#include "detox/ingest/stage.hpp"
#include "detox/pipeline/compose.hpp"
#include "detox/pipeline/fewshot.hpp"
#include "detox/pipeline/generate.hpp"
#include "detox/services/cassette.hpp"
#include "detox/services/http_transport.hpp"

namespace detox::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kServiceError = 3 };

struct Options {
  std::string config;
  std::string out = "out";
  std::string lang;
  std::size_t jobs = 1;
  std::string cassette;
  std::string mode;
  std::string input;
  std::string field;
  int bins = 20;
  double smooth = 0.0;
  std::string log_level = "info";
};

/// Services and transports shared by all stages of one invocation.
class Runtime {
 public:
  Runtime(Config config, const Options& opts) : config_(std::move(config)), opts_(opts), out_(opts.out) {
    if (!opts.mode.empty()) config_.replay_mode = parse_replay_mode(opts.mode);
    if (!opts.cassette.empty()) config_.cassette = fs::path(opts.cassette);
    if (opts.jobs < 1) throw ConfigError("--jobs must be at least 1");
    if (config_.replay_mode != ReplayMode::live) {
      if (!config_.cassette) throw ConfigError("record and replay modes need a cassette (--cassette or config)");
      cassette_ = std::make_unique<Cassette>(*config_.cassette);
    }
    if (config_.replay_mode != ReplayMode::replay) http_ = std::make_unique<HttpTransport>();
    if (cassette_) {
      cassette_transport_ = std::make_unique<CassetteTransport>(http_.get(), *cassette_, config_.replay_mode);
      transport_ = cassette_transport_.get();
    } else {
      transport_ = http_.get();
    }
    if (config_.services.refusal) refusal_ = std::make_unique<RefusalClient>(*transport_, *config_.services.refusal);
  }

  const Config& config() const { return config_; }
  const Options& options() const { return opts_; }
  const fs::path& out() const { return out_; }
  Transport& transport() { return *transport_; }
  std::size_t jobs() const { return opts_.jobs; }

  /// Languages selected by --lang (default: all configured).
  std::vector<LangTag> languages() const {
    if (opts_.lang.empty()) return config_.languages;
    LangTag lang(opts_.lang);
    if (std::find(config_.languages.begin(), config_.languages.end(), lang) == config_.languages.end()) {
      throw ConfigError("language '" + opts_.lang + "' is not configured");
    }
    return {lang};
  }

  /// The single language a file-based stage works on.
  LangTag single_language() const {
    const auto langs = languages();
    if (langs.size() != 1) throw ConfigError("this command needs --lang when several languages are configured");
    return langs.front();
  }

  const ServiceProfile& service(const std::optional<ServiceProfile>& p, const char* role) const {
    if (!p) throw ConfigError(std::string("services.") + role + " is not configured");
    return *p;
  }

  ToxicityClient toxicity() { return {*transport_, service(config_.services.toxicity, "toxicity"), jobs()}; }
  EmbeddingClient embedding() { return {*transport_, service(config_.services.embedding, "embedding"), jobs()}; }
  TranslationClient translation() {
    return {*transport_, service(config_.services.translation, "translation"), jobs()};
  }
  ChatClient judge() { return {*transport_, service(config_.services.judge, "judge")}; }
  ChatClient en_detox() { return {*transport_, service(config_.services.en_detox, "en_detox")}; }
  pipeline::RefusalDetector refusal() const { return pipeline::RefusalDetector(refusal_.get()); }

  baselines::Lexicon lexicon(const LangTag& lang) const {
    auto it = config_.lexicons.find(lang);
    if (it == config_.lexicons.end()) throw ConfigError("no lexicon configured for '" + lang.code() + "'");
    return baselines::Lexicon::load(it->second, lang);
  }

  pipeline::PromptTemplate prompt() const {
    std::string body(pipeline::kDefaultPromptBody);
    if (config_.prompt_template) body = io::read_file(*config_.prompt_template);
    return pipeline::PromptTemplate(body, config_.shot_format);
  }

  std::string rubric() const {
    return config_.judge_rubric ? io::read_file(*config_.judge_rubric) : std::string(eval::kDefaultRubric);
  }

  fs::path artifact(const std::string& name) const { return out_ / name; }

  /// Reads a predecessor artifact, failing with a hint when it is absent.
  std::vector<json> require_artifact(const std::string& name, const char* producer) const {
    const auto path = artifact(name);
    if (!fs::exists(path)) {
      throw PipelineError("missing " + path.string() + " (run `" + producer + "` first)");
    }
    return io::read_jsonl(path);
  }

 private:
  Config config_;
  Options opts_;
  fs::path out_;
  std::unique_ptr<Cassette> cassette_;
  std::unique_ptr<HttpTransport> http_;
  std::unique_ptr<CassetteTransport> cassette_transport_;
  Transport* transport_ = nullptr;
  std::unique_ptr<RefusalClient> refusal_;
};

namespace detail {

template <typename T>
std::vector<T> rows_as(const std::vector<json>& rows) {
  std::vector<T> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.get<T>());
  return out;
}

inline std::string text_field(const json& row, const std::string& field) {
  if (!field.empty()) return row.at(field).get<std::string>();
  for (const char* key : {"output", "text", "neutral_text"}) {
    if (auto it = row.find(key); it != row.end()) return it->get<std::string>();
  }
  throw IoError("input row has none of the fields output, text, neutral_text");
}

}  // namespace detail

inline void cmd_ingest(Runtime& rt) {
  const auto tox = rt.toxicity();
  ingest::IngestOptions options{rt.config().thresholds, rt.config().min_words, rt.config().max_words};
  for (const auto& lang : rt.languages()) {
    ingest::IngestStats stats;
    std::vector<ToxicSample> raw;
    for (const auto& spec : rt.config().sources) {
      if (spec.lang != lang) continue;
      auto loaded = ingest::load_source(spec);
      stats.malformed_rows += loaded.skipped;
      stats.other_language += loaded.other_language;
      for (auto& s : loaded.samples) raw.push_back(std::move(s));
    }
    const auto samples = ingest::prepare_samples(std::move(raw), tox, options, stats);
    io::write_jsonl(rt.artifact("samples." + lang.code() + ".jsonl"), samples);
    io::write_json(rt.artifact("ingest_stats." + lang.code() + ".json"), stats);
    spdlog::info("ingest {}: kept {} of {} loaded samples", lang.code(), stats.kept, stats.loaded);
  }
}

inline void cmd_mine_fewshot(Runtime& rt) {
  const auto tox = rt.toxicity();
  const auto emb = rt.embedding();
  for (const auto& lang : rt.languages()) {
    const auto pool = pipeline::load_pool(rt.config().fewshot_pool(lang));
    auto scored = pipeline::score_pool(pool, lang, tox, emb);
    const auto shots = pipeline::mine_fewshot(std::move(scored), static_cast<long long>(rt.config().fewshot_k));
    io::write_jsonl(rt.artifact("fewshots." + lang.code() + ".jsonl"), shots);
    spdlog::info("mine-fewshot {}: {} shots from a pool of {}", lang.code(), shots.size(), pool.size());
  }
}

inline void cmd_generate(Runtime& rt) {
  const auto& config = rt.config();
  const auto tox = rt.toxicity();
  const auto emb = rt.embedding();
  pipeline::GenerationContext ctx{rt.transport(), tox,           emb, rt.refusal(), rt.prompt(),
                                  config.generation, config.detox_threshold};
  for (const auto& lang : rt.languages()) {
    const auto samples = detail::rows_as<ToxicSample>(rt.require_artifact("samples." + lang.code() + ".jsonl", "ingest"));
    std::vector<FewShotPair> shots;
    const auto shot_path = rt.artifact("fewshots." + lang.code() + ".jsonl");
    if (fs::exists(shot_path)) {
      shots = detail::rows_as<FewShotPair>(io::read_jsonl(shot_path));
    } else {
      spdlog::warn("generate {}: no few-shot file, prompting zero-shot", lang.code());
    }
    const auto records = pipeline::generate_all(samples, config.backends, shots, ctx, rt.jobs());
    io::write_jsonl(rt.artifact("candidates." + lang.code() + ".jsonl"), records);
    pipeline::ModelStats stats;
    pipeline::tally_candidates(records, stats);
    io::write_json(rt.artifact("generation_stats." + lang.code() + ".json"), pipeline::stats_to_json(stats));
    spdlog::info("generate {}: {} samples x {} backends", lang.code(), samples.size(), config.backends.size());
  }
}

inline void cmd_compose(Runtime& rt) {
  const auto ids = rt.config().backend_ids();
  for (const auto& lang : rt.languages()) {
    const auto records =
        detail::rows_as<pipeline::SourceCandidates>(rt.require_artifact("candidates." + lang.code() + ".jsonl", "generate"));
    const auto result = pipeline::compose_language(records, rt.config().per_lang_target, ids);
    pipeline::emit(result.pairs, rt.artifact("sdm." + lang.code() + ".tsv"), pipeline::EmitFormat::tsv);
    pipeline::emit(result.pairs, rt.artifact("sdm." + lang.code() + ".jsonl"), pipeline::EmitFormat::jsonl);
    auto stats = pipeline::stats_to_json(result.stats);
    stats["emitted"] = result.pairs.size();
    stats["target"] = rt.config().per_lang_target;
    stats["short_of_target"] = result.short_of_target;
    io::write_json(rt.artifact("stats." + lang.code() + ".json"), stats);
    spdlog::info("compose {}: emitted {} pairs", lang.code(), result.pairs.size());
  }

  // Aggregate over every language that has been composed so far.
  json all = {{"models", json::object()}, {"accepted_totals", json::object()}, {"emitted", json::object()}};
  for (const auto& lang : rt.config().languages) {
    const auto path = rt.artifact("stats." + lang.code() + ".json");
    if (!fs::exists(path)) continue;
    const auto per = json::parse(io::read_file(path));
    for (const auto& [model, by_lang] : per.at("models").items()) {
      for (const auto& [code, counts] : by_lang.items()) all["models"][model][code] = counts;
    }
    for (const auto& [code, n] : per.at("accepted_totals").items()) all["accepted_totals"][code] = n;
    all["emitted"][lang.code()] = per.at("emitted");
  }
  io::write_json(rt.artifact("stats.json"), all);
}

/// Baseline input rows: --input JSONL (id + text field) or the ingested samples.
inline std::vector<eval::OutputRow> baseline_inputs(Runtime& rt, const LangTag& lang) {
  std::vector<eval::OutputRow> rows;
  if (!rt.options().input.empty()) {
    const auto data = io::read_jsonl(rt.options().input);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& d = data[i];
      const auto field = rt.options().field.empty() ? (d.contains("input") ? "input" : "text") : rt.options().field;
      rows.push_back({d.value("id", std::to_string(i)), d.at(field).get<std::string>(), {}, std::nullopt});
    }
    return rows;
  }
  for (const auto& s : detail::rows_as<ToxicSample>(rt.require_artifact("samples." + lang.code() + ".jsonl", "ingest"))) {
    rows.push_back({s.id, s.text, {}, std::nullopt});
  }
  return rows;
}

inline void cmd_baseline(Runtime& rt, const std::string& name) {
  const auto langs = rt.options().input.empty() ? rt.languages() : std::vector<LangTag>{rt.single_language()};
  for (const auto& lang : langs) {
    auto rows = baseline_inputs(rt, lang);
    std::vector<json> skipped;
    if (name == "duplicate") {
      for (auto& r : rows) r.output = baselines::duplicate(r.input);
    } else if (name == "delete") {
      const auto lexicon = rt.lexicon(lang);
      for (auto& r : rows) r.output = baselines::delete_toxic(r.input, lexicon);
    } else {
      const auto translator = rt.translation();
      const auto detox = rt.en_detox();
      const auto refusal = rt.refusal();
      std::vector<std::optional<std::string>> errors(rows.size());
      parallel_for(rows.size(), rt.jobs(), [&](std::size_t i) {
        try {
          rows[i].output =
              baselines::backtranslate_detox(rows[i].input, lang, translator, detox, refusal, rt.config().generation);
        } catch (const baselines::BaselineError& e) {
          errors[i] = e.what();
        }
      });
      std::vector<eval::OutputRow> kept;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (errors[i]) {
          skipped.push_back({{"id", rows[i].id}, {"input", rows[i].input}, {"error", *errors[i]}});
        } else {
          kept.push_back(std::move(rows[i]));
        }
      }
      rows = std::move(kept);
      io::write_jsonl(rt.artifact("baseline.backtranslate." + lang.code() + ".skipped.jsonl"), skipped);
      if (!skipped.empty()) spdlog::warn("backtranslate {}: {} samples skipped", lang.code(), skipped.size());
    }
    io::write_jsonl(rt.artifact("baseline." + name + "." + lang.code() + ".jsonl"), rows);
    spdlog::info("baseline {} {}: {} outputs", name, lang.code(), rows.size());
  }
}

inline void cmd_eval(Runtime& rt) {
  const auto tox = rt.toxicity();
  const auto emb = rt.embedding();
  const auto langs = rt.options().input.empty() ? rt.languages() : std::vector<LangTag>{rt.single_language()};
  for (const auto& lang : langs) {
    std::vector<eval::OutputRow> rows;
    if (!rt.options().input.empty()) {
      rows = detail::rows_as<eval::OutputRow>(io::read_jsonl(rt.options().input));
    } else {
      for (const auto& p : detail::rows_as<ParallelPair>(rt.require_artifact("sdm." + lang.code() + ".jsonl", "compose"))) {
        rows.push_back({p.source_id, p.toxic_text, p.neutral_text, std::nullopt});
      }
    }
    if (rows.empty()) {
      spdlog::warn("eval {}: nothing to evaluate", lang.code());
      continue;
    }
    const auto ev = eval::evaluate(rows, lang, tox, emb, rt.config().chrf);
    io::write_jsonl(rt.artifact("eval." + lang.code() + ".jsonl"), ev.records);
    io::write_json(rt.artifact("report." + lang.code() + ".json"), ev.report);
    spdlog::info("eval {}: J = {:.4f} over {} records", lang.code(), ev.report.j, ev.report.n);
  }

  std::vector<EvalReport> reports;
  for (const auto& lang : rt.config().languages) {
    const auto path = rt.artifact("report." + lang.code() + ".json");
    if (fs::exists(path)) reports.push_back(json::parse(io::read_file(path)).get<EvalReport>());
  }
  io::write_json(rt.artifact("report.json"), reports);
  io::write_file(rt.artifact("report.md"), eval::markdown_table(reports));
}

inline void cmd_sbs(Runtime& rt) {
  if (rt.options().input.empty()) throw ConfigError("sbs needs --input with id/input/output_a/output_b rows");
  const auto items = detail::rows_as<eval::SbsItem>(io::read_jsonl(rt.options().input));
  const auto judge = rt.judge();
  const auto verdicts = eval::sbs_compare(items, judge, rt.rubric(), rt.jobs());
  io::write_jsonl(rt.artifact("sbs.jsonl"), verdicts);
  io::write_json(rt.artifact("sbs_summary.json"), eval::summarize(verdicts));
}

inline void cmd_analyze(Runtime& rt, const std::string& what) {
  const auto& input = rt.options().input;
  const auto langs = input.empty() ? rt.languages() : std::vector<LangTag>{rt.single_language()};
  for (const auto& lang : langs) {
    const auto code = lang.code();
    if (what == "lexicon") {
      const auto lexicon = rt.lexicon(lang);
      json result;
      if (!input.empty()) {
        std::vector<std::string> texts;
        for (const auto& row : io::read_jsonl(input)) texts.push_back(detail::text_field(row, rt.options().field));
        result = eval::lexicon_stats(texts, lexicon);
      } else {
        std::vector<std::string> toxic, neutral;
        for (const auto& p : detail::rows_as<ParallelPair>(rt.require_artifact("sdm." + code + ".jsonl", "compose"))) {
          toxic.push_back(p.toxic_text);
          neutral.push_back(p.neutral_text);
        }
        if (toxic.empty()) {
          spdlog::warn("analyze lexicon {}: empty dataset", code);
          continue;
        }
        result = {{"toxic", eval::lexicon_stats(toxic, lexicon)}, {"neutral", eval::lexicon_stats(neutral, lexicon)}};
      }
      io::write_json(rt.artifact("lexicon_stats." + code + ".json"), result);
    } else {
      const int bins = rt.options().bins;
      const double sigma = rt.options().smooth;
      if (!input.empty()) {
        const auto field = rt.options().field.empty() ? std::string("sta") : rt.options().field;
        std::vector<double> scores;
        for (const auto& row : io::read_jsonl(input)) scores.push_back(row.at(field).get<double>());
        io::write_file(rt.artifact("sta_histogram." + code + ".csv"),
                       eval::histogram_csv(eval::sta_histogram(scores, bins, sigma)));
      } else {
        std::vector<double> toxic, neutral;
        for (const auto& p : detail::rows_as<ParallelPair>(rt.require_artifact("sdm." + code + ".jsonl", "compose"))) {
          toxic.push_back(p.sta_toxic);
          neutral.push_back(p.sta_neutral);
        }
        io::write_file(rt.artifact("sta_histogram.toxic." + code + ".csv"),
                       eval::histogram_csv(eval::sta_histogram(toxic, bins, sigma)));
        io::write_file(rt.artifact("sta_histogram.neutral." + code + ".csv"),
                       eval::histogram_csv(eval::sta_histogram(neutral, bins, sigma)));
      }
    }
  }
}

inline void setup_logging(const std::string& level) {
  auto logger = spdlog::get("detox");
  if (!logger) logger = spdlog::stderr_color_mt("detox");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const auto lvl = spdlog::level::from_str(level);
  if (lvl == spdlog::level::off && level != "off") throw ConfigError("unknown log level '" + level + "'");
  spdlog::set_level(lvl);
}

inline int run(std::vector<std::string> args) {
  CLI::App app("Multilingual text detoxification toolkit", "detox");
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_option("--config", o.config, "Run configuration (JSON)")->required();
  app.add_option("--out", o.out, "Output directory for artifacts");
  app.add_option("--lang", o.lang, "Restrict to one configured language");
  app.add_option("--jobs", o.jobs, "Worker parallelism");
  app.add_option("--cassette", o.cassette, "Cassette file for record/replay");
  app.add_option("--mode", o.mode, "Service mode: live, record or replay");
  app.add_option("--input", o.input, "Input JSONL for baseline/eval/sbs/analyze");
  app.add_option("--field", o.field, "Field to read from --input rows");
  app.add_option("--bins", o.bins, "Histogram bins");
  app.add_option("--smooth", o.smooth, "Gaussian smoothing width in bins (0 = off)");
  app.add_option("--log-level", o.log_level, "trace, debug, info, warn, error or off");

  std::string unknown;
  app.add_option("command", unknown)->group("");  // captures a misspelled subcommand for the error message

  std::string command;
  const std::pair<const char*, const char*> stages[] = {
      {"ingest", "Select, clean, score and split raw corpora"},
      {"mine-fewshot", "Rank the few-shot pool and keep the top k pairs"},
      {"generate", "Prompt every backend for every sample"},
      {"compose", "Select the best candidate per sample and emit the dataset"},
      {"eval", "Score outputs with STA, SIM, FL and J"},
      {"sbs", "Side-by-side comparison with a judge model"}};
  for (const auto& [name, help] : stages) {
    app.add_subcommand(name, help)->callback([&command, name = name] { command = name; });
  }
  auto* baseline = app.add_subcommand("baseline", "Run a baseline");
  baseline->require_subcommand(1);
  for (const char* name : {"duplicate", "delete", "backtranslate"}) {
    baseline->add_subcommand(name)->callback([&command, name] { command = std::string("baseline ") + name; });
  }
  auto* analyze = app.add_subcommand("analyze", "Dataset analyses");
  analyze->require_subcommand(1);
  for (const char* name : {"lexicon", "histogram"}) {
    analyze->add_subcommand(name)->callback([&command, name] { command = std::string("analyze ") + name; });
  }

  try {
    std::reverse(args.begin(), args.end());  // CLI11 expects the vector in reverse order
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    if (!unknown.empty()) std::cerr << "error: unknown subcommand '" << unknown << "'\n\n" << app.help();
    else std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kConfigError;
  }

  try {
    setup_logging(o.log_level);
    Runtime rt(load_config(o.config), o);
    if (command == "ingest") cmd_ingest(rt);
    else if (command == "mine-fewshot") cmd_mine_fewshot(rt);
    else if (command == "generate") cmd_generate(rt);
    else if (command == "compose") cmd_compose(rt);
    else if (command == "eval") cmd_eval(rt);
    else if (command == "sbs") cmd_sbs(rt);
    else if (command.rfind("baseline ", 0) == 0) cmd_baseline(rt, command.substr(9));
    else if (command.rfind("analyze ", 0) == 0) cmd_analyze(rt, command.substr(8));
    return kOk;
  } catch (const CassetteMiss& e) {
    std::cerr << "error: cassette miss for request fingerprint " << e.fingerprint() << '\n';
    return kServiceError;
  } catch (const ServiceError& e) {
    std::cerr << "error: service failure: " << e.what() << '\n';
    return kServiceError;
  } catch (const ProtocolError& e) {
    std::cerr << "error: service protocol: " << e.what() << '\n';
    return kServiceError;
  } catch (const ConfigError& e) {
    std::cerr << "error: configuration: " << e.what() << '\n';
    return kConfigError;
  } catch (const TemplateError& e) {
    std::cerr << "error: template: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(std::move(args));
}

}  // namespace detox::cli
