#pragma once

#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "detox/core/chrf.hpp"
#include "detox/core/metrics.hpp"
#include "detox/services/clients.hpp"

namespace detox::eval {

/// One row of an `outputs.jsonl` file.
struct OutputRow {
  std::string id;
  std::string input;
  std::string output;
  std::optional<std::string> reference;
};

inline void from_json(const json& j, OutputRow& r) {
  r.id = j.value("id", std::string{});
  r.input = j.at("input").get<std::string>();
  r.output = j.at("output").get<std::string>();
  if (auto it = j.find("reference"); it != j.end() && !it->is_null()) r.reference = it->get<std::string>();
}

inline void to_json(json& j, const OutputRow& r) {
  j = json{{"id", r.id}, {"input", r.input}, {"output", r.output}};
  if (r.reference) j["reference"] = *r.reference;
}

struct Evaluation {
  std::vector<EvalRecord> records;
  EvalReport report;
};

/// Aggregates per-record metrics. J is the mean of per-record products;
/// the product of mean STA and mean SIM is reported separately.
inline EvalReport summarize(std::span<const EvalRecord> records, const LangTag& lang, std::string fl_target) {
  if (records.empty()) throw DomainError("cannot summarize an empty evaluation");
  EvalReport r;
  r.lang = lang;
  r.n = records.size();
  r.fl_target = std::move(fl_target);
  double sta = 0.0, sim = 0.0, fl = 0.0, sta_sim = 0.0;
  for (const auto& rec : records) {
    sta += rec.sta;
    sim += rec.sim;
    fl += rec.fl;
    sta_sim += rec.sta * std::max(rec.sim, 0.0);
  }
  const double n = static_cast<double>(records.size());
  r.mean_sta = sta / n;
  r.mean_sim = sim / n;
  r.mean_fl = fl / n;
  r.mean_sta_times_sim = sta_sim / n;
  r.product_of_mean_sta_sim = r.mean_sta * std::max(r.mean_sim, 0.0);
  r.j = j_score(records);
  return r;
}

/// STA from the toxicity classifier on each output, SIM as embedding cosine
/// between input and output, FL as ChrF of the output against the reference
/// when references are given and against the input otherwise.
inline Evaluation evaluate(const std::vector<OutputRow>& rows, const LangTag& lang, const ToxicityClient& toxicity,
                           const EmbeddingClient& embedder, const ChrfParams& chrf_params = {}) {
  if (rows.empty()) throw DomainError("evaluate needs at least one record");
  const bool with_refs = rows.front().reference.has_value();
  for (const auto& r : rows) {
    if (r.reference.has_value() != with_refs) {
      throw DomainError("references must be given for all records or for none");
    }
  }

  std::vector<std::string> inputs, outputs;
  for (const auto& r : rows) {
    inputs.push_back(r.input);
    outputs.push_back(r.output);
  }
  const auto tox = toxicity.score(outputs, lang);
  const auto emb_in = embedder.embed(inputs);
  const auto emb_out = embedder.embed(outputs);
  if (emb_in.front().size() != emb_out.front().size()) {
    throw ProtocolError("embedding service returned vectors of different dimensions");
  }

  Evaluation ev;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EvalRecord rec;
    rec.id = rows[i].id;
    rec.input = rows[i].input;
    rec.output = rows[i].output;
    rec.reference = rows[i].reference;
    rec.sta = sta_of(tox[i].p_toxic);
    rec.sim = cosine(emb_in[i], emb_out[i]);
    rec.fl = chrf(rows[i].output, with_refs ? *rows[i].reference : rows[i].input, chrf_params);
    ev.records.push_back(std::move(rec));
  }
  ev.report = summarize(ev.records, lang, with_refs ? "reference" : "source");
  return ev;
}

/// Same as above with separate input/output/reference columns.
inline Evaluation evaluate(const std::vector<std::string>& inputs, const std::vector<std::string>& outputs,
                           const std::optional<std::vector<std::string>>& references, const LangTag& lang,
                           const ToxicityClient& toxicity, const EmbeddingClient& embedder,
                           const ChrfParams& chrf_params = {}) {
  if (inputs.size() != outputs.size() || (references && references->size() != inputs.size())) {
    throw DomainError("inputs, outputs and references must have the same length");
  }
  std::vector<OutputRow> rows;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    OutputRow r{std::to_string(i), inputs[i], outputs[i], std::nullopt};
    if (references) r.reference = (*references)[i];
    rows.push_back(std::move(r));
  }
  return evaluate(rows, lang, toxicity, embedder, chrf_params);
}

/// Markdown table with one row per language report.
inline std::string markdown_table(std::span<const EvalReport> reports) {
  std::string out = "| Lang | N | STA | SIM | FL | J | STA*SIM | FL target |\n";
  out += "|------|--:|----:|----:|---:|--:|--------:|-----------|\n";
  char buf[256];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "| %s | %zu | %.3f | %.3f | %.3f | %.3f | %.3f | %s |\n", r.lang.code().c_str(),
                  r.n, r.mean_sta, r.mean_sim, r.mean_fl, r.j, r.mean_sta_times_sim, r.fl_target.c_str());
    out += buf;
  }
  return out;
}

}  // namespace detox::eval
