#pragma once

#include <span>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "detox/pipeline/filter.hpp"
#include "detox/pipeline/prompt.hpp"
#include "detox/services/clients.hpp"
#include "detox/util/parallel.hpp"

namespace detox::pipeline {

/// All candidates produced for one source sample.
struct SourceCandidates {
  ToxicSample source;
  std::vector<DetoxCandidate> candidates;

  /// False when every backend failed for this sample.
  bool generated() const {
    for (const auto& c : candidates) {
      if (c.reject_reason != RejectReason::backend_failure) return true;
    }
    return false;
  }
};

inline void to_json(json& j, const SourceCandidates& s) {
  j = json{{"source", s.source}, {"candidates", s.candidates}, {"generated", s.generated()}};
}

inline void from_json(const json& j, SourceCandidates& s) {
  s.source = j.at("source").get<ToxicSample>();
  s.candidates = j.at("candidates").get<std::vector<DetoxCandidate>>();
}

struct GenerationContext {
  Transport& transport;
  const ToxicityClient& toxicity;
  const EmbeddingClient& embedder;
  RefusalDetector refusal;
  PromptTemplate prompt;
  GenerationParams params;
  double detox_threshold = kDetoxifiabilityThreshold;
};

namespace detail {

inline DetoxCandidate run_backend(const ToxicSample& sample, const ChatClient& chat, const std::string& prompt,
                                  const GenerationContext& ctx) {
  DetoxCandidate cand;
  cand.source_id = sample.id;
  cand.model_id = chat.profile().id;
  try {
    cand.text = chat.generate(prompt, ctx.params);
  } catch (const CassetteMiss&) {
    throw;
  } catch (const Error& e) {
    spdlog::warn("backend '{}' failed on {}: {}", cand.model_id, sample.id, e.what());
    cand.reject_reason = RejectReason::backend_failure;
    cand.error = e.what();
    return cand;
  }
  if (!cand.text.empty()) {
    cand.p_toxic = ctx.toxicity.score_one(cand.text, sample.lang).p_toxic;
    cand.sim = ctx.embedder.similarity(sample.text, cand.text);
  }
  return filter_candidate(std::move(cand), *sample.p_toxic, ctx.detox_threshold, ctx.refusal);
}

inline void check_inputs(const ToxicSample& sample, std::span<const ServiceProfile> backends) {
  if (backends.empty()) throw ConfigError("no generation backends configured");
  if (!sample.p_toxic) throw PipelineError("sample " + sample.id + " has not been scored for toxicity");
}

}  // namespace detail

/// One candidate per backend, in backend order. A failing backend yields a
/// candidate rejected as backend_failure; the others are unaffected.
inline std::vector<DetoxCandidate> generate_candidates(const ToxicSample& sample,
                                                       std::span<const ServiceProfile> backends,
                                                       std::span<const FewShotPair> shots,
                                                       const GenerationContext& ctx) {
  detail::check_inputs(sample, backends);
  const auto prompt = ctx.prompt.render(sample.lang, shots, sample.text);
  std::vector<DetoxCandidate> out;
  for (const auto& profile : backends) {
    out.push_back(detail::run_backend(sample, ChatClient(ctx.transport, profile), prompt, ctx));
  }
  return out;
}

/// Generates for many samples, fanning out over (sample, backend) pairs on
/// `jobs` workers. Results are assembled by index, so output is identical
/// for any worker count.
inline std::vector<SourceCandidates> generate_all(const std::vector<ToxicSample>& samples,
                                                  std::span<const ServiceProfile> backends,
                                                  std::span<const FewShotPair> shots, const GenerationContext& ctx,
                                                  std::size_t jobs) {
  if (backends.empty()) throw ConfigError("no generation backends configured");
  std::vector<ChatClient> clients;
  for (const auto& p : backends) clients.emplace_back(ctx.transport, p);

  std::vector<std::string> prompts(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    detail::check_inputs(samples[i], backends);
    prompts[i] = ctx.prompt.render(samples[i].lang, shots, samples[i].text);
  }

  const std::size_t b = backends.size();
  std::vector<DetoxCandidate> flat(samples.size() * b);
  parallel_for(flat.size(), jobs, [&](std::size_t t) {
    const std::size_t i = t / b;
    flat[t] = detail::run_backend(samples[i], clients[t % b], prompts[i], ctx);
  });

  std::vector<SourceCandidates> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out[i].source = samples[i];
    out[i].candidates.assign(std::make_move_iterator(flat.begin() + static_cast<std::ptrdiff_t>(i * b)),
                             std::make_move_iterator(flat.begin() + static_cast<std::ptrdiff_t>((i + 1) * b)));
  }
  return out;
}

}  // namespace detox::pipeline
