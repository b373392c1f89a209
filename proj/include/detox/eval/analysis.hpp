#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "detox/baselines/baselines.hpp"
#include "detox/core/errors.hpp"

namespace detox::eval {

struct LexiconStats {
  std::size_t total = 0;
  double mean_per_text = 0.0;
};

inline void to_json(json& j, const LexiconStats& s) { j = json{{"total", s.total}, {"mean_per_text", s.mean_per_text}}; }

/// Toxic-lexicon token counts, using the same matching rule as the delete baseline.
inline LexiconStats lexicon_stats(std::span<const std::string> texts, const baselines::Lexicon& lexicon) {
  if (texts.empty()) throw DomainError("lexicon statistics of an empty corpus");
  LexiconStats s;
  for (const auto& t : texts) s.total += baselines::count_matches(t, lexicon);
  s.mean_per_text = static_cast<double>(s.total) / static_cast<double>(texts.size());
  return s;
}

struct HistogramBin {
  double low = 0.0;
  double high = 0.0;
  std::size_t count = 0;
  double smoothed = 0.0;
};

/// Equal-width bins over [0, 1]; a score of exactly 1 falls in the last bin.
/// With sigma > 0 the `smoothed` column holds the counts convolved with a
/// Gaussian kernel of that width (in bins); the smoothed total equals the raw total.
inline std::vector<HistogramBin> sta_histogram(std::span<const double> scores, int bins = 20, double sigma = 0.0) {
  if (bins < 1) throw DomainError("histogram needs at least one bin");
  std::vector<HistogramBin> out(static_cast<std::size_t>(bins));
  for (int i = 0; i < bins; ++i) {
    out[static_cast<std::size_t>(i)].low = static_cast<double>(i) / bins;
    out[static_cast<std::size_t>(i)].high = static_cast<double>(i + 1) / bins;
  }
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError("histogram score outside [0,1]");
    auto idx = static_cast<std::size_t>(std::floor(s * bins));
    if (idx >= out.size()) idx = out.size() - 1;
    ++out[idx].count;
  }
  if (sigma <= 0.0) {
    for (auto& b : out) b.smoothed = static_cast<double>(b.count);
    return out;
  }
  // Each bin spreads its count over all bins with normalised Gaussian weights.
  auto weight = [&](std::size_t i, std::size_t k) {
    const double d = static_cast<double>(i) - static_cast<double>(k);
    return std::exp(-0.5 * d * d / (sigma * sigma));
  };
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (out[k].count == 0) continue;
    double norm = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) norm += weight(i, k);
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i].smoothed += static_cast<double>(out[k].count) * weight(i, k) / norm;
    }
  }
  return out;
}

inline std::string histogram_csv(std::span<const HistogramBin> bins) {
  std::string out = "bin_low,bin_high,count,smoothed\n";
  char buf[128];
  for (const auto& b : bins) {
    std::snprintf(buf, sizeof buf, "%.4f,%.4f,%zu,%.6f\n", b.low, b.high, b.count, b.smoothed);
    out += buf;
  }
  return out;
}

}  // namespace detox::eval
