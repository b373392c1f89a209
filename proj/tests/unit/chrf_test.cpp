#include <gtest/gtest.h>

#include <map>
#include <random>

#include "detox/core/chrf.hpp"
#include "support.hpp"

namespace detox {
namespace {

/// Independent reference: enumerate every substring position, count with an
/// ordered map, and take the multiset intersection by min of counts.
double brute_force_chrf(const std::string& hyp, const std::string& ref, int max_order, double beta) {
  auto strip = [](const std::string& s) {
    std::u32string out;
    for (char32_t c : unicode::decode(s)) {
      if (!unicode::is_space(c)) out.push_back(c);
    }
    return out;
  };
  const auto h = strip(hyp), r = strip(ref);
  double total = 0.0;
  int used = 0;
  for (int n = 1; n <= max_order; ++n) {
    std::map<std::u32string, int> hc, rc;
    for (std::size_t i = 0; i + n <= h.size(); ++i) ++hc[h.substr(i, n)];
    for (std::size_t i = 0; i + n <= r.size(); ++i) ++rc[r.substr(i, n)];
    int hn = 0, rn = 0, m = 0;
    for (auto& [g, c] : hc) hn += c;
    for (auto& [g, c] : rc) rn += c;
    if (hn == 0 && rn == 0) continue;
    for (auto& [g, c] : hc) {
      auto it = rc.find(g);
      if (it != rc.end()) m += std::min(c, it->second);
    }
    const double p = hn ? double(m) / hn : 0.0;
    const double rr = rn ? double(m) / rn : 0.0;
    const double b2 = beta * beta;
    total += (b2 * p + rr) > 0 ? (1 + b2) * p * rr / (b2 * p + rr) : 0.0;
    ++used;
  }
  if (used == 0) return h.empty() && r.empty() ? 1.0 : 0.0;
  return total / used;
}

TEST(CharNgrams, Examples) {
  const auto ab = char_ngrams("abc", 2);
  EXPECT_EQ(ab.size(), 2u);
  EXPECT_EQ(ab.at(U"ab"), 1u);
  EXPECT_EQ(ab.at(U"bc"), 1u);
  const auto spaced = char_ngrams("a b", 2);
  ASSERT_EQ(spaced.size(), 1u);
  EXPECT_EQ(spaced.at(U"ab"), 1u);
  EXPECT_TRUE(char_ngrams("x", 2).empty());
  EXPECT_EQ(char_ngrams("aaa", 2).at(U"aa"), 2u);
  EXPECT_THROW(char_ngrams("abc", 0), DomainError);
}

TEST(Chrf, Examples) {
  EXPECT_DOUBLE_EQ(chrf("abc", "abc"), 1.0);
  EXPECT_DOUBLE_EQ(chrf("", "abc"), 0.0);
  EXPECT_DOUBLE_EQ(chrf("abc", ""), 0.0);
  EXPECT_DOUBLE_EQ(chrf("", ""), 1.0);
  EXPECT_NEAR(chrf("abc", "abd", {3, 1.0}), 0.38889, 1e-4);
}

TEST(Chrf, WhitespaceIsIgnored) {
  EXPECT_DOUBLE_EQ(chrf("a b c", "abc"), 1.0);
  EXPECT_DOUBLE_EQ(chrf("Привет мир", "Приветмир"), 1.0);
}

TEST(Chrf, CountsCodePointsNotBytes) {
  // "é" is two bytes; a byte-based implementation would match partial sequences.
  EXPECT_DOUBLE_EQ(chrf("é", "è"), 0.0);
  EXPECT_DOUBLE_EQ(chrf("ж", "ж"), 1.0);
}

TEST(Chrf, ParameterValidation) {
  EXPECT_THROW(chrf("a", "a", {0, 1.0}), DomainError);
  EXPECT_THROW(chrf("a", "a", {6, 0.0}), DomainError);
}

TEST(Chrf, BetaWeightsRecall) {
  // hyp is a prefix of ref: precision 1, recall < 1; a larger beta lowers the score.
  const double f1 = chrf("abcd", "abcdefgh", {2, 1.0});
  const double f2 = chrf("abcd", "abcdefgh", {2, 2.0});
  EXPECT_LT(f2, f1);
}

TEST(Chrf, AgreesWithBruteForceOracle) {
  std::mt19937_64 rng(20240601);
  for (int i = 0; i < 300; ++i) {
    const auto hyp = test::random_unicode(rng, 40);
    const auto ref = test::random_unicode(rng, 40);
    for (int order : {1, 3, 6}) {
      EXPECT_NEAR(chrf(hyp, ref, {order, 1.0}), brute_force_chrf(hyp, ref, order, 1.0), 1e-12)
          << "hyp=" << hyp << " ref=" << ref << " order=" << order;
    }
  }
}

TEST(Chrf, BoundedAndSymmetricForBetaOne) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const auto a = test::random_unicode(rng, 30), b = test::random_unicode(rng, 30);
    const double s = chrf(a, b);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
    EXPECT_NEAR(s, chrf(b, a), 1e-12);
  }
}

}  // namespace
}  // namespace detox
