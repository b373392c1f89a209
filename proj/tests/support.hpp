#pragma once

// Shared helpers for the test suites.

#include <filesystem>
#include <unistd.h>
#include <random>
#include <string>

#include "detox/services/profile.hpp"
#include "detox/core/unicode.hpp"

namespace detox::test {

inline std::filesystem::path fixtures() { return DETOX_FIXTURES_DIR; }

inline ServiceProfile profile(ServiceKind kind, std::string id = "stub", std::string model = "") {
  ServiceProfile p;
  p.id = std::move(id);
  p.kind = kind;
  p.base_url = "http://127.0.0.1:1/unused";
  p.model_id = model.empty() && (kind == ServiceKind::chat || kind == ServiceKind::judge) ? p.id : model;
  return p;
}

/// Fresh empty directory under the system temp dir, private to this process
/// so that test binaries can run in parallel.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("detox_test_" + std::to_string(::getpid()) + "_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Random text over a mixed alphabet (ASCII, Latin accents, Cyrillic, CJK,
/// emoji, whitespace) with length in [0, max_len] code points.
inline std::string random_unicode(std::mt19937_64& rng, std::size_t max_len) {
  static const std::u32string alphabet = U"abcdeABC xyz  éèüßñçабвгдёжЖ漢字か😀👍\t\n.,!?-";
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::u32string out;
  const auto n = len(rng);
  for (std::size_t i = 0; i < n; ++i) out.push_back(alphabet[pick(rng)]);
  return unicode::encode(out);
}

}  // namespace detox::test
