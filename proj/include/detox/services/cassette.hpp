#pragma once

// Record/replay of service traffic. A cassette is a line-delimited JSON file
// (`*.cassette.jsonl`); each line holds one request fingerprint, the request
// payload (for readability) and the raw response body.

#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "detox/core/errors.hpp"
#include "detox/services/transport.hpp"
#include "detox/util/io.hpp"

namespace detox {

enum class ReplayMode { live, record, replay };

inline ReplayMode parse_replay_mode(std::string_view s) {
  if (s == "live") return ReplayMode::live;
  if (s == "record") return ReplayMode::record;
  if (s == "replay") return ReplayMode::replay;
  throw ConfigError("unknown replay mode '" + std::string(s) + "' (expected live, record or replay)");
}

inline std::string_view to_string(ReplayMode m) {
  switch (m) {
    case ReplayMode::live: return "live";
    case ReplayMode::record: return "record";
    case ReplayMode::replay: return "replay";
  }
  return "live";
}

class Cassette {
 public:
  Cassette() = default;

  /// Loads an existing cassette. A missing file is an empty cassette.
  explicit Cassette(std::filesystem::path path) : path_(std::move(path)) {
    if (!std::filesystem::exists(path_)) return;
    for (const auto& row : io::read_jsonl(path_)) {
      if (!row.contains("fingerprint") || !row.contains("response")) {
        throw IoError(path_.string() + ": cassette line without fingerprint/response");
      }
      entries_.insert_or_assign(row.at("fingerprint").get<std::string>(), row.at("response").get<std::string>());
    }
  }

  std::optional<std::string> find(const std::string& fingerprint) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(fingerprint);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  /// Stores a response and appends it to the backing file, if any.
  void append(const std::string& fingerprint, ServiceKind kind, const json& request, const std::string& response) {
    std::lock_guard lock(mutex_);
    if (!entries_.emplace(fingerprint, response).second) return;
    if (path_.empty()) return;
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot append to cassette " + path_.string());
    json line{{"fingerprint", fingerprint}, {"kind", to_string(kind)}, {"request", request}, {"response", response}};
    out << line.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
  }

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::string> entries_;
};

/// Transport decorator implementing live/record/replay.
///  - live:   forwards to the inner transport.
///  - record: serves known fingerprints from the cassette, forwards and
///            appends everything else.
///  - replay: serves from the cassette only; a miss throws CassetteMiss.
class CassetteTransport final : public Transport {
 public:
  CassetteTransport(Transport* inner, Cassette& cassette, ReplayMode mode)
      : inner_(inner), cassette_(cassette), mode_(mode) {
    if (mode_ != ReplayMode::replay && inner_ == nullptr) {
      throw ConfigError("live and record modes need a network transport");
    }
  }

  std::string send(const ServiceProfile& profile, const json& payload) override {
    if (mode_ == ReplayMode::live) return inner_->send(profile, payload);
    const auto fp = request_fingerprint(profile.kind, payload);
    if (auto hit = cassette_.find(fp)) return *hit;
    if (mode_ == ReplayMode::replay) {
      spdlog::error("cassette miss: {} request {}", to_string(profile.kind), fp);
      throw CassetteMiss(fp);
    }
    auto body = inner_->send(profile, payload);
    cassette_.append(fp, profile.kind, payload, body);
    return body;
  }

 private:
  Transport* inner_;
  Cassette& cassette_;
  ReplayMode mode_;
};

}  // namespace detox
