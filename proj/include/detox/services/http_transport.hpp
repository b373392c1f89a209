#pragma once

// JSON-over-HTTP transport built on cpp-httplib. Kept in its own header so
// only the CLI and network tests pay for compiling the HTTP stack.

#include <chrono>
#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <regex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "detox/core/errors.hpp"
#include "detox/services/limiter.hpp"
#include "detox/services/transport.hpp"

namespace detox {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // always starts with '/'
};

inline Endpoint split_url(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/\s]+)(/\S*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw ConfigError("not an absolute http(s) URL: " + url);
  return {m[1].str(), m[2].matched ? m[2].str() : std::string("/")};
}

/// Delays slept before retry 1..max_retries; non-decreasing, capped at 30 s.
inline std::vector<int> backoff_schedule(const ServiceProfile& profile) {
  std::vector<int> delays;
  long long delay = profile.backoff_ms;
  for (int i = 0; i < profile.max_retries; ++i) {
    delays.push_back(static_cast<int>(std::min<long long>(delay, 30000)));
    delay *= 2;
  }
  return delays;
}

class HttpTransport final : public Transport {
 public:
  std::string send(const ServiceProfile& profile, const json& payload) override {
    auto& lanes = lanes_for(profile);
    const auto endpoint = split_url(profile.base_url);
    const auto body = payload.dump(-1, ' ', false, json::error_handler_t::replace);
    const auto delays = backoff_schedule(profile);

    httplib::Headers headers;
    if (!profile.auth_token_env.empty()) {
      if (const char* token = std::getenv(profile.auth_token_env.c_str()); token && *token) {
        headers.emplace("Authorization", std::string("Bearer ") + token);
      }
    }

    std::string last_error;
    const int attempts = profile.max_retries + 1;
    for (int attempt = 0; attempt < attempts; ++attempt) {
      if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delays[attempt - 1]));
      lanes.bucket.take();
      InFlightLimiter::Guard guard(lanes.in_flight);

      httplib::Client client(endpoint.origin);
      const auto timeout = std::chrono::milliseconds(profile.timeout_ms);
      client.set_connection_timeout(timeout);
      client.set_read_timeout(timeout);
      client.set_write_timeout(timeout);

      auto res = client.Post(endpoint.path, headers, body, "application/json");
      if (!res) {
        last_error = httplib::to_string(res.error());
      } else if (res->status == 200) {
        return res->body;
      } else {
        last_error = "HTTP " + std::to_string(res->status);
        const bool retryable = res->status == 408 || res->status == 429 || res->status >= 500;
        if (!retryable) break;
      }
      spdlog::warn("service '{}' attempt {}/{} failed: {}", profile.id, attempt + 1, attempts, last_error);
    }
    throw ServiceError("service '" + profile.id + "' (" + std::string(to_string(profile.kind)) + ") at " +
                       profile.base_url + " failed: " + last_error);
  }

 private:
  struct Lanes {
    InFlightLimiter in_flight;
    TokenBucket bucket;
    explicit Lanes(const ServiceProfile& p)
        : in_flight(p.max_in_flight), bucket(p.rate_per_sec, static_cast<double>(p.max_in_flight)) {}
  };

  Lanes& lanes_for(const ServiceProfile& profile) {
    std::lock_guard lock(mutex_);
    auto it = lanes_.find(profile.id);
    if (it == lanes_.end()) it = lanes_.emplace(profile.id, std::make_unique<Lanes>(profile)).first;
    return *it->second;
  }

  std::mutex mutex_;
  std::map<std::string, std::unique_ptr<Lanes>> lanes_;
};

}  // namespace detox
