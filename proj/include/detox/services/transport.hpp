#pragma once

#include <functional>
#include <string>
#include <utility>

#include "detox/core/types.hpp"
#include "detox/services/profile.hpp"
#include "detox/util/hash.hpp"

namespace detox {

/// Sends one JSON request for a profile and returns the raw response body.
/// Implementations must be safe for concurrent use.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string send(const ServiceProfile& profile, const json& payload) = 0;
};

/// Fingerprint of a request: hash of the service kind and the canonical
/// (key-sorted, compact) payload. Credentials and URLs never take part.
inline std::string request_fingerprint(ServiceKind kind, const json& payload) {
  std::string canonical(to_string(kind));
  canonical += '\n';
  canonical += payload.dump(-1, ' ', false, json::error_handler_t::replace);
  return hex64(fnv1a64(canonical));
}

/// Adapts a callable into a Transport. Handy for stubs and tests.
class FunctionTransport final : public Transport {
 public:
  using Handler = std::function<std::string(const ServiceProfile&, const json&)>;

  explicit FunctionTransport(Handler handler) : handler_(std::move(handler)) {}

  std::string send(const ServiceProfile& profile, const json& payload) override {
    return handler_(profile, payload);
  }

 private:
  Handler handler_;
};

}  // namespace detox
