// Local HTTP server answering every service endpoint with the deterministic
// stub backend. Used to record the fixture cassettes.
//
//   detox_stub_server [port]     (default 8765)

#include <cstdlib>
#include <iostream>

#include <httplib.h>

#include "detox/testing/stub_backend.hpp"

int main(int argc, char** argv) {
  using detox::ServiceKind;
  const int port = argc > 1 ? std::atoi(argv[1]) : 8765;

  httplib::Server server;
  auto route = [&](const char* path, ServiceKind kind) {
    server.Post(path, [kind](const httplib::Request& req, httplib::Response& res) {
      try {
        const auto payload = detox::json::parse(req.body);
        res.set_content(detox::testing::StubBackend::handle(kind, payload).dump(), "application/json");
      } catch (const std::exception& e) {
        res.status = 400;
        res.set_content(detox::json{{"error", e.what()}}.dump(), "application/json");
      }
    });
  };
  route("/score", ServiceKind::toxicity);
  route("/embed", ServiceKind::embedding);
  route("/chat", ServiceKind::chat);
  route("/judge", ServiceKind::judge);
  route("/translate", ServiceKind::translation);
  route("/classify", ServiceKind::refusal);
  server.Get("/health", [](const httplib::Request&, httplib::Response& res) { res.set_content("ok", "text/plain"); });

  std::cerr << "stub server listening on 127.0.0.1:" << port << '\n';
  if (!server.listen("127.0.0.1", port)) {
    std::cerr << "cannot bind port " << port << '\n';
    return 1;
  }
  return 0;
}
