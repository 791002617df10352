#pragma once

// Stateful suggestion service: POST property targets to /optimize for the
// next trial, record results with /observe, read the running front metrics
// from /metrics. Handlers are callable directly (no socket) for testing.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "invdoe/bench_harness.hpp"

namespace invdoe::service {

struct ServiceConfig {
  std::string problem = "resin-demo";
  bench::Strategy strategy = bench::Strategy::Baseline;
  std::uint64_t seed = 0;
  std::size_t n_mc = 2048;
  std::size_t starts = 20;
  // Seeded initial design used as model prior on problems without data.
  std::size_t prior_size = 10;
  // Observations are appended here per session and replayed at startup.
  std::optional<std::filesystem::path> log_dir;
  // Session snapshot preloaded into the default session.
  std::optional<std::filesystem::path> snapshot;
};

struct Response {
  int status = 200;
  std::string body;
};

inline constexpr const char* kSessionHeader = "X-Session";

class Service {
 public:
  explicit Service(ServiceConfig cfg);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  const ServiceConfig& config() const;
  const problems::ProblemSpec& problem() const;

  Response optimize(const std::string& body, const std::string& session = "");
  Response observe(const std::string& body, const std::string& session = "");
  Response metrics(const std::string& session = "");
  Response healthz() const;

  /// Serves until stop(). Returns false if the port could not be bound.
  bool listen(const std::string& host, int port);
  /// Binds (port 0 picks a free port) and serves on a background thread;
  /// returns the bound port.
  int start(const std::string& host, int port);
  void stop();

  /// Snapshot of a session: problem id, observations and current report.
  std::string snapshot_json(const std::string& session = "");

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace invdoe::service
