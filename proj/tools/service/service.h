#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <hoi/session/pipeline.h>

namespace hoi {

struct ServiceOptions {
  std::filesystem::path dataDir;  // one <id>/session.json per session
  int workers = 2;                // pipeline job threads
  PipelineConfig config;          // used when a solve request carries no config
};

/// HTTP API over a directory of sessions. Annotation writes are serialized
/// per session and checked against the X-Session-Version header; reads serve
/// the last committed snapshot. Pipeline runs are queued on a fixed worker
/// pool and write <id>/results/.
class SessionService {
 public:
  explicit SessionService(ServiceOptions options);
  ~SessionService();
  SessionService(const SessionService&) = delete;
  SessionService& operator=(const SessionService&) = delete;

  /// Binds host:port (port 0 picks a free one) and returns the bound port,
  /// or -1 on failure.
  int bind(const std::string& host, int port);
  /// Serves requests until stop(). Call after bind().
  void run();
  void stop();
  /// Blocks until the job queue is empty and no job is running.
  void waitForJobs();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hoi
