#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "therasim/behavior_model.hpp"
#include "therasim/child_simulator.hpp"
#include "therasim/error.hpp"
#include "therasim/session.hpp"

namespace therasim {

struct ServiceResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// Transport-independent request handling for the session API. Each session
// carries its own lock; the registry lock is held only for lookups.
class SessionService {
 public:
  SessionService(BehaviorCatalog catalog, InstantiationTable table,
                 std::optional<std::filesystem::path> trace_dir = std::nullopt);

  ServiceResponse handle(const std::string& method, const std::string& path, const std::string& body);

  ServiceResponse get_catalog() const;
  ServiceResponse list_sessions() const;
  ServiceResponse create_session(const std::string& body);
  ServiceResponse get_session(const std::string& id);
  ServiceResponse step_session(const std::string& id, const std::string& body);
  ServiceResponse decide_session(const std::string& id, const std::string& body);
  ServiceResponse get_trace(const std::string& id);

 private:
  struct Entry {
    std::mutex mutex;
    Session session;
    Entry(SessionConfig config, const BehaviorCatalog& catalog, const InstantiationTable& table)
        : session(std::move(config), catalog, table) {}
  };

  std::shared_ptr<Entry> lookup(const std::string& id) const;
  void save_if_finished(const std::string& id, const Session& session) const;

  BehaviorCatalog catalog_;
  InstantiationTable table_;
  std::optional<std::filesystem::path> trace_dir_;
  mutable std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t next_id_ = 1;
};

ServiceResponse error_response(ErrorCode code, const std::string& message);

// HTTP front end for a SessionService. Optionally serves a static directory at "/".
class HttpServer {
 public:
  explicit HttpServer(SessionService& service, const std::optional<std::filesystem::path>& static_dir = std::nullopt);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  // Blocks until stop() is called from another thread.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// bind + listen; blocks until the process stops.
void serve_http(SessionService& service, const std::string& host, int port,
                const std::optional<std::filesystem::path>& static_dir = std::nullopt);

}  // namespace therasim
