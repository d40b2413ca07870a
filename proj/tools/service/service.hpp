#pragma once

// Session store behind the HTTP API. Every handler takes and returns JSON so
// the store can be exercised without a socket; Server only does routing.

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "atdecor/domain.hpp"
#include "atdecor/predicate.hpp"
#include "atdecor/tree.hpp"

namespace atdecor::service {

struct Response {
  int status = 200;
  nlohmann::json body;
};

struct Event {
  long id = 0;  // per session, increasing from 1
  std::string type;
  nlohmann::json data;
};

class SessionStore {
 public:
  // With a snapshot directory, sessions found there are loaded and every
  // change is written back as <dir>/<id>.json.
  explicit SessionStore(std::optional<std::filesystem::path> snapshot_dir = std::nullopt);
  ~SessionStore();

  SessionStore(const SessionStore&) = delete;
  SessionStore& operator=(const SessionStore&) = delete;

  Response create(const nlohmann::json& body);
  Response get(const std::string& id) const;
  Response mutate(const std::string& id, const nlohmann::json& body);
  Response run(const std::string& id, const nlohmann::json& body);
  Response result(const std::string& id, const std::string& op) const;

  // Events with id > after; waits up to `wait` when none are pending. nullopt
  // for an unknown session or after shutdown().
  std::optional<std::vector<Event>> events(const std::string& id, long after,
                                           std::chrono::milliseconds wait) const;

  // Releases waiting event readers; later reads return nullopt.
  void shutdown();

 private:
  struct Session;

  std::shared_ptr<Session> find(const std::string& id) const;
  void save(const Session& session) const;
  void load_snapshots();
  void emit(Session& session, std::string type, nlohmann::json data);

  std::optional<std::filesystem::path> snapshot_dir_;
  mutable std::mutex mutex_;
  mutable std::condition_variable changed_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  long next_id_ = 1;
  bool closed_ = false;
};

class Server {
 public:
  explicit Server(SessionStore& store);
  ~Server();

  // Binds; port 0 picks a free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  // Serves until stop(). Returns false when the listener failed.
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace atdecor::service
