#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "crowdcorrect/crowd.hpp"

namespace httplib {
class Server;
}

namespace crowdcorrect {

/// HTTP status for an error code (409 for DUPLICATE_ANSWER and TASK_CLOSED,
/// 404 for unknown ids, 400 for bad input, 500 otherwise).
int http_status(ErrorCode code);

/// {"code": "...", "message": "..."}
nlohmann::json error_body(const Error& error);

nlohmann::json to_json(const Progress& progress);
nlohmann::json to_json(const WorkerProfile& worker);

/// REST front end over a CrowdStore.
///
///   POST /workers           {name, email} -> {worker_id, name, email}
///   GET  /tasks/next        ?worker_id=W&n=10 -> {tasks, no_tasks_available}
///   POST /answers           {task_id, worker_id, choice} -> aggregate result
///   GET  /progress          -> totals
///   GET  /tasks/{id}        -> {task, answers, result}
///
/// Handlers run concurrently; every mutation goes through the store's lock.
class Service {
 public:
  explicit Service(CrowdStore& store);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds host:port (port 0 picks a free one) and returns the bound port.
  /// Throws PortInUse.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void run();
  void stop();

  httplib::Server& server() { return *server_; }

 private:
  CrowdStore& store_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace crowdcorrect
