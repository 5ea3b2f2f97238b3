#include "crowdcorrect/service.hpp"

#include <charconv>

#include <httplib.h>

namespace crowdcorrect {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxBatch = 100;

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& error) {
  send_json(res, http_status(error.code()), error_body(error));
}

json parse_body(const httplib::Request& req) {
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    throw Error(ErrorCode::MalformedJson, "request body must be a JSON object");
  }
  return body;
}

std::string required_string(const json& body, const char* key) {
  if (!body.contains(key)) throw Error(ErrorCode::MissingField, std::string("missing ") + key);
  if (!body[key].is_string()) {
    throw Error(ErrorCode::InvalidField, std::string(key) + " must be a string");
  }
  return body[key].get<std::string>();
}

// Runs a handler, mapping library errors to the documented error body.
template <typename F>
httplib::Server::Handler guarded(F handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const json::exception& e) {
      send_error(res, Error(ErrorCode::InvalidField, e.what()));
    }
  };
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateAnswer:
    case ErrorCode::TaskClosed:
      return 409;
    case ErrorCode::UnknownTask:
    case ErrorCode::UnknownWorker:
      return 404;
    case ErrorCode::MalformedJson:
    case ErrorCode::MissingField:
    case ErrorCode::EmptyText:
    case ErrorCode::InvalidField:
    case ErrorCode::InvalidChoice:
    case ErrorCode::InvalidArgument:
    case ErrorCode::PreconditionFailed:
      return 400;
    default:
      return 500;
  }
}

json error_body(const Error& error) {
  return {{"code", std::string(to_string(error.code()))}, {"message", error.what()}};
}

json to_json(const Progress& p) {
  return {{"tasks", p.tasks},     {"open", p.open},       {"resolved", p.resolved},
          {"exhausted", p.exhausted}, {"answers", p.answers}, {"workers", p.workers}};
}

json to_json(const WorkerProfile& worker) {
  return {{"worker_id", worker.worker_id}, {"name", worker.name}, {"email", worker.email}};
}

Service::Service(CrowdStore& store)
    : store_(store), server_(std::make_unique<httplib::Server>()) {
  httplib::Server& srv = *server_;
  // No SO_REUSEPORT: a second server on a taken port must fail to bind.
  srv.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes),
                 sizeof yes);
  });

  srv.Post("/workers", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const std::string name = required_string(body, "name");
    const std::string email = required_string(body, "email");
    if (trim(email).empty()) throw Error(ErrorCode::InvalidField, "email must be non-empty");
    send_json(res, 200, to_json(store_.register_worker(name, email)));
  }));

  srv.Get("/tasks/next", guarded([this](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("worker_id")) {
      throw Error(ErrorCode::MissingField, "missing worker_id");
    }
    std::size_t n = kDefaultBatchSize;
    if (req.has_param("n")) {
      const std::string text = req.get_param_value("n");
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
      if (ec != std::errc{} || ptr != text.data() + text.size() || n == 0 || n > kMaxBatch) {
        throw Error(ErrorCode::InvalidArgument, "n must be an integer in 1.." +
                                                    std::to_string(kMaxBatch));
      }
    }
    const Batch batch = store_.next_batch(req.get_param_value("worker_id"), n);
    json tasks = json::array();
    for (const auto& task : batch.tasks) tasks.push_back(to_json(task));
    send_json(res, 200, {{"tasks", tasks}, {"no_tasks_available", batch.no_tasks_available}});
  }));

  srv.Post("/answers", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    if (!body.contains("choice")) throw Error(ErrorCode::MissingField, "missing choice");
    Answer answer;
    answer.task_id = required_string(body, "task_id");
    answer.worker_id = required_string(body, "worker_id");
    answer.choice = choice_from_json(body["choice"]);
    send_json(res, 200, to_json(store_.submit_answer(std::move(answer))));
  }));

  srv.Get("/progress", guarded([this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, to_json(store_.progress()));
  }));

  srv.Get(R"(/tasks/(.+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const auto record = store_.task(id);
    if (!record) throw Error(ErrorCode::UnknownTask, "unknown task " + id);
    send_json(res, 200,
              {{"task", to_json(record->task)},
               {"answers", record->answers.size()},
               {"result", to_json(record->result)}});
  }));

  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    if (res.status == 404) {
      send_json(res, 404, {{"code", "NOT_FOUND"}, {"message", "no such endpoint"}});
    }
  });
}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host)
                              : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error(ErrorCode::PortInUse,
                "cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void Service::run() { server_->listen_after_bind(); }

void Service::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

}  // namespace crowdcorrect
