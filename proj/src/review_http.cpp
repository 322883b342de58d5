#include "labelerr/review_http.hpp"

#include "httplib.h"
#include "labelerr/error.hpp"

namespace labelerr {

int http_status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnknownSession:
    case ErrorKind::UnknownWorker:
    case ErrorKind::UnknownCandidate:
      return 404;
    case ErrorKind::DuplicateJudgment:
    case ErrorKind::NotAssigned:
    case ErrorKind::WrongJudgmentCount:
      return 409;
    case ErrorKind::Io:
      return 500;
    default:
      return 400;
  }
}

namespace {

constexpr const char* kJson = "application/json";

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const Error& e) {
      send_json(res, http_status_for(e.kind()), Json{{"error", to_string(e.kind())}, {"message", e.what()}});
    } catch (const nlohmann::json::exception& e) {
      send_json(res, 400, Json{{"error", "Parse"}, {"message", e.what()}});
    }
  };
}

Json parse_body(const httplib::Request& req) {
  auto body = Json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) throw Error(ErrorKind::Parse, "request body must be a JSON object");
  return body;
}

std::string field(const Json& body, const char* key) {
  if (!body.contains(key) || !body[key].is_string()) {
    throw Error(ErrorKind::Parse, std::string("missing string field '") + key + "'");
  }
  return body[key].get<std::string>();
}

}  // namespace

void mount_review_routes(httplib::Server& server, ReviewService& service,
                         const std::optional<std::filesystem::path>& media_dir) {
  server.Post("/sessions", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    auto request = session_request_from_json(parse_body(req));
    const std::size_t total = request.candidates.size();
    const int w = request.policy.workers_per_candidate;
    const auto id = service.create_session(std::move(request));
    send_json(res, 201, Json{{"session_id", id},
                             {"candidates", total},
                             {"required_judgments", total * static_cast<std::size_t>(w)}});
  }));

  server.Get(R"(/sessions/([^/]+)/next)", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    const std::string session_id = req.matches[1];
    const std::string worker = req.get_param_value("worker");
    const auto next = service.next_candidate(session_id, worker);
    send_json(res, 200, Json{{"session_id", session_id},
                             {"worker_id", worker},
                             {"candidate", next ? presentation_to_json(*next) : Json(nullptr)}});
  }));

  server.Post(R"(/sessions/([^/]+)/judgments)",
              guarded([&service](const httplib::Request& req, httplib::Response& res) {
                const std::string session_id = req.matches[1];
                const auto body = parse_body(req);
                std::string timestamp;
                if (body.contains("timestamp") && body["timestamp"].is_string()) {
                  timestamp = body["timestamp"].get<std::string>();
                }
                const auto j = service.submit_judgment(session_id, field(body, "worker_id"),
                                                       field(body, "candidate_id"), field(body, "response"),
                                                       std::move(timestamp));
                // The canonical choice is not echoed: it would reveal which option was the given label.
                send_json(res, 201, Json{{"accepted", true},
                                         {"session_id", session_id},
                                         {"candidate_id", j.candidate_id},
                                         {"worker_id", j.worker_id},
                                         {"timestamp", j.timestamp}});
              }));

  server.Get(R"(/sessions/([^/]+)/summary)", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, status_to_json(service.session_summary(req.matches[1])));
  }));

  server.Get(R"(/sessions/([^/]+)/export)", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    res.status = 200;
    res.set_content(service.export_log(req.matches[1]), "application/x-ndjson");
  }));

  if (media_dir) server.set_mount_point("/media", media_dir->string());
}

}  // namespace labelerr
