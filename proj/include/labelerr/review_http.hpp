#pragma once

#include <filesystem>
#include <optional>

#include "labelerr/error.hpp"
#include "labelerr/review.hpp"

namespace httplib {
class Server;
}

namespace labelerr {

// Registers the review endpoints on `server`:
//   POST /sessions                      create a session
//   GET  /sessions/{id}/next?worker=W   next candidate for a reviewer
//   POST /sessions/{id}/judgments       submit {worker_id, candidate_id, response}
//   GET  /sessions/{id}/summary         live tallies and progress
//   GET  /sessions/{id}/export          judgment log, one JSON record per line
// and, when `media_dir` is set, serves its files under /media.
void mount_review_routes(httplib::Server& server, ReviewService& service,
                         const std::optional<std::filesystem::path>& media_dir = std::nullopt);

int http_status_for(ErrorKind kind);

}  // namespace labelerr
