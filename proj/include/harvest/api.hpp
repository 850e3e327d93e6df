#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <thread>

#include "harvest/pipeline.hpp"
#include "harvest/serialize.hpp"

namespace harvest::api {

struct Response {
    int status = 200;
    std::string body;  // JSON
};

Json to_json(const ArticleRecord& a);
Json to_json(const similarity::WordDiff& d);
Json to_json(const pipeline::ArticleDiff& d);
Json to_json(const pipeline::ReviewQueueItem& item);
Json to_json(const pipeline::SkipQueueItem& item);

/// Request body of POST /v1/articles/{id}/review. Throws ValidationError.
pipeline::ReviewDecision decision_from_json(const Json& j, const AttendeeLexicon& lexicon = AttendeeLexicon::defaults());
/// Inverse of decision_from_json for the event fields.
Json to_json(const pipeline::ReviewDecision& d);

/// JSON routes under /v1. Errors map to 400 (bad request), 404 (unknown
/// route or record), 405 (method), 409 (conflict) and 422 (validation),
/// with body {"error": {"status", "message"}}.
class Router {
public:
    explicit Router(pipeline::Service& service) : service_(service) {}

    Response handle(std::string_view method, std::string_view target, std::string_view body);

private:
    Response dispatch(std::string_view method, std::string_view path, std::string_view body);

    pipeline::Service& service_;
};

/// Serves a Router over HTTP on a background thread.
class Server {
public:
    explicit Server(Router& router);
    ~Server();

    /// Binds and starts listening; port 0 picks a free port. Returns the
    /// bound port. Throws IoError when binding fails.
    int start(const std::string& host, int port);
    /// Blocks until stop() is called from another thread or a signal.
    void wait();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace harvest::api
