#include "harvest/api.hpp"

#include <charconv>
#include <vector>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "harvest/error.hpp"
#include "harvest/text.hpp"

namespace harvest::api {

using pipeline::ReviewDecision;

Json to_json(const similarity::WordDiff& d) {
    Json ops = Json::array();
    for (const auto& c : d.ops) ops.push_back({{"op", similarity::to_string(c.kind)}, {"tokens", c.tokens}});
    return {{"ops", std::move(ops)}, {"inserted", d.inserted}, {"deleted", d.deleted}, {"change_ratio", d.change_ratio}};
}

Json to_json(const pipeline::ArticleDiff& d) {
    Json j = to_json(d.diff);
    j["reference_id"] = d.reference.value;
    j["jaccard"] = d.jaccard;
    return j;
}

Json to_json(const ArticleRecord& a) {
    Json j = Json::object();
    j["id"] = a.id.value;
    j["url"] = a.url;
    j["source_id"] = a.source_id;
    j["fetched_at"] = a.fetched_at;
    j["title"] = a.title;
    j["paragraphs"] = a.body;
    j["status"] = to_string(a.status);
    j["suggestions"] = a.suggestions ? harvest::to_json(*a.suggestions) : Json(nullptr);
    return j;
}

Json to_json(const pipeline::ReviewQueueItem& item) {
    Json articles = Json::array();
    for (const auto& a : item.articles) {
        Json j = Json::object();
        j["id"] = a.id.value;
        j["title"] = a.title;
        j["url"] = a.url;
        j["suggestions"] = harvest::to_json(a.suggestions);
        j["diff"] = a.diff ? to_json(*a.diff) : Json(nullptr);
        articles.push_back(std::move(j));
    }
    return {{"group", item.group}, {"articles", std::move(articles)}};
}

Json to_json(const pipeline::SkipQueueItem& item) {
    Json j = {{"id", item.id.value}, {"title", item.title}, {"url", item.url}};
    j["domain_score"] = item.domain_score ? Json(*item.domain_score) : Json(nullptr);
    return j;
}

// -- decisions -------------------------------------------------------------

namespace {

const Json& require(const Json& j, const char* key) {
    if (!j.contains(key)) throw ValidationError(std::string("missing field: ") + key);
    return j.at(key);
}

std::string string_field(const Json& j, const char* key, bool required) {
    if (!j.contains(key) || j.at(key).is_null()) {
        if (required) throw ValidationError(std::string("missing field: ") + key);
        return {};
    }
    if (!j.at(key).is_string()) throw ValidationError(std::string(key) + " must be a string");
    return j.at(key).get<std::string>();
}

std::optional<double> number_field(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    if (!j.at(key).is_number()) throw ValidationError(std::string(key) + " must be a number");
    return j.at(key).get<double>();
}

pipeline::EventDecision event_from_json(const Json& j, const AttendeeLexicon& lexicon) {
    if (!j.is_object()) throw ValidationError("event must be an object");
    pipeline::EventDecision d;
    auto date = Date::parse(string_field(j, "date", true));
    if (!date) throw ValidationError("date must be YYYY-MM-DD");
    d.event.date = *date;
    d.event.location.locality = string_field(j, "locality", false);
    d.event.location.region = string_field(j, "region", false);
    d.event.location.latitude = number_field(j, "latitude");
    d.event.location.longitude = number_field(j, "longitude");
    if (j.contains("attendees") && !j.at("attendees").is_null()) {
        const auto& a = j.at("attendees");
        if (a.is_number_unsigned() || (a.is_number_integer() && a.get<std::int64_t>() >= 0)) {
            d.event.attendee_count = a.get<std::uint64_t>();
        } else if (a.is_string()) {
            d.event.attendee_count = lexicon.parse(a.get<std::string>());
            if (!d.event.attendee_count) throw ValidationError("unrecognized attendee phrase: " + a.get<std::string>());
        } else {
            throw ValidationError("attendees must be a nonnegative integer or a phrase");
        }
    }
    const auto& tags = require(j, "tags");
    if (!tags.is_array()) throw ValidationError("tags must be an array");
    for (const auto& t : tags) {
        if (!t.is_string()) throw ValidationError("tags must be strings");
        d.event.tags.insert(t.get<std::string>());
    }
    const auto tense = j.contains("tense") ? string_field(j, "tense", true) : std::string("past");
    auto parsed = parse_tense(tense);
    if (!parsed) throw ValidationError("tense must be past or future");
    d.tense = *parsed;
    return d;
}

}  // namespace

ReviewDecision decision_from_json(const Json& j, const AttendeeLexicon& lexicon) {
    if (!j.is_object()) throw ValidationError("request body must be an object");
    auto kind = pipeline::parse_decision_kind(string_field(j, "decision", true));
    if (!kind) throw ValidationError("decision must be skip, no_events or events");
    ReviewDecision d;
    d.kind = *kind;
    if (j.contains("events") && !j.at("events").is_null()) {
        if (!j.at("events").is_array()) throw ValidationError("events must be an array");
        for (const auto& e : j.at("events")) d.events.push_back(event_from_json(e, lexicon));
    }
    return d;
}

Json to_json(const ReviewDecision& d) {
    Json events = Json::array();
    for (const auto& e : d.events) {
        Json j = Json::object();
        j["date"] = e.event.date.iso();
        j["locality"] = e.event.location.locality;
        j["region"] = e.event.location.region;
        if (e.event.location.has_coordinates()) {
            j["latitude"] = *e.event.location.latitude;
            j["longitude"] = *e.event.location.longitude;
        }
        if (e.event.attendee_count) j["attendees"] = *e.event.attendee_count;
        j["tags"] = std::vector<std::string>(e.event.tags.begin(), e.event.tags.end());
        j["tense"] = to_string(e.tense);
        events.push_back(std::move(j));
    }
    return {{"decision", pipeline::to_string(d.kind)}, {"events", std::move(events)}};
}

// -- routing ---------------------------------------------------------------

namespace {

struct HttpError {
    int status;
    std::string message;
};

Response json_response(int status, const Json& j) { return {status, j.dump()}; }

Response error_response(int status, const std::string& message) {
    return json_response(status, {{"error", {{"status", status}, {"message", message}}}});
}

std::vector<std::string_view> segments(std::string_view path) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < path.size()) {
        if (path[i] == '/') {
            ++i;
            continue;
        }
        const auto j = path.find('/', i);
        out.push_back(path.substr(i, j - i));
        if (j == std::string_view::npos) break;
        i = j;
    }
    return out;
}

std::int64_t parse_id(std::string_view s) {
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || v <= 0)
        throw HttpError{400, "invalid id: " + std::string(s)};
    return v;
}

Json parse_body(std::string_view body) {
    if (text::trim(body).empty()) throw HttpError{400, "request body required"};
    try {
        return Json::parse(body);
    } catch (const Json::parse_error& e) {
        throw HttpError{400, std::string("malformed JSON: ") + e.what()};
    }
}

void require_method(std::string_view method, std::string_view want) {
    if (method != want) throw HttpError{405, "method " + std::string(method) + " not allowed"};
}

}  // namespace

Response Router::handle(std::string_view method, std::string_view target, std::string_view body) {
    const auto path = target.substr(0, target.find('?'));
    try {
        return dispatch(method, path, body);
    } catch (const HttpError& e) {
        return error_response(e.status, e.message);
    } catch (const NotFoundError& e) {
        return error_response(404, e.what());
    } catch (const ConflictError& e) {
        return error_response(409, e.what());
    } catch (const ValidationError& e) {
        return error_response(422, e.what());
    } catch (const ReferenceError& e) {
        return error_response(422, e.what());
    } catch (const ArgumentError& e) {
        return error_response(400, e.what());
    } catch (const Json::exception& e) {
        return error_response(400, e.what());
    } catch (const std::exception& e) {
        return error_response(500, e.what());
    }
}

Response Router::dispatch(std::string_view method, std::string_view path, std::string_view body) {
    const auto seg = segments(path);
    if (seg.size() < 2 || seg[0] != "v1") throw HttpError{404, "no route for " + std::string(path)};
    const auto resource = seg[1];
    auto& store = service_.store();

    if (resource == "runs" && seg.size() == 4 && seg[3] == "queue") {
        require_method(method, "GET");
        RunId id;
        if (seg[2] == "latest") {
            auto latest = service_.latest_run();
            if (!latest) throw NotFoundError("no runs recorded");
            id = *latest;
        } else {
            id = RunId{parse_id(seg[2])};
        }
        const auto run = service_.run(id);
        Json groups = Json::array();
        for (const auto& item : service_.get_review_queue(id)) groups.push_back(to_json(item));
        Json skip = Json::array();
        for (const auto& item : service_.get_skip_queue(id)) skip.push_back(to_json(item));
        return json_response(200, {{"run_id", id.value},
                                   {"published", run.published()},
                                   {"groups", std::move(groups)},
                                   {"skip_queue", std::move(skip)}});
    }
    if (resource == "runs" && seg.size() == 3) {
        require_method(method, "GET");
        return json_response(200, pipeline::to_json(service_.run(RunId{parse_id(seg[2])})));
    }
    if (resource == "articles" && seg.size() == 3) {
        require_method(method, "GET");
        const ArticleId id{parse_id(seg[2])};
        auto j = to_json(store.article(id));
        Json events = Json::array();
        for (const auto& l : store.links_for_article(id)) {
            auto e = harvest::to_json(store.event(l.event));
            e["tense"] = to_string(l.tense);
            events.push_back(std::move(e));
        }
        j["events"] = std::move(events);
        const auto diff = service_.nearest_diff(id);
        j["diff"] = diff ? to_json(*diff) : Json(nullptr);
        return json_response(200, j);
    }
    if (resource == "articles" && seg.size() == 4 && seg[3] == "review") {
        require_method(method, "POST");
        const ArticleId id{parse_id(seg[2])};
        const auto decision = decision_from_json(parse_body(body));
        auto updated = service_.submit_review(id, decision);
        auto j = to_json(updated);
        Json links = Json::array();
        for (const auto& l : store.links_for_article(id)) links.push_back(harvest::to_json(l));
        j["links"] = std::move(links);
        return json_response(200, j);
    }
    if (resource == "suggestions" && seg.size() == 3) {
        require_method(method, "GET");
        const ArticleId id{parse_id(seg[2])};
        auto j = harvest::to_json(service_.get_suggestions(id));
        j["article_id"] = id.value;
        return json_response(200, j);
    }
    if (resource == "events" && seg.size() == 4 && seg[3] == "merge") {
        require_method(method, "POST");
        const EventId from{parse_id(seg[2])};
        const auto req = parse_body(body);
        if (!req.is_object() || !req.contains("into") || !req.at("into").is_number_integer())
            throw ValidationError("body must be {\"into\": <event id>}");
        const EventId into{req.at("into").get<std::int64_t>()};
        if (from == into) throw ValidationError("cannot merge an event into itself");
        store.merge_events(from, into);
        Json links = Json::array();
        for (const auto& l : store.links_for_event(into)) links.push_back(harvest::to_json(l));
        return json_response(200, {{"merged", from.value}, {"into", harvest::to_json(store.event(into))},
                                   {"links", std::move(links)}});
    }
    if (resource == "stats" && seg.size() == 2) {
        require_method(method, "GET");
        return json_response(200, harvest::to_json(store.compute_stats()));
    }
    if (resource == "taxonomy" && seg.size() == 2) {
        require_method(method, "GET");
        return json_response(200, harvest::to_json(store.taxonomy()));
    }
    throw HttpError{404, "no route for " + std::string(path)};
}

// -- server ----------------------------------------------------------------

struct Server::Impl {
    httplib::Server http;
    std::thread thread;
};

Server::Server(Router& router) : impl_(std::make_unique<Impl>()) {
    auto handler = [&router](const httplib::Request& req, httplib::Response& res) {
        const auto r = router.handle(req.method, req.target, req.body);
        res.status = r.status;
        res.set_content(r.body, "application/json");
    };
    // Default options set SO_REUSEPORT, which lets a second server share a busy port.
    impl_->http.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    impl_->http.Get(R"(/.*)", handler);
    impl_->http.Post(R"(/.*)", handler);
    impl_->http.Put(R"(/.*)", handler);
    impl_->http.Delete(R"(/.*)", handler);
    impl_->http.Patch(R"(/.*)", handler);
}

Server::~Server() { stop(); }

int Server::start(const std::string& host, int port) {
    int bound = port == 0 ? impl_->http.bind_to_any_port(host) : (impl_->http.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
    impl_->thread = std::thread([this] { impl_->http.listen_after_bind(); });
    impl_->http.wait_until_ready();
    return bound;
}

void Server::wait() {
    if (impl_->thread.joinable()) impl_->thread.join();
}

void Server::stop() {
    impl_->http.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace harvest::api
