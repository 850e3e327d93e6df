#include "harvest/fetch.hpp"

#include <netdb.h>

#include <fstream>
#include <system_error>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

namespace harvest {

SystemClock::SystemClock() : start_(std::chrono::steady_clock::now()) {}

Millis SystemClock::now() const {
    return std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now() - start_);
}

void SystemClock::sleep_until(Millis t) { std::this_thread::sleep_until(start_ + t); }

Millis VirtualClock::now() const {
    std::lock_guard lock(mu_);
    return now_;
}

void VirtualClock::sleep_until(Millis t) {
    std::lock_guard lock(mu_);
    if (t > now_) now_ = t;
}

void VirtualClock::advance(Millis d) {
    std::lock_guard lock(mu_);
    now_ += d;
}

std::string_view to_string(FetchError e) {
    switch (e) {
        case FetchError::none: return "none";
        case FetchError::dns: return "dns";
        case FetchError::connect: return "connect";
        case FetchError::timeout: return "timeout";
        case FetchError::io: return "io";
        case FetchError::unsupported: return "unsupported";
    }
    return "unknown";
}

std::string FetchResult::describe_failure() const {
    if (ok()) return {};
    if (network_error()) return std::string(to_string(error)) + " error fetching " + url + ": " + message;
    return "HTTP " + std::to_string(status) + " fetching " + url;
}

namespace {

bool resolves(const std::string& host) {
    addrinfo hints{};
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const int rc = ::getaddrinfo(host.c_str(), nullptr, &hints, &res);
    if (res) ::freeaddrinfo(res);
    return rc == 0;
}

}  // namespace

FetchResult HttpFetcher::fetch(const Url& url, const FetchOptions& opts) {
    FetchResult r;
    r.url = url.str();
    r.final_url = r.url;
    r.attempts = 1;
    if (url.scheme != "http" && url.scheme != "https") {
        r.error = FetchError::unsupported;
        r.message = "scheme " + url.scheme;
        return r;
    }
    httplib::Client client(url.origin());
    const auto secs = opts.timeout.count() / 1000;
    const auto usecs = (opts.timeout.count() % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    client.set_follow_location(true);
    httplib::Headers headers{{"User-Agent", opts.user_agent}};
    auto res = client.Get(url.target(), headers);
    if (!res) {
        const auto err = res.error();
        r.message = httplib::to_string(err);
        switch (err) {
            case httplib::Error::ConnectionTimeout:
            case httplib::Error::Read:
                r.error = FetchError::timeout;
                break;
            case httplib::Error::Connection:
                r.error = resolves(url.host) ? FetchError::connect : FetchError::dns;
                break;
            default:
                r.error = FetchError::io;
        }
        return r;
    }
    r.status = res->status;
    r.body = std::move(res->body);
    r.content_type = res->get_header_value("Content-Type");
    if (!res->location.empty()) r.final_url = res->location;
    return r;
}

std::string percent_decode(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    auto hex = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size()) {
            const int hi = hex(s[i + 1]);
            const int lo = hex(s[i + 2]);
            if (hi >= 0 && lo >= 0) {
                out.push_back(static_cast<char>(hi * 16 + lo));
                i += 2;
                continue;
            }
        }
        out.push_back(s[i]);
    }
    return out;
}

std::filesystem::path file_url_path(const Url& url) { return std::filesystem::path(percent_decode(url.path)); }

std::string file_url(const std::filesystem::path& p) {
    const auto abs = std::filesystem::absolute(p).lexically_normal().generic_string();
    std::string out = "file://";
    for (unsigned char c : abs) {
        if (std::isalnum(c) || std::string_view("/-._~").find(static_cast<char>(c)) != std::string_view::npos) {
            out.push_back(static_cast<char>(c));
        } else {
            static const char* digits = "0123456789ABCDEF";
            out.push_back('%');
            out.push_back(digits[c >> 4]);
            out.push_back(digits[c & 15]);
        }
    }
    return out;
}

FetchResult FileFetcher::fetch(const Url& url, const FetchOptions&) {
    FetchResult r;
    r.url = url.str();
    r.final_url = r.url;
    r.attempts = 1;
    if (url.scheme != "file") {
        r.error = FetchError::unsupported;
        r.message = "scheme " + url.scheme;
        return r;
    }
    if (!url.host.empty() && url.host != "localhost") {
        r.error = FetchError::dns;
        r.message = "remote file host " + url.host;
        return r;
    }
    auto path = file_url_path(url);
    std::error_code ec;
    if (std::filesystem::is_directory(path, ec)) {
        path /= "index.html";
        r.final_url = file_url(path);
    }
    if (!std::filesystem::is_regular_file(path, ec)) {
        r.status = 404;
        return r;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        r.error = FetchError::io;
        r.message = "cannot open " + path.string();
        return r;
    }
    r.body.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    r.status = 200;
    const auto ext = path.extension().string();
    r.content_type = ext == ".html" || ext == ".htm" ? "text/html" : ext == ".txt" ? "text/plain" : "";
    return r;
}

FetchResult DefaultFetcher::fetch(const Url& url, const FetchOptions& opts) {
    if (url.scheme == "file") return file_.fetch(url, opts);
    return http_.fetch(url, opts);
}

HostScheduler::Slot HostScheduler::acquire(const std::string& host) {
    HostState* state;
    {
        std::lock_guard lock(mu_);
        auto& p = hosts_[host];
        if (!p) p = std::make_unique<HostState>();
        state = p.get();
    }
    std::unique_lock busy(state->busy);
    if (state->seen) clock_.sleep_until(state->last + delay_);
    const auto at = clock_.now();
    state->seen = true;
    state->last = at;
    {
        std::lock_guard lock(mu_);
        history_.push_back({host, at});
    }
    return Slot(std::move(busy), at);
}

std::vector<HostScheduler::Start> HostScheduler::history() const {
    std::lock_guard lock(mu_);
    return history_;
}

}  // namespace harvest
