#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "harvest/url.hpp"

namespace harvest {

using Millis = std::chrono::milliseconds;

/// Monotonic time source; crawler politeness is measured against it.
class Clock {
public:
    virtual ~Clock() = default;
    virtual Millis now() const = 0;
    virtual void sleep_until(Millis t) = 0;
};

/// steady_clock relative to construction.
class SystemClock : public Clock {
public:
    SystemClock();
    Millis now() const override;
    void sleep_until(Millis t) override;

private:
    std::chrono::steady_clock::time_point start_;
};

/// Manually driven clock. sleep_until jumps forward instead of blocking.
class VirtualClock : public Clock {
public:
    explicit VirtualClock(Millis start = Millis{0}) : now_(start) {}
    Millis now() const override;
    void sleep_until(Millis t) override;
    void advance(Millis d);

private:
    mutable std::mutex mu_;
    Millis now_;
};

enum class FetchError { none, dns, connect, timeout, io, unsupported };
std::string_view to_string(FetchError e);

struct FetchOptions {
    Millis timeout{20000};
    std::string user_agent = "harvest-crawler/1.0";
};

struct FetchResult {
    std::string url;        // requested URL
    std::string final_url;  // after redirects
    int status = 0;         // 0 when no response arrived
    std::string body;
    std::string content_type;
    FetchError error = FetchError::none;
    std::string message;
    int attempts = 0;
    Millis started{0};

    bool network_error() const { return error != FetchError::none; }
    bool ok() const { return !network_error() && status >= 200 && status < 300; }
    /// Human-readable failure, empty when ok().
    std::string describe_failure() const;
};

/// One request, no retry; implementations never throw for transport errors.
class Fetcher {
public:
    virtual ~Fetcher() = default;
    virtual FetchResult fetch(const Url& url, const FetchOptions& opts) = 0;
};

/// http/https through cpp-httplib with redirects followed.
class HttpFetcher : public Fetcher {
public:
    FetchResult fetch(const Url& url, const FetchOptions& opts) override;
};

/// file: URLs. A directory serves its index.html; a missing file is a 404.
class FileFetcher : public Fetcher {
public:
    FetchResult fetch(const Url& url, const FetchOptions& opts) override;
};

/// Dispatches on scheme to the HTTP or file fetcher.
class DefaultFetcher : public Fetcher {
public:
    FetchResult fetch(const Url& url, const FetchOptions& opts) override;

private:
    HttpFetcher http_;
    FileFetcher file_;
};

/// Filesystem path for a file: URL, percent-decoded.
std::filesystem::path file_url_path(const Url& url);
/// file:// URL for an absolute or relative filesystem path.
std::string file_url(const std::filesystem::path& p);

std::string percent_decode(std::string_view s);

/// Serializes fetches per host and spaces their start times by at least
/// `delay`. Different hosts proceed independently.
class HostScheduler {
public:
    struct Start {
        std::string host;
        Millis at;
    };

    class Slot {
    public:
        Slot(std::unique_lock<std::mutex> lock, Millis at) : lock_(std::move(lock)), at_(at) {}
        Millis at() const { return at_; }

    private:
        std::unique_lock<std::mutex> lock_;
        Millis at_;
    };

    HostScheduler(Clock& clock, Millis delay) : clock_(clock), delay_(delay) {}

    /// Blocks until `host` is free and its delay has elapsed.
    Slot acquire(const std::string& host);
    std::vector<Start> history() const;

private:
    struct HostState {
        std::mutex busy;
        bool seen = false;
        Millis last{0};
    };

    Clock& clock_;
    Millis delay_;
    mutable std::mutex mu_;
    std::map<std::string, std::unique_ptr<HostState>> hosts_;
    std::vector<Start> history_;
};

}  // namespace harvest
