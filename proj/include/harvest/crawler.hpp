#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "harvest/config.hpp"
#include "harvest/fetch.hpp"
#include "harvest/url.hpp"

namespace harvest {

/// march, demonstration, rally, protest.
const std::vector<std::string>& stem_words();

/// Stem of the first token beginning with a stem word, case-insensitive.
/// "rallies" and "rallied" map to rally.
std::optional<std::string> stem_match(std::string_view text);

struct CandidateLink {
    std::string url;  // normalized
    std::string anchor_text;
    std::string matched_stem;
    bool matched_in_url = false;
    bool operator==(const CandidateLink&) const = default;
};

/// Stem-matching anchors of `page` resolved against `base` (or <base href>),
/// deduplicated by normalized URL, in document order.
std::vector<CandidateLink> discover_links(std::string_view page, std::string_view base,
                                          std::vector<std::string>* diagnostics = nullptr);

/// robots.txt rules for one user agent.
class RobotsRules {
public:
    static RobotsRules parse(std::string_view content, std::string_view user_agent);
    static RobotsRules allow_all() { return {}; }
    static RobotsRules deny_all();

    /// `target` is path plus optional query. Longest match wins; Allow wins ties.
    bool allowed(std::string_view target) const;

private:
    struct Rule {
        std::string pattern;
        bool allow = false;
    };
    std::vector<Rule> rules_;
};

/// True when `pattern` (with '*' and a trailing '$') matches a prefix of `target`.
bool robots_pattern_matches(std::string_view pattern, std::string_view target);

struct NewsSource {
    std::string id;
    std::string url;
    std::string label;
    bool respect_robots = true;
};

/// `url<TAB>label[<TAB>norobots]` per line, '#' comments, blank lines skipped.
/// Filesystem paths become file:// URLs relative to `base_dir`. Ids are
/// "src-<line>". Throws ValidationError naming the line.
std::vector<NewsSource> parse_source_list(std::string_view content,
                                          const std::filesystem::path& base_dir = {});
std::vector<NewsSource> load_source_list(const std::filesystem::path& path);

struct FetchPolicy {
    Millis per_host_delay{2000};
    Millis timeout{20000};
    std::size_t max_pages_per_source = 50;
    std::size_t max_parallel_hosts = 8;
    std::string user_agent = "harvest-crawler/1.0";
    bool respect_robots = true;

    /// Throws ConfigError.
    void validate() const;
    /// Keys: crawl.per_host_delay_ms, crawl.timeout_ms, crawl.max_pages_per_source,
    /// crawl.max_parallel_hosts, crawl.user_agent, crawl.respect_robots.
    static FetchPolicy from_config(const KeyValueConfig& cfg);
};

enum class ItemStatus { fetched, failed, cached, disallowed, over_limit };
std::string_view to_string(ItemStatus s);

struct CrawlItem {
    CandidateLink link;
    ItemStatus status = ItemStatus::fetched;
    FetchResult result;  // empty unless fetched or failed
};

struct SourceCrawl {
    NewsSource source;
    FetchResult page;
    std::optional<std::string> error;  // source-level failure
    std::vector<CrawlItem> items;
    std::vector<std::string> diagnostics;

    std::size_t count(ItemStatus s) const;
};

using KnownUrl = std::function<bool(std::string_view)>;

/// One-hop crawler: source page, then each candidate link.
class Crawler {
public:
    /// Throws ConfigError for an invalid policy.
    Crawler(Fetcher& fetcher, Clock& clock, FetchPolicy policy);

    SourceCrawl crawl_source(const NewsSource& source, const KnownUrl& known = {});

    /// Crawls up to max_parallel_hosts sources at once and hands results to
    /// `consume` on the calling thread in source-list order.
    void crawl_all(const std::vector<NewsSource>& sources, const KnownUrl& known,
                   const std::function<void(SourceCrawl&&)>& consume);

    const HostScheduler& scheduler() const { return scheduler_; }
    const FetchPolicy& policy() const { return policy_; }

private:
    struct RobotsEntry {
        std::mutex mu;
        bool ready = false;
        RobotsRules rules;
        std::optional<FetchResult> failure;  // host unreachable
    };

    FetchResult fetch_with_retry(const Url& url);
    const RobotsEntry& robots_for(const Url& url);

    Fetcher& fetcher_;
    Clock& clock_;
    FetchPolicy policy_;
    HostScheduler scheduler_;
    std::mutex robots_mu_;
    std::map<std::string, std::unique_ptr<RobotsEntry>> robots_;
};

}  // namespace harvest
