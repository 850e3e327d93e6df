#include "harvest/crawler.hpp"

#include <algorithm>
#include <condition_variable>
#include <fstream>
#include <set>
#include <thread>

#include "harvest/error.hpp"
#include "harvest/html.hpp"
#include "harvest/text.hpp"

namespace harvest {

// -- stems -----------------------------------------------------------------

const std::vector<std::string>& stem_words() {
    static const std::vector<std::string> words{"march", "demonstration", "rally", "protest"};
    return words;
}

std::optional<std::string> stem_match(std::string_view s) {
    static const std::pair<std::string_view, std::string_view> prefixes[] = {
        {"march", "march"}, {"demonstration", "demonstration"}, {"rally", "rally"},
        {"ralli", "rally"}, {"protest", "protest"}};
    for (const auto& tok : text::word_tokens(s))
        for (const auto& [prefix, stem] : prefixes)
            if (tok.starts_with(prefix)) return std::string(stem);
    return std::nullopt;
}

// -- links -----------------------------------------------------------------

namespace {

bool looks_binary(std::string_view page) {
    const auto head = page.substr(0, 1024);
    return head.find('\0') != std::string_view::npos;
}

}  // namespace

std::vector<CandidateLink> discover_links(std::string_view page, std::string_view base,
                                          std::vector<std::string>* diagnostics) {
    auto note = [&](std::string msg) {
        if (diagnostics) diagnostics->push_back(std::move(msg));
    };
    std::vector<CandidateLink> out;
    auto base_url = parse_url(base);
    if (!base_url) {
        note("base URL is not absolute: " + std::string(base));
        return out;
    }
    if (text::trim(page).empty()) {
        note("empty page at " + std::string(base));
        return out;
    }
    if (looks_binary(page)) {
        note("page at " + std::string(base) + " is not HTML");
        return out;
    }
    const auto doc = html::parse(page);
    for (const auto& d : doc.diagnostics) note(d);

    Url effective = *base_url;
    bool base_seen = false;
    std::set<std::string> seen;
    html::walk(*doc.root, [&](const html::Node& n) {
        if (n.kind != html::Node::Kind::element) return;
        if (n.name == "base" && !base_seen) {
            if (auto href = n.attribute("href")) {
                if (auto b = resolve_url(*base_url, *href)) effective = *b;
                base_seen = true;
            }
            return;
        }
        if (n.name != "a" && n.name != "area") return;
        const auto href = n.attribute("href");
        if (!href || text::trim(*href).empty()) return;
        auto target = resolve_url(effective, *href);
        if (!target) return;
        if (target->scheme != "http" && target->scheme != "https" && target->scheme != "file") return;
        auto norm = normalize_url(*target);
        auto url = norm.str();
        if (seen.count(url)) return;
        const auto anchor = text::normalize_whitespace(
            n.name == "area" ? n.attribute("alt").value_or("") : html::text_content(n));
        CandidateLink link;
        if (auto stem = stem_match(anchor)) {
            link.matched_stem = *stem;
        } else if (auto path_stem = stem_match(percent_decode(norm.path))) {
            link.matched_stem = *path_stem;
            link.matched_in_url = true;
        } else {
            return;
        }
        seen.insert(url);
        link.url = std::move(url);
        link.anchor_text = anchor;
        out.push_back(std::move(link));
    });
    return out;
}

// -- robots ----------------------------------------------------------------

bool robots_pattern_matches(std::string_view pattern, std::string_view target) {
    bool anchored = !pattern.empty() && pattern.back() == '$';
    if (anchored) pattern.remove_suffix(1);
    // Iterative wildcard match; '*' spans any run.
    std::size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
    while (true) {
        if (p == pattern.size()) {
            if (!anchored || t == target.size()) return true;
            if (star == std::string_view::npos) return false;
        } else if (pattern[p] == '*') {
            star = p++;
            mark = t;
            continue;
        } else if (t < target.size() && pattern[p] == target[t]) {
            ++p;
            ++t;
            continue;
        } else if (star == std::string_view::npos) {
            return false;
        }
        if (mark >= target.size()) return false;
        p = star + 1;
        t = ++mark;
    }
}

RobotsRules RobotsRules::deny_all() {
    RobotsRules r;
    r.rules_.push_back({"/", false});
    return r;
}

RobotsRules RobotsRules::parse(std::string_view content, std::string_view user_agent) {
    std::string product = text::to_lower(user_agent.substr(0, user_agent.find_first_of("/ ")));
    struct Group {
        std::vector<std::string> agents;
        std::vector<Rule> rules;
    };
    std::vector<Group> groups;
    bool in_agents = false;
    for (auto line_sv : text::split_lines(content)) {
        std::string_view line = line_sv;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const auto colon = line.find(':');
        if (colon == std::string_view::npos) continue;
        const auto key = text::to_lower(text::trim(line.substr(0, colon)));
        const auto value = std::string(text::trim(line.substr(colon + 1)));
        if (key == "user-agent") {
            if (!in_agents) groups.emplace_back();
            groups.back().agents.push_back(text::to_lower(value));
            in_agents = true;
        } else if (key == "allow" || key == "disallow") {
            in_agents = false;
            if (groups.empty() || value.empty()) continue;
            groups.back().rules.push_back({value, key == "allow"});
        } else {
            in_agents = false;
        }
    }
    std::size_t best_len = 0;
    bool specific = false;
    RobotsRules out;
    for (const auto& g : groups) {
        for (const auto& a : g.agents) {
            if (a == "*") {
                if (!specific) out.rules_.insert(out.rules_.end(), g.rules.begin(), g.rules.end());
            } else if (!product.empty() && product.starts_with(a) && a.size() >= best_len) {
                if (!specific || a.size() > best_len) out.rules_.clear();
                specific = true;
                best_len = a.size();
                out.rules_.insert(out.rules_.end(), g.rules.begin(), g.rules.end());
            }
        }
    }
    return out;
}

bool RobotsRules::allowed(std::string_view target) const {
    if (target == "/robots.txt") return true;
    std::size_t best = 0;
    bool verdict = true;
    bool any = false;
    for (const auto& r : rules_) {
        if (!robots_pattern_matches(r.pattern, target)) continue;
        const auto len = r.pattern.size();
        if (!any || len > best || (len == best && r.allow)) {
            best = len;
            verdict = r.allow;
            any = true;
        }
    }
    return verdict;
}

// -- sources and policy ----------------------------------------------------

std::vector<NewsSource> parse_source_list(std::string_view content, const std::filesystem::path& base_dir) {
    std::vector<NewsSource> out;
    std::set<std::string> urls;
    std::size_t line_no = 0;
    for (auto raw : text::split_lines(content)) {
        ++line_no;
        auto line = text::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
            const auto tab = line.find('\t', start);
            fields.push_back(text::trim(line.substr(start, tab - start)));
            if (tab == std::string_view::npos) break;
            start = tab + 1;
        }
        const auto where = "source list line " + std::to_string(line_no);
        if (fields.size() < 2 || fields[0].empty()) throw ValidationError(where + ": expected url<TAB>label");
        if (fields.size() > 3) throw ValidationError(where + ": too many fields");
        NewsSource s;
        s.id = "src-" + std::to_string(line_no);
        s.label = std::string(fields[1]);
        std::string url(fields[0]);
        auto parsed = parse_url(url);
        if (!parsed) {
            if (url.find("://") != std::string::npos) throw ValidationError(where + ": malformed URL " + url);
            std::filesystem::path p(url);
            if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
            url = file_url(p);
            parsed = parse_url(url);
        }
        if (!parsed || (parsed->scheme != "http" && parsed->scheme != "https" && parsed->scheme != "file"))
            throw ValidationError(where + ": unsupported URL " + url);
        s.url = normalize_url(*parsed).str();
        if (fields.size() == 3) {
            if (fields[2] != "norobots") throw ValidationError(where + ": unknown flag " + std::string(fields[2]));
            s.respect_robots = false;
        }
        if (!urls.insert(s.url).second) throw ValidationError(where + ": duplicate source " + s.url);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<NewsSource> load_source_list(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read source list " + path.string());
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_source_list(content, path.parent_path());
}

void FetchPolicy::validate() const {
    if (per_host_delay.count() <= 0) throw ConfigError("per_host_delay must be positive");
    if (timeout.count() <= 0) throw ConfigError("timeout must be positive");
    if (max_pages_per_source < 1) throw ConfigError("max_pages_per_source must be at least 1");
    if (max_parallel_hosts < 1) throw ConfigError("max_parallel_hosts must be at least 1");
    if (user_agent.empty()) throw ConfigError("user_agent must not be empty");
}

FetchPolicy FetchPolicy::from_config(const KeyValueConfig& cfg) {
    FetchPolicy p;
    auto count = [&](std::string_view key, std::int64_t fallback) {
        const auto v = cfg.get_int(key, fallback);
        if (v < 1) throw ConfigError(std::string(key) + " must be at least 1");
        return v;
    };
    p.per_host_delay = Millis{count("crawl.per_host_delay_ms", p.per_host_delay.count())};
    p.timeout = Millis{count("crawl.timeout_ms", p.timeout.count())};
    p.max_pages_per_source = static_cast<std::size_t>(count("crawl.max_pages_per_source", 50));
    p.max_parallel_hosts = static_cast<std::size_t>(count("crawl.max_parallel_hosts", 8));
    p.user_agent = cfg.get_string("crawl.user_agent", p.user_agent);
    p.respect_robots = cfg.get_bool("crawl.respect_robots", p.respect_robots);
    p.validate();
    return p;
}

std::string_view to_string(ItemStatus s) {
    switch (s) {
        case ItemStatus::fetched: return "fetched";
        case ItemStatus::failed: return "failed";
        case ItemStatus::cached: return "cached";
        case ItemStatus::disallowed: return "disallowed";
        case ItemStatus::over_limit: return "over_limit";
    }
    return "unknown";
}

std::size_t SourceCrawl::count(ItemStatus s) const {
    return static_cast<std::size_t>(
        std::count_if(items.begin(), items.end(), [&](const CrawlItem& i) { return i.status == s; }));
}

// -- crawler ---------------------------------------------------------------

Crawler::Crawler(Fetcher& fetcher, Clock& clock, FetchPolicy policy)
    : fetcher_(fetcher), clock_(clock), policy_((policy.validate(), std::move(policy))),
      scheduler_(clock, policy_.per_host_delay) {}

FetchResult Crawler::fetch_with_retry(const Url& url) {
    FetchOptions opts{policy_.timeout, policy_.user_agent};
    FetchResult r;
    for (int attempt = 1; attempt <= 2; ++attempt) {
        auto slot = scheduler_.acquire(url.scheme == "file" ? "file://" + url.host : url.host);
        r = fetcher_.fetch(url, opts);
        r.started = slot.at();
        r.attempts = attempt;
        if (!r.network_error() || r.error == FetchError::unsupported) break;
        opts.timeout *= 2;
    }
    return r;
}

const Crawler::RobotsEntry& Crawler::robots_for(const Url& url) {
    RobotsEntry* entry;
    {
        std::lock_guard lock(robots_mu_);
        auto& p = robots_[url.origin()];
        if (!p) p = std::make_unique<RobotsEntry>();
        entry = p.get();
    }
    std::lock_guard lock(entry->mu);
    if (entry->ready) return *entry;
    entry->ready = true;
    if (url.scheme == "file") return *entry;
    Url robots = url;
    robots.path = "/robots.txt";
    robots.query.reset();
    robots.fragment.reset();
    auto r = fetch_with_retry(robots);
    if (r.network_error()) {
        entry->failure = std::move(r);
    } else if (r.status >= 500) {
        entry->rules = RobotsRules::deny_all();
    } else if (r.ok()) {
        entry->rules = RobotsRules::parse(r.body, policy_.user_agent);
    }
    return *entry;
}

SourceCrawl Crawler::crawl_source(const NewsSource& source, const KnownUrl& known) {
    SourceCrawl out;
    out.source = source;
    const bool robots = policy_.respect_robots && source.respect_robots;
    const auto src = parse_url(source.url);
    if (!src) {
        out.error = "source URL is not absolute: " + source.url;
        return out;
    }
    if (robots) {
        const auto& entry = robots_for(*src);
        if (entry.failure) {
            out.page = *entry.failure;
            out.page.url = source.url;
            out.error = out.page.describe_failure();
            return out;
        }
        if (!entry.rules.allowed(src->target())) {
            out.error = "robots.txt disallows " + source.url;
            return out;
        }
    }
    out.page = fetch_with_retry(*src);
    if (!out.page.ok()) {
        out.error = out.page.describe_failure();
        return out;
    }
    const auto links = discover_links(out.page.body, out.page.final_url, &out.diagnostics);
    std::size_t fetched = 0;
    for (const auto& link : links) {
        CrawlItem item;
        item.link = link;
        const auto url = parse_url(link.url);
        if (known && known(link.url)) {
            item.status = ItemStatus::cached;
        } else if (fetched >= policy_.max_pages_per_source) {
            item.status = ItemStatus::over_limit;
        } else if (const RobotsEntry* entry = robots ? &robots_for(*url) : nullptr;
                   entry && entry->failure) {
            item.status = ItemStatus::failed;
            item.result = *entry->failure;
            item.result.url = link.url;
        } else if (entry && !entry->rules.allowed(url->target())) {
            item.status = ItemStatus::disallowed;
        } else {
            item.result = fetch_with_retry(*url);
            ++fetched;
            item.status = item.result.ok() ? ItemStatus::fetched : ItemStatus::failed;
        }
        out.items.push_back(std::move(item));
    }
    return out;
}

void Crawler::crawl_all(const std::vector<NewsSource>& sources, const KnownUrl& known,
                        const std::function<void(SourceCrawl&&)>& consume) {
    const std::size_t n = sources.size();
    if (n == 0) return;
    std::vector<std::optional<SourceCrawl>> slots(n);
    std::mutex mu;
    std::condition_variable ready;
    std::size_t next = 0;

    auto worker = [&] {
        while (true) {
            std::size_t i;
            {
                std::lock_guard lock(mu);
                if (next >= n) return;
                i = next++;
            }
            SourceCrawl result;
            try {
                result = crawl_source(sources[i], known);
            } catch (const std::exception& e) {
                result.source = sources[i];
                result.error = e.what();
            }
            {
                std::lock_guard lock(mu);
                slots[i] = std::move(result);
            }
            ready.notify_all();
        }
    };
    const auto workers = std::min(policy_.max_parallel_hosts, n);
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);

    for (std::size_t i = 0; i < n; ++i) {
        SourceCrawl item;
        {
            std::unique_lock lock(mu);
            ready.wait(lock, [&] { return slots[i].has_value(); });
            item = std::move(*slots[i]);
            slots[i].reset();
        }
        consume(std::move(item));
    }
}

}  // namespace harvest
