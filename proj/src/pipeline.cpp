#include "harvest/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <set>

#include "harvest/error.hpp"
#include "harvest/ordering.hpp"
#include "harvest/text.hpp"

namespace harvest::pipeline {

namespace sim = harvest::similarity;

std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::created: return "created";
        case Stage::ingested: return "ingested";
        case Stage::deduplicated: return "deduplicated";
        case Stage::suggested: return "suggested";
        case Stage::ordered: return "ordered";
    }
    return "unknown";
}

std::optional<Stage> parse_stage(std::string_view s) {
    for (auto st : {Stage::created, Stage::ingested, Stage::deduplicated, Stage::suggested, Stage::ordered})
        if (to_string(st) == s) return st;
    return std::nullopt;
}

std::string_view to_string(ReviewDecision::Kind k) {
    switch (k) {
        case ReviewDecision::Kind::skip: return "skip";
        case ReviewDecision::Kind::no_events: return "no_events";
        case ReviewDecision::Kind::events: return "events";
    }
    return "unknown";
}

std::optional<ReviewDecision::Kind> parse_decision_kind(std::string_view s) {
    for (auto k : {ReviewDecision::Kind::skip, ReviewDecision::Kind::no_events, ReviewDecision::Kind::events})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

// -- run payload -----------------------------------------------------------

namespace {

Json ids_json(const std::vector<ArticleId>& ids) {
    Json a = Json::array();
    for (auto id : ids) a.push_back(id.value);
    return a;
}

std::vector<ArticleId> ids_from(const Json& j) {
    std::vector<ArticleId> out;
    for (const auto& v : j) out.emplace_back(v.get<std::int64_t>());
    return out;
}

}  // namespace

Json to_json(const PipelineRun& r) {
    const auto& c = r.counts;
    Json counts = {{"sources", c.sources},
                   {"sources_failed", c.sources_failed},
                   {"candidates", c.candidates},
                   {"fetched", c.fetched},
                   {"cached", c.cached},
                   {"fetch_failures", c.fetch_failures},
                   {"extraction_failures", c.extraction_failures},
                   {"articles_stored", c.articles_stored},
                   {"auto_associated", c.auto_associated},
                   {"queued_for_review", c.queued_for_review},
                   {"queued_for_skip_review", c.queued_for_skip_review}};
    Json assoc = Json::array();
    for (const auto& a : r.associations)
        assoc.push_back({{"article_id", a.article.value},
                         {"reviewed_id", a.reviewed.value},
                         {"jaccard", a.jaccard},
                         {"change_ratio", a.change_ratio}});
    Json nearest = Json::array();
    for (const auto& n : r.nearest)
        nearest.push_back({{"article_id", n.article.value}, {"reviewed_id", n.reviewed.value}, {"jaccard", n.jaccard}});
    Json groups = Json::array();
    for (const auto& g : r.groups) groups.push_back(ids_json(g));
    Json j = Json::object();
    j["id"] = r.id.value;
    j["started_at"] = r.started_at;
    j["finished_at"] = r.finished_at.empty() ? Json(nullptr) : Json(r.finished_at);
    j["stage"] = to_string(r.stage);
    j["published"] = r.published();
    j["counts"] = std::move(counts);
    j["new_articles"] = ids_json(r.new_articles);
    j["associations"] = std::move(assoc);
    j["nearest"] = std::move(nearest);
    j["groups"] = std::move(groups);
    j["skip_queue"] = ids_json(r.skip_queue);
    j["errors"] = r.errors;
    return j;
}

PipelineRun run_from_json(RunId id, const Json& j) {
    try {
        PipelineRun r;
        r.id = id;
        r.started_at = j.at("started_at").get<std::string>();
        if (!j.at("finished_at").is_null()) r.finished_at = j.at("finished_at").get<std::string>();
        auto stage = parse_stage(j.at("stage").get<std::string>());
        if (!stage) throw StoreError("unknown run stage");
        r.stage = *stage;
        const auto& c = j.at("counts");
        auto n = [&](const char* k) { return c.at(k).get<std::size_t>(); };
        r.counts = {n("sources"),        n("sources_failed"),      n("candidates"),       n("fetched"),
                    n("cached"),         n("fetch_failures"),      n("extraction_failures"),
                    n("articles_stored"), n("auto_associated"),    n("queued_for_review"),
                    n("queued_for_skip_review")};
        r.new_articles = ids_from(j.at("new_articles"));
        for (const auto& a : j.at("associations"))
            r.associations.push_back({ArticleId{a.at("article_id").get<std::int64_t>()},
                                      ArticleId{a.at("reviewed_id").get<std::int64_t>()},
                                      a.at("jaccard").get<double>(), a.at("change_ratio").get<double>()});
        for (const auto& x : j.at("nearest"))
            r.nearest.push_back({ArticleId{x.at("article_id").get<std::int64_t>()},
                                 ArticleId{x.at("reviewed_id").get<std::int64_t>()}, x.at("jaccard").get<double>()});
        for (const auto& g : j.at("groups")) r.groups.push_back(ids_from(g));
        r.skip_queue = ids_from(j.at("skip_queue"));
        r.errors = j.at("errors").get<std::vector<std::string>>();
        return r;
    } catch (const Json::exception& e) {
        throw StoreError(std::string("malformed run payload: ") + e.what());
    }
}

// -- configuration and models ----------------------------------------------

PipelineConfig PipelineConfig::from_config(const KeyValueConfig& kv, const std::filesystem::path& base_dir) {
    PipelineConfig c;
    auto path = [&](std::string_view key) -> std::filesystem::path {
        auto v = kv.get(key);
        if (!v || v->empty()) return {};
        std::filesystem::path p(*v);
        return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    };
    auto positive = [&](std::string_view key, std::int64_t fallback) {
        const auto v = kv.get_int(key, fallback);
        if (v < 1) throw ConfigError(std::string(key) + " must be at least 1");
        return static_cast<std::size_t>(v);
    };
    auto ratio = [&](std::string_view key, double fallback) {
        const auto v = kv.get_double(key, fallback);
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(key) + " must be in [0, 1]");
        return v;
    };
    c.source_list = path("pipeline.sources");
    c.model_dir = path("pipeline.model_dir");
    c.fetch = FetchPolicy::from_config(kv);
    c.extract = extractor::ScoringConfig::from_config(kv);
    c.signature.width = positive("shingle.width", static_cast<std::int64_t>(c.signature.width));
    c.signature.k = positive("minhash.k", static_cast<std::int64_t>(c.signature.k));
    c.signature.seed = static_cast<std::uint64_t>(kv.get_int("minhash.seed", static_cast<std::int64_t>(c.signature.seed)));
    c.association.jaccard_min = ratio("associate.jaccard_min", c.association.jaccard_min);
    c.association.change_ratio_max = ratio("associate.change_ratio_max", c.association.change_ratio_max);
    c.group_cut = ratio("order.group_cut", c.group_cut);
    c.diff_min_jaccard = ratio("queue.diff_min_jaccard", c.diff_min_jaccard);
    c.top_k_tags = positive("suggest.top_k", static_cast<std::int64_t>(c.top_k_tags));
    c.max_fpr = ratio("calibrate.max_fpr", c.max_fpr);
    if (kv.contains("calibrate.threshold")) c.skip_threshold = kv.get_double("calibrate.threshold", 0.0);
    c.features.dim = positive("features.dim", static_cast<std::int64_t>(c.features.dim));
    if ((c.features.dim & (c.features.dim - 1)) != 0) throw ConfigError("features.dim must be a power of two");
    c.features.seed = static_cast<std::uint64_t>(kv.get_int("features.seed", static_cast<std::int64_t>(c.features.seed)));
    c.train.iterations = positive("train.iterations", static_cast<std::int64_t>(c.train.iterations));
    c.train.eval_every = positive("train.eval_every", static_cast<std::int64_t>(c.train.eval_every));
    c.train.seed = static_cast<std::uint64_t>(kv.get_int("train.seed", static_cast<std::int64_t>(c.train.seed)));
    c.train.adam.alpha = kv.get_double("train.alpha", c.train.adam.alpha);
    c.train.l2 = kv.get_double("train.l2", c.train.l2);
    if (!(c.train.adam.alpha > 0)) throw ConfigError("train.alpha must be positive");
    if (!(c.train.l2 >= 0)) throw ConfigError("train.l2 must be nonnegative");
    c.train.validate();
    return c;
}

classify::SuggestionModels load_models(const std::filesystem::path& dir, std::size_t top_k) {
    classify::SuggestionModels m;
    m.top_k = top_k;
    if (dir.empty()) return m;
    auto load = [&](const char* name) -> std::shared_ptr<const classify::Scorer> {
        const auto p = dir / name;
        if (!std::filesystem::exists(p)) return nullptr;
        return std::make_shared<classify::LinearScorer>(classify::LinearModel::load(p));
    };
    m.domain = load(kDomainModelFile);
    m.count = load(kCountModelFile);
    m.tags = load(kTagsModelFile);
    m.skip_threshold = read_skip_threshold(dir);
    return m;
}

void write_skip_threshold(const std::filesystem::path& dir, double threshold) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / kSkipThresholdFile);
    out.precision(17);
    out << threshold << "\n";
    if (!out) throw IoError("cannot write " + (dir / kSkipThresholdFile).string());
}

std::optional<double> read_skip_threshold(const std::filesystem::path& dir) {
    std::ifstream in(dir / kSkipThresholdFile);
    if (!in) return std::nullopt;
    double t;
    if (!(in >> t)) throw IoError("malformed " + (dir / kSkipThresholdFile).string());
    return t;
}

std::vector<classify::Example> training_examples(const Store& store, const classify::FeatureConfig& features) {
    std::map<EventId, std::set<std::string>> event_tags;
    for (const auto& e : store.events()) event_tags.emplace(e.id, e.tags);
    std::map<ArticleId, std::vector<EventId>> linked;
    for (const auto& l : store.links()) linked[l.article].push_back(l.event);
    std::vector<classify::Example> out;
    for (const auto& a : store.articles()) {
        if (a.status == ReviewStatus::unreviewed) continue;
        classify::Example ex;
        ex.x = classify::featurize_article(a, features);
        std::set<std::string> tags;
        if (auto it = linked.find(a.id); it != linked.end() && a.status == ReviewStatus::reviewed) {
            ex.event_count = it->second.size();
            for (auto e : it->second) tags.insert(event_tags[e].begin(), event_tags[e].end());
        }
        ex.tags.assign(tags.begin(), tags.end());
        out.push_back(std::move(ex));
    }
    return out;
}

// -- service ---------------------------------------------------------------

Service::Service(Store& store, PipelineConfig cfg, classify::SuggestionModels models, Fetcher* fetcher,
                 Clock* clock, UnixClock now)
    : store_(store), cfg_(std::move(cfg)), models_(std::move(models)), fetcher_(fetcher), clock_(clock),
      now_(std::move(now)) {
    cfg_.fetch.validate();
    models_.top_k = cfg_.top_k_tags;
    if (cfg_.skip_threshold) models_.skip_threshold = cfg_.skip_threshold;
    if (!fetcher_) {
        own_fetcher_ = std::make_unique<DefaultFetcher>();
        fetcher_ = own_fetcher_.get();
    }
    if (!clock_) {
        own_clock_ = std::make_unique<SystemClock>();
        clock_ = own_clock_.get();
    }
    if (!now_) {
        now_ = [] {
            return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
                .count();
        };
    }
}

Service::~Service() = default;

std::string Service::timestamp() const {
    const std::time_t t = static_cast<std::time_t>(now_());
    std::tm tm{};
    ::gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void Service::checkpoint(PipelineRun& run, Stage stage) {
    run.stage = stage;
    if (stage == Stage::ordered) run.finished_at = timestamp();
    store_.update_run(run.id, to_string(stage), to_json(run).dump());
}

PipelineRun Service::run_nightly() {
    std::vector<NewsSource> sources;
    if (!cfg_.source_list.empty()) sources = load_source_list(cfg_.source_list);
    return run_nightly(sources);
}

PipelineRun Service::run_nightly(const std::vector<NewsSource>& sources) {
    PipelineRun run;
    run.started_at = timestamp();
    run.id = store_.create_run(to_string(Stage::created), "{}");
    store_.update_run(run.id, to_string(Stage::created), to_json(run).dump());
    return continue_run(std::move(run), sources);
}

PipelineRun Service::resume(RunId id, const std::vector<NewsSource>& sources) {
    return continue_run(this->run(id), sources);
}

PipelineRun Service::continue_run(PipelineRun run, const std::vector<NewsSource>& sources) {
    if (run.stage < Stage::ingested) {
        ingest(run, sources);
        checkpoint(run, Stage::ingested);
    }
    if (run.stage < Stage::deduplicated) {
        dedupe(run);
        checkpoint(run, Stage::deduplicated);
    }
    if (run.stage < Stage::suggested) {
        suggest_stage(run);
        checkpoint(run, Stage::suggested);
    }
    if (run.stage < Stage::ordered) {
        order(run);
        checkpoint(run, Stage::ordered);
    }
    return run;
}

PipelineRun Service::run(RunId id) const {
    auto stored = store_.run(id);
    if (!stored) throw NotFoundError("unknown run " + id.str());
    return run_from_json(id, Json::parse(stored->payload));
}

void Service::ingest(PipelineRun& run, const std::vector<NewsSource>& sources) {
    Crawler crawler(*fetcher_, *clock_, cfg_.fetch);
    const KnownUrl known = [this](std::string_view url) { return store_.has_url(url); };
    crawler.crawl_all(sources, known, [&](SourceCrawl&& crawl) {
        auto& c = run.counts;
        ++c.sources;
        if (crawl.error) {
            ++c.sources_failed;
            run.errors.push_back(crawl.source.id + ": " + *crawl.error);
        }
        std::vector<ArticleRecord> fresh;
        std::set<std::string> urls;
        for (const auto& item : crawl.items) {
            ++c.candidates;
            switch (item.status) {
                case ItemStatus::cached: ++c.cached; continue;
                case ItemStatus::failed:
                    ++c.fetch_failures;
                    run.errors.push_back(item.result.describe_failure());
                    continue;
                case ItemStatus::disallowed:
                case ItemStatus::over_limit: continue;
                case ItemStatus::fetched: break;
            }
            ++c.fetched;
            if (!urls.insert(item.link.url).second) continue;
            try {
                auto x = extractor::extract_article(item.result.body, item.link.url, cfg_.extract);
                ArticleRecord a;
                a.url = item.link.url;
                a.source_id = crawl.source.id;
                a.fetched_at = now_();
                a.title = x.title.empty() ? item.link.anchor_text : x.title;
                a.body = std::move(x.paragraphs);
                fresh.push_back(std::move(a));
            } catch (const ExtractionError& e) {
                ++c.extraction_failures;
                run.errors.push_back(e.what());
            }
        }
        // One transaction per source: its articles and the checkpoint land together.
        Store::Transaction tx(store_);
        for (auto& a : fresh) {
            if (store_.has_url(a.url)) continue;
            run.new_articles.push_back(store_.add_article(std::move(a)));
            ++c.articles_stored;
        }
        store_.update_run(run.id, to_string(Stage::created), to_json(run).dump());
        tx.commit();
    });
}

void Service::dedupe(PipelineRun& run) {
    struct Reviewed {
        ArticleId id;
        sim::DocumentSignature sig;
    };
    std::vector<Reviewed> reviewed;
    for (const auto& a : store_.articles(ReviewStatus::reviewed))
        reviewed.push_back({a.id, sim::article_signature(a, cfg_.signature)});

    run.associations.clear();
    run.nearest.clear();
    run.counts.auto_associated = 0;
    for (auto id : run.new_articles) {
        auto fresh = store_.article(id);
        if (fresh.status != ReviewStatus::unreviewed) continue;
        const auto sig = sim::article_signature(fresh, cfg_.signature);
        const Reviewed* best = nullptr;
        double best_j = -1.0;
        for (const auto& r : reviewed) {
            const double j = sim::jaccard_estimate(sig, r.sig);
            if (j > best_j || (j == best_j && best && r.id < best->id)) {
                best_j = j;
                best = &r;
            }
        }
        if (!best) continue;
        const auto target = store_.article(best->id);
        const auto verdict = sim::propose_auto_association(fresh, target, cfg_.signature, cfg_.association);
        if (verdict.associate) {
            Store::Transaction tx(store_);
            for (const auto& l : store_.links_for_article(target.id)) store_.link({id, l.event, l.tense});
            store_.set_status(id, ReviewStatus::reviewed);
            tx.commit();
            run.associations.push_back({id, target.id, verdict.jaccard, verdict.change_ratio});
            ++run.counts.auto_associated;
            reviewed.push_back({id, sig});
        } else if (best_j >= cfg_.diff_min_jaccard && best_j > 0.0) {
            run.nearest.push_back({id, best->id, best_j});
        }
    }
}

void Service::suggest_stage(PipelineRun& run) {
    if (models_.empty()) return;
    const auto taxonomy = store_.taxonomy();
    for (auto id : run.new_articles) {
        const auto a = store_.article(id);
        if (a.status != ReviewStatus::unreviewed) continue;
        try {
            store_.set_suggestions(id, classify::suggest(models_, taxonomy, a));
        } catch (const ArgumentError& e) {
            // Tag model trained against an older taxonomy: keep the rest.
            auto partial = models_;
            partial.tags.reset();
            store_.set_suggestions(id, classify::suggest(partial, taxonomy, a));
            run.errors.push_back("tag suggestions disabled: " + std::string(e.what()));
        }
    }
}

void Service::order(PipelineRun& run) {
    std::vector<ArticleRecord> queue;
    run.skip_queue.clear();
    run.groups.clear();
    for (auto id : run.new_articles) {
        auto a = store_.article(id);
        if (a.status != ReviewStatus::unreviewed) continue;
        if (a.suggestions && a.suggestions->skip_eligible)
            run.skip_queue.push_back(id);
        else
            queue.push_back(std::move(a));
    }
    run.counts.queued_for_review = queue.size();
    run.counts.queued_for_skip_review = run.skip_queue.size();
    if (queue.empty()) return;
    const auto m = ordering::build_distance_matrix(queue, cfg_.signature);
    const auto path = ordering::segment_groups(ordering::order_queue(m), m, cfg_.group_cut);
    for (const auto& g : path.groups) {
        std::vector<ArticleId> ids;
        for (auto i : g) ids.push_back(m.ids()[i]);
        run.groups.push_back(std::move(ids));
    }
}

// -- review ----------------------------------------------------------------

std::vector<ReviewQueueItem> Service::get_review_queue(RunId id) const {
    const auto r = run(id);
    std::vector<ReviewQueueItem> out;
    if (!r.published()) return out;
    std::map<ArticleId, NearestReviewed> nearest;
    for (const auto& n : r.nearest) nearest[n.article] = n;
    for (std::size_t g = 0; g < r.groups.size(); ++g) {
        ReviewQueueItem item;
        item.group = g;
        for (auto aid : r.groups[g]) {
            const auto a = store_.article(aid);
            if (a.status != ReviewStatus::unreviewed) continue;
            QueueArticle q;
            q.id = a.id;
            q.title = a.title;
            q.url = a.url;
            if (a.suggestions) q.suggestions = *a.suggestions;
            if (auto it = nearest.find(aid); it != nearest.end()) {
                const auto ref = store_.article(it->second.reviewed);
                q.diff = ArticleDiff{ref.id, it->second.jaccard,
                                     sim::word_diff(sim::body_tokens(ref), sim::body_tokens(a))};
            }
            item.articles.push_back(std::move(q));
        }
        if (!item.articles.empty()) out.push_back(std::move(item));
    }
    return out;
}

std::vector<SkipQueueItem> Service::get_skip_queue(RunId id) const {
    const auto r = run(id);
    std::vector<SkipQueueItem> out;
    if (!r.published()) return out;
    for (auto aid : r.skip_queue) {
        const auto a = store_.article(aid);
        if (a.status != ReviewStatus::unreviewed) continue;
        out.push_back({a.id, a.title, a.url, a.suggestions ? a.suggestions->domain_score : std::nullopt});
    }
    return out;
}

ArticleRecord Service::submit_review(ArticleId id, const ReviewDecision& decision) {
    Store::Transaction tx(store_);
    const auto a = store_.article(id);
    if (a.status != ReviewStatus::unreviewed)
        throw ConflictError("article " + id.str() + " is already " + std::string(to_string(a.status)));
    switch (decision.kind) {
        case ReviewDecision::Kind::skip:
            if (!decision.events.empty()) throw ValidationError("skip decision carries no events");
            store_.set_status(id, ReviewStatus::skipped_by_title);
            break;
        case ReviewDecision::Kind::no_events:
            if (!decision.events.empty()) throw ValidationError("no_events decision carries no events");
            store_.set_status(id, ReviewStatus::reviewed);
            break;
        case ReviewDecision::Kind::events: {
            if (decision.events.empty()) throw ValidationError("events decision needs at least one event");
            for (const auto& d : decision.events) {
                store_.validate_event(d.event);
                const auto dupes = store_.find_duplicate_events(d.event);
                if (!dupes.empty()) {
                    store_.link({id, dupes.front(), d.tense});
                } else {
                    const ArticleEventLink link{id, EventId{}, d.tense};
                    store_.record_event(d.event, std::span(&link, 1));
                }
            }
            store_.set_status(id, ReviewStatus::reviewed);
            break;
        }
    }
    auto updated = store_.article(id);
    tx.commit();
    return updated;
}

Suggestions Service::get_suggestions(ArticleId id) const {
    const auto a = store_.article(id);
    if (models_.empty()) return {};
    const auto taxonomy = store_.taxonomy();
    try {
        return classify::suggest(models_, taxonomy, a);
    } catch (const ArgumentError&) {
        auto partial = models_;
        partial.tags.reset();
        return classify::suggest(partial, taxonomy, a);
    }
}

std::optional<ArticleDiff> Service::nearest_diff(ArticleId id) const {
    const auto a = store_.article(id);
    const auto sig = sim::article_signature(a, cfg_.signature);
    std::optional<ArticleRecord> best;
    double best_j = -1.0;
    for (auto& r : store_.articles(ReviewStatus::reviewed)) {
        if (r.id == id) continue;
        const double j = sim::jaccard_estimate(sig, sim::article_signature(r, cfg_.signature));
        if (j > best_j) {
            best_j = j;
            best = std::move(r);
        }
    }
    if (!best || best_j < cfg_.diff_min_jaccard || best_j <= 0.0) return std::nullopt;
    return ArticleDiff{best->id, best_j, sim::word_diff(sim::body_tokens(*best), sim::body_tokens(a))};
}

}  // namespace harvest::pipeline
