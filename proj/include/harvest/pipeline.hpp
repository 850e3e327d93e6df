#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "harvest/classify.hpp"
#include "harvest/config.hpp"
#include "harvest/crawler.hpp"
#include "harvest/event_store.hpp"
#include "harvest/extractor.hpp"
#include "harvest/fetch.hpp"
#include "harvest/serialize.hpp"
#include "harvest/similarity.hpp"

namespace harvest::pipeline {

/// Last completed stage of a run.
enum class Stage { created, ingested, deduplicated, suggested, ordered };
std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view s);

struct RunCounts {
    std::size_t sources = 0;
    std::size_t sources_failed = 0;
    std::size_t candidates = 0;
    std::size_t fetched = 0;
    std::size_t cached = 0;
    std::size_t fetch_failures = 0;
    std::size_t extraction_failures = 0;
    std::size_t articles_stored = 0;
    std::size_t auto_associated = 0;
    std::size_t queued_for_review = 0;       // ordered review path
    std::size_t queued_for_skip_review = 0;  // title-only queue

    std::size_t queued_total() const { return queued_for_review + queued_for_skip_review; }
    bool operator==(const RunCounts&) const = default;
};

struct Association {
    ArticleId article;
    ArticleId reviewed;
    double jaccard = 0.0;
    double change_ratio = 0.0;
};

/// Most similar reviewed article of a queued article, when similar enough.
struct NearestReviewed {
    ArticleId article;
    ArticleId reviewed;
    double jaccard = 0.0;
};

struct PipelineRun {
    RunId id;
    std::string started_at;   // ISO-8601 UTC
    std::string finished_at;  // empty until ordered
    Stage stage = Stage::created;
    RunCounts counts;
    std::vector<ArticleId> new_articles;
    std::vector<Association> associations;
    std::vector<NearestReviewed> nearest;
    std::vector<std::vector<ArticleId>> groups;  // review path, cut into groups
    std::vector<ArticleId> skip_queue;
    std::vector<std::string> errors;

    bool published() const { return stage == Stage::ordered; }
};

Json to_json(const PipelineRun& run);
/// Throws StoreError on a malformed payload.
PipelineRun run_from_json(RunId id, const Json& j);

inline constexpr const char* kDomainModelFile = "domain2.model";
inline constexpr const char* kCountModelFile = "count4.model";
inline constexpr const char* kTagsModelFile = "tags.model";
inline constexpr const char* kSkipThresholdFile = "skip_threshold.txt";

struct PipelineConfig {
    std::filesystem::path source_list;  // empty: no sources
    std::filesystem::path model_dir;    // empty: no models
    FetchPolicy fetch;
    extractor::ScoringConfig extract;
    similarity::SignatureParams signature;
    similarity::AssociationPolicy association;
    double group_cut = 0.5;
    double diff_min_jaccard = 0.2;
    std::size_t top_k_tags = 10;
    double max_fpr = 0.017;
    std::optional<double> skip_threshold;  // overrides the model directory
    classify::FeatureConfig features;
    classify::TrainConfig train;

    /// Keys: pipeline.sources, pipeline.model_dir (relative to `base_dir`),
    /// crawl.*, extract.*, shingle.width, minhash.k, minhash.seed,
    /// associate.jaccard_min, associate.change_ratio_max, order.group_cut,
    /// queue.diff_min_jaccard, suggest.top_k, calibrate.max_fpr,
    /// calibrate.threshold, features.dim, features.seed, train.iterations,
    /// train.eval_every, train.seed, train.alpha, train.l2. Throws ConfigError.
    static PipelineConfig from_config(const KeyValueConfig& kv, const std::filesystem::path& base_dir = {});
};

/// Models present in `dir` (any subset) plus the stored skip threshold.
classify::SuggestionModels load_models(const std::filesystem::path& dir, std::size_t top_k = 10);
void write_skip_threshold(const std::filesystem::path& dir, double threshold);
std::optional<double> read_skip_threshold(const std::filesystem::path& dir);

/// Reviewed articles with their linked event count and the union of the
/// linked events' tags; title-skipped articles count as zero events. In
/// article id order.
std::vector<classify::Example> training_examples(const Store& store, const classify::FeatureConfig& features);

struct EventDecision {
    ProtestEvent event;
    Tense tense = Tense::past;
};

struct ReviewDecision {
    enum class Kind { skip, no_events, events };
    Kind kind = Kind::no_events;
    std::vector<EventDecision> events;
};
std::string_view to_string(ReviewDecision::Kind k);
std::optional<ReviewDecision::Kind> parse_decision_kind(std::string_view s);

struct ArticleDiff {
    ArticleId reference;
    double jaccard = 0.0;
    similarity::WordDiff diff;  // reference body -> this article's body
};

struct QueueArticle {
    ArticleId id;
    std::string title;
    std::string url;
    Suggestions suggestions;
    std::optional<ArticleDiff> diff;
};

struct ReviewQueueItem {
    std::size_t group = 0;
    std::vector<QueueArticle> articles;
};

struct SkipQueueItem {
    ArticleId id;
    std::string title;
    std::string url;
    std::optional<double> domain_score;
};

using UnixClock = std::function<std::int64_t()>;

/// Nightly pipeline and review operations over one store.
class Service {
public:
    /// `fetcher` and `clock` default to the real transports.
    Service(Store& store, PipelineConfig cfg, classify::SuggestionModels models = {},
            Fetcher* fetcher = nullptr, Clock* clock = nullptr, UnixClock now = {});
    ~Service();

    /// Sources from the configured list.
    PipelineRun run_nightly();
    PipelineRun run_nightly(const std::vector<NewsSource>& sources);
    /// Continues a run from the stage after its last checkpoint.
    PipelineRun resume(RunId id, const std::vector<NewsSource>& sources);

    /// Throws NotFoundError.
    PipelineRun run(RunId id) const;
    std::optional<RunId> latest_run() const { return store_.latest_run(); }

    /// Unreviewed articles of the run in path order, grouped. Empty until
    /// the run is ordered. Throws NotFoundError for an unknown run.
    std::vector<ReviewQueueItem> get_review_queue(RunId id) const;
    std::vector<SkipQueueItem> get_skip_queue(RunId id) const;

    /// Atomic; throws ConflictError unless the article is unreviewed and
    /// NotFoundError for an unknown article.
    ArticleRecord submit_review(ArticleId id, const ReviewDecision& decision);

    /// Fresh model output; empty when no models are loaded.
    Suggestions get_suggestions(ArticleId id) const;
    /// Diff against the most similar reviewed article above diff_min_jaccard.
    std::optional<ArticleDiff> nearest_diff(ArticleId id) const;

    Store& store() { return store_; }
    const Store& store() const { return store_; }
    const PipelineConfig& config() const { return cfg_; }
    const classify::SuggestionModels& models() const { return models_; }

private:
    void checkpoint(PipelineRun& run, Stage stage);
    void ingest(PipelineRun& run, const std::vector<NewsSource>& sources);
    void dedupe(PipelineRun& run);
    void suggest_stage(PipelineRun& run);
    void order(PipelineRun& run);
    PipelineRun continue_run(PipelineRun run, const std::vector<NewsSource>& sources);
    std::string timestamp() const;

    Store& store_;
    PipelineConfig cfg_;
    classify::SuggestionModels models_;
    std::unique_ptr<Fetcher> own_fetcher_;
    std::unique_ptr<Clock> own_clock_;
    Fetcher* fetcher_;
    Clock* clock_;
    UnixClock now_;
};

}  // namespace harvest::pipeline
