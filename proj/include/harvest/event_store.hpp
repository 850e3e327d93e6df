#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "harvest/attendee.hpp"
#include "harvest/config.hpp"
#include "harvest/ids.hpp"
#include "harvest/records.hpp"
#include "harvest/taxonomy.hpp"

namespace harvest {

/// Great-circle distance on a sphere of radius 6371.0088 km.
double haversine_km(double lat1, double lon1, double lat2, double lon2);

/// Lowercase, punctuation dropped, whitespace collapsed: "St. Paul " -> "st paul".
std::string normalize_place(std::string_view s);

struct DedupePolicy {
    double radius_km = 25.0;
};

struct CategoryRow {
    std::string category;
    std::size_t events = 0;
    std::size_t articles = 0;
};

struct TagSetRow {
    std::vector<std::string> tags;  // sorted
    std::size_t events = 0;
    std::size_t articles = 0;
};

struct DatasetStats {
    std::map<std::size_t, std::size_t> events_per_article;
    std::vector<CategoryRow> category_table;  // events desc, then name
    std::vector<TagSetRow> top_tag_sets;      // events desc, then joined tag names
    std::size_t total_events = 0;
    std::size_t reviewed_articles = 0;
    std::size_t unique_tag_sets = 0;

    /// Fraction of reviewed articles reporting at most `n` events.
    double share_with_at_most(std::size_t n) const;
};

/// Which file column feeds each import field. Keys: url, event_id, date,
/// tags, attendees, tense and either `location` ("City, ST") or both
/// `locality` and `region`; optional: title, latitude, longitude, source.
struct ColumnMapping {
    std::map<std::string, std::string, std::less<>> columns;
    std::string tag_separator = ";";

    /// Identity mapping onto the export field names.
    static ColumnMapping defaults();
    /// Keys as above; `tag_separator` overrides the separator.
    static ColumnMapping from_config(const KeyValueConfig& cfg);
};

struct ImportWarning {
    std::size_t row = 0;  // 1-based data row (header excluded)
    std::string message;
};

struct ImportReport {
    std::size_t rows = 0;
    std::size_t articles_created = 0;
    std::size_t events_created = 0;
    std::size_t links_created = 0;
    std::size_t tags_created = 0;
    std::size_t rows_unchanged = 0;
    std::size_t rows_rejected = 0;
    std::vector<ImportWarning> warnings;

    std::size_t created() const { return articles_created + events_created + links_created; }
};

enum class ExportFormat { jsonl, csv };

struct StoredRun {
    RunId id;
    std::string stage;
    std::string payload;  // JSON text owned by the pipeline
};

/// Embedded single-file store for articles, events, links, the tag
/// taxonomy and pipeline run records. Every public operation is atomic and
/// may be called from any thread; writers are serialized.
class Store {
public:
    static constexpr int kSchemaVersion = 1;

    /// Opens or creates the database; ":memory:" gives a private in-memory store.
    explicit Store(const std::filesystem::path& path);
    ~Store();
    Store(Store&&) noexcept;
    Store& operator=(Store&&) noexcept;
    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    int schema_version() const;

    /// RAII transaction; nests through savepoints. Destruction without
    /// commit() rolls back. Holds the store lock for its lifetime.
    class Transaction {
    public:
        explicit Transaction(const Store& store);
        ~Transaction();
        Transaction(const Transaction&) = delete;
        Transaction& operator=(const Transaction&) = delete;
        void commit();

    private:
        const Store* store_;
        int depth_;
        bool done_ = false;
    };

    // Taxonomy
    Taxonomy taxonomy() const;
    void add_tag(const Tag& tag);
    /// Adds every tag of `tax` not yet present (opposites included).
    void merge_taxonomy(const Taxonomy& tax);

    // Articles
    /// Throws ConflictError when the URL is already stored.
    ArticleId add_article(ArticleRecord article);
    bool has_url(std::string_view url) const;
    std::optional<ArticleId> find_article(std::string_view url) const;
    /// Throws NotFoundError.
    ArticleRecord article(ArticleId id) const;
    std::vector<ArticleRecord> articles(std::optional<ReviewStatus> status = std::nullopt) const;
    void set_suggestions(ArticleId id, const Suggestions& s);
    void set_status(ArticleId id, ReviewStatus status);

    // Events
    /// Validates tags against the taxonomy, requires >=1 link, and marks
    /// every linked article reviewed. The EventId inside `links` is ignored.
    EventId record_event(ProtestEvent event, std::span<const ArticleEventLink> links);
    /// The field and tag checks of record_event. Throws ValidationError.
    void validate_event(const ProtestEvent& event) const;
    ProtestEvent event(EventId id) const;
    std::vector<ProtestEvent> events() const;
    std::optional<EventId> find_event_by_key(std::string_view external_key) const;
    /// Same date, identical tag set, nearby location; closest first.
    std::vector<EventId> find_duplicate_events(const ProtestEvent& candidate,
                                               const DedupePolicy& policy = {}) const;
    /// Adds one link; returns false when the pair already existed.
    bool link(const ArticleEventLink& link);
    std::vector<ArticleEventLink> links_for_article(ArticleId id) const;
    std::vector<ArticleEventLink> links_for_event(EventId id) const;
    std::vector<ArticleEventLink> links() const;
    /// Moves all links of `from` onto `into` and deletes `from`.
    void merge_events(EventId from, EventId into);

    DatasetStats compute_stats(std::size_t top_tag_sets = 5) const;

    ImportReport import_dataset(const std::filesystem::path& path, const ColumnMapping& mapping,
                                const AttendeeLexicon& lexicon = AttendeeLexicon::defaults());
    /// One record per link plus one per reviewed article without events.
    std::size_t export_dataset(const std::filesystem::path& path, ExportFormat format) const;

    // Pipeline run records
    RunId create_run(std::string_view stage, std::string_view payload);
    void update_run(RunId id, std::string_view stage, std::string_view payload);
    std::optional<StoredRun> run(RunId id) const;
    std::optional<RunId> latest_run() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace harvest
