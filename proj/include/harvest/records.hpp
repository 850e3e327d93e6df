#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "harvest/date.hpp"
#include "harvest/ids.hpp"

namespace harvest {

struct Location {
    std::string locality;
    std::string region;
    std::optional<double> latitude;   // degrees
    std::optional<double> longitude;  // degrees

    bool has_coordinates() const { return latitude && longitude; }
    bool operator==(const Location&) const = default;
};

struct ProtestEvent {
    EventId id;
    /// Identifier used by dataset files; assigned as "ev-<id>" when absent.
    std::optional<std::string> external_key;
    Date date;
    Location location;
    std::optional<std::uint64_t> attendee_count;
    std::optional<ArticleId> attendee_source;
    std::set<std::string> tags;
};

enum class Tense { past, future };
std::string_view to_string(Tense t);
std::optional<Tense> parse_tense(std::string_view s);

struct ArticleEventLink {
    ArticleId article;
    EventId event;
    Tense tense = Tense::past;

    bool operator==(const ArticleEventLink&) const = default;
};

enum class ReviewStatus { unreviewed, reviewed, skipped_by_title };
std::string_view to_string(ReviewStatus s);
std::optional<ReviewStatus> parse_review_status(std::string_view s);

struct TagScore {
    std::string name;
    double score = 0.0;

    bool operator==(const TagScore&) const = default;
};

/// Classifier output attached to an article for the reviewer. Advisory only.
struct Suggestions {
    std::optional<double> domain_score;
    std::optional<int> count_class;
    std::vector<double> count_probabilities;
    std::vector<TagScore> tags;
    bool skip_eligible = false;

    bool empty() const { return !domain_score && !count_class && tags.empty(); }
    bool operator==(const Suggestions&) const = default;
};

struct ArticleRecord {
    ArticleId id;
    std::string url;
    std::string source_id;
    std::int64_t fetched_at = 0;  // unix seconds
    std::string title;
    std::vector<std::string> body;
    ReviewStatus status = ReviewStatus::unreviewed;
    std::optional<Suggestions> suggestions;
};

}  // namespace harvest
