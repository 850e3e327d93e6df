#include "harvest/records.hpp"

namespace harvest {

std::string_view to_string(Tense t) { return t == Tense::past ? "past" : "future"; }

std::optional<Tense> parse_tense(std::string_view s) {
    if (s == "past") return Tense::past;
    if (s == "future") return Tense::future;
    return std::nullopt;
}

std::string_view to_string(ReviewStatus s) {
    switch (s) {
        case ReviewStatus::unreviewed: return "unreviewed";
        case ReviewStatus::reviewed: return "reviewed";
        case ReviewStatus::skipped_by_title: return "skipped_by_title";
    }
    return "unreviewed";
}

std::optional<ReviewStatus> parse_review_status(std::string_view s) {
    if (s == "unreviewed") return ReviewStatus::unreviewed;
    if (s == "reviewed") return ReviewStatus::reviewed;
    if (s == "skipped_by_title") return ReviewStatus::skipped_by_title;
    return std::nullopt;
}

}  // namespace harvest
