#include "harvest/serialize.hpp"

namespace harvest {

Json to_json(const Suggestions& s) {
    Json j = Json::object();
    j["domain_score"] = s.domain_score ? Json(*s.domain_score) : Json(nullptr);
    j["count_class"] = s.count_class ? Json(*s.count_class) : Json(nullptr);
    j["count_probabilities"] = s.count_probabilities;
    Json tags = Json::array();
    for (const auto& t : s.tags) tags.push_back({{"name", t.name}, {"score", t.score}});
    j["tags"] = std::move(tags);
    j["skip_eligible"] = s.skip_eligible;
    return j;
}

Suggestions suggestions_from_json(const Json& j) {
    Suggestions s;
    if (j.contains("domain_score") && !j["domain_score"].is_null())
        s.domain_score = j["domain_score"].get<double>();
    if (j.contains("count_class") && !j["count_class"].is_null())
        s.count_class = j["count_class"].get<int>();
    if (j.contains("count_probabilities"))
        s.count_probabilities = j["count_probabilities"].get<std::vector<double>>();
    if (j.contains("tags"))
        for (const auto& t : j["tags"])
            s.tags.push_back({t.at("name").get<std::string>(), t.at("score").get<double>()});
    s.skip_eligible = j.value("skip_eligible", false);
    return s;
}

Json to_json(const ProtestEvent& e) {
    Json j = Json::object();
    j["id"] = e.id.value;
    j["key"] = e.external_key ? Json(*e.external_key) : Json(nullptr);
    j["date"] = e.date.iso();
    j["locality"] = e.location.locality;
    j["region"] = e.location.region;
    j["latitude"] = e.location.latitude ? Json(*e.location.latitude) : Json(nullptr);
    j["longitude"] = e.location.longitude ? Json(*e.location.longitude) : Json(nullptr);
    j["attendees"] = e.attendee_count ? Json(*e.attendee_count) : Json(nullptr);
    j["attendee_source"] = e.attendee_source ? Json(e.attendee_source->value) : Json(nullptr);
    j["tags"] = Json(std::vector<std::string>(e.tags.begin(), e.tags.end()));
    return j;
}

Json to_json(const ArticleEventLink& l) {
    return {{"article_id", l.article.value}, {"event_id", l.event.value}, {"tense", to_string(l.tense)}};
}

Json to_json(const DatasetStats& s) {
    Json hist = Json::object();
    for (const auto& [k, v] : s.events_per_article) hist[std::to_string(k)] = v;
    Json cats = Json::array();
    for (const auto& r : s.category_table)
        cats.push_back({{"category", r.category}, {"events", r.events}, {"articles", r.articles}});
    Json sets = Json::array();
    for (const auto& r : s.top_tag_sets)
        sets.push_back({{"tags", r.tags}, {"events", r.events}, {"articles", r.articles}});
    Json j = Json::object();
    j["total_events"] = s.total_events;
    j["reviewed_articles"] = s.reviewed_articles;
    j["unique_tag_sets"] = s.unique_tag_sets;
    j["events_per_article"] = std::move(hist);
    j["category_table"] = std::move(cats);
    j["top_tag_sets"] = std::move(sets);
    return j;
}

Json to_json(const Taxonomy& t) {
    Json arr = Json::array();
    for (const auto& tag : t.tags()) {
        Json j = {{"name", tag.name}, {"kind", to_string(tag.kind)}};
        j["opposite"] = tag.opposite ? Json(*tag.opposite) : Json(nullptr);
        arr.push_back(std::move(j));
    }
    return arr;
}

Json to_json(const ImportReport& r) {
    Json warnings = Json::array();
    for (const auto& w : r.warnings) warnings.push_back({{"row", w.row}, {"message", w.message}});
    return {{"rows", r.rows},
            {"articles_created", r.articles_created},
            {"events_created", r.events_created},
            {"links_created", r.links_created},
            {"tags_created", r.tags_created},
            {"rows_unchanged", r.rows_unchanged},
            {"rows_rejected", r.rows_rejected},
            {"warnings", std::move(warnings)}};
}

}  // namespace harvest
