#include <algorithm>
#include <fstream>
#include <sstream>

#include "harvest/csv.hpp"
#include "harvest/error.hpp"
#include "harvest/event_store.hpp"
#include "harvest/serialize.hpp"
#include "harvest/text.hpp"

namespace harvest {

namespace {

using Row = std::map<std::string, std::string, std::less<>>;  // mapping key -> raw value

struct Table {
    std::vector<Row> rows;
    std::vector<std::size_t> bad_rows;  // 1-based, wrong field count
};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed for " + path.string());
    return ss.str();
}

bool is_jsonl(const std::filesystem::path& path) {
    auto ext = text::to_lower(path.extension().string());
    return ext == ".jsonl" || ext == ".ndjson";
}

void require_mapping(const ColumnMapping& m) {
    for (const char* k : {"url", "event_id", "date", "tags", "attendees", "tense"})
        if (!m.columns.contains(k))
            throw ConfigError(std::string("column mapping lacks required key '") + k + "'");
    bool split = m.columns.contains("locality") && m.columns.contains("region");
    if (!split && !m.columns.contains("location"))
        throw ConfigError("column mapping needs 'location' or both 'locality' and 'region'");
}

Table read_csv(const std::string& content, const ColumnMapping& m) {
    Table t;
    auto rows = csv::parse(content);
    if (rows.empty()) return t;
    const auto& header = rows.front();
    std::map<std::string, std::size_t, std::less<>> index;
    for (const auto& [key, column] : m.columns) {
        auto it = std::find_if(header.begin(), header.end(),
                               [&](const std::string& h) { return text::trim(h) == column; });
        if (it == header.end())
            throw ConfigError("column '" + column + "' (for '" + key + "') not in file header");
        index[key] = static_cast<std::size_t>(it - header.begin());
    }
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != header.size()) {
            t.bad_rows.push_back(t.rows.size() + t.bad_rows.size() + 1);
            continue;
        }
        Row row;
        for (const auto& [key, i] : index) row[key] = rows[r][i];
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::string json_scalar(const Json& v, const std::string& sep) {
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
        std::vector<std::string> parts;
        for (const auto& e : v) parts.push_back(json_scalar(e, sep));
        return text::join(parts, sep);
    }
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    return v.dump();
}

Table read_jsonl(const std::string& content, const ColumnMapping& m) {
    Table t;
    std::istringstream in(content);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) continue;
        ++n;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const std::exception&) {
            t.bad_rows.push_back(n);
            continue;
        }
        if (!j.is_object()) {
            t.bad_rows.push_back(n);
            continue;
        }
        Row row;
        for (const auto& [key, field] : m.columns)
            row[key] = j.contains(field) ? json_scalar(j[field], m.tag_separator) : "";
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::string host_of(std::string_view url) {
    auto p = url.find("://");
    if (p == std::string_view::npos) return std::string(url);
    auto rest = url.substr(p + 3);
    return std::string(rest.substr(0, rest.find('/')));
}

std::string field(const Row& row, std::string_view key) {
    auto it = row.find(key);
    return it == row.end() ? std::string() : std::string(text::trim(it->second));
}

std::optional<double> parse_coordinate(const std::string& s) {
    if (s.empty()) return std::nullopt;
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw ValidationError("bad coordinate '" + s + "'");
    return v;
}

}  // namespace

ImportReport Store::import_dataset(const std::filesystem::path& path, const ColumnMapping& mapping,
                                   const AttendeeLexicon& lexicon) {
    require_mapping(mapping);
    const std::string content = read_file(path);
    const Table table = is_jsonl(path) ? read_jsonl(content, mapping) : read_csv(content, mapping);

    ImportReport report;
    report.rows = table.rows.size() + table.bad_rows.size();
    for (auto r : table.bad_rows) {
        report.warnings.push_back({r, "malformed row (field count or syntax)"});
        ++report.rows_rejected;
    }

    Transaction tx(*this);
    std::size_t rowno = 0;
    for (const auto& row : table.rows) {
        ++rowno;
        while (std::find(table.bad_rows.begin(), table.bad_rows.end(), rowno) != table.bad_rows.end())
            ++rowno;
        Transaction row_tx(*this);
        std::size_t articles = 0, events = 0, links = 0, tags = 0;
        try {
            const std::string url = field(row, "url");
            if (url.empty()) throw ValidationError("empty url");

            ArticleId article;
            if (auto existing = find_article(url)) {
                article = *existing;
                if (this->article(article).status != ReviewStatus::reviewed)
                    set_status(article, ReviewStatus::reviewed);
            } else {
                ArticleRecord rec;
                rec.url = url;
                rec.source_id = row.contains("source") ? field(row, "source") : host_of(url);
                rec.title = field(row, "title");
                rec.status = ReviewStatus::reviewed;
                article = add_article(std::move(rec));
                ++articles;
            }

            const std::string key = field(row, "event_id");
            if (!key.empty()) {
                auto tense = Tense::past;
                if (auto t = field(row, "tense"); !t.empty()) {
                    auto parsed = parse_tense(text::to_lower(t));
                    if (!parsed) throw ValidationError("bad tense '" + t + "'");
                    tense = *parsed;
                }
                if (auto ev = find_event_by_key(key)) {
                    if (link({article, *ev, tense})) ++links;
                } else {
                    ProtestEvent e;
                    e.external_key = key;
                    auto date = Date::parse(field(row, "date"));
                    if (!date) throw ValidationError("bad date '" + field(row, "date") + "'");
                    e.date = *date;
                    if (row.contains("location")) {
                        auto loc = field(row, "location");
                        auto comma = loc.rfind(',');
                        e.location.locality = std::string(text::trim(loc.substr(0, comma)));
                        if (comma != std::string::npos)
                            e.location.region = std::string(text::trim(loc.substr(comma + 1)));
                    } else {
                        e.location.locality = field(row, "locality");
                        e.location.region = field(row, "region");
                    }
                    e.location.latitude = parse_coordinate(field(row, "latitude"));
                    e.location.longitude = parse_coordinate(field(row, "longitude"));
                    if (auto a = field(row, "attendees"); !a.empty()) {
                        e.attendee_count = lexicon.parse(a);
                        if (!e.attendee_count)
                            report.warnings.push_back({rowno, "unrecognized attendee phrase '" + a + "'"});
                        else
                            e.attendee_source = article;
                    }
                    std::string raw = field(row, "tags");
                    std::size_t start = 0;
                    for (;;) {
                        auto pos = raw.find(mapping.tag_separator, start);
                        auto name = text::trim(std::string_view(raw).substr(
                            start, pos == std::string::npos ? std::string::npos : pos - start));
                        if (!name.empty()) e.tags.emplace(name);
                        if (pos == std::string::npos) break;
                        start = pos + mapping.tag_separator.size();
                    }
                    Taxonomy tax = taxonomy();
                    std::size_t before = tax.size();
                    for (const auto& name : e.tags) {
                        if (tax.contains(name)) continue;
                        auto kind = infer_tag_kind(name);
                        tax.add({name, kind, std::nullopt});
                        if (auto mirror = mirrored_position(name);
                            mirror && tax.contains(*mirror) && !tax.opposite_of(*mirror) &&
                            tax.find(*mirror)->kind == TagKind::position)
                            tax.set_opposite(name, *mirror);
                    }
                    if (tax.size() != before) {
                        tags += tax.size() - before;
                        merge_taxonomy(tax);
                    }
                    const ArticleEventLink l{article, EventId{}, tense};
                    record_event(std::move(e), std::span(&l, 1));
                    ++events;
                    ++links;
                }
            }
            row_tx.commit();
            report.articles_created += articles;
            report.events_created += events;
            report.links_created += links;
            report.tags_created += tags;
            if (articles + events + links == 0) ++report.rows_unchanged;
        } catch (const Error& err) {
            report.warnings.push_back({rowno, err.what()});
            ++report.rows_rejected;
        } catch (const std::invalid_argument& err) {
            report.warnings.push_back({rowno, std::string("unparseable value: ") + err.what()});
            ++report.rows_rejected;
        }
    }
    tx.commit();
    return report;
}

std::size_t Store::export_dataset(const std::filesystem::path& path, ExportFormat format) const {
    struct Record {
        std::string url;
        std::optional<std::string> key;
        const ProtestEvent* event = nullptr;
        Tense tense = Tense::past;
    };
    std::vector<Record> records;
    std::map<std::int64_t, ProtestEvent> events;
    {
        Transaction tx(*this);
        for (auto& e : this->events()) events.emplace(e.id.value, std::move(e));
        for (const auto& a : articles(ReviewStatus::reviewed)) {
            auto ls = links_for_article(a.id);
            if (ls.empty()) records.push_back({a.url, std::nullopt, nullptr, Tense::past});
            for (const auto& l : ls) {
                const auto& e = events.at(l.event.value);
                records.push_back({a.url, e.external_key, &e, l.tense});
            }
        }
    }
    std::sort(records.begin(), records.end(), [](const Record& a, const Record& b) {
        if (a.url != b.url) return a.url < b.url;
        return a.key.value_or("") < b.key.value_or("");
    });

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    if (format == ExportFormat::csv)
        out << csv::format_row({"url", "event_id", "date", "locality", "region", "attendees", "tags", "tense"});
    for (const auto& r : records) {
        const ProtestEvent* e = r.event;
        std::vector<std::string> tags = e ? std::vector<std::string>(e->tags.begin(), e->tags.end())
                                          : std::vector<std::string>{};
        if (format == ExportFormat::jsonl) {
            Json j = Json::object();
            j["url"] = r.url;
            j["event_id"] = r.key ? Json(*r.key) : Json(nullptr);
            j["date"] = e ? Json(e->date.iso()) : Json(nullptr);
            j["locality"] = e ? Json(e->location.locality) : Json(nullptr);
            j["region"] = e ? Json(e->location.region) : Json(nullptr);
            j["attendees"] = e && e->attendee_count ? Json(*e->attendee_count) : Json(nullptr);
            j["tags"] = Json(tags);
            j["tense"] = e ? Json(to_string(r.tense)) : Json(nullptr);
            out << j.dump() << '\n';
        } else {
            out << csv::format_row(
                {r.url, r.key.value_or(""), e ? e->date.iso() : "", e ? e->location.locality : "",
                 e ? e->location.region : "",
                 e && e->attendee_count ? std::to_string(*e->attendee_count) : "",
                 text::join(tags, ";"), e ? std::string(to_string(r.tense)) : ""});
        }
    }
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
    return records.size();
}

}  // namespace harvest
