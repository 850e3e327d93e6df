#include "harvest/event_store.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <mutex>
#include <numbers>
#include <set>

#include "harvest/error.hpp"
#include "harvest/serialize.hpp"
#include "harvest/text.hpp"
#include "sqlite.hpp"

namespace harvest {

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
    constexpr double kEarthRadiusKm = 6371.0088;
    constexpr double kRad = std::numbers::pi / 180.0;
    double dlat = (lat2 - lat1) * kRad;
    double dlon = (lon2 - lon1) * kRad;
    double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
               std::cos(lat1 * kRad) * std::cos(lat2 * kRad) * std::sin(dlon / 2) * std::sin(dlon / 2);
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

std::string normalize_place(std::string_view s) {
    std::string out;
    for (char c : s) {
        auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || u >= 0x80)
            out.push_back(static_cast<char>(std::tolower(u)));
        else if (c != '.' && c != '\'')
            out.push_back(' ');
    }
    return text::normalize_whitespace(out);
}

double DatasetStats::share_with_at_most(std::size_t n) const {
    if (reviewed_articles == 0) return 0.0;
    std::size_t k = 0;
    for (const auto& [events, articles] : events_per_article)
        if (events <= n) k += articles;
    return static_cast<double>(k) / static_cast<double>(reviewed_articles);
}

ColumnMapping ColumnMapping::defaults() {
    ColumnMapping m;
    for (const char* k : {"url", "event_id", "date", "locality", "region", "attendees", "tags", "tense"})
        m.columns[k] = k;
    return m;
}

ColumnMapping ColumnMapping::from_config(const KeyValueConfig& cfg) {
    ColumnMapping m;
    for (const auto& [k, v] : cfg.values()) {
        if (k == "tag_separator")
            m.tag_separator = v.empty() ? ";" : v;
        else
            m.columns[k] = v;
    }
    return m;
}

namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS meta (key TEXT PRIMARY KEY, value TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS tags (
    name TEXT PRIMARY KEY,
    kind TEXT NOT NULL,
    opposite TEXT
);
CREATE TABLE IF NOT EXISTS articles (
    id INTEGER PRIMARY KEY,
    url TEXT NOT NULL UNIQUE,
    source_id TEXT NOT NULL,
    fetched_at INTEGER NOT NULL,
    title TEXT NOT NULL,
    body TEXT NOT NULL,
    status TEXT NOT NULL,
    suggestions TEXT
);
CREATE TABLE IF NOT EXISTS events (
    id INTEGER PRIMARY KEY,
    external_key TEXT UNIQUE,
    date TEXT NOT NULL,
    locality TEXT NOT NULL,
    region TEXT NOT NULL,
    latitude REAL,
    longitude REAL,
    attendees INTEGER,
    attendee_source INTEGER
);
CREATE INDEX IF NOT EXISTS events_by_date ON events(date);
CREATE TABLE IF NOT EXISTS event_tags (
    event_id INTEGER NOT NULL,
    tag TEXT NOT NULL,
    PRIMARY KEY (event_id, tag)
);
CREATE TABLE IF NOT EXISTS links (
    article_id INTEGER NOT NULL,
    event_id INTEGER NOT NULL,
    tense TEXT NOT NULL,
    PRIMARY KEY (article_id, event_id)
);
CREATE INDEX IF NOT EXISTS links_by_event ON links(event_id);
CREATE TABLE IF NOT EXISTS runs (
    id INTEGER PRIMARY KEY,
    stage TEXT NOT NULL,
    payload TEXT NOT NULL
);
)sql";

std::string body_to_text(const std::vector<std::string>& body) { return Json(body).dump(); }

std::vector<std::string> body_from_text(const std::string& s) {
    return Json::parse(s).get<std::vector<std::string>>();
}

std::string join_tags(const std::vector<std::string>& tags) { return text::join(tags, "; "); }

}  // namespace

struct Store::Impl {
    explicit Impl(const std::string& path) : db(path) {}

    sql::Database db;
    std::recursive_mutex mutex;
    int depth = 0;
    Taxonomy taxonomy;

    void load_taxonomy() {
        Taxonomy t;
        std::vector<std::pair<std::string, std::string>> opposites;
        sql::Statement st(db, "SELECT name, kind, opposite FROM tags ORDER BY name");
        while (st.step()) {
            auto kind = parse_tag_kind(st.str(1));
            if (!kind) throw StoreError("corrupt tag kind for '" + st.str(0) + "'");
            t.add({st.str(0), *kind, std::nullopt});
            if (auto o = st.opt_str(2)) opposites.emplace_back(st.str(0), *o);
        }
        for (const auto& [a, b] : opposites)
            if (!t.opposite_of(a)) t.set_opposite(a, b);
        taxonomy = std::move(t);
    }

    void insert_tag(const Tag& tag) {
        sql::Statement st(db, "INSERT INTO tags (name, kind, opposite) VALUES (?, ?, ?)");
        st.bind(1, tag.name).bind(2, to_string(tag.kind)).bind(3, tag.opposite);
        st.run();
        if (tag.opposite) {
            sql::Statement up(db, "UPDATE tags SET opposite = ? WHERE name = ?");
            up.bind(1, tag.name).bind(2, *tag.opposite);
            up.run();
        }
    }

    void require_article(ArticleId id) {
        sql::Statement st(db, "SELECT 1 FROM articles WHERE id = ?");
        st.bind(1, id.value);
        if (!st.step()) throw ReferenceError("unknown article id " + id.str());
    }

    ArticleRecord read_article(sql::Statement& st) {
        ArticleRecord a;
        a.id = ArticleId{st.int64(0)};
        a.url = st.str(1);
        a.source_id = st.str(2);
        a.fetched_at = st.int64(3);
        a.title = st.str(4);
        a.body = body_from_text(st.str(5));
        a.status = parse_review_status(st.str(6)).value_or(ReviewStatus::unreviewed);
        if (auto s = st.opt_str(7)) a.suggestions = suggestions_from_json(Json::parse(*s));
        return a;
    }

    ProtestEvent read_event(sql::Statement& st) {
        ProtestEvent e;
        e.id = EventId{st.int64(0)};
        e.external_key = st.opt_str(1);
        e.date = Date::from_iso(st.str(2));
        e.location.locality = st.str(3);
        e.location.region = st.str(4);
        e.location.latitude = st.opt_real(5);
        e.location.longitude = st.opt_real(6);
        if (auto n = st.opt_int64(7)) e.attendee_count = static_cast<std::uint64_t>(*n);
        if (auto s = st.opt_int64(8)) e.attendee_source = ArticleId{*s};
        sql::Statement tags(db, "SELECT tag FROM event_tags WHERE event_id = ? ORDER BY tag");
        tags.bind(1, e.id.value);
        while (tags.step()) e.tags.insert(tags.str(0));
        return e;
    }

    std::optional<ProtestEvent> find_event(EventId id) {
        sql::Statement st(db,
                          "SELECT id, external_key, date, locality, region, latitude, longitude, "
                          "attendees, attendee_source FROM events WHERE id = ?");
        st.bind(1, id.value);
        if (!st.step()) return std::nullopt;
        return read_event(st);
    }

    bool insert_link(const ArticleEventLink& l) {
        sql::Statement st(db,
                          "INSERT OR IGNORE INTO links (article_id, event_id, tense) VALUES (?, ?, ?)");
        st.bind(1, l.article.value).bind(2, l.event.value).bind(3, to_string(l.tense));
        st.run();
        return db.changes() > 0;
    }
};

Store::Store(const std::filesystem::path& path) : impl_(std::make_unique<Impl>(path.string())) {
    impl_->db.exec("PRAGMA foreign_keys = ON");
    if (path != ":memory:") impl_->db.exec("PRAGMA journal_mode = WAL");
    Transaction tx(*this);
    impl_->db.exec(kSchema);
    {
        sql::Statement st(impl_->db, "SELECT value FROM meta WHERE key = 'schema_version'");
        if (st.step()) {
            if (st.str(0) != std::to_string(kSchemaVersion))
                throw StoreError("unsupported store schema version " + st.str(0));
        } else {
            sql::Statement ins(impl_->db, "INSERT INTO meta (key, value) VALUES ('schema_version', ?)");
            ins.bind(1, std::to_string(kSchemaVersion));
            ins.run();
            for (const auto& tag : Taxonomy::seeded().tags()) impl_->insert_tag(tag);
        }
    }
    impl_->load_taxonomy();
    tx.commit();
}

Store::~Store() = default;
Store::Store(Store&&) noexcept = default;
Store& Store::operator=(Store&&) noexcept = default;

Store::Transaction::Transaction(const Store& store) : store_(&store) {
    auto& impl = *store_->impl_;
    impl.mutex.lock();
    depth_ = impl.depth++;
    try {
        if (depth_ == 0)
            impl.db.exec("BEGIN IMMEDIATE");
        else
            impl.db.exec("SAVEPOINT sp" + std::to_string(depth_));
    } catch (...) {
        --impl.depth;
        impl.mutex.unlock();
        throw;
    }
}

Store::Transaction::~Transaction() {
    auto& impl = *store_->impl_;
    if (!done_) {
        try {
            if (depth_ == 0) {
                impl.db.exec("ROLLBACK");
            } else {
                impl.db.exec("ROLLBACK TO sp" + std::to_string(depth_));
                impl.db.exec("RELEASE sp" + std::to_string(depth_));
            }
        } catch (...) {
        }
        // The cached taxonomy may include rolled-back tags.
        try {
            impl.load_taxonomy();
        } catch (...) {
        }
    }
    --impl.depth;
    impl.mutex.unlock();
}

void Store::Transaction::commit() {
    auto& impl = *store_->impl_;
    if (depth_ == 0)
        impl.db.exec("COMMIT");
    else
        impl.db.exec("RELEASE sp" + std::to_string(depth_));
    done_ = true;
}

int Store::schema_version() const {
    Transaction tx(*this);
    sql::Statement st(impl_->db, "SELECT value FROM meta WHERE key = 'schema_version'");
    if (!st.step()) throw StoreError("store has no schema version");
    return std::stoi(st.str(0));
}

Taxonomy Store::taxonomy() const {
    std::lock_guard lock(impl_->mutex);
    return impl_->taxonomy;
}

void Store::add_tag(const Tag& tag) {
    Transaction tx(*this);
    Taxonomy next = impl_->taxonomy;
    next.add(tag);
    impl_->insert_tag(*next.find(tag.name));
    impl_->taxonomy = std::move(next);
    tx.commit();
}

void Store::merge_taxonomy(const Taxonomy& tax) {
    Transaction tx(*this);
    Taxonomy next = impl_->taxonomy;
    for (const auto& tag : tax.tags()) {
        if (next.contains(tag.name)) continue;
        next.add({tag.name, tag.kind, std::nullopt});
        impl_->insert_tag({tag.name, tag.kind, std::nullopt});
    }
    for (const auto& tag : tax.tags()) {
        if (!tag.opposite || next.opposite_of(tag.name) == tag.opposite) continue;
        next.set_opposite(tag.name, *tag.opposite);
        sql::Statement up(impl_->db, "UPDATE tags SET opposite = ? WHERE name = ?");
        up.bind(1, *tag.opposite).bind(2, tag.name);
        up.run();
        up.reset();
        up.bind(1, tag.name).bind(2, *tag.opposite);
        up.run();
    }
    impl_->taxonomy = std::move(next);
    tx.commit();
}

ArticleId Store::add_article(ArticleRecord a) {
    if (a.url.empty()) throw ValidationError("article url must be nonempty");
    Transaction tx(*this);
    if (has_url(a.url)) throw ConflictError("article url already stored: " + a.url);
    sql::Statement st(impl_->db,
                      "INSERT INTO articles (url, source_id, fetched_at, title, body, status, "
                      "suggestions) VALUES (?, ?, ?, ?, ?, ?, ?)");
    st.bind(1, a.url).bind(2, a.source_id).bind(3, a.fetched_at).bind(4, a.title);
    st.bind(5, body_to_text(a.body)).bind(6, to_string(a.status));
    if (a.suggestions)
        st.bind(7, to_json(*a.suggestions).dump());
    else
        st.bind_null(7);
    st.run();
    ArticleId id{impl_->db.last_insert_id()};
    tx.commit();
    return id;
}

bool Store::has_url(std::string_view url) const { return find_article(url).has_value(); }

std::optional<ArticleId> Store::find_article(std::string_view url) const {
    Transaction tx(*this);
    sql::Statement st(impl_->db, "SELECT id FROM articles WHERE url = ?");
    st.bind(1, url);
    if (!st.step()) return std::nullopt;
    return ArticleId{st.int64(0)};
}

ArticleRecord Store::article(ArticleId id) const {
    Transaction tx(*this);
    sql::Statement st(impl_->db,
                      "SELECT id, url, source_id, fetched_at, title, body, status, suggestions "
                      "FROM articles WHERE id = ?");
    st.bind(1, id.value);
    if (!st.step()) throw NotFoundError("article " + id.str() + " not found");
    return impl_->read_article(st);
}

std::vector<ArticleRecord> Store::articles(std::optional<ReviewStatus> status) const {
    Transaction tx(*this);
    std::string q =
        "SELECT id, url, source_id, fetched_at, title, body, status, suggestions FROM articles";
    if (status) q += " WHERE status = ?";
    q += " ORDER BY id";
    sql::Statement st(impl_->db, q);
    if (status) st.bind(1, to_string(*status));
    std::vector<ArticleRecord> out;
    while (st.step()) out.push_back(impl_->read_article(st));
    return out;
}

void Store::set_suggestions(ArticleId id, const Suggestions& s) {
    Transaction tx(*this);
    impl_->require_article(id);
    sql::Statement st(impl_->db, "UPDATE articles SET suggestions = ? WHERE id = ?");
    st.bind(1, to_json(s).dump()).bind(2, id.value);
    st.run();
    tx.commit();
}

void Store::set_status(ArticleId id, ReviewStatus status) {
    Transaction tx(*this);
    impl_->require_article(id);
    if (status == ReviewStatus::unreviewed && !links_for_article(id).empty())
        throw ValidationError("article " + id.str() + " has event links and cannot be unreviewed");
    sql::Statement st(impl_->db, "UPDATE articles SET status = ? WHERE id = ?");
    st.bind(1, to_string(status)).bind(2, id.value);
    st.run();
    tx.commit();
}

void Store::validate_event(const ProtestEvent& e) const {
    if (!e.date.valid()) throw ValidationError("invalid event date");
    if (text::trim(e.location.locality).empty() && text::trim(e.location.region).empty())
        throw ValidationError("event location needs a locality or region");
    if (e.location.latitude.has_value() != e.location.longitude.has_value())
        throw ValidationError("latitude and longitude must be given together");
    if (e.location.has_coordinates() &&
        (std::abs(*e.location.latitude) > 90.0 || std::abs(*e.location.longitude) > 180.0))
        throw ValidationError("coordinates out of range");
    Transaction tx(*this);
    impl_->taxonomy.validate_event_tags(e.tags);
}

EventId Store::record_event(ProtestEvent e, std::span<const ArticleEventLink> links) {
    Transaction tx(*this);
    validate_event(e);
    if (links.empty()) throw ValidationError("event needs at least one article reference");
    std::set<ArticleId> seen;
    for (const auto& l : links) {
        impl_->require_article(l.article);
        if (!seen.insert(l.article).second)
            throw ValidationError("duplicate article reference " + l.article.str());
    }
    if (e.attendee_source) impl_->require_article(*e.attendee_source);
    if (e.external_key && find_event_by_key(*e.external_key))
        throw ConflictError("event key already stored: " + *e.external_key);

    sql::Statement st(impl_->db,
                      "INSERT INTO events (external_key, date, locality, region, latitude, "
                      "longitude, attendees, attendee_source) VALUES (?, ?, ?, ?, ?, ?, ?, ?)");
    st.bind(1, e.external_key).bind(2, e.date.iso()).bind(3, e.location.locality);
    st.bind(4, e.location.region).bind(5, e.location.latitude).bind(6, e.location.longitude);
    if (e.attendee_count)
        st.bind(7, static_cast<std::int64_t>(*e.attendee_count));
    else
        st.bind_null(7);
    if (e.attendee_source)
        st.bind(8, e.attendee_source->value);
    else
        st.bind_null(8);
    st.run();
    EventId id{impl_->db.last_insert_id()};
    if (!e.external_key) {
        sql::Statement key(impl_->db, "UPDATE events SET external_key = ? WHERE id = ?");
        key.bind(1, "ev-" + id.str()).bind(2, id.value);
        key.run();
    }
    sql::Statement tag(impl_->db, "INSERT INTO event_tags (event_id, tag) VALUES (?, ?)");
    for (const auto& t : e.tags) {
        tag.reset();
        tag.bind(1, id.value).bind(2, t);
        tag.run();
    }
    sql::Statement reviewed(impl_->db, "UPDATE articles SET status = 'reviewed' WHERE id = ?");
    for (const auto& l : links) {
        impl_->insert_link({l.article, id, l.tense});
        reviewed.reset();
        reviewed.bind(1, l.article.value);
        reviewed.run();
    }
    tx.commit();
    return id;
}

ProtestEvent Store::event(EventId id) const {
    Transaction tx(*this);
    auto e = impl_->find_event(id);
    if (!e) throw NotFoundError("event " + id.str() + " not found");
    return *e;
}

std::vector<ProtestEvent> Store::events() const {
    Transaction tx(*this);
    sql::Statement st(impl_->db,
                      "SELECT id, external_key, date, locality, region, latitude, longitude, "
                      "attendees, attendee_source FROM events ORDER BY id");
    std::vector<ProtestEvent> out;
    while (st.step()) out.push_back(impl_->read_event(st));
    return out;
}

std::optional<EventId> Store::find_event_by_key(std::string_view key) const {
    Transaction tx(*this);
    sql::Statement st(impl_->db, "SELECT id FROM events WHERE external_key = ?");
    st.bind(1, key);
    if (!st.step()) return std::nullopt;
    return EventId{st.int64(0)};
}

std::vector<EventId> Store::find_duplicate_events(const ProtestEvent& c,
                                                  const DedupePolicy& policy) const {
    Transaction tx(*this);
    sql::Statement st(impl_->db,
                      "SELECT id, external_key, date, locality, region, latitude, longitude, "
                      "attendees, attendee_source FROM events WHERE date = ? ORDER BY id");
    st.bind(1, c.date.iso());
    const auto locality = normalize_place(c.location.locality);
    const auto region = normalize_place(c.location.region);
    std::vector<std::pair<double, EventId>> hits;
    while (st.step()) {
        auto e = impl_->read_event(st);
        if (e.tags != c.tags || e.id == c.id) continue;
        if (e.location.has_coordinates() && c.location.has_coordinates()) {
            double d = haversine_km(*c.location.latitude, *c.location.longitude,
                                    *e.location.latitude, *e.location.longitude);
            if (d <= policy.radius_km) hits.emplace_back(d, e.id);
        } else if (normalize_place(e.location.locality) == locality &&
                   normalize_place(e.location.region) == region) {
            hits.emplace_back(0.0, e.id);
        }
    }
    std::stable_sort(hits.begin(), hits.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<EventId> out;
    for (const auto& [_, id] : hits) out.push_back(id);
    return out;
}

bool Store::link(const ArticleEventLink& l) {
    Transaction tx(*this);
    impl_->require_article(l.article);
    if (!impl_->find_event(l.event)) throw ReferenceError("unknown event id " + l.event.str());
    bool added = impl_->insert_link(l);
    sql::Statement reviewed(impl_->db, "UPDATE articles SET status = 'reviewed' WHERE id = ?");
    reviewed.bind(1, l.article.value);
    reviewed.run();
    tx.commit();
    return added;
}

namespace {

std::vector<ArticleEventLink> read_links(sql::Statement& st) {
    std::vector<ArticleEventLink> out;
    while (st.step())
        out.push_back({ArticleId{st.int64(0)}, EventId{st.int64(1)},
                       parse_tense(st.str(2)).value_or(Tense::past)});
    return out;
}

}  // namespace

std::vector<ArticleEventLink> Store::links_for_article(ArticleId id) const {
    Transaction tx(*this);
    sql::Statement st(impl_->db,
                      "SELECT article_id, event_id, tense FROM links WHERE article_id = ? "
                      "ORDER BY event_id");
    st.bind(1, id.value);
    return read_links(st);
}

std::vector<ArticleEventLink> Store::links_for_event(EventId id) const {
    Transaction tx(*this);
    sql::Statement st(impl_->db,
                      "SELECT article_id, event_id, tense FROM links WHERE event_id = ? "
                      "ORDER BY article_id");
    st.bind(1, id.value);
    return read_links(st);
}

std::vector<ArticleEventLink> Store::links() const {
    Transaction tx(*this);
    sql::Statement st(impl_->db,
                      "SELECT article_id, event_id, tense FROM links ORDER BY article_id, event_id");
    return read_links(st);
}

void Store::merge_events(EventId from, EventId into) {
    Transaction tx(*this);
    if (from == into) throw ArgumentError("cannot merge an event into itself");
    if (!impl_->find_event(from)) throw NotFoundError("event " + from.str() + " not found");
    if (!impl_->find_event(into)) throw NotFoundError("event " + into.str() + " not found");
    for (const auto& l : links_for_event(from)) impl_->insert_link({l.article, into, l.tense});
    for (const char* q : {"DELETE FROM links WHERE event_id = ?",
                          "DELETE FROM event_tags WHERE event_id = ?",
                          "DELETE FROM events WHERE id = ?"}) {
        sql::Statement st(impl_->db, q);
        st.bind(1, from.value);
        st.run();
    }
    tx.commit();
}

DatasetStats Store::compute_stats(std::size_t top_n) const {
    Transaction tx(*this);
    DatasetStats stats;

    std::map<std::int64_t, std::vector<std::string>> tags_by_event;
    {
        sql::Statement st(impl_->db, "SELECT event_id, tag FROM event_tags ORDER BY event_id, tag");
        while (st.step()) tags_by_event[st.int64(0)].push_back(st.str(1));
    }
    {
        sql::Statement st(impl_->db, "SELECT id FROM events");
        while (st.step()) {
            ++stats.total_events;
            tags_by_event.try_emplace(st.int64(0));
        }
    }
    std::map<std::int64_t, std::vector<std::int64_t>> events_by_article;
    {
        sql::Statement st(impl_->db, "SELECT article_id, event_id FROM links");
        while (st.step()) events_by_article[st.int64(0)].push_back(st.int64(1));
    }
    {
        sql::Statement st(impl_->db, "SELECT id FROM articles WHERE status = 'reviewed'");
        while (st.step()) {
            ++stats.reviewed_articles;
            auto it = events_by_article.find(st.int64(0));
            ++stats.events_per_article[it == events_by_article.end() ? 0 : it->second.size()];
        }
    }

    std::map<std::string, std::pair<std::set<std::int64_t>, std::set<std::int64_t>>> by_category;
    for (const auto& c : impl_->taxonomy.names_of(TagKind::category)) by_category[c];
    std::map<std::string, std::pair<std::vector<std::string>,
                                    std::pair<std::set<std::int64_t>, std::set<std::int64_t>>>>
        by_set;
    for (const auto& [event, tags] : tags_by_event) {
        for (const auto& t : tags)
            if (auto* tag = impl_->taxonomy.find(t); tag && tag->kind == TagKind::category)
                by_category[t].first.insert(event);
        auto& row = by_set[join_tags(tags)];
        row.first = tags;
        row.second.first.insert(event);
    }
    for (const auto& [article, events] : events_by_article) {
        for (auto ev : events) {
            auto it = tags_by_event.find(ev);
            if (it == tags_by_event.end()) continue;
            for (const auto& t : it->second)
                if (by_category.contains(t)) by_category[t].second.insert(article);
            by_set[join_tags(it->second)].second.second.insert(article);
        }
    }

    for (const auto& [name, sets] : by_category)
        stats.category_table.push_back({name, sets.first.size(), sets.second.size()});
    std::stable_sort(stats.category_table.begin(), stats.category_table.end(),
                     [](const CategoryRow& a, const CategoryRow& b) { return a.events > b.events; });

    std::vector<std::pair<std::string, TagSetRow>> rows;
    for (const auto& [key, row] : by_set)
        rows.push_back({key, {row.first, row.second.first.size(), row.second.second.size()}});
    stats.unique_tag_sets = rows.size();
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return a.second.events > b.second.events;
    });
    for (std::size_t i = 0; i < rows.size() && i < top_n; ++i)
        stats.top_tag_sets.push_back(std::move(rows[i].second));
    return stats;
}

RunId Store::create_run(std::string_view stage, std::string_view payload) {
    Transaction tx(*this);
    sql::Statement st(impl_->db, "INSERT INTO runs (stage, payload) VALUES (?, ?)");
    st.bind(1, stage).bind(2, payload);
    st.run();
    RunId id{impl_->db.last_insert_id()};
    tx.commit();
    return id;
}

void Store::update_run(RunId id, std::string_view stage, std::string_view payload) {
    Transaction tx(*this);
    sql::Statement st(impl_->db, "UPDATE runs SET stage = ?, payload = ? WHERE id = ?");
    st.bind(1, stage).bind(2, payload).bind(3, id.value);
    st.run();
    if (impl_->db.changes() == 0) throw NotFoundError("run " + id.str() + " not found");
    tx.commit();
}

std::optional<StoredRun> Store::run(RunId id) const {
    Transaction tx(*this);
    sql::Statement st(impl_->db, "SELECT id, stage, payload FROM runs WHERE id = ?");
    st.bind(1, id.value);
    if (!st.step()) return std::nullopt;
    return StoredRun{RunId{st.int64(0)}, st.str(1), st.str(2)};
}

std::optional<RunId> Store::latest_run() const {
    Transaction tx(*this);
    sql::Statement st(impl_->db, "SELECT MAX(id) FROM runs");
    if (!st.step() || st.is_null(0)) return std::nullopt;
    return RunId{st.int64(0)};
}

}  // namespace harvest
