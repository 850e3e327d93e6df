#include "harvest/taxonomy.hpp"

#include <fstream>
#include <sstream>

#include "harvest/error.hpp"
#include "harvest/text.hpp"

namespace harvest {

std::string_view to_string(TagKind kind) {
    switch (kind) {
        case TagKind::category: return "category";
        case TagKind::position: return "position";
        case TagKind::detail: return "detail";
    }
    return "detail";
}

std::optional<TagKind> parse_tag_kind(std::string_view s) {
    if (s == "category") return TagKind::category;
    if (s == "position") return TagKind::position;
    if (s == "detail") return TagKind::detail;
    return std::nullopt;
}

const std::vector<std::string>& seed_categories() {
    static const std::vector<std::string> kCategories = {
        "Civil Rights", "Collective Bargaining", "Education", "Environment",
        "Executive",    "Guns",                  "Healthcare", "Immigration",
        "International", "Judicial",             "Legislative", "Other",
    };
    return kCategories;
}

TagKind infer_tag_kind(std::string_view name) {
    for (const auto& c : seed_categories())
        if (c == name) return TagKind::category;
    if (name.starts_with("For ") || name.starts_with("Against ")) return TagKind::position;
    return TagKind::detail;
}

std::optional<std::string> mirrored_position(std::string_view name) {
    if (name.starts_with("For ")) return "Against " + std::string(name.substr(4));
    if (name.starts_with("Against ")) return "For " + std::string(name.substr(8));
    return std::nullopt;
}

Taxonomy Taxonomy::seeded() {
    Taxonomy t;
    for (const auto& c : seed_categories()) t.add({c, TagKind::category, std::nullopt});
    return t;
}

void Taxonomy::add(Tag tag) {
    if (text::trim(tag.name).empty()) throw ValidationError("tag name must be nonempty");
    if (tag.name != text::trim(tag.name))
        throw ValidationError("tag name has surrounding whitespace: '" + tag.name + "'");
    if (tags_.contains(tag.name)) throw ValidationError("duplicate tag: '" + tag.name + "'");
    auto opposite = std::move(tag.opposite);
    tag.opposite.reset();
    std::string name = tag.name;
    tags_.emplace(name, std::move(tag));
    if (opposite) {
        try {
            set_opposite(name, *opposite);
        } catch (...) {
            tags_.erase(name);
            throw;
        }
    }
}

void Taxonomy::set_opposite(const std::string& a, const std::string& b) {
    auto ia = tags_.find(a);
    auto ib = tags_.find(b);
    if (ia == tags_.end() || ib == tags_.end())
        throw ValidationError("opposite declared between unknown tags '" + a + "' and '" + b + "'");
    if (a == b) throw ValidationError("tag cannot oppose itself: '" + a + "'");
    if (ia->second.kind != TagKind::position || ib->second.kind != TagKind::position)
        throw ValidationError("only position tags may declare opposites ('" + a + "', '" + b + "')");
    for (auto* t : {&ia->second, &ib->second}) {
        if (t->opposite && *t->opposite != a && *t->opposite != b)
            throw ValidationError("tag '" + t->name + "' already opposes '" + *t->opposite + "'");
    }
    ia->second.opposite = b;
    ib->second.opposite = a;
}

bool Taxonomy::contains(std::string_view name) const { return tags_.find(name) != tags_.end(); }

const Tag* Taxonomy::find(std::string_view name) const {
    auto it = tags_.find(name);
    return it == tags_.end() ? nullptr : &it->second;
}

std::optional<std::string> Taxonomy::opposite_of(std::string_view name) const {
    const Tag* t = find(name);
    return t ? t->opposite : std::nullopt;
}

std::vector<Tag> Taxonomy::tags() const {
    std::vector<Tag> out;
    out.reserve(tags_.size());
    for (const auto& [_, t] : tags_) out.push_back(t);
    return out;
}

std::vector<std::string> Taxonomy::names() const {
    std::vector<std::string> out;
    out.reserve(tags_.size());
    for (const auto& [n, _] : tags_) out.push_back(n);
    return out;
}

std::vector<std::string> Taxonomy::names_of(TagKind kind) const {
    std::vector<std::string> out;
    for (const auto& [n, t] : tags_)
        if (t.kind == kind) out.push_back(n);
    return out;
}

void Taxonomy::validate_event_tags(const std::set<std::string>& tags) const {
    bool category = false, position = false;
    for (const auto& name : tags) {
        const Tag* t = find(name);
        if (!t) throw ValidationError("unknown tag: '" + name + "'");
        category |= t->kind == TagKind::category;
        position |= t->kind == TagKind::position;
        if (t->opposite && tags.contains(*t->opposite))
            throw ValidationError("contradictory positions: '" + name + "' and '" + *t->opposite + "'");
    }
    if (!category) throw ValidationError("event needs at least one category tag");
    if (!position) throw ValidationError("event needs at least one position tag");
}

Taxonomy Taxonomy::parse_tsv(std::string_view content, Taxonomy base) {
    Taxonomy t = std::move(base);
    std::vector<std::pair<std::string, std::string>> opposites;
    std::istringstream in{std::string(content)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto body = text::trim(line);
        if (body.empty() || body.front() == '#') continue;
        std::vector<std::string> cols;
        std::size_t start = 0;
        std::string s(body);
        for (;;) {
            auto tab = s.find('\t', start);
            cols.emplace_back(text::trim(std::string_view(s).substr(start, tab - start)));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        auto kind = parse_tag_kind(cols[0]);
        if (!kind || cols.size() < 2)
            throw ConfigError("taxonomy line " + std::to_string(lineno) + ": expected kind<TAB>name");
        if (t.contains(cols[1])) {
            if (t.find(cols[1])->kind != *kind)
                throw ConfigError("taxonomy line " + std::to_string(lineno) + ": '" + cols[1] +
                                  "' redeclared with a different kind");
        } else {
            t.add({cols[1], *kind, std::nullopt});
        }
        if (cols.size() >= 3 && !cols[2].empty()) opposites.emplace_back(cols[1], cols[2]);
    }
    for (const auto& [a, b] : opposites) t.set_opposite(a, b);
    return t;
}

Taxonomy Taxonomy::load_tsv(const std::filesystem::path& path, Taxonomy base) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read taxonomy file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_tsv(ss.str(), std::move(base));
}

}  // namespace harvest
