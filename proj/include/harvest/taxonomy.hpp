#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace harvest {

enum class TagKind { category, position, detail };

std::string_view to_string(TagKind kind);
std::optional<TagKind> parse_tag_kind(std::string_view s);

struct Tag {
    std::string name;
    TagKind kind = TagKind::detail;
    /// Only meaningful for positions; opposition is stored symmetrically.
    std::optional<std::string> opposite;

    bool operator==(const Tag&) const = default;
};

/// The twelve general categories the taxonomy starts from.
const std::vector<std::string>& seed_categories();

/// Kind guess for a tag name seen only in imported data: seeded category
/// names are categories, "For ..."/"Against ..." are positions, the rest
/// details.
TagKind infer_tag_kind(std::string_view name);

/// "For X" <-> "Against X"; empty when the name has neither prefix.
std::optional<std::string> mirrored_position(std::string_view name);

/// Tag vocabulary held as plain data. Names are unique.
class Taxonomy {
public:
    static Taxonomy seeded();

    /// Adds or replaces nothing: throws ValidationError on an empty or
    /// duplicate name. Declaring `opposite` links both tags; the opposite
    /// must already exist and be a position.
    void add(Tag tag);
    void set_opposite(const std::string& a, const std::string& b);

    bool contains(std::string_view name) const;
    const Tag* find(std::string_view name) const;
    std::optional<std::string> opposite_of(std::string_view name) const;

    std::vector<Tag> tags() const;  // sorted by name
    std::vector<std::string> names() const;
    std::vector<std::string> names_of(TagKind kind) const;
    std::size_t size() const { return tags_.size(); }

    /// Checks the event-level tag rules: >=1 category, >=1 position, all
    /// known, no position together with its opposite. Throws ValidationError.
    void validate_event_tags(const std::set<std::string>& tags) const;

    /// TSV lines `kind<TAB>name[<TAB>opposite]`, '#' comments.
    static Taxonomy parse_tsv(std::string_view text, Taxonomy base = seeded());
    static Taxonomy load_tsv(const std::filesystem::path& path, Taxonomy base = seeded());

private:
    std::map<std::string, Tag, std::less<>> tags_;
};

}  // namespace harvest
