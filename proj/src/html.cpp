#include "harvest/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>

namespace harvest::html {

namespace {

struct NamedEntity {
    std::string_view name;
    char32_t code;
};

// Sorted by name for binary search.
constexpr std::array<NamedEntity, 62> kEntities{{
    {"AElig", 0xC6}, {"Eacute", 0xC9}, {"Uuml", 0xDC}, {"aacute", 0xE1}, {"acirc", 0xE2},
    {"aelig", 0xE6}, {"agrave", 0xE0}, {"amp", '&'},   {"apos", '\''},  {"aring", 0xE5},
    {"atilde", 0xE3}, {"auml", 0xE4},  {"bdquo", 0x201E}, {"bull", 0x2022}, {"ccedil", 0xE7},
    {"cent", 0xA2},  {"copy", 0xA9},   {"deg", 0xB0},   {"eacute", 0xE9}, {"ecirc", 0xEA},
    {"egrave", 0xE8}, {"euml", 0xEB},  {"euro", 0x20AC}, {"gt", '>'},     {"hellip", 0x2026},
    {"iacute", 0xED}, {"icirc", 0xEE}, {"iuml", 0xEF},  {"laquo", 0xAB},  {"ldquo", 0x201C},
    {"lsaquo", 0x2039}, {"lsquo", 0x2018}, {"lt", '<'}, {"mdash", 0x2014}, {"middot", 0xB7},
    {"nbsp", 0xA0},  {"ndash", 0x2013}, {"ntilde", 0xF1}, {"oacute", 0xF3}, {"ocirc", 0xF4},
    {"ouml", 0xF6},  {"para", 0xB6},   {"pound", 0xA3}, {"quot", '"'},   {"raquo", 0xBB},
    {"rdquo", 0x201D}, {"reg", 0xAE},  {"rsaquo", 0x203A}, {"rsquo", 0x2019}, {"sbquo", 0x201A},
    {"sect", 0xA7},  {"shy", 0xAD},    {"szlig", 0xDF}, {"thinsp", 0x2009}, {"times", 0xD7},
    {"trade", 0x2122}, {"uacute", 0xFA}, {"ucirc", 0xFB}, {"uuml", 0xFC},  {"yen", 0xA5},
    {"zwj", 0x200D}, {"zwnj", 0x200C},
}};

static_assert(std::is_sorted(kEntities.begin(), kEntities.end(),
                             [](const NamedEntity& a, const NamedEntity& b) { return a.name < b.name; }));

// References honoured without the trailing semicolon, as browsers do.
constexpr std::array<std::string_view, 5> kLegacy{"amp", "gt", "lt", "nbsp", "quot"};

void append_utf8(std::string& out, char32_t cp) {
    if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::optional<char32_t> lookup_entity(std::string_view name) {
    auto it = std::lower_bound(kEntities.begin(), kEntities.end(), name,
                               [](const NamedEntity& e, std::string_view n) { return e.name < n; });
    if (it != kEntities.end() && it->name == name) return it->code;
    return std::nullopt;
}

bool is_name_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '-' || c == '_' || c == ':' || c == '.';
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool in(std::string_view tag, std::initializer_list<std::string_view> set) {
    return std::find(set.begin(), set.end(), tag) != set.end();
}

// Elements whose start tag implicitly closes an open <p>.
bool closes_paragraph(std::string_view tag) {
    return in(tag, {"address", "article", "aside", "blockquote", "details", "div", "dl", "fieldset", "figcaption",
                    "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6", "header", "hr", "main", "menu",
                    "nav", "ol", "p", "pre", "section", "table", "ul", "li", "dd", "dt"});
}

bool raw_text_element(std::string_view tag) { return in(tag, {"script", "style", "xmp", "iframe", "noembed", "noframes", "plaintext"}); }
bool escapable_raw_text_element(std::string_view tag) { return in(tag, {"title", "textarea"}); }

class Parser {
public:
    explicit Parser(std::string_view src) : s_(src) {
        doc_.root = std::make_unique<Node>();
        stack_.push_back(doc_.root.get());
    }

    Document run() {
        while (pos_ < s_.size()) {
            if (s_[pos_] == '<') {
                if (starts("<!--")) {
                    skip_comment();
                } else if (starts("<!") || starts("<?")) {
                    skip_past('>');
                } else if (starts("</")) {
                    end_tag();
                } else if (pos_ + 1 < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_ + 1]))) {
                    start_tag();
                } else {
                    add_text("<");
                    ++pos_;
                }
            } else {
                const std::size_t next = s_.find('<', pos_);
                const std::size_t end = next == std::string_view::npos ? s_.size() : next;
                add_text(decode_entities(s_.substr(pos_, end - pos_)));
                pos_ = end;
            }
        }
        if (stack_.size() > 1) {
            std::size_t unclosed = 0;
            for (std::size_t i = 1; i < stack_.size(); ++i)
                if (!in(stack_[i]->name, {"html", "body", "head", "p", "li", "td", "tr", "th", "dd", "dt", "option"})) ++unclosed;
            if (unclosed) doc_.diagnostics.push_back(std::to_string(unclosed) + " element(s) left open at end of input");
        }
        return std::move(doc_);
    }

private:
    bool starts(std::string_view p) const {
        if (s_.size() - pos_ < p.size()) return false;
        for (std::size_t i = 0; i < p.size(); ++i)
            if (std::tolower(static_cast<unsigned char>(s_[pos_ + i])) != p[i]) return false;
        return true;
    }

    void skip_comment() {
        const std::size_t end = s_.find("-->", pos_ + 4);
        if (end == std::string_view::npos) {
            doc_.diagnostics.push_back("unterminated comment");
            pos_ = s_.size();
        } else {
            pos_ = end + 3;
        }
    }

    void skip_past(char c) {
        const std::size_t end = s_.find(c, pos_);
        pos_ = end == std::string_view::npos ? s_.size() : end + 1;
    }

    void skip_space() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    Node* current() { return stack_.back(); }

    void add_text(std::string text) {
        if (text.empty()) return;
        Node* parent = current();
        if (!parent->children.empty() && parent->children.back()->kind == Node::Kind::text) {
            parent->children.back()->text += text;
            return;
        }
        auto n = std::make_unique<Node>();
        n->kind = Node::Kind::text;
        n->text = std::move(text);
        n->parent = parent;
        parent->children.push_back(std::move(n));
    }

    // Index in stack_ of the innermost open `tag`, stopping at any boundary.
    std::optional<std::size_t> find_open(std::string_view tag, std::initializer_list<std::string_view> boundary = {}) const {
        for (std::size_t i = stack_.size(); i-- > 1;) {
            if (stack_[i]->name == tag) return i;
            if (in(stack_[i]->name, boundary)) return std::nullopt;
        }
        return std::nullopt;
    }

    void pop_to(std::size_t index) { stack_.resize(index); }

    void close_implied(std::string_view tag) {
        if (closes_paragraph(tag))
            if (auto i = find_open("p", {"button", "table", "td", "th", "li", "blockquote", "div"}); i && tag != "li")
                pop_to(*i);
        if (tag == "p")
            if (auto i = find_open("p", {"button", "table", "td", "th", "blockquote", "div", "li"})) pop_to(*i);
        if (tag == "li")
            if (auto i = find_open("li", {"ul", "ol", "menu"})) pop_to(*i);
        if (tag == "dt" || tag == "dd") {
            if (auto i = find_open("dd", {"dl"})) pop_to(*i);
            if (auto i = find_open("dt", {"dl"})) pop_to(*i);
        }
        if (tag == "tr")
            if (auto i = find_open("tr", {"table"})) pop_to(*i);
        if (tag == "td" || tag == "th" || tag == "tr") {
            if (auto i = find_open("td", {"table", "tr"})) pop_to(*i);
            if (auto i = find_open("th", {"table", "tr"})) pop_to(*i);
        }
        if (tag == "option")
            if (auto i = find_open("option", {"select"})) pop_to(*i);
    }

    void start_tag() {
        ++pos_;
        const std::size_t name_start = pos_;
        while (pos_ < s_.size() && is_name_char(s_[pos_])) ++pos_;
        auto node = std::make_unique<Node>();
        node->name = lower(s_.substr(name_start, pos_ - name_start));
        bool self_closing = false;
        while (pos_ < s_.size()) {
            skip_space();
            if (pos_ >= s_.size()) break;
            if (s_[pos_] == '>') {
                ++pos_;
                break;
            }
            if (s_[pos_] == '/') {
                ++pos_;
                if (pos_ < s_.size() && s_[pos_] == '>') {
                    self_closing = true;
                    ++pos_;
                    break;
                }
                continue;
            }
            const std::size_t a0 = pos_;
            while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '>' &&
                   s_[pos_] != '=' && !(s_[pos_] == '/' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '>'))
                ++pos_;
            std::string key = lower(s_.substr(a0, pos_ - a0));
            if (key.empty()) {
                ++pos_;  // lone '=' or similar junk
                continue;
            }
            std::string value;
            skip_space();
            if (pos_ < s_.size() && s_[pos_] == '=') {
                ++pos_;
                skip_space();
                if (pos_ < s_.size() && (s_[pos_] == '"' || s_[pos_] == '\'')) {
                    const char q = s_[pos_++];
                    const std::size_t end = s_.find(q, pos_);
                    const std::size_t stop = end == std::string_view::npos ? s_.size() : end;
                    value = decode_entities(s_.substr(pos_, stop - pos_));
                    pos_ = end == std::string_view::npos ? s_.size() : end + 1;
                } else {
                    const std::size_t v0 = pos_;
                    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '>') ++pos_;
                    value = decode_entities(s_.substr(v0, pos_ - v0));
                }
            }
            if (std::none_of(node->attributes.begin(), node->attributes.end(), [&](const auto& kv) { return kv.first == key; }))
                node->attributes.emplace_back(std::move(key), std::move(value));
        }

        const std::string tag = node->name;
        close_implied(tag);
        Node* parent = current();
        node->parent = parent;
        Node* raw = node.get();
        parent->children.push_back(std::move(node));
        if (is_void_element(tag) || self_closing) return;
        stack_.push_back(raw);
        if (raw_text_element(tag) || escapable_raw_text_element(tag)) read_raw_text(tag, escapable_raw_text_element(tag));
    }

    void read_raw_text(const std::string& tag, bool decode) {
        const std::string close = "</" + tag;
        std::size_t end = pos_;
        while (true) {
            end = s_.find("</", end);
            if (end == std::string_view::npos) break;
            bool match = s_.size() - end >= close.size();
            for (std::size_t i = 0; match && i < close.size(); ++i)
                match = std::tolower(static_cast<unsigned char>(s_[end + i])) == close[i];
            if (match && (end + close.size() == s_.size() || !is_name_char(s_[end + close.size()]))) break;
            end += 2;
        }
        const std::size_t stop = end == std::string_view::npos ? s_.size() : end;
        auto body = s_.substr(pos_, stop - pos_);
        add_text(decode ? decode_entities(body) : std::string(body));
        pos_ = stop;
        if (end == std::string_view::npos) doc_.diagnostics.push_back("unterminated <" + tag + ">");
    }

    void end_tag() {
        pos_ += 2;
        const std::size_t n0 = pos_;
        while (pos_ < s_.size() && is_name_char(s_[pos_])) ++pos_;
        const std::string tag = lower(s_.substr(n0, pos_ - n0));
        skip_past('>');
        if (tag.empty()) return;
        if (tag == "br") {  // </br> behaves like <br>
            auto n = std::make_unique<Node>();
            n->name = "br";
            n->parent = current();
            current()->children.push_back(std::move(n));
            return;
        }
        if (auto i = find_open(tag)) {
            pop_to(*i);
        } else if (tag == "p") {
            // A stray </p> yields an empty paragraph, as browsers do.
            auto n = std::make_unique<Node>();
            n->name = "p";
            n->parent = current();
            current()->children.push_back(std::move(n));
        } else {
            doc_.diagnostics.push_back("stray end tag </" + tag + ">");
        }
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    Document doc_;
    std::vector<Node*> stack_;
};

}  // namespace

std::optional<std::string_view> Node::attribute(std::string_view key) const {
    for (const auto& [k, v] : attributes)
        if (k == key) return std::string_view(v);
    return std::nullopt;
}

bool is_void_element(std::string_view tag) {
    return in(tag, {"area", "base", "br", "col", "embed", "hr", "img", "input", "keygen", "link", "meta", "param",
                    "source", "track", "wbr"});
}

std::string decode_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out.push_back(s[i++]);
            continue;
        }
        if (i + 1 < s.size() && s[i + 1] == '#') {
            std::size_t j = i + 2;
            const bool hex = j < s.size() && (s[j] == 'x' || s[j] == 'X');
            if (hex) ++j;
            const std::size_t d0 = j;
            std::uint32_t cp = 0;
            while (j < s.size() && (hex ? std::isxdigit(static_cast<unsigned char>(s[j])) : std::isdigit(static_cast<unsigned char>(s[j])))) {
                const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(s[j])));
                const std::uint32_t digit = c <= '9' ? static_cast<std::uint32_t>(c - '0') : static_cast<std::uint32_t>(c - 'a' + 10);
                cp = std::min<std::uint32_t>(cp * (hex ? 16 : 10) + digit, 0x110000);
                ++j;
            }
            if (j > d0) {
                if (j < s.size() && s[j] == ';') ++j;
                // Windows-1252 remaps that pages still emit for quotes and dashes.
                static constexpr char32_t kC1[32] = {0x20AC, 0x81, 0x201A, 0x192, 0x201E, 0x2026, 0x2020, 0x2021,
                                                     0x2C6, 0x2030, 0x160, 0x2039, 0x152, 0x8D, 0x17D, 0x8F,
                                                     0x90, 0x2018, 0x2019, 0x201C, 0x201D, 0x2022, 0x2013, 0x2014,
                                                     0x2DC, 0x2122, 0x161, 0x203A, 0x153, 0x9D, 0x17E, 0x178};
                append_utf8(out, cp >= 0x80 && cp <= 0x9F ? kC1[cp - 0x80] : static_cast<char32_t>(cp));
                i = j;
                continue;
            }
            out.push_back(s[i++]);
            continue;
        }
        std::size_t j = i + 1;
        while (j < s.size() && std::isalnum(static_cast<unsigned char>(s[j])) && j - i <= 10) ++j;
        const auto name = s.substr(i + 1, j - i - 1);
        if (j < s.size() && s[j] == ';') {
            if (auto cp = lookup_entity(name)) {
                append_utf8(out, *cp);
                i = j + 1;
                continue;
            }
        } else if (std::find(kLegacy.begin(), kLegacy.end(), name) != kLegacy.end()) {
            append_utf8(out, *lookup_entity(name));
            i = j;
            continue;
        }
        out.push_back(s[i++]);
    }
    return out;
}

std::string text_content(const Node& node) {
    if (node.kind == Node::Kind::text) return node.text;
    if (in(node.name, {"script", "style", "template", "noscript"})) return {};
    std::string out;
    if (node.name == "br") return " ";
    for (const auto& c : node.children) out += text_content(*c);
    return out;
}

Document parse(std::string_view markup) { return Parser(markup).run(); }

}  // namespace harvest::html
