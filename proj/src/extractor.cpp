#include "harvest/extractor.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "harvest/error.hpp"
#include "harvest/text.hpp"

namespace harvest::extractor {

namespace {

bool in(std::string_view tag, std::initializer_list<std::string_view> set) {
    return std::find(set.begin(), set.end(), tag) != set.end();
}

bool block_level(std::string_view tag) {
    return tag.empty() ||
           in(tag, {"address", "article", "aside", "blockquote", "body", "caption", "center", "dd", "details", "div",
                    "dl", "dt", "fieldset", "figcaption", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5",
                    "h6", "header", "hgroup", "hr", "html", "li", "main", "menu", "nav", "ol", "p", "pre", "section",
                    "summary", "table", "tbody", "td", "tfoot", "th", "thead", "tr", "ul"});
}

bool heading(std::string_view tag) { return in(tag, {"h1", "h2", "h3", "h4", "h5", "h6"}); }
bool skipped(std::string_view tag) {
    return in(tag, {"script", "style", "template", "noscript", "head", "svg", "iframe", "object", "select", "button"});
}
bool boilerplate_element(std::string_view tag) { return in(tag, {"nav", "footer", "aside", "menu", "form"}); }

std::string squash(std::string_view s) {
    std::string out;
    for (char c : s)
        if (c != ' ' && c != '\t' && c != '\n' && c != '\r') out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

bool hidden(const html::Node& n) {
    if (n.attribute("hidden")) return true;
    if (auto a = n.attribute("aria-hidden"); a && text::to_lower(text::trim(*a)) == "true") return true;
    if (auto st = n.attribute("style")) {
        const auto s = squash(*st);
        if (s.find("display:none") != std::string::npos || s.find("visibility:hidden") != std::string::npos) return true;
    }
    return n.is_element("input") && n.attribute("type") && text::to_lower(*n.attribute("type")) == "hidden";
}

bool nav_like_attribute(const html::Node& n) {
    for (std::string_view key : {"id", "class", "role"}) {
        auto v = n.attribute(key);
        if (!v) continue;
        std::string tok;
        const std::string lower = text::to_lower(*v) + " ";
        for (char c : lower) {
            if (std::isalnum(static_cast<unsigned char>(c))) {
                tok.push_back(c);
                continue;
            }
            if (!tok.empty()) {
                for (std::string_view p : {"nav", "menu", "footer", "sidebar", "breadcrumb", "navigation", "contentinfo"})
                    if (tok.starts_with(p)) return true;
                tok.clear();
            }
        }
    }
    return false;
}

std::size_t code_points(std::string_view s) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) {
        return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
    }));
}

std::size_t visible_chars(std::string_view s) {
    std::size_t n = 0;
    for (char c : s)
        if ((static_cast<unsigned char>(c) & 0xC0) != 0x80 && !std::isspace(static_cast<unsigned char>(c))) ++n;
    return n;
}

struct Collector {
    struct Nested {
        const html::Node* node;
        std::size_t depth;
        bool boiler;
    };

    std::vector<TextBlock> blocks;

    // Emits the block for `el` (its inline text only), then the blocks nested
    // inside it, so blocks come out ordered by their start in the document.
    void visit(const html::Node& el, std::size_t depth, bool boiler) {
        boiler = boiler || boilerplate_element(el.name) || nav_like_attribute(el);
        std::string own;
        std::size_t link_chars = 0;
        std::vector<Nested> nested;
        gather(el, own, link_chars, false, depth, boiler, nested);
        if (!heading(el.name)) {
            TextBlock b = make_block(text::normalize_whitespace(own), el.name.empty() ? "#root" : el.name);
            const std::size_t total = visible_chars(own);
            b.link_char_fraction =
                total ? std::min(1.0, static_cast<double>(link_chars) / static_cast<double>(total)) : 0.0;
            b.depth = depth;
            b.boilerplate = boiler;
            b.element = &el;
            if (!b.text.empty()) blocks.push_back(std::move(b));
        }
        for (const auto& n : nested) visit(*n.node, n.depth, n.boiler);
    }

    void gather(const html::Node& el, std::string& own, std::size_t& link_chars, bool in_link, std::size_t depth,
                bool boiler, std::vector<Nested>& nested) {
        for (const auto& c : el.children) {
            if (c->kind == html::Node::Kind::text) {
                own += c->text;
                if (in_link) link_chars += visible_chars(c->text);
                continue;
            }
            if (skipped(c->name) || hidden(*c)) continue;
            if (c->name == "br" || c->name == "hr" || c->name == "img") {
                own.push_back(' ');
                continue;
            }
            if (block_level(c->name)) {
                own.push_back(' ');
                nested.push_back({c.get(), depth + 1, boiler});
                continue;
            }
            gather(*c, own, link_chars, in_link || c->name == "a", depth + 1, boiler, nested);
        }
    }
};

std::string normalized_text(const html::Node& n) { return text::normalize_whitespace(html::text_content(n)); }

void visible_headings(const html::Node& n, std::string_view tag, std::vector<std::string>& out) {
    for (const auto& c : n.children) {
        if (c->kind != html::Node::Kind::element || skipped(c->name) || hidden(*c)) continue;
        if (c->name == tag) {
            auto t = normalized_text(*c);
            if (!t.empty()) out.push_back(std::move(t));
        } else {
            visible_headings(*c, tag, out);
        }
    }
}

std::string longest(const std::vector<std::string>& v) {
    std::string best;
    for (const auto& s : v)
        if (code_points(s) > code_points(best)) best = s;
    return best;
}

std::string strip_site_suffix(std::string title) {
    static const std::vector<std::string_view> seps{" | ", " - ", " \xE2\x80\x93 ", " \xE2\x80\x94 ", " :: ", " \xC2\xBB "};
    std::size_t cut = std::string::npos;
    for (auto sep : seps) {
        const auto p = title.rfind(sep);
        if (p != std::string::npos && p > 0 && (cut == std::string::npos || p > cut)) cut = p;
    }
    if (cut != std::string::npos) title.erase(cut);
    return std::string(text::trim(title));
}

}  // namespace

ScoringConfig ScoringConfig::from_config(const KeyValueConfig& cfg) {
    ScoringConfig c;
    c.length_cap = cfg.get_double("extract.length_cap", c.length_cap);
    c.length_divisor = cfg.get_double("extract.length_divisor", c.length_divisor);
    c.comma_weight = cfg.get_double("extract.comma_weight", c.comma_weight);
    c.sentence_weight = cfg.get_double("extract.sentence_weight", c.sentence_weight);
    c.paragraph_bonus = cfg.get_double("extract.paragraph_bonus", c.paragraph_bonus);
    c.boilerplate_bonus = cfg.get_double("extract.boilerplate_bonus", c.boilerplate_bonus);
    const auto min_chars = cfg.get_int("extract.min_block_chars", static_cast<std::int64_t>(c.min_block_chars));
    if (min_chars < 0) throw ConfigError("extract.min_block_chars must be nonnegative");
    c.min_block_chars = static_cast<std::size_t>(min_chars);
    c.max_link_fraction = cfg.get_double("extract.max_link_fraction", c.max_link_fraction);
    if (!(c.max_link_fraction >= 0 && c.max_link_fraction <= 1))
        throw ConfigError("extract.max_link_fraction must be in [0,1]");
    if (!(c.length_divisor > 0)) throw ConfigError("extract.length_divisor must be positive");
    return c;
}

TextBlock make_block(std::string text, std::string tag_name, double link_char_fraction) {
    TextBlock b;
    b.char_count = code_points(text);
    for (char c : text) {
        b.comma_count += c == ',';
        b.sentence_punct_count += c == '.' || c == '!' || c == '?';
    }
    b.text = std::move(text);
    b.tag_name = std::move(tag_name);
    b.link_char_fraction = link_char_fraction;
    return b;
}

double score_text_block(const TextBlock& b, const ScoringConfig& cfg) {
    if (b.char_count == 0) return 0.0;
    const double base = std::min(static_cast<double>(b.char_count), cfg.length_cap) / cfg.length_divisor +
                        cfg.comma_weight * static_cast<double>(b.comma_count) +
                        cfg.sentence_weight * static_cast<double>(b.sentence_punct_count);
    const double link = std::clamp(b.link_char_fraction, 0.0, 1.0);
    double bonus = 0.0;
    if (b.boilerplate || in(b.tag_name, {"li", "dt", "dd"}))
        bonus = cfg.boilerplate_bonus;
    else if (in(b.tag_name, {"p", "pre", "blockquote"}))
        bonus = cfg.paragraph_bonus;
    return base * (1.0 - link) + bonus;
}

std::vector<TextBlock> collect_blocks(const html::Document& doc) {
    Collector c;
    c.visit(*doc.root, 0, false);
    return std::move(c.blocks);
}

std::string extract_title(const html::Document& doc) {
    std::vector<std::string> h;
    visible_headings(*doc.root, "h1", h);
    if (auto t = longest(h); !t.empty()) return t;
    const html::Node* title = nullptr;
    html::walk(*doc.root, [&](const html::Node& n) {
        if (!title && n.is_element("title")) title = &n;
    });
    if (title) {
        std::string t;
        for (const auto& c : title->children)
            if (c->kind == html::Node::Kind::text) t += c->text;
        t = strip_site_suffix(text::normalize_whitespace(t));
        if (!t.empty()) return t;
    }
    h.clear();
    visible_headings(*doc.root, "h2", h);
    return longest(h);
}

ExtractionResult extract_article(std::string_view markup, std::string_view url, const ScoringConfig& cfg) {
    const auto doc = html::parse(markup);
    const auto blocks = collect_blocks(doc);

    struct Container {
        double score = 0.0;
        std::size_t first = 0;
        std::vector<std::size_t> members;
    };
    std::map<const html::Node*, Container> containers;
    std::vector<const html::Node*> order;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (blocks[i].char_count < cfg.min_block_chars) continue;
        const html::Node* parent = blocks[i].element->parent ? blocks[i].element->parent : blocks[i].element;
        auto [it, fresh] = containers.try_emplace(parent);
        if (fresh) {
            it->second.first = i;
            order.push_back(parent);
        }
        it->second.score += score_text_block(blocks[i], cfg);
        it->second.members.push_back(i);
    }
    if (order.empty()) throw ExtractionError("no scorable text in " + std::string(url));

    const Container* best = nullptr;
    for (const auto* key : order) {
        const auto& c = containers.at(key);
        if (!best || c.score > best->score) best = &c;
    }
    ExtractionResult r;
    r.title = extract_title(doc);
    r.score = best->score;
    for (auto i : best->members)
        if (blocks[i].link_char_fraction <= cfg.max_link_fraction) r.paragraphs.push_back(blocks[i].text);
    if (r.paragraphs.empty()) throw ExtractionError("no scorable text in " + std::string(url));
    return r;
}

std::string format_expected(const ExtractionResult& r) {
    std::string out = r.title + "\n\n";
    for (const auto& p : r.paragraphs) out += p + "\n";
    return out;
}

}  // namespace harvest::extractor
