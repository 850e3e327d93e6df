#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace harvest::html {

struct Node {
    enum class Kind { element, text };

    Kind kind = Kind::element;
    std::string name;  // lowercase tag name; empty for text and the root
    std::vector<std::pair<std::string, std::string>> attributes;  // names lowercased
    std::string text;  // decoded character data for text nodes
    std::vector<std::unique_ptr<Node>> children;
    Node* parent = nullptr;

    bool is_element(std::string_view tag) const { return kind == Kind::element && name == tag; }
    std::optional<std::string_view> attribute(std::string_view key) const;
};

struct Document {
    std::unique_ptr<Node> root;  // synthetic element with an empty name
    std::vector<std::string> diagnostics;
};

/// Tolerant parse: never throws on malformed markup. Comments, doctypes and
/// processing instructions are dropped; script/style contents are kept as
/// raw text under their element; entities are decoded; void elements never
/// take children; common implied end tags (p, li, dt/dd, tr, td/th, option)
/// are closed; stray end tags are ignored with a diagnostic.
Document parse(std::string_view markup);

/// Decodes named (common subset) and numeric character references to UTF-8.
/// Unknown references are kept verbatim.
std::string decode_entities(std::string_view s);

bool is_void_element(std::string_view tag);

/// Concatenated descendant text, skipping script/style/template contents.
std::string text_content(const Node& node);

/// Pre-order visit of every node below (and including) `node`.
template <class F>
void walk(const Node& node, F&& f) {
    f(node);
    for (const auto& c : node.children) walk(*c, f);
}

}  // namespace harvest::html
