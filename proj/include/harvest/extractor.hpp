#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "harvest/config.hpp"
#include "harvest/html.hpp"

namespace harvest::extractor {

struct TextBlock {
    std::string text;  // whitespace-normalized
    std::string tag_name;
    std::size_t char_count = 0;  // UTF-8 code points
    std::size_t comma_count = 0;
    std::size_t sentence_punct_count = 0;  // '.', '!' and '?'
    double link_char_fraction = 0.0;
    std::size_t depth = 0;
    bool boilerplate = false;  // inside nav/footer/aside/menu/form or a nav-like id/class
    const html::Node* element = nullptr;
};

struct ScoringConfig {
    double length_cap = 1000;
    double length_divisor = 100;
    double comma_weight = 1;
    double sentence_weight = 2;
    double paragraph_bonus = 5;    // p, pre, blockquote
    double boilerplate_bonus = -5;  // li, dt, dd, or boilerplate context
    std::size_t min_block_chars = 25;
    double max_link_fraction = 0.5;  // denser blocks score but are not emitted

    /// Keys: extract.length_cap, extract.length_divisor, extract.comma_weight,
    /// extract.sentence_weight, extract.paragraph_bonus,
    /// extract.boilerplate_bonus, extract.min_block_chars,
    /// extract.max_link_fraction.
    static ScoringConfig from_config(const KeyValueConfig& cfg);
};

/// Fills the count fields from `text` (link fraction and depth untouched).
TextBlock make_block(std::string text, std::string tag_name, double link_char_fraction = 0.0);

/// min(chars, cap)/divisor + commas + 2 * sentence marks, scaled by the
/// non-link fraction, plus the tag bonus. An empty block scores 0.
double score_text_block(const TextBlock& block, const ScoringConfig& cfg = {});

/// Visible text blocks in document order, including ones shorter than the
/// minimum. Hidden subtrees (hidden attribute, aria-hidden, display:none,
/// visibility:hidden) and script/style/template/noscript are skipped.
std::vector<TextBlock> collect_blocks(const html::Document& doc);

struct ExtractionResult {
    std::string title;
    std::vector<std::string> paragraphs;
    double score = 0.0;
};

/// Throws ExtractionError naming `url` when no block reaches the minimum size.
ExtractionResult extract_article(std::string_view markup, std::string_view url, const ScoringConfig& cfg = {});

/// Longest visible h1; else the page title with a trailing site-name
/// segment removed; else the longest h2; else empty.
std::string extract_title(const html::Document& doc);

/// Golden-fixture text form: title line, blank line, one paragraph per line.
std::string format_expected(const ExtractionResult& r);

}  // namespace harvest::extractor
