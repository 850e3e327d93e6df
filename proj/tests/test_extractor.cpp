#include <gtest/gtest.h>

#include "harvest/error.hpp"
#include "harvest/extractor.hpp"
#include "harvest/html.hpp"
#include "harvest/text.hpp"
#include "support/fixtures.hpp"

namespace harvest {
namespace {

using harvest::testing::data_dir;
using harvest::testing::read_file;

const html::Node* find_first(const html::Node& root, std::string_view tag) {
    const html::Node* hit = nullptr;
    html::walk(root, [&](const html::Node& n) {
        if (!hit && n.is_element(tag)) hit = &n;
    });
    return hit;
}

std::size_t count(const html::Node& root, std::string_view tag) {
    std::size_t n = 0;
    html::walk(root, [&](const html::Node& x) { n += x.is_element(tag); });
    return n;
}

// -- parser ----------------------------------------------------------------

TEST(Html, DecodesEntities) {
    EXPECT_EQ(html::decode_entities("a &amp; b &lt;c&gt; &quot;q&quot;"), "a & b <c> \"q\"");
    EXPECT_EQ(html::decode_entities("&#39;&#x41;&#X42;"), "'AB");
    EXPECT_EQ(html::decode_entities("&rsquo;&mdash;&nbsp;"), "\xE2\x80\x99\xE2\x80\x94\xC2\xA0");
    EXPECT_EQ(html::decode_entities("&#150;"), "\xE2\x80\x93");
    EXPECT_EQ(html::decode_entities("&bogus; & &amp &#;"), "&bogus; & & &#;");
    EXPECT_EQ(html::decode_entities("&#xD800;"), "\xEF\xBF\xBD");
}

TEST(Html, BuildsTreeWithAttributes) {
    auto doc = html::parse("<div id=main CLASS='a b' data-x=\"1 &amp; 2\" hidden><a href=/x>link</a></div>");
    const auto* div = find_first(*doc.root, "div");
    ASSERT_NE(div, nullptr);
    EXPECT_EQ(div->attribute("id"), "main");
    EXPECT_EQ(div->attribute("class"), "a b");
    EXPECT_EQ(div->attribute("data-x"), "1 & 2");
    EXPECT_TRUE(div->attribute("hidden").has_value());
    EXPECT_EQ(find_first(*div, "a")->attribute("href"), "/x");
    EXPECT_EQ(html::text_content(*div), "link");
}

TEST(Html, ImpliedEndTagsAndVoids) {
    auto doc = html::parse("<p>one<p>two<ul><li>a<li>b</ul><br><img src=x>tail");
    EXPECT_EQ(count(*doc.root, "p"), 2u);
    EXPECT_EQ(count(*doc.root, "li"), 2u);
    const auto* ul = find_first(*doc.root, "ul");
    EXPECT_NE(ul->parent->name, "p");
    EXPECT_EQ(count(*doc.root, "br"), 1u);
    EXPECT_TRUE(find_first(*doc.root, "img")->children.empty());
}

TEST(Html, RawTextAndComments) {
    auto doc = html::parse("<p>a<!-- <p>hidden</p> -->b</p><script>if (a<b) x = '</p>';</script><style>p{}</style>");
    EXPECT_EQ(count(*doc.root, "p"), 1u);
    EXPECT_EQ(html::text_content(*doc.root), "ab");
    const auto* script = find_first(*doc.root, "script");
    ASSERT_NE(script, nullptr);
    EXPECT_EQ(script->children.at(0)->text, "if (a<b) x = '</p>';");
}

TEST(Html, NeverThrowsOnGarbage) {
    const std::vector<std::string> junk{"", "<", "</", "<<>>", "<a href=", "<!--", "<script>", "&", "&#x",
                                        "<p <div>>", "</div></div></p>", std::string(1000, '<'), "<a\"b=c>"};
    for (const auto& j : junk) {
        EXPECT_NO_THROW({
            auto d = html::parse(j);
            (void)html::text_content(*d.root);
        }) << j;
    }
    auto stray = html::parse("text</span>");
    EXPECT_FALSE(stray.diagnostics.empty());
}

// -- scoring ---------------------------------------------------------------

TEST(Score, FormulaExamples) {
    using extractor::make_block;
    using extractor::score_text_block;
    EXPECT_EQ(score_text_block(make_block("", "p")), 0.0);

    // 300 characters, 4 commas, 3 periods.
    std::string text = "a, b, c, d, e. f. g.";
    text += std::string(300 - text.size(), 'x');
    auto b = make_block(text, "p");
    ASSERT_EQ(b.char_count, 300u);
    ASSERT_EQ(b.comma_count, 4u);
    ASSERT_EQ(b.sentence_punct_count, 3u);
    EXPECT_DOUBLE_EQ(score_text_block(b), 18.0);
    b.link_char_fraction = 1.0;
    EXPECT_DOUBLE_EQ(score_text_block(b), 5.0);

    auto li = make_block(std::string(2000, 'y'), "li");
    EXPECT_DOUBLE_EQ(score_text_block(li), 10.0 - 5.0);
    auto div = make_block("Hello, world!", "div");
    EXPECT_DOUBLE_EQ(score_text_block(div), 0.13 + 1 + 2);
    div.boilerplate = true;
    EXPECT_DOUBLE_EQ(score_text_block(div), 0.13 + 1 + 2 - 5);
}

TEST(Score, ConfigOverrides) {
    KeyValueConfig kv;
    kv.set("extract.paragraph_bonus", "10");
    kv.set("extract.min_block_chars", "5");
    auto cfg = extractor::ScoringConfig::from_config(kv);
    EXPECT_DOUBLE_EQ(cfg.paragraph_bonus, 10);
    EXPECT_EQ(cfg.min_block_chars, 5u);
    EXPECT_DOUBLE_EQ(extractor::score_text_block(extractor::make_block("ab", "p"), cfg), 0.02 + 10);
    kv.set("extract.length_divisor", "0");
    EXPECT_THROW(extractor::ScoringConfig::from_config(kv), ConfigError);
}

TEST(Blocks, LinkFractionAndBoilerplate) {
    auto doc = html::parse(
        "<nav><p>Home and other navigation text goes here</p></nav>"
        "<p><a href=/a>half linked</a> half plain</p>"
        "<div class='footer-links'><p>footer paragraph text lives here</p></div>"
        "<p style='display:none'>invisible</p>");
    auto blocks = extractor::collect_blocks(doc);
    ASSERT_EQ(blocks.size(), 3u);
    EXPECT_TRUE(blocks[0].boilerplate);
    EXPECT_FALSE(blocks[1].boilerplate);
    EXPECT_NEAR(blocks[1].link_char_fraction, 10.0 / 19.0, 1e-12);
    EXPECT_TRUE(blocks[2].boilerplate);
}

// -- extraction --------------------------------------------------------------

class GoldenFixture : public ::testing::TestWithParam<std::string> {};

TEST_P(GoldenFixture, MatchesExpectedText) {
    const auto dir = data_dir() / "extract";
    const auto html_bytes = read_file(dir / (GetParam() + ".html"));
    const auto expected = read_file(dir / (GetParam() + ".expected.txt"));
    auto r = extractor::extract_article(html_bytes, "file://" + GetParam());
    EXPECT_EQ(extractor::format_expected(r), expected);
    auto again = extractor::extract_article(html_bytes, "file://" + GetParam());
    EXPECT_EQ(again.paragraphs, r.paragraphs);
    // Paragraphs are verbatim pieces of the normalized page text.
    const auto page = text::normalize_whitespace(html::text_content(*html::parse(html_bytes).root));
    for (const auto& p : r.paragraphs) EXPECT_NE(page.find(p), std::string::npos) << p;
}

INSTANTIATE_TEST_SUITE_P(Extract, GoldenFixture,
                         ::testing::Values("nav_article_footer", "hidden_duplicate", "visible_tie", "malformed",
                                           "table_layout"));

TEST(Extract, NavArticleFooterKeepsExactlyFiveParagraphs) {
    auto r = extractor::extract_article(read_file(data_dir() / "extract" / "nav_article_footer.html"), "https://ex.com/a");
    EXPECT_EQ(r.paragraphs.size(), 5u);
    EXPECT_GT(r.score, 0.0);
}

TEST(Extract, EmptyBodyIsError) {
    try {
        extractor::extract_article("<html><body>   </body></html>", "https://empty.example/x");
        FAIL() << "expected ExtractionError";
    } catch (const ExtractionError& e) {
        EXPECT_NE(std::string(e.what()).find("https://empty.example/x"), std::string::npos);
    }
    EXPECT_THROW(extractor::extract_article("<p>too short</p>", "u"), ExtractionError);
    EXPECT_THROW(extractor::extract_article("", "u"), ExtractionError);
}

TEST(Extract, TitleRules) {
    auto t = [](const std::string& s) { return extractor::extract_title(html::parse(s)); };
    EXPECT_EQ(t("<title>Story | Site</title><h1>Short</h1><h1>The longer headline</h1>"), "The longer headline");
    EXPECT_EQ(t("<title>Story headline - Daily News</title>"), "Story headline");
    EXPECT_EQ(t("<title>Only title</title>"), "Only title");
    EXPECT_EQ(t("<h2>Sub</h2><h2>Subheading two</h2>"), "Subheading two");
    EXPECT_EQ(t("<h1 hidden>Hidden</h1><title>Visible - X</title>"), "Visible");
    EXPECT_EQ(t("<p>none</p>"), "");
}

}  // namespace
}  // namespace harvest
