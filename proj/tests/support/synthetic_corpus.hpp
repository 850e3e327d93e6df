#pragma once

#include <random>
#include <string>
#include <vector>

#include "harvest/classify.hpp"
#include "harvest/taxonomy.hpp"

namespace harvest::testing {

struct SyntheticDoc {
    ArticleRecord article;
    std::size_t events = 0;
    std::vector<std::string> tags;
};

/// Keyword-planted corpus: each count class and each tag owns a few marker
/// words mixed into random filler, so a linear model can separate them.
/// Class shares are 40/30/15/15 percent.
inline std::vector<SyntheticDoc> planted_corpus(std::size_t n, std::uint64_t seed) {
    static const std::vector<std::vector<std::string>> class_words{
        {"stocks", "market", "earnings", "investors"},
        {"protest", "marched", "organizer", "chanted"},
        {"separately", "second", "another", "twin"},
        {"nationwide", "several", "cities", "multiple"},
    };
    struct TagWords {
        std::vector<std::string> tags;
        std::vector<std::string> words;
    };
    static const std::vector<TagWords> topics{
        {{"Guns", "For greater gun control"}, {"gun", "firearms", "shooting"}},
        {{"Education"}, {"school", "teachers", "students"}},
        {{"Immigration"}, {"border", "deportation", "migrants"}},
    };
    std::mt19937_64 rng(seed);
    auto pick = [&](std::size_t k) { return static_cast<std::size_t>(classify::uniform_index(rng, k)); };
    std::vector<SyntheticDoc> out;
    for (std::size_t d = 0; d < n; ++d) {
        const std::size_t r = pick(100);
        const std::size_t cls = r < 40 ? 0 : r < 70 ? 1 : r < 85 ? 2 : 3;
        SyntheticDoc doc;
        doc.events = cls == 3 ? 3 + pick(4) : cls;
        std::vector<std::string> words;
        for (int i = 0; i < 40; ++i) words.push_back("filler" + std::to_string(pick(400)));
        auto plant = [&](const std::vector<std::string>& pool, int times) {
            for (int i = 0; i < times; ++i) words.insert(words.begin() + static_cast<std::ptrdiff_t>(pick(words.size() + 1)), pool[pick(pool.size())]);
        };
        plant(class_words[cls], 6);
        if (cls > 0) {
            const auto& topic = topics[pick(topics.size())];
            doc.tags = topic.tags;
            if (topic.tags.size() > 1 && pick(2) == 1) doc.tags[1] = "Against greater gun control";
            plant(topic.words, 4);
        }
        doc.article.id = ArticleId{static_cast<std::int64_t>(d + 1)};
        doc.article.url = "https://synthetic.test/" + std::to_string(d + 1);
        doc.article.title = "Report " + std::to_string(d + 1);
        std::string body;
        for (const auto& w : words) body += w + " ";
        doc.article.body = {body};
        out.push_back(std::move(doc));
    }
    return out;
}

inline Taxonomy synthetic_taxonomy() {
    auto t = Taxonomy::seeded();
    t.add({"For greater gun control", TagKind::position, std::nullopt});
    t.add({"Against greater gun control", TagKind::position, "For greater gun control"});
    return t;
}

inline std::vector<classify::Example> to_examples(const std::vector<SyntheticDoc>& docs,
                                                  const classify::FeatureConfig& fc) {
    std::vector<classify::Example> out;
    for (const auto& d : docs) out.push_back({classify::featurize_article(d.article, fc), d.events, d.tags});
    return out;
}

}  // namespace harvest::testing
