#pragma once

#include <random>
#include <string>
#include <vector>

#include "harvest/classify.hpp"
#include "harvest/records.hpp"

namespace harvest::testing {

/// Template-built news story. Protest stories carry 1-3 events; markets,
/// sports and weather stories carry none. "rally" occurs on both sides.
struct NewsDoc {
    ArticleRecord article;
    std::size_t event_count = 0;
};

namespace news_detail {

inline const std::vector<std::string> kCities{"Riverton", "Lakewood", "Fairview", "Milton", "Ashford",
                                              "Greenville", "Clayton", "Oakdale", "Salem", "Brookfield"};
inline const std::vector<std::string> kDays{"Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"};
inline const std::vector<std::string> kCauses{"safe staffing", "gun control", "climate action", "voting rights",
                                              "higher wages", "school funding", "police reform", "affordable housing"};
inline const std::vector<std::string> kGroups{"nurses", "students", "teachers", "residents", "workers", "parents",
                                              "activists", "veterans"};

inline const std::vector<std::string> kProtest{
    "Hundreds of {g} marched through downtown {c} on {d} to demand {x}.",
    "Protesters gathered outside city hall in {c}, chanting and carrying signs about {x}.",
    "The rally drew a crowd of about {n} people, according to organizers.",
    "Demonstrators blocked an intersection for an hour before police asked them to move.",
    "Speakers at the demonstration urged lawmakers to act on {x} before the session ends.",
    "{G} held a vigil and a march near the courthouse, calling for {x}.",
    "Police estimated the crowd at {n} and reported no arrests.",
    "Organizers said the protest was the largest in {c} since last spring.",
    "Marchers walked from the park to the statehouse steps, where {g} took turns at the microphone.",
    "Counter-protesters stood across the street, and the two groups traded chants.",
    "A second protest is planned for next {d} outside the county building.",
    "Many in the crowd wore matching shirts and held handmade signs demanding {x}.",
};
inline const std::vector<std::string> kOther{
    "The Dow Jones industrial average rose {n} points on {d} as technology shares climbed.",
    "Stocks rallied after quarterly earnings beat analyst expectations.",
    "Investors bought bank shares, and the index closed near a record high.",
    "Traders said bond yields fell after the central bank held interest rates steady.",
    "The {c} Hawks rallied in the fourth quarter to win by {n} points on {d}.",
    "The coach praised the defense after the team's late rally in the second half.",
    "Forecasters expect heavy rain in {c} on {d} with temperatures near {n} degrees.",
    "Oil prices slipped as inventories rose, weighing on energy stocks.",
    "The company reported revenue of {n} million dollars for the quarter and raised its outlook.",
    "Shares of the retailer jumped in early trading before giving back some gains.",
    "The starting pitcher struck out {n} batters as the home team extended its winning streak.",
    "A cold front will bring clear skies and a light breeze by the weekend.",
};

inline const std::vector<std::string> kNeutral{
    "The city council will meet next {d} to discuss the budget.",
    "Officials did not respond to requests for comment.",
    "The event was streamed live on the city's website.",
    "Local businesses along the route stayed open through the afternoon.",
    "Reporters from several outlets covered the story in {c}.",
    "The statement was released late on {d} by a spokesperson.",
    "Residents of {c} have debated the issue for years.",
    "More information is expected later this week.",
};

inline std::string fill(std::string t, std::mt19937_64& rng) {
    auto pick = [&](const std::vector<std::string>& v) {
        return v[static_cast<std::size_t>(classify::uniform_index(rng, v.size()))];
    };
    auto replace = [&](const std::string& key, const std::string& value) {
        for (std::size_t p; (p = t.find(key)) != std::string::npos;) t.replace(p, key.size(), value);
    };
    auto group = pick(kGroups);
    auto cap = group;
    cap[0] = static_cast<char>(cap[0] - 'a' + 'A');
    replace("{g}", group);
    replace("{G}", cap);
    replace("{c}", pick(kCities));
    replace("{d}", pick(kDays));
    replace("{x}", pick(kCauses));
    replace("{n}", std::to_string(20 + classify::uniform_index(rng, 980)));
    return t;
}

}  // namespace news_detail

/// `n` stories, 45% out of domain; in-domain event counts 1/2/3 at 60/25/15%.
/// Bodies mix topical and neutral sentences; the title is always topical.
inline std::vector<NewsDoc> news_corpus(std::size_t n, std::uint64_t seed) {
    using namespace news_detail;
    std::mt19937_64 rng(seed);
    std::vector<NewsDoc> out;
    for (std::size_t i = 0; i < n; ++i) {
        NewsDoc d;
        const bool in_domain = classify::uniform_index(rng, 100) >= 45;
        if (in_domain) {
            const auto r = classify::uniform_index(rng, 100);
            d.event_count = r < 60 ? 1 : r < 85 ? 2 : 3;
        }
        const auto& pool = in_domain ? kProtest : kOther;
        const std::size_t sentences = 4 + static_cast<std::size_t>(classify::uniform_index(rng, 5));
        // Topical share of the body varies from one sentence to all of them.
        const std::size_t topical = 1 + static_cast<std::size_t>(classify::uniform_index(rng, sentences));
        auto draw = [&](const std::vector<std::string>& v) {
            return fill(v[static_cast<std::size_t>(classify::uniform_index(rng, v.size()))], rng);
        };
        d.article.id = ArticleId{static_cast<std::int64_t>(i + 1)};
        d.article.title = draw(pool);
        for (std::size_t s = 0; s < sentences; ++s) {
            const bool on_topic = classify::uniform_index(rng, sentences) < topical;
            d.article.body.push_back(draw(on_topic ? pool : kNeutral));
        }
        out.push_back(std::move(d));
    }
    return out;
}

inline std::vector<classify::Example> news_examples(const std::vector<NewsDoc>& docs, const classify::FeatureConfig& fc) {
    std::vector<classify::Example> out;
    for (const auto& d : docs) out.push_back({classify::featurize_article(d.article, fc), d.event_count, {}});
    return out;
}

}  // namespace harvest::testing
