#pragma once

#include <memory>
#include <string>
#include <vector>

#include "harvest/classify.hpp"
#include "harvest/crawler.hpp"
#include "harvest/event_store.hpp"
#include "harvest/extractor.hpp"
#include "harvest/pipeline.hpp"
#include "support/fixtures.hpp"
#include "support/news_corpus.hpp"

namespace harvest::testing {

inline const std::string kWireUrl = "https://wire.example/2024/03/nurses-rally";
inline const std::string kStaffingTag = "For safe nurse staffing";

inline std::filesystem::path pipeline_site() { return data_dir() / "pipeline" / "site"; }

inline std::vector<NewsSource> pipeline_sources() {
    return {{"src-1", file_url(pipeline_site()), "Milton Daily Ledger"}};
}

inline std::string story_url(const std::string& name) {
    return file_url(pipeline_site() / "stories" / (name + ".html"));
}

/// Stores the wire original as a reviewed article with one past event.
inline ArticleId seed_reviewed_original(Store& store) {
    store.add_tag({kStaffingTag, TagKind::position, std::nullopt});
    const auto x = extractor::extract_article(read_file(data_dir() / "pipeline" / "original.html"), kWireUrl);
    ArticleRecord a;
    a.url = kWireUrl;
    a.source_id = "wire";
    a.title = x.title;
    a.body = x.paragraphs;
    const auto id = store.add_article(a);
    ProtestEvent e;
    e.date = Date::from_iso("2024-03-12");
    e.location = {"Capital City", "ST", std::nullopt, std::nullopt};
    e.attendee_count = 600;
    e.tags = {"Healthcare", kStaffingTag};
    const ArticleEventLink link{id, EventId{}, Tense::past};
    store.record_event(e, std::span(&link, 1));
    return id;
}

inline pipeline::PipelineConfig fixture_config() {
    pipeline::PipelineConfig cfg;
    cfg.fetch.per_host_delay = Millis{1};
    cfg.fetch.timeout = Millis{2000};
    return cfg;
}

struct DomainFixture {
    classify::SuggestionModels models;
    classify::Calibration calibration;
    classify::TrainResult result;
};

/// Domain model trained on the news corpus, skip threshold calibrated on
/// its validation split.
inline DomainFixture train_domain_fixture(std::uint64_t seed = 7, double max_fpr = 0.017) {
    classify::FeatureConfig fc;
    fc.dim = std::size_t{1} << 14;
    const auto docs = news_corpus(400, seed);
    const auto examples = news_examples(docs, fc);
    classify::TrainConfig cfg;
    cfg.iterations = 3000;
    cfg.seed = seed;
    auto result = classify::train(examples, classify::Task::domain2, cfg, fc);
    std::vector<classify::ScoredExample> scored;
    for (auto i : result.split.validation)
        scored.push_back({result.model.predict(examples[i].x)[1], examples[i].event_count > 0});
    auto cal = classify::calibrate_threshold(scored, max_fpr);
    DomainFixture f{{}, cal, result};
    f.models.domain = std::make_shared<classify::LinearScorer>(result.model);
    f.models.skip_threshold = cal.threshold;
    return f;
}

}  // namespace harvest::testing
