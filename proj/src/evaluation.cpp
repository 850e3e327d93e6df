#include <algorithm>
#include <cmath>
#include <limits>

#include "harvest/classify.hpp"
#include "harvest/error.hpp"

namespace harvest::classify {

EvalReport report_from_confusion(std::vector<std::vector<std::size_t>> confusion) {
    const std::size_t k = confusion.size();
    for (const auto& row : confusion)
        if (row.size() != k) throw ArgumentError("confusion matrix must be square");
    EvalReport r;
    r.per_class.resize(k);
    std::size_t total = 0, correct = 0;
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t support = 0, predicted = 0;
        for (std::size_t j = 0; j < k; ++j) {
            support += confusion[c][j];
            predicted += confusion[j][c];
        }
        auto& m = r.per_class[c];
        const double tp = static_cast<double>(confusion[c][c]);
        m.support = support;
        m.precision = predicted ? tp / static_cast<double>(predicted) : 0.0;
        m.recall = support ? tp / static_cast<double>(support) : 0.0;
        m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
        total += support;
        correct += confusion[c][c];
    }
    r.weighted.support = total;
    if (total > 0) {
        for (const auto& m : r.per_class) {
            const double w = static_cast<double>(m.support) / static_cast<double>(total);
            r.weighted.precision += w * m.precision;
            r.weighted.recall += w * m.recall;
            r.weighted.f1 += w * m.f1;
        }
        r.accuracy = static_cast<double>(correct) / static_cast<double>(total);
    }
    r.confusion = std::move(confusion);
    return r;
}

EvalReport evaluate(const LinearModel& model, std::span<const Example> examples, std::span<const std::size_t> indices) {
    if (model.task() == Task::tags) throw ArgumentError("evaluate supports count4 and domain2 models");
    if (indices.empty()) throw ArgumentError("evaluation set is empty");
    const std::size_t k = model.outputs();
    std::vector<std::vector<std::size_t>> confusion(k, std::vector<std::size_t>(k, 0));
    for (auto i : indices) {
        const auto y = target(model, examples[i]);
        const auto truth = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
        ++confusion[truth][model.predict_class(examples[i].x)];
    }
    return report_from_confusion(std::move(confusion));
}

std::vector<RocPoint> roc_curve(std::span<const ScoredExample> scores) {
    std::vector<ScoredExample> s(scores.begin(), scores.end());
    std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.score < b.score; });
    std::size_t pos = 0, neg = 0;
    for (const auto& e : s) (e.in_domain ? pos : neg)++;
    std::vector<RocPoint> out;
    std::size_t pos_below = 0, neg_below = 0;
    auto rate = [](std::size_t above, std::size_t n) { return n ? static_cast<double>(above) / static_cast<double>(n) : 0.0; };
    for (std::size_t i = 0; i < s.size();) {
        out.push_back({s[i].score, rate(pos - pos_below, pos), rate(neg - neg_below, neg)});
        const double v = s[i].score;
        while (i < s.size() && s[i].score == v) {
            (s[i].in_domain ? pos_below : neg_below)++;
            ++i;
        }
    }
    const double top = s.empty() ? 1.0 : std::nextafter(s.back().score, std::numeric_limits<double>::infinity());
    out.push_back({top, 0.0, 0.0});
    return out;
}

Calibration calibrate_threshold(std::span<const ScoredExample> scores, double max_fpr) {
    if (!(max_fpr >= 0.0 && max_fpr <= 1.0)) throw CalibrationError("max_fpr must lie in [0, 1]");
    std::vector<double> pos;
    for (const auto& e : scores) {
        if (!std::isfinite(e.score)) throw CalibrationError("domain scores must be finite");
        if (e.in_domain) pos.push_back(e.score);
    }
    if (pos.empty()) throw CalibrationError("calibration needs at least one in-domain example");
    std::sort(pos.begin(), pos.end());

    Calibration c;
    c.max_fpr = max_fpr;
    c.in_domain = pos.size();
    // floor(max_fpr * P), guarded against products like 0.017 * 1000 landing
    // a hair under an integer.
    auto allowed = static_cast<std::size_t>(std::floor(max_fpr * static_cast<double>(pos.size()) + 1e-9));
    while (allowed > 0 && static_cast<double>(allowed) > max_fpr * static_cast<double>(pos.size()) + 1e-9) --allowed;
    c.allowed = std::min(allowed, pos.size());
    // Anything strictly below the (allowed+1)-th smallest in-domain score
    // skips at most `allowed` in-domain articles; the threshold sits just
    // under that score so the article holding it is kept.
    c.threshold = c.allowed >= pos.size()
                      ? std::nextafter(pos.back(), std::numeric_limits<double>::infinity())
                      : std::nextafter(pos[c.allowed], -std::numeric_limits<double>::infinity());
    for (const auto& e : scores)
        if (skip_eligible(e.score, c.threshold)) (e.in_domain ? c.in_domain_below : c.out_domain_below)++;
    c.roc = roc_curve(scores);
    return c;
}

bool skip_eligible(double domain_score, double threshold) { return domain_score < threshold; }

std::vector<TagScore> rank_tags(std::span<const std::string> labels, std::span<const double> scores,
                                const Taxonomy& taxonomy, std::size_t top_k) {
    if (labels.size() != scores.size()) throw ArgumentError("one score per tag label is required");
    if (labels.size() != taxonomy.size())
        throw ArgumentError("model has " + std::to_string(labels.size()) + " tags but the taxonomy has " +
                            std::to_string(taxonomy.size()));
    std::vector<std::size_t> order(labels.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (!taxonomy.contains(labels[i])) throw ArgumentError("model tag '" + labels[i] + "' is not in the taxonomy");
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return labels[a] < labels[b];
    });
    std::vector<TagScore> out;
    for (auto i : order) {
        if (out.size() >= top_k) break;
        const auto opp = taxonomy.opposite_of(labels[i]);
        if (opp && std::any_of(out.begin(), out.end(), [&](const TagScore& t) { return t.name == *opp; })) continue;
        out.push_back({labels[i], scores[i]});
    }
    return out;
}

std::vector<TagScore> suggest_tags(const LinearModel& model, const Taxonomy& taxonomy, const FeatureVector& x,
                                   std::size_t top_k) {
    if (model.task() != Task::tags) throw ArgumentError("suggest_tags needs a tags model");
    const auto p = model.predict(x);
    return rank_tags(model.tag_names(), p, taxonomy, top_k);
}

std::vector<double> LinearScorer::score(const ArticleRecord& article) const {
    return model_.predict(featurize_article(article, model_.features()));
}

Suggestions suggest(const SuggestionModels& models, const Taxonomy& taxonomy, const ArticleRecord& article) {
    Suggestions s;
    if (models.domain) {
        const auto p = models.domain->score(article);
        s.domain_score = p.at(1);
        if (models.skip_threshold) s.skip_eligible = skip_eligible(*s.domain_score, *models.skip_threshold);
    }
    if (models.count) {
        s.count_probabilities = models.count->score(article);
        s.count_class = static_cast<int>(std::max_element(s.count_probabilities.begin(), s.count_probabilities.end()) -
                                         s.count_probabilities.begin());
    }
    if (models.tags) {
        const auto p = models.tags->score(article);
        s.tags = rank_tags(models.tags->labels(), p, taxonomy, models.top_k);
    }
    return s;
}

}  // namespace harvest::classify
