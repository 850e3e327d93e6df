#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "harvest/records.hpp"
#include "harvest/taxonomy.hpp"

namespace harvest::classify {

// ---------------------------------------------------------------------------
// Labels

enum class CountClass { c0 = 0, c1 = 1, c2 = 2, c3plus = 3 };
inline constexpr std::size_t kCountClasses = 4;

CountClass count_to_class(std::size_t events);
std::string_view to_string(CountClass c);  // "0", "1", "2", "3+"

enum class Task { count4, domain2, tags };
std::string_view to_string(Task t);
Task parse_task(std::string_view s);  // throws ArgumentError

// ---------------------------------------------------------------------------
// Text features

/// Lowercased tokens split on whitespace and punctuation; apostrophes inside
/// a word are kept, hyphens split. "counterX" becomes "counter", "X" when X
/// has at least four characters.
std::vector<std::string> tokenize(std::string_view text);

struct FeatureVector {
    std::size_t dim = 0;
    std::vector<std::pair<std::uint32_t, double>> entries;  // sorted by index, no duplicates

    double norm() const;
};

struct FeatureConfig {
    std::size_t dim = std::size_t{1} << 18;
    std::uint64_t seed = 0xfea7u;

    bool operator==(const FeatureConfig&) const = default;
};

/// Hashed unigram and adjacent-bigram counts, L2-normalized. Throws
/// ArgumentError unless dim is a power of two no larger than 2^32.
FeatureVector featurize(std::span<const std::string> tokens, const FeatureConfig& cfg = {});
/// Title and body paragraphs, tokenized and featurized.
FeatureVector featurize_article(const ArticleRecord& article, const FeatureConfig& cfg = {});

// ---------------------------------------------------------------------------
// Linear model

struct AdamParams {
    double alpha = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Dense Adam over a flat parameter vector.
class Adam {
public:
    explicit Adam(std::size_t size = 0, AdamParams params = {});

    void step(std::span<double> theta, std::span<const double> grad);
    std::uint64_t steps() const { return t_; }
    const AdamParams& params() const { return params_; }

private:
    AdamParams params_;
    std::vector<double> m_, v_;
    std::uint64_t t_ = 0;
};

class LinearModel {
public:
    /// `tag_names` is required (and only allowed) for the tags task.
    LinearModel(Task task, FeatureConfig features, std::vector<std::string> tag_names = {});

    Task task() const { return task_; }
    const FeatureConfig& features() const { return features_; }
    std::size_t dim() const { return features_.dim; }
    std::size_t outputs() const { return outputs_; }
    const std::vector<std::string>& tag_names() const { return tag_names_; }

    /// Row-major outputs x dim weights followed by `outputs` biases.
    std::vector<double>& parameters() { return params_; }
    const std::vector<double>& parameters() const { return params_; }
    double& weight(std::size_t out, std::size_t feature) { return params_[out * dim() + feature]; }
    double& bias(std::size_t out) { return params_[outputs_ * dim() + out]; }

    /// Throws ArgumentError on a dimension mismatch.
    std::vector<double> logits(const FeatureVector& x) const;
    /// Softmax for count4/domain2, independent sigmoids for tags.
    std::vector<double> predict(const FeatureVector& x) const;
    /// Argmax, ties to the lower index. Not meaningful for tags.
    std::size_t predict_class(const FeatureVector& x) const;

    void save(const std::filesystem::path& path) const;
    static LinearModel load(const std::filesystem::path& path);

private:
    Task task_;
    FeatureConfig features_;
    std::vector<std::string> tag_names_;
    std::size_t outputs_;
    std::vector<double> params_;
};

std::vector<double> softmax(std::span<const double> logits);
double sigmoid(double z);

struct Example {
    FeatureVector x;
    std::size_t event_count = 0;
    std::vector<std::string> tags;  // tags task only

    CountClass count_class() const { return count_to_class(event_count); }
};

/// Target vector for `ex` under the model's task; tags are looked up by name.
std::vector<double> target(const LinearModel& model, const Example& ex);

/// Mean loss over `batch` (cross-entropy, or per-output binary cross-entropy
/// summed over outputs) plus lambda/2 * |W|^2. The bias is not regularized.
double loss(const LinearModel& model, std::span<const Example* const> batch, double l2 = 0.0);
/// Same loss with its gradient with respect to parameters() written to `grad`.
double loss_and_gradient(const LinearModel& model, std::span<const Example* const> batch, double l2,
                         std::vector<double>& grad);

// ---------------------------------------------------------------------------
// Training protocol

/// Uniform integer in [0, n) by rejection; stable across standard libraries.
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n);

struct Split {
    std::vector<std::size_t> train, validation, test;
};

/// Seeded shuffle, then round(f0 N) / round(f1 N) / remainder.
Split split_indices(std::size_t n, std::uint64_t seed, std::array<double, 3> fractions = {0.70, 0.15, 0.15});

using Strata = std::array<std::size_t, kCountClasses>;

/// Draws strata[c] examples of each count class from `pool` (indices into
/// `examples`). Without replacement when a class has enough members, with
/// replacement otherwise. Throws ConfigError when a needed class is absent.
std::vector<std::size_t> stratified_batch(std::span<const Example> examples, std::span<const std::size_t> pool,
                                          const Strata& strata, std::mt19937_64& rng);

struct TrainConfig {
    std::size_t batch_size = 12;
    std::size_t iterations = 10000;
    std::size_t eval_every = 500;
    Strata strata{6, 4, 1, 1};
    std::array<double, 3> split{0.70, 0.15, 0.15};
    std::uint64_t seed = 1;
    AdamParams adam;
    double l2 = 1e-5;

    /// Throws ConfigError when strata do not sum to batch_size, fractions do
    /// not sum to 1, or eval_every is zero.
    void validate() const;
};

struct LogEntry {
    std::size_t iteration = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;  // NaN when the validation split is empty
};

struct TrainResult {
    LinearModel model;  // checkpoint with the lowest validation loss
    std::size_t best_iteration = 0;
    Split split;
    std::vector<LogEntry> log;
};

using BatchObserver = std::function<void(std::size_t iteration, std::span<const std::size_t> batch)>;

/// Trains from zero weights. Losses in the log exclude the L2 term. When the
/// validation split is empty the checkpoint is chosen by training loss.
TrainResult train(std::span<const Example> corpus, Task task, const TrainConfig& cfg,
                  const FeatureConfig& features, std::vector<std::string> tag_names = {},
                  const BatchObserver& on_batch = {});

void write_training_log(const std::filesystem::path& path, std::span<const LogEntry> log);
std::vector<LogEntry> read_training_log(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Evaluation and calibration

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct EvalReport {
    std::vector<ClassMetrics> per_class;
    ClassMetrics weighted;  // support-weighted; support is the total
    double accuracy = 0.0;
    std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
};

EvalReport report_from_confusion(std::vector<std::vector<std::size_t>> confusion);
/// count4 or domain2 models only; throws ArgumentError for tags or an empty set.
EvalReport evaluate(const LinearModel& model, std::span<const Example> examples,
                    std::span<const std::size_t> indices);

struct ScoredExample {
    double score = 0.0;  // in-domain probability
    bool in_domain = false;
};

struct RocPoint {
    double threshold = 0.0;
    double true_positive_rate = 0.0;   // in-domain scoring >= threshold
    double false_positive_rate = 0.0;  // out-of-domain scoring >= threshold
};

/// One point per distinct score plus one above the maximum, ascending.
std::vector<RocPoint> roc_curve(std::span<const ScoredExample> scores);

struct Calibration {
    double threshold = 0.0;  // skip-eligible when score < threshold
    double max_fpr = 0.0;
    std::size_t in_domain = 0;
    std::size_t allowed = 0;           // floor(max_fpr * in_domain)
    std::size_t in_domain_below = 0;   // in-domain articles that would be skipped
    std::size_t out_domain_below = 0;  // negatives that would be skipped
    std::vector<RocPoint> roc;
};

/// Largest threshold with at most floor(max_fpr * P) in-domain scores below
/// it. Throws CalibrationError without in-domain examples or when max_fpr is
/// outside [0, 1].
Calibration calibrate_threshold(std::span<const ScoredExample> scores, double max_fpr = 0.017);
bool skip_eligible(double domain_score, double threshold);

/// Top `top_k` tags by score, descending, ties by name; of an opposite pair
/// only the higher-ranked survives. Throws ArgumentError when the model's
/// tags do not match the taxonomy.
std::vector<TagScore> suggest_tags(const LinearModel& model, const Taxonomy& taxonomy, const FeatureVector& x,
                                   std::size_t top_k);
/// The ranking rule of suggest_tags over precomputed scores.
std::vector<TagScore> rank_tags(std::span<const std::string> labels, std::span<const double> scores,
                                const Taxonomy& taxonomy, std::size_t top_k);

// ---------------------------------------------------------------------------
// Scorer contract

/// Task-keyed scoring interface; the linear model is one implementation.
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual Task task() const = 0;
    /// Output probabilities for the article.
    virtual std::vector<double> score(const ArticleRecord& article) const = 0;
    /// Tag names in output order (tags task only).
    virtual const std::vector<std::string>& labels() const = 0;
};

class LinearScorer final : public Scorer {
public:
    explicit LinearScorer(LinearModel model) : model_(std::move(model)) {}
    Task task() const override { return model_.task(); }
    std::vector<double> score(const ArticleRecord& article) const override;
    const std::vector<std::string>& labels() const override { return model_.tag_names(); }
    const LinearModel& model() const { return model_; }

private:
    LinearModel model_;
};

struct SuggestionModels {
    std::shared_ptr<const Scorer> domain;
    std::shared_ptr<const Scorer> count;
    std::shared_ptr<const Scorer> tags;
    std::optional<double> skip_threshold;
    std::size_t top_k = 5;

    bool empty() const { return !domain && !count && !tags; }
};

/// Suggestions from whichever models are present; empty when none are.
Suggestions suggest(const SuggestionModels& models, const Taxonomy& taxonomy, const ArticleRecord& article);

}  // namespace harvest::classify
