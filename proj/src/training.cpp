#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "harvest/classify.hpp"
#include "harvest/csv.hpp"
#include "harvest/error.hpp"

namespace harvest::classify {

std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
    if (n == 0) throw ArgumentError("uniform_index needs n > 0");
    // Largest multiple of n representable, minus one; reject above it.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                (std::numeric_limits<std::uint64_t>::max() % n + 1) % n;
    std::uint64_t x;
    do x = rng();
    while (x > limit);
    return x % n;
}

Split split_indices(std::size_t n, std::uint64_t seed, std::array<double, 3> fractions) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[uniform_index(rng, i)]);
    const auto n_train = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(fractions[0] * static_cast<double>(n))));
    const auto n_val = std::min<std::size_t>(n - n_train, static_cast<std::size_t>(std::llround(fractions[1] * static_cast<double>(n))));
    Split s;
    s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.validation.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                        idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), idx.end());
    return s;
}

std::vector<std::size_t> stratified_batch(std::span<const Example> examples, std::span<const std::size_t> pool,
                                          const Strata& strata, std::mt19937_64& rng) {
    std::array<std::vector<std::size_t>, kCountClasses> by_class;
    for (auto i : pool) by_class[static_cast<std::size_t>(examples[i].count_class())].push_back(i);
    std::vector<std::size_t> batch;
    for (std::size_t c = 0; c < kCountClasses; ++c) {
        auto& members = by_class[c];
        const std::size_t want = strata[c];
        if (want == 0) continue;
        if (members.empty())
            throw ConfigError("stratified batch needs class " + std::string(to_string(static_cast<CountClass>(c))) +
                              " but the pool has none");
        if (members.size() >= want) {
            // Partial Fisher-Yates: the first `want` slots are a uniform sample.
            for (std::size_t k = 0; k < want; ++k) {
                std::swap(members[k], members[k + uniform_index(rng, members.size() - k)]);
                batch.push_back(members[k]);
            }
        } else {
            for (std::size_t k = 0; k < want; ++k) batch.push_back(members[uniform_index(rng, members.size())]);
        }
    }
    return batch;
}

void TrainConfig::validate() const {
    const std::size_t total = std::accumulate(strata.begin(), strata.end(), std::size_t{0});
    if (total != batch_size)
        throw ConfigError("strata sum to " + std::to_string(total) + " but batch_size is " + std::to_string(batch_size));
    if (std::abs(split[0] + split[1] + split[2] - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
    for (double f : split)
        if (f < 0) throw ConfigError("split fractions must be nonnegative");
    if (eval_every == 0) throw ConfigError("eval_every must be positive");
    if (!(adam.alpha > 0)) throw ConfigError("learning rate must be positive");
    if (l2 < 0) throw ConfigError("l2 must be nonnegative");
}

namespace {

std::vector<const Example*> pointers(std::span<const Example> corpus, std::span<const std::size_t> idx) {
    std::vector<const Example*> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(&corpus[i]);
    return out;
}

}  // namespace

TrainResult train(std::span<const Example> corpus, Task task, const TrainConfig& cfg, const FeatureConfig& features,
                  std::vector<std::string> tag_names, const BatchObserver& on_batch) {
    cfg.validate();
    if (corpus.empty()) throw ArgumentError("training corpus is empty");

    TrainResult result{LinearModel(task, features, std::move(tag_names)), 0, split_indices(corpus.size(), cfg.seed, cfg.split), {}};
    LinearModel model = result.model;
    const auto train_set = pointers(corpus, result.split.train);
    const auto val_set = pointers(corpus, result.split.validation);
    if (train_set.empty()) throw ConfigError("training split is empty");

    std::mt19937_64 rng(cfg.seed ^ 0x6261746368ULL);
    Adam adam(model.parameters().size(), cfg.adam);
    std::vector<double> grad;
    double best = std::numeric_limits<double>::infinity();

    auto evaluate_at = [&](std::size_t it) {
        LogEntry e{it, loss(model, train_set), std::numeric_limits<double>::quiet_NaN()};
        if (!val_set.empty()) e.val_loss = loss(model, val_set);
        result.log.push_back(e);
        const double key = val_set.empty() ? e.train_loss : e.val_loss;
        if (key < best) {
            best = key;
            result.model = model;
            result.best_iteration = it;
        }
    };

    evaluate_at(0);
    std::vector<const Example*> batch_ptrs;
    for (std::size_t it = 1; it <= cfg.iterations; ++it) {
        const auto batch = stratified_batch(corpus, result.split.train, cfg.strata, rng);
        if (on_batch) on_batch(it, batch);
        batch_ptrs = pointers(corpus, batch);
        loss_and_gradient(model, batch_ptrs, cfg.l2, grad);
        adam.step(model.parameters(), grad);
        if (it % cfg.eval_every == 0) evaluate_at(it);
    }
    return result;
}

void write_training_log(const std::filesystem::path& path, std::span<const LogEntry> log) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write training log: " + path.string());
    out << "iteration,train_loss,val_loss\n";
    out.precision(17);
    for (const auto& e : log) {
        out << e.iteration << ',' << e.train_loss << ',';
        if (!std::isnan(e.val_loss)) out << e.val_loss;
        out << '\n';
    }
}

std::vector<LogEntry> read_training_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open training log: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const auto rows = csv::parse(ss.str());
    if (rows.empty() || rows[0] != std::vector<std::string>{"iteration", "train_loss", "val_loss"})
        throw IoError("training log has an unexpected header");
    std::vector<LogEntry> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 3) throw IoError("training log row " + std::to_string(r) + " has the wrong width");
        LogEntry e;
        e.iteration = std::stoull(row[0]);
        e.train_loss = std::stod(row[1]);
        e.val_loss = row[2].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(row[2]);
        out.push_back(e);
    }
    return out;
}

}  // namespace harvest::classify
