#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "harvest/api.hpp"
#include "harvest/classify.hpp"
#include "harvest/crawler.hpp"
#include "harvest/error.hpp"
#include "harvest/event_store.hpp"
#include "harvest/extractor.hpp"
#include "harvest/fetch.hpp"
#include "harvest/ordering.hpp"
#include "harvest/pipeline.hpp"
#include "harvest/serialize.hpp"
#include "harvest/similarity.hpp"

namespace harvest::cli {

namespace {

namespace fs = std::filesystem;
using pipeline::PipelineConfig;

struct Globals {
    std::string config;
    std::string store;
    std::optional<std::uint64_t> seed;
};

struct Context {
    KeyValueConfig kv;
    PipelineConfig cfg;
    fs::path store_path;

    explicit Context(const Globals& g) {
        fs::path base;
        if (!g.config.empty()) {
            kv = KeyValueConfig::load(g.config);
            base = fs::path(g.config).parent_path();
        }
        if (g.seed) kv.set("train.seed", std::to_string(*g.seed));
        cfg = PipelineConfig::from_config(kv, base);
        if (!g.store.empty()) {
            store_path = g.store;
        } else {
            fs::path p = kv.get_string("store.path", "harvest.db");
            store_path = p.is_relative() && !base.empty() ? base / p : p;
        }
    }

    Store open_store() const { return Store(store_path); }

    fs::path model_dir() const {
        if (cfg.model_dir.empty()) throw ConfigError("pipeline.model_dir is not set");
        return cfg.model_dir;
    }

    classify::SuggestionModels models() const {
        auto m = pipeline::load_models(cfg.model_dir, cfg.top_k_tags);
        if (cfg.skip_threshold) m.skip_threshold = cfg.skip_threshold;
        return m;
    }

    std::vector<NewsSource> sources(const std::string& override_path) const {
        fs::path p = override_path.empty() ? cfg.source_list : fs::path(override_path);
        if (p.empty()) throw ConfigError("no source list: set pipeline.sources or pass --sources");
        return load_source_list(p);
    }
};

const char* model_file(classify::Task t) {
    switch (t) {
        case classify::Task::count4: return pipeline::kCountModelFile;
        case classify::Task::domain2: return pipeline::kDomainModelFile;
        case classify::Task::tags: return pipeline::kTagsModelFile;
    }
    return pipeline::kDomainModelFile;
}

Json metrics_json(const classify::ClassMetrics& m) {
    return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
}

Json report_json(const classify::EvalReport& r) {
    Json per = Json::array();
    for (const auto& m : r.per_class) per.push_back(metrics_json(m));
    return {{"accuracy", r.accuracy}, {"weighted", metrics_json(r.weighted)}, {"per_class", per},
            {"confusion", r.confusion}};
}

Json split_json(const classify::Split& s) {
    return {{"train", s.train.size()}, {"validation", s.validation.size()}, {"test", s.test.size()}};
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// -- commands --------------------------------------------------------------

void cmd_crawl(const Context& ctx, const std::string& sources, std::ostream& out) {
    DefaultFetcher fetcher;
    SystemClock clock;
    Crawler crawler(fetcher, clock, ctx.cfg.fetch);
    std::unique_ptr<Store> store;
    if (fs::exists(ctx.store_path)) store = std::make_unique<Store>(ctx.store_path);
    KnownUrl known;
    if (store) known = [&](std::string_view u) { return store->has_url(u); };
    crawler.crawl_all(ctx.sources(sources), known, [&](SourceCrawl&& c) {
        Json j = {{"source", c.source.id}, {"url", c.source.url}};
        if (c.error) j["error"] = *c.error;
        Json items = Json::array();
        for (const auto& it : c.items) {
            Json i = {{"url", it.link.url}, {"anchor", it.link.anchor_text}, {"stem", it.link.matched_stem},
                      {"status", to_string(it.status)}};
            if (it.status == ItemStatus::failed) i["error"] = it.result.describe_failure();
            items.push_back(std::move(i));
        }
        j["items"] = std::move(items);
        j["diagnostics"] = c.diagnostics;
        out << j.dump() << "\n";
    });
}

void cmd_extract(const Context& ctx, const std::string& input, bool text_form, std::ostream& out) {
    std::string markup;
    std::string url = input;
    if (input.find("://") != std::string::npos) {
        DefaultFetcher fetcher;
        const auto parsed = parse_url(input);
        if (!parsed) throw ArgumentError("malformed URL: " + input);
        auto r = fetcher.fetch(*parsed, {ctx.cfg.fetch.timeout, ctx.cfg.fetch.user_agent});
        if (!r.ok()) throw IoError(r.describe_failure());
        markup = std::move(r.body);
        url = r.final_url;
    } else {
        markup = read_file(input);
    }
    const auto r = extractor::extract_article(markup, url, ctx.cfg.extract);
    if (text_form) {
        out << extractor::format_expected(r);
        return;
    }
    out << Json{{"url", url}, {"title", r.title}, {"paragraphs", r.paragraphs}, {"score", r.score}}.dump(2) << "\n";
}

void cmd_dedupe(const Context& ctx, std::optional<std::int64_t> id, std::ostream& out) {
    const Store store = ctx.open_store();
    std::vector<ArticleRecord> fresh;
    if (id)
        fresh.push_back(store.article(ArticleId{*id}));
    else
        fresh = store.articles(ReviewStatus::unreviewed);
    const auto reviewed = store.articles(ReviewStatus::reviewed);
    std::vector<similarity::DocumentSignature> sigs;
    for (const auto& r : reviewed) sigs.push_back(similarity::article_signature(r, ctx.cfg.signature));
    for (const auto& a : fresh) {
        Json j = {{"article", a.id.value}, {"reference", nullptr}};
        const auto sig = similarity::article_signature(a, ctx.cfg.signature);
        std::optional<std::size_t> best;
        double best_j = -1.0;
        for (std::size_t i = 0; i < reviewed.size(); ++i) {
            if (reviewed[i].id == a.id) continue;
            const double e = similarity::jaccard_estimate(sig, sigs[i]);
            if (e > best_j) best_j = e, best = i;
        }
        if (best) {
            const auto v = similarity::propose_auto_association(a, reviewed[*best], ctx.cfg.signature,
                                                                ctx.cfg.association);
            j["reference"] = reviewed[*best].id.value;
            j["jaccard"] = v.jaccard;
            j["change_ratio"] = v.change_ratio;
            j["associate"] = v.associate;
        }
        out << j.dump() << "\n";
    }
}

void cmd_order(const Context& ctx, std::optional<std::int64_t> run_id, std::ostream& out) {
    Store store = ctx.open_store();
    if (run_id) {
        pipeline::Service service(store, ctx.cfg);
        const auto run = service.run(RunId{*run_id});
        Json groups = Json::array();
        for (const auto& g : run.groups) {
            Json ids = Json::array();
            for (auto a : g) ids.push_back(a.value);
            groups.push_back(std::move(ids));
        }
        out << Json{{"run_id", run.id.value}, {"groups", groups}}.dump() << "\n";
        return;
    }
    const auto articles = store.articles(ReviewStatus::unreviewed);
    if (articles.empty()) {
        out << Json{{"order", Json::array()}, {"groups", Json::array()}, {"total_length", 0.0}}.dump() << "\n";
        return;
    }
    const auto m = ordering::build_distance_matrix(articles, ctx.cfg.signature);
    const auto path = ordering::segment_groups(ordering::order_queue(m), m, ctx.cfg.group_cut);
    Json order = Json::array();
    for (auto a : path.ids(m)) order.push_back(a.value);
    Json groups = Json::array();
    for (const auto& g : path.groups) {
        Json ids = Json::array();
        for (auto i : g) ids.push_back(articles[i].id.value);
        groups.push_back(std::move(ids));
    }
    out << Json{{"order", order}, {"groups", groups}, {"total_length", path.total_length}}.dump() << "\n";
}

void cmd_train(const Context& ctx, const std::string& task_name, std::ostream& out) {
    const auto task = classify::parse_task(task_name);
    const Store store = ctx.open_store();
    const auto examples = pipeline::training_examples(store, ctx.cfg.features);
    std::vector<std::string> tags;
    if (task == classify::Task::tags) tags = store.taxonomy().names();
    const auto result = classify::train(examples, task, ctx.cfg.train, ctx.cfg.features, tags);
    const auto dir = ctx.model_dir();
    fs::create_directories(dir);
    const auto path = dir / model_file(task);
    result.model.save(path);
    classify::write_training_log(fs::path(path.string() + ".log"), result.log);
    out << Json{{"task", classify::to_string(task)},
                {"model", path.string()},
                {"examples", examples.size()},
                {"split", split_json(result.split)},
                {"best_iteration", result.best_iteration}}
               .dump()
        << "\n";
}

/// The model for `task` and the examples with the split it was trained on.
struct Loaded {
    classify::LinearModel model;
    std::vector<classify::Example> examples;
    classify::Split split;
};

Loaded load_for(const Context& ctx, classify::Task task) {
    const auto path = ctx.model_dir() / model_file(task);
    if (!fs::exists(path)) throw NotFoundError("no trained model at " + path.string());
    auto model = classify::LinearModel::load(path);
    const Store store = ctx.open_store();
    auto examples = pipeline::training_examples(store, model.features());
    if (examples.empty()) throw ArgumentError("no reviewed articles in the store");
    auto split = classify::split_indices(examples.size(), ctx.cfg.train.seed, ctx.cfg.train.split);
    return {std::move(model), std::move(examples), std::move(split)};
}

void cmd_evaluate(const Context& ctx, const std::string& task_name, const std::string& on, std::ostream& out) {
    const auto task = classify::parse_task(task_name);
    const auto l = load_for(ctx, task);
    const auto& idx = on == "validation" ? l.split.validation : on == "train" ? l.split.train : l.split.test;
    if (idx.empty()) throw ArgumentError("the " + on + " split is empty");
    auto j = report_json(classify::evaluate(l.model, l.examples, idx));
    j["task"] = classify::to_string(task);
    j["split"] = on;
    out << j.dump() << "\n";
}

void cmd_calibrate(const Context& ctx, std::optional<double> max_fpr, std::ostream& out) {
    const auto l = load_for(ctx, classify::Task::domain2);
    std::vector<classify::ScoredExample> scored;
    for (auto i : l.split.validation) scored.push_back({l.model.predict(l.examples[i].x)[1], l.examples[i].event_count > 0});
    const auto cal = classify::calibrate_threshold(scored, max_fpr.value_or(ctx.cfg.max_fpr));
    pipeline::write_skip_threshold(ctx.model_dir(), cal.threshold);
    out << Json{{"threshold", cal.threshold},
                {"max_fpr", cal.max_fpr},
                {"in_domain", cal.in_domain},
                {"allowed", cal.allowed},
                {"in_domain_below", cal.in_domain_below},
                {"out_domain_below", cal.out_domain_below}}
               .dump()
        << "\n";
}

void cmd_serve(const Context& ctx, const std::string& host, int port, std::ostream& out) {
    Store store = ctx.open_store();
    pipeline::Service service(store, ctx.cfg, ctx.models());
    api::Router router(service);
    api::Server server(router);
    const int bound = server.start(host, port);
    out << "listening on http://" << host << ":" << bound << "\n" << std::flush;
    server.wait();
}

void cmd_run_nightly(const Context& ctx, const std::string& sources, std::ostream& out) {
    Store store = ctx.open_store();
    pipeline::Service service(store, ctx.cfg, ctx.models());
    const auto run = service.run_nightly(ctx.sources(sources));
    out << pipeline::to_json(run).dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"News harvesting pipeline operator tool", "harvest"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "Key-value config file")->check(CLI::ExistingFile);
    app.add_option("--store", g.store, "Store database path");
    app.add_option("--seed", g.seed, "Training and split seed");

    std::string sources, input, task, file, format = "jsonl", mapping, host = "127.0.0.1", on = "test";
    std::optional<std::int64_t> id;
    std::optional<double> max_fpr;
    bool text_form = false;
    int port = 8080;

    auto* crawl = app.add_subcommand("crawl", "Crawl the sources and list candidate articles");
    crawl->add_option("--sources", sources, "Source list overriding pipeline.sources");
    auto* extract = app.add_subcommand("extract", "Extract title and paragraphs from a page");
    extract->add_option("input", input, "HTML file or URL")->required();
    extract->add_flag("--text", text_form, "Print title and paragraphs as plain lines");
    auto* dedupe = app.add_subcommand("dedupe", "Nearest reviewed article for unreviewed articles");
    dedupe->add_option("--article", id, "Only this article");
    auto* order = app.add_subcommand("order", "Review order and groups");
    order->add_option("--run", id, "Groups of a stored run instead of all unreviewed articles");
    auto* train = app.add_subcommand("train", "Train a classifier on reviewed articles");
    train->add_option("--task", task, "count4, domain2 or tags")->required();
    auto* evaluate = app.add_subcommand("evaluate", "Evaluate a trained classifier");
    evaluate->add_option("--task", task, "count4 or domain2")->required();
    evaluate->add_option("--split", on, "train, validation or test")
        ->check(CLI::IsMember({"train", "validation", "test"}));
    auto* calibrate = app.add_subcommand("calibrate", "Calibrate the skip threshold of the domain model");
    calibrate->add_option("--max-fpr", max_fpr, "Allowed share of in-domain articles below the threshold");
    auto* stats = app.add_subcommand("stats", "Dataset statistics");
    auto* import = app.add_subcommand("import", "Import a CSV or JSONL dataset");
    import->add_option("file", file, "Dataset file")->required()->check(CLI::ExistingFile);
    import->add_option("--mapping", mapping, "Column mapping config")->check(CLI::ExistingFile);
    auto* exp = app.add_subcommand("export", "Export the reviewed dataset");
    exp->add_option("file", file, "Output file")->required();
    exp->add_option("--format", format, "jsonl or csv")->check(CLI::IsMember({"jsonl", "csv"}));
    auto* serve = app.add_subcommand("serve", "Serve the review API");
    serve->add_option("--port", port, "Port, 0 for any free port")->check(CLI::Range(0, 65535));
    serve->add_option("--host", host, "Bind address");
    auto* nightly = app.add_subcommand("run-nightly", "Run the full nightly pipeline");
    nightly->add_option("--sources", sources, "Source list overriding pipeline.sources");

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, x;
        const int code = app.exit(e, o, x);
        out << o.str();
        err << x.str();
        return code == 0 ? 0 : 2;
    }

    try {
        const Context ctx(g);
        if (*crawl) cmd_crawl(ctx, sources, out);
        else if (*extract) cmd_extract(ctx, input, text_form, out);
        else if (*dedupe) cmd_dedupe(ctx, id, out);
        else if (*order) cmd_order(ctx, id, out);
        else if (*train) cmd_train(ctx, task, out);
        else if (*evaluate) cmd_evaluate(ctx, task, on, out);
        else if (*calibrate) cmd_calibrate(ctx, max_fpr, out);
        else if (*stats) out << to_json(ctx.open_store().compute_stats()).dump(2) << "\n";
        else if (*import) {
            const auto m = mapping.empty() ? ColumnMapping::defaults()
                                           : ColumnMapping::from_config(KeyValueConfig::load(mapping));
            out << to_json(ctx.open_store().import_dataset(file, m)).dump() << "\n";
        } else if (*exp) {
            const auto n = ctx.open_store().export_dataset(file, format == "csv" ? ExportFormat::csv : ExportFormat::jsonl);
            out << Json{{"file", file}, {"records", n}}.dump() << "\n";
        } else if (*serve) cmd_serve(ctx, host, port, out);
        else if (*nightly) cmd_run_nightly(ctx, sources, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace harvest::cli
