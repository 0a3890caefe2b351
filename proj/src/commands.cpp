#include "corank/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <optional>

#include <fmt/format.h>
#include <json.hpp>

#include "corank/error.hpp"
#include "corank/eval.hpp"
#include "corank/extraction.hpp"
#include "corank/fileio.hpp"
#include "corank/representation.hpp"
#include "corank/rerank.hpp"
#include "corank/retrieval.hpp"
#include "corank/tokens.hpp"

namespace corank {

namespace {

class CountingBackend final : public ChatBackend {
  public:
    explicit CountingBackend(std::shared_ptr<ChatBackend> inner) : inner_(std::move(inner)) {}

    ChatResponse complete(const ChatRequest& request) override
    {
        ++calls_;
        return inner_->complete(request);
    }

    std::size_t take() { return calls_.exchange(0); }

  private:
    std::shared_ptr<ChatBackend> inner_;
    std::atomic<std::size_t> calls_{0};
};

Corpus load_corpus_checked(const ExperimentConfig& config)
{
    require_exists(config.corpus_path, "corpus");
    return load_corpus(config.corpus_path);
}

std::vector<Query> load_queries_checked(const ExperimentConfig& config)
{
    require_exists(config.queries_path, "queries");
    return load_queries(config.queries_path);
}

std::vector<std::filesystem::path> default_runs(const ExperimentConfig& config,
                                                std::vector<std::filesystem::path> run_paths)
{
    if (run_paths.empty()) {
        for (auto s : config.strategies) {
            run_paths.push_back(run_path(config, strategy_tag(s)));
        }
    }
    for (const auto& p : run_paths) {
        require_exists(p, "run file");
    }
    return run_paths;
}

}  // namespace

std::filesystem::path run_path(const ExperimentConfig& config, std::string_view tag)
{
    return config.output_dir / fmt::format("run.{}.txt", tag);
}

std::vector<CandidateList> retrieve_candidates(const ExperimentConfig& config, const Corpus& corpus,
                                               std::span<const Query> queries, Embedder* embedder)
{
    std::vector<CandidateList> lists;
    lists.reserve(queries.size());
    if (config.retriever == "dense") {
        if (embedder == nullptr) {
            throw ConfigError("dense retrieval needs an embedder");
        }
        const DenseIndex index(corpus, *embedder);
        for (const auto& q : queries) {
            lists.push_back(index.search(q, config.retrieve_m));
        }
    } else {
        const auto index = build_index(corpus);
        for (const auto& q : queries) {
            lists.push_back(bm25_search(index, q, config.retrieve_m, config.bm25));
        }
    }
    return lists;
}

int cmd_extract(const ExperimentConfig& config, std::ostream& out)
{
    const auto corpus = load_corpus_checked(config);
    auto backend = make_backend(config.backend);
    FeatureStore store(config.features_path);
    const auto report = extract_all(corpus, *backend, store, extraction_options(config.backend),
                                    config.backend.parallelism);
    out << fmt::format("{} extracted, {} skipped, {} failed\n", report.extracted, report.skipped,
                       report.failures.size());
    for (auto kind : kAllFeatureKinds) {
        out << fmt::format("  {:<15} {} ok\n", feature_name(kind),
                           report.feature_successes[static_cast<std::size_t>(kind)]);
    }
    out << fmt::format("tokens: {} prompt, {} completion, {} total\n", report.tokens.prompt_tokens(),
                       report.tokens.completion_tokens(), report.tokens.total_tokens());
    if (report.warnings > 0) {
        out << fmt::format("{} soft-bound warnings\n", report.warnings);
    }
    for (const auto& f : report.failures) {
        out << fmt::format("failed {}: {}\n", f.doc_id, f.message);
    }
    out << "features: " << config.features_path.string() << "\n";
    return report.failures.empty() ? 0 : 1;
}

int cmd_rerank(const ExperimentConfig& config, std::ostream& out)
{
    const auto corpus = load_corpus_checked(config);
    const auto queries = load_queries_checked(config);
    auto embedder = make_embedder(config.embedder);
    const auto candidates = retrieve_candidates(config, corpus, queries, embedder.get());

    std::vector<RunResult> first_stage;
    std::vector<RerankJob> jobs;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        first_stage.push_back({queries[i].query_id, candidates[i].doc_ids(), config.retriever, {}});
        jobs.push_back({queries[i], candidates[i]});
    }
    const auto first_path = run_path(config, config.retriever);
    write_run(first_stage, first_path);
    out << fmt::format("{}: {} queries -> {}\n", config.retriever, queries.size(), first_path.string());

    const bool needs_features = std::any_of(config.strategies.begin(), config.strategies.end(), [](Strategy s) {
        return s == Strategy::CoRank || s == Strategy::CoRankSliding;
    });
    std::optional<FeatureStore> features;
    if (needs_features) {
        require_exists(config.features_path, "feature store");
        features.emplace(config.features_path);
    }

    auto counter = std::make_shared<CountingBackend>(make_backend(config.backend));
    RerankContext context{corpus, *counter, rerank_call_options(config.backend),
                          features ? &*features : nullptr, embedder.get()};
    for (auto strategy : config.strategies) {
        auto rc = config.rerank;
        rc.strategy = strategy;
        const auto runs = rerank_all(jobs, rc, context, config.backend.parallelism);
        TokenLedger total;
        for (const auto& r : runs) {
            total.merge(r.token_usage);
        }
        const auto path = run_path(config, strategy_tag(strategy));
        write_run(runs, path);
        out << fmt::format("{}: {} queries, {} calls, {} tokens -> {}\n", strategy_tag(strategy), runs.size(),
                           counter->take(), total.total_tokens(), path.string());
    }
    return 0;
}

int cmd_eval(const ExperimentConfig& config, std::vector<std::filesystem::path> run_paths, std::ostream& out)
{
    require_exists(config.qrels_path, "qrels");
    run_paths = default_runs(config, std::move(run_paths));
    const auto qrels = load_qrels(config.qrels_path);
    std::optional<Corpus> corpus;
    if (!config.corpus_path.empty() && std::filesystem::exists(config.corpus_path)) {
        corpus = load_corpus(config.corpus_path);
    }

    std::vector<ComparisonRow> rows;
    for (const auto& path : run_paths) {
        const auto run = load_run(path);
        const auto report = evaluate_run(run, qrels, corpus ? &*corpus : nullptr, config.gain);
        const auto tag = report.strategy_tag.empty() ? path.stem().string() : report.strategy_tag;
        const auto table = format_report_table(report);
        write_file_atomic(config.output_dir / fmt::format("metrics.{}.txt", tag), table);
        write_file_atomic(config.output_dir / fmt::format("metrics.{}.jsonl", tag), format_report_jsonl(report));
        out << "== " << tag << " (" << path.string() << ")\n" << table;
        for (const auto& w : report.warnings) {
            out << "warning: " << w << "\n";
        }
        rows.push_back({method_label(tag), report.aggregate.ndcg10, report.aggregate.map10, report.aggregate.recall10,
                        report.tokens.total_tokens()});
    }
    if (rows.size() > 1) {
        const auto table = token_comparison_table(rows, config.price_per_million);
        write_file_atomic(config.output_dir / "comparison.txt", table);
        out << "\n" << table;
    }
    return 0;
}

TokenStats summarize_tokens(std::vector<std::size_t> values)
{
    TokenStats s;
    s.count = values.size();
    if (values.empty()) {
        return s;
    }
    std::sort(values.begin(), values.end());
    const auto n = values.size();
    s.mean = static_cast<double>(std::accumulate(values.begin(), values.end(), std::uint64_t{0})) /
             static_cast<double>(n);
    s.median = n % 2 == 1 ? static_cast<double>(values[n / 2])
                          : (static_cast<double>(values[n / 2 - 1]) + static_cast<double>(values[n / 2])) / 2.0;
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
    s.p95 = values[std::max<std::size_t>(rank, 1) - 1];
    s.max = values.back();
    return s;
}

int cmd_token_stats(const ExperimentConfig& config, std::ostream& out)
{
    const auto corpus = load_corpus_checked(config);
    const auto queries = load_queries_checked(config);
    require_exists(config.features_path, "feature store");
    const FeatureStore features(config.features_path);
    auto embedder = make_embedder(config.embedder);
    const auto candidates = retrieve_candidates(config, corpus, queries, embedder.get());

    std::vector<std::size_t> full;
    std::array<std::vector<std::size_t>, 4> forms;
    std::size_t missing = 0;
    for (std::size_t q = 0; q < queries.size(); ++q) {
        const auto query_vec = embedder->embed(queries[q].text);
        for (const auto& c : candidates[q].entries) {
            const auto* f = features.find(c.doc_id);
            if (f == nullptr) {
                ++missing;
                continue;
            }
            full.push_back(count_tokens(full_text(corpus.at(c.doc_id))));
            const auto selected = adaptive_select(query_vec, *f, config.rerank.k_keywords, *embedder);
            for (int form = 1; form <= 4; ++form) {
                forms[static_cast<std::size_t>(form - 1)].push_back(
                    build_representation(static_cast<RepresentationForm>(form), c.doc_id, f->category, selected)
                        .token_estimate);
            }
        }
    }

    std::string text = fmt::format("token estimates over {} (query, candidate) pairs\n", full.size());
    text += fmt::format("{:<32} {:>8} {:>8} {:>6} {:>6}\n", "representation", "mean", "median", "p95", "max");
    auto row = [&](std::string_view label, std::vector<std::size_t> values) {
        const auto s = summarize_tokens(std::move(values));
        text += fmt::format("{:<32} {:>8.1f} {:>8.1f} {:>6} {:>6}\n", label, s.mean, s.median, s.p95, s.max);
    };
    row("full_text", full);
    for (int form = 1; form <= 4; ++form) {
        row(fmt::format("form{} {}", form, form_name(static_cast<RepresentationForm>(form))),
            forms[static_cast<std::size_t>(form - 1)]);
    }
    if (missing > 0) {
        text += fmt::format("{} candidates had no extracted features and were left out\n", missing);
    }
    write_file_atomic(config.output_dir / "token_stats.txt", text);
    out << text;
    return 0;
}

int cmd_cost_report(const ExperimentConfig& config, std::vector<std::filesystem::path> run_paths, std::ostream& out)
{
    run_paths = default_runs(config, std::move(run_paths));
    std::string text = fmt::format("price: ${} per 1M tokens\n", config.price_per_million);
    text += fmt::format("{:<10} {:<8} {:>12} {:>12} {:>12} {:>10}\n", "method", "stage", "prompt", "completion",
                        "total", "cost");
    for (const auto& path : run_paths) {
        const auto run = load_run(path);
        TokenLedger total;
        std::string tag = path.stem().string();
        for (const auto& r : run) {
            total.merge(r.token_usage);
            tag = r.strategy_tag;
        }
        const auto label = method_label(tag);
        for (const auto& [stage, count] : total.stages()) {
            text += fmt::format("{:<10} {:<8} {:>12} {:>12} {:>12} {:>10}\n", label, stage, count.prompt,
                                count.completion, count.total(),
                                format_cost(cost_of(count.total(), config.price_per_million)));
        }
        text += fmt::format("{:<10} {:<8} {:>12} {:>12} {:>12} {:>10}\n", label, "all", total.prompt_tokens(),
                            total.completion_tokens(), total.total_tokens(),
                            format_cost(cost_of(total.total_tokens(), config.price_per_million)));
    }
    write_file_atomic(config.output_dir / "cost_report.txt", text);
    out << text;
    return 0;
}

}  // namespace corank
