#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "corank/commands.hpp"
#include "corank/config.hpp"
#include "corank/error.hpp"

namespace {

struct Overrides {
    std::vector<std::string> strategies;
    std::optional<std::size_t> k_keywords, fine_k, coarse_m, window, step, sliding_total, vanilla_m, retrieve_m,
        parallelism;
    std::optional<std::string> form, retriever, mode, output_dir, gain;
    std::optional<double> price;

    void add_to(CLI::App& app)
    {
        app.add_option("--strategy", strategies, "vanilla | sliding | corank | corank_sliding (repeatable)");
        app.add_option("--k-keywords", k_keywords, "keywords selected per document");
        app.add_option("--fine-k", fine_k, "documents passed to the fine stage");
        app.add_option("--coarse-m", coarse_m, "compact representations in the coarse stage");
        app.add_option("--window", window, "sliding window size");
        app.add_option("--step", step, "sliding window step");
        app.add_option("--sliding-total", sliding_total, "candidates covered by the sliding strategy");
        app.add_option("--vanilla-m", vanilla_m, "candidates reranked by the vanilla strategy");
        app.add_option("--form", form, "compact representation form 1-4");
        app.add_option("--retriever", retriever, "bm25 | dense");
        app.add_option("--retrieve-m", retrieve_m, "first-stage candidates per query");
        app.add_option("--mode", mode, "mock | live | record | replay");
        app.add_option("--output-dir", output_dir, "directory for runs and reports");
        app.add_option("--parallelism", parallelism, "concurrent backend requests");
        app.add_option("--price", price, "dollars per million tokens");
        app.add_option("--gain", gain, "linear | exponential");
    }

    void apply(corank::ExperimentConfig& c) const
    {
        if (!strategies.empty()) {
            c.strategies.clear();
            for (const auto& s : strategies) {
                c.strategies.push_back(corank::parse_strategy(s));
            }
        }
        auto& r = c.rerank;
        if (k_keywords) r.k_keywords = *k_keywords;
        if (fine_k) r.fine_k = *fine_k;
        if (coarse_m) r.coarse_m = *coarse_m;
        if (window) r.window = *window;
        if (step) r.step = *step;
        if (sliding_total) r.sliding_total = *sliding_total;
        if (vanilla_m) r.vanilla_m = *vanilla_m;
        if (form) r.form = corank::parse_form(*form);
        if (retriever) c.retriever = *retriever;
        if (retrieve_m) c.retrieve_m = *retrieve_m;
        if (mode) c.backend.mode = corank::parse_backend_mode(*mode);
        if (output_dir) c.output_dir = *output_dir;
        if (parallelism) c.backend.parallelism = *parallelism;
        if (price) c.price_per_million = *price;
        if (gain) c.gain = corank::parse_gain(*gain);
        c.validate();
    }
};

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"corank: two-stage listwise reranking toolkit"};
    app.require_subcommand(1);
    std::string config_path;
    std::string log_level = "warn";
    app.add_option("-c,--config", config_path, "experiment config (JSON)")->required();
    app.add_option("--log-level", log_level, "trace | debug | info | warn | error | off");

    Overrides overrides;
    overrides.add_to(app);

    auto* extract = app.add_subcommand("extract", "extract document features into the feature store");
    auto* rerank = app.add_subcommand("rerank", "retrieve and rerank every query, one run file per strategy");
    auto* eval = app.add_subcommand("eval", "score run files against the qrels");
    auto* token_stats = app.add_subcommand("token-stats", "token length statistics for full text and forms 1-4");
    auto* cost = app.add_subcommand("cost-report", "token usage and cost per run");

    std::vector<std::string> eval_runs;
    std::vector<std::string> cost_runs;
    eval->add_option("runs", eval_runs, "run files (default: one per configured strategy)");
    cost->add_option("runs", cost_runs, "run files (default: one per configured strategy)");

    CLI11_PARSE(app, argc, argv);

    auto logger = spdlog::stderr_color_mt("corank");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::from_str(log_level));

    try {
        auto config = corank::load_config(config_path);
        overrides.apply(config);
        auto to_paths = [](const std::vector<std::string>& v) {
            return std::vector<std::filesystem::path>(v.begin(), v.end());
        };
        if (*extract) {
            return corank::cmd_extract(config, std::cout);
        }
        if (*rerank) {
            return corank::cmd_rerank(config, std::cout);
        }
        if (*eval) {
            return corank::cmd_eval(config, to_paths(eval_runs), std::cout);
        }
        if (*token_stats) {
            return corank::cmd_token_stats(config, std::cout);
        }
        if (*cost) {
            return corank::cmd_cost_report(config, to_paths(cost_runs), std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
