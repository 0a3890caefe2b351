#include "corank/rerank.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <regex>
#include <thread>

#include <fmt/format.h>

#include "corank/error.hpp"
#include "corank/prompts.hpp"

namespace corank {

Permutation::Permutation(std::vector<std::size_t> order) : order_(std::move(order))
{
    std::vector<bool> seen(order_.size() + 1, false);
    for (auto id : order_) {
        if (id < 1 || id > order_.size() || seen[id]) {
            throw Error(fmt::format("not a permutation of 1..{}", order_.size()));
        }
        seen[id] = true;
    }
}

Permutation Permutation::identity(std::size_t m)
{
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) {
        order[i] = i + 1;
    }
    return Permutation(std::move(order));
}

Permutation parse_ranking(std::string_view response, std::size_t m)
{
    if (m == 0) {
        throw Error("parse_ranking needs m >= 1");
    }
    static const std::regex id_pattern(R"(\[\s*(\d+)\s*\])");
    std::vector<std::size_t> order;
    std::vector<bool> seen(m + 1, false);
    for (std::cregex_iterator it(response.data(), response.data() + response.size(), id_pattern), end; it != end;
         ++it) {
        const auto& digits = (*it)[1];
        std::size_t id = 0;
        auto [ptr, ec] = std::from_chars(digits.first, digits.second, id);
        if (ec != std::errc{} || id < 1 || id > m || seen[id]) {
            continue;
        }
        seen[id] = true;
        order.push_back(id);
    }
    if (order.empty()) {
        throw RankingParseError(fmt::format("no passage ids in 1..{} found in ranking response", m),
                                std::string(response));
    }
    for (std::size_t id = 1; id <= m; ++id) {
        if (!seen[id]) {
            order.push_back(id);
        }
    }
    return Permutation(std::move(order));
}

std::string_view strategy_tag(Strategy strategy)
{
    switch (strategy) {
    case Strategy::Vanilla: return "vanilla";
    case Strategy::Sliding: return "sliding";
    case Strategy::CoRank: return "corank";
    case Strategy::CoRankSliding: return "corank_sliding";
    }
    return "unknown";
}

Strategy parse_strategy(std::string_view text)
{
    for (auto s : {Strategy::Vanilla, Strategy::Sliding, Strategy::CoRank, Strategy::CoRankSliding}) {
        if (text == strategy_tag(s)) {
            return s;
        }
    }
    if (text == "both") {
        return Strategy::CoRankSliding;
    }
    throw ConfigError(fmt::format("unknown strategy '{}' (expected vanilla, sliding, corank, corank_sliding)", text));
}

void RerankConfig::validate() const
{
    if (vanilla_m == 0 || coarse_m == 0 || fine_k == 0) {
        throw ConfigError("vanilla_m, coarse_m and fine_k must be positive");
    }
    if (step == 0 || step > window || window > sliding_total) {
        throw ConfigError(fmt::format("need 1 <= step ({}) <= window ({}) <= sliding_total ({})", step, window,
                                      sliding_total));
    }
    if (fine_k > coarse_m) {
        throw ConfigError(fmt::format("fine_k ({}) exceeds coarse_m ({})", fine_k, coarse_m));
    }
}

std::vector<std::string> listwise_rerank(std::string_view query, std::span<const RerankItem> items,
                                         ChatBackend& backend, const LlmCallOptions& options, TokenLedger* ledger,
                                         std::string_view stage)
{
    if (items.empty()) {
        throw Error("listwise_rerank needs at least one item");
    }
    std::vector<std::string> passages;
    std::vector<std::string> ids;
    passages.reserve(items.size());
    ids.reserve(items.size());
    for (const auto& item : items) {
        passages.push_back(item.text);
        ids.push_back(item.doc_id);
    }
    ChatRequest request{options.model, build_listwise_prompt(query, passages), options.temperature, options.seed,
                        options.max_output_tokens};
    const auto response = backend.complete(request);
    if (ledger != nullptr) {
        ledger->record(stage, response.prompt_tokens, response.completion_tokens);
    }
    return parse_ranking(response.text, items.size()).apply<std::string>(ids);
}

std::vector<std::size_t> sliding_window_starts(std::size_t total, std::size_t window, std::size_t step)
{
    if (window == 0 || step == 0 || step > window) {
        throw Error(fmt::format("invalid sliding window: window {}, step {}", window, step));
    }
    if (total <= window) {
        return {0};
    }
    std::vector<std::size_t> starts;
    for (std::size_t s = total - window;; s -= step) {
        starts.push_back(s);
        if (s == 0) {
            break;
        }
        if (s < step) {
            s = step;  // clamps the final window to start at 0
        }
    }
    return starts;
}

std::vector<std::string> sliding_window_rerank(std::string_view query, std::span<const RerankItem> items,
                                               std::size_t window, std::size_t step, ChatBackend& backend,
                                               const LlmCallOptions& options, TokenLedger* ledger,
                                               std::string_view stage)
{
    if (items.empty()) {
        throw Error("sliding_window_rerank needs at least one item");
    }
    std::vector<RerankItem> working(items.begin(), items.end());
    for (auto start : sliding_window_starts(working.size(), window, step)) {
        const auto len = std::min(window, working.size() - start);
        std::span<const RerankItem> slice(working.data() + start, len);
        const auto order = listwise_rerank(query, slice, backend, options, ledger, stage);
        std::vector<RerankItem> reordered;
        reordered.reserve(len);
        for (const auto& id : order) {
            auto it = std::find_if(slice.begin(), slice.end(), [&](const auto& item) { return item.doc_id == id; });
            reordered.push_back(*it);
        }
        std::move(reordered.begin(), reordered.end(), working.begin() + static_cast<std::ptrdiff_t>(start));
    }
    std::vector<std::string> out;
    out.reserve(working.size());
    for (auto& item : working) {
        out.push_back(std::move(item.doc_id));
    }
    return out;
}

std::string full_text(const Document& doc)
{
    if (doc.title().empty()) {
        return doc.text();
    }
    return doc.title() + ". " + doc.text();
}

namespace {

/// Runs `fn`, rethrowing any failure as RerankError for (query, stage).
template <class Fn>
auto in_stage(const std::string& query_id, std::string_view stage, Fn&& fn)
{
    try {
        return fn();
    } catch (const RerankError&) {
        throw;
    } catch (const std::exception& e) {
        throw RerankError(query_id, std::string(stage), e.what());
    }
}

std::vector<RerankItem> full_text_items(std::span<const std::string> ids, const Corpus& corpus,
                                        const std::string& query_id, std::string_view stage)
{
    std::vector<RerankItem> items;
    items.reserve(ids.size());
    for (const auto& id : ids) {
        const auto* doc = corpus.find(id);
        if (doc == nullptr) {
            throw RerankError(query_id, std::string(stage), "candidate " + id + " is not in the corpus");
        }
        items.push_back({id, full_text(*doc)});
    }
    return items;
}

}  // namespace

RunResult rerank_query(const Query& query, const CandidateList& candidates, const RerankConfig& config,
                       RerankContext& context)
{
    config.validate();
    RunResult result;
    result.query_id = query.query_id;
    result.strategy_tag = std::string(strategy_tag(config.strategy));
    const auto ids = candidates.doc_ids();
    if (ids.empty()) {
        return result;
    }
    auto& ledger = result.token_usage;
    const auto& qid = query.query_id;

    auto with_tail = [&](std::vector<std::string> head, std::size_t consumed) {
        head.insert(head.end(), ids.begin() + static_cast<std::ptrdiff_t>(consumed), ids.end());
        return head;
    };

    switch (config.strategy) {
    case Strategy::Vanilla: {
        const auto n = std::min(config.vanilla_m, ids.size());
        const auto items = full_text_items(std::span(ids).first(n), context.corpus, qid, "listwise");
        result.ranking = with_tail(in_stage(qid, "listwise", [&] {
                                       return listwise_rerank(query.text, items, context.backend, context.options,
                                                              &ledger, "listwise");
                                   }),
                                   n);
        break;
    }
    case Strategy::Sliding: {
        const auto n = std::min(config.sliding_total, ids.size());
        const auto items = full_text_items(std::span(ids).first(n), context.corpus, qid, "sliding");
        result.ranking = with_tail(in_stage(qid, "sliding", [&] {
                                       return sliding_window_rerank(query.text, items, config.window, config.step,
                                                                    context.backend, context.options, &ledger,
                                                                    "sliding");
                                   }),
                                   n);
        break;
    }
    case Strategy::CoRank:
    case Strategy::CoRankSliding: {
        if (context.features == nullptr || context.embedder == nullptr) {
            throw RerankError(qid, "coarse", "the corank strategies need a feature store and an embedder");
        }
        const auto n = std::min(config.coarse_m, ids.size());
        std::vector<RerankItem> reps;
        reps.reserve(n);
        in_stage(qid, "coarse", [&] {
            const auto query_vec = context.embedder->embed(query.text);
            for (std::size_t i = 0; i < n; ++i) {
                const auto* features = context.features->find(ids[i]);
                if (features == nullptr) {
                    throw Error("no extracted features for " + ids[i]);
                }
                const auto selected = adaptive_select(query_vec, *features, config.k_keywords, *context.embedder);
                reps.push_back({ids[i], build_representation(config.form, ids[i], features->category, selected).text});
            }
            return 0;
        });

        auto coarse = in_stage(qid, "coarse", [&] {
            if (config.strategy == Strategy::CoRankSliding) {
                return sliding_window_rerank(query.text, reps, config.window, config.step, context.backend,
                                             context.options, &ledger, "coarse");
            }
            return listwise_rerank(query.text, reps, context.backend, context.options, &ledger, "coarse");
        });

        const auto k = std::min(config.fine_k, coarse.size());
        const auto seeds = full_text_items(std::span(coarse).first(k), context.corpus, qid, "fine");
        auto ranking = in_stage(qid, "fine", [&] {
            return listwise_rerank(query.text, seeds, context.backend, context.options, &ledger, "fine");
        });
        ranking.insert(ranking.end(), coarse.begin() + static_cast<std::ptrdiff_t>(k), coarse.end());
        result.ranking = with_tail(std::move(ranking), n);
        break;
    }
    }
    return result;
}

std::vector<RunResult> rerank_all(std::span<const RerankJob> jobs, const RerankConfig& config, RerankContext& context,
                                  std::size_t parallelism)
{
    config.validate();
    std::vector<RunResult> results(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (auto i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
            try {
                results[i] = rerank_query(jobs[i].query, jobs[i].candidates, config, context);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto threads = std::clamp<std::size_t>(parallelism, 1, std::max<std::size_t>(jobs.size(), 1));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return results;
}

}  // namespace corank
