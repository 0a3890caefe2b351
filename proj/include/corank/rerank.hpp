#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "corank/corpus.hpp"
#include "corank/embedding.hpp"
#include "corank/extraction.hpp"
#include "corank/llm_backend.hpp"
#include "corank/representation.hpp"
#include "corank/token_ledger.hpp"

namespace corank {

/// A bijection on 1..m, stored 1-based as produced by the model.
class Permutation {
  public:
    /// Throws Error unless `order` contains each of 1..size exactly once.
    explicit Permutation(std::vector<std::size_t> order);
    static Permutation identity(std::size_t m);

    [[nodiscard]] std::size_t size() const noexcept { return order_.size(); }
    [[nodiscard]] const std::vector<std::size_t>& order() const noexcept { return order_; }

    /// out[i] = items[order[i] - 1]
    template <class T>
    [[nodiscard]] std::vector<T> apply(std::span<const T> items) const
    {
        std::vector<T> out;
        out.reserve(order_.size());
        for (auto id : order_) {
            out.push_back(items[id - 1]);
        }
        return out;
    }

    bool operator==(const Permutation&) const = default;

  private:
    std::vector<std::size_t> order_;
};

/// Extracts `[n]` ids in order of appearance, drops ids outside 1..m, keeps the
/// first of any duplicate and appends unmentioned ids in their original order.
/// Throws RankingParseError when no valid id is found.
Permutation parse_ranking(std::string_view response, std::size_t m);

enum class Strategy { Vanilla, Sliding, CoRank, CoRankSliding };

std::string_view strategy_tag(Strategy strategy);
/// Accepts the tags plus "both" for CoRankSliding; throws ConfigError.
Strategy parse_strategy(std::string_view text);

struct RerankConfig {
    Strategy strategy = Strategy::CoRank;
    std::size_t vanilla_m = 20;
    std::size_t sliding_total = 100;
    std::size_t window = 20;
    std::size_t step = 10;
    std::size_t coarse_m = 200;
    std::size_t fine_k = 20;
    RepresentationForm form = RepresentationForm::CategorySectionKeywords;
    std::size_t k_keywords = 5;

    /// Throws ConfigError unless 1 <= step <= window <= sliding_total, fine_k <= coarse_m
    /// and the pool sizes are positive.
    void validate() const;
};

struct LlmCallOptions {
    std::string model = "mock";
    double temperature = 1.0;
    std::int64_t seed = 42;
    int max_output_tokens = 2048;
};

struct RerankItem {
    std::string doc_id;
    std::string text;
};

/// One listwise call over `items`; returns their doc_ids reordered.
std::vector<std::string> listwise_rerank(std::string_view query, std::span<const RerankItem> items,
                                         ChatBackend& backend, const LlmCallOptions& options,
                                         TokenLedger* ledger = nullptr, std::string_view stage = "listwise");

/// Window start offsets, bottom-up: total-window, total-window-step, ..., 0.
/// A single 0 when total <= window.
std::vector<std::size_t> sliding_window_starts(std::size_t total, std::size_t window, std::size_t step);

std::vector<std::string> sliding_window_rerank(std::string_view query, std::span<const RerankItem> items,
                                               std::size_t window, std::size_t step, ChatBackend& backend,
                                               const LlmCallOptions& options, TokenLedger* ledger = nullptr,
                                               std::string_view stage = "sliding");

/// Text handed to full-text reranking: "title. text" (or just text when untitled).
std::string full_text(const Document& doc);

struct RerankContext {
    const Corpus& corpus;
    ChatBackend& backend;
    LlmCallOptions options;
    const FeatureStore* features = nullptr;  // required by the CoRank strategies
    Embedder* embedder = nullptr;            // required by the CoRank strategies
};

/// Reranks one query's candidates with `config.strategy`. The reranked prefix
/// is followed by the remaining candidates in their incoming order, so the
/// result is always a permutation of the candidate list. Failures surface as
/// RerankError tagged with the query and stage.
RunResult rerank_query(const Query& query, const CandidateList& candidates, const RerankConfig& config,
                       RerankContext& context);

struct RerankJob {
    Query query;
    CandidateList candidates;
};

/// Runs jobs on up to `parallelism` threads; results are in job order. The
/// first failure (in job order) is rethrown after all threads finish.
std::vector<RunResult> rerank_all(std::span<const RerankJob> jobs, const RerankConfig& config, RerankContext& context,
                                  std::size_t parallelism);

}  // namespace corank
