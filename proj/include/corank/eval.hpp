#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "corank/corpus.hpp"
#include "corank/kernels.hpp"
#include "corank/token_ledger.hpp"

namespace corank {

enum class GainFunction {
    Linear,       // gain = grade
    Exponential,  // gain = 2^grade - 1
};

GainFunction parse_gain(std::string_view text);

// Unjudged or unknown documents are non-relevant. A query without relevant
// documents scores 0 on every metric.
double ndcg_at_k(std::span<const std::string> ranking, const Qrels::Grades& grades, std::size_t k,
                 GainFunction gain = GainFunction::Linear);
double map_at_k(std::span<const std::string> ranking, const Qrels::Grades& grades, std::size_t k);
double recall_at_k(std::span<const std::string> ranking, const Qrels::Grades& grades, std::size_t k);

struct QueryMetrics {
    double ndcg5 = 0, ndcg10 = 0;
    double map5 = 0, map10 = 0;
    double recall5 = 0, recall10 = 0;

    bool operator==(const QueryMetrics&) const = default;
};

/// Field order used by reports: ndcg@5, ndcg@10, map@5, map@10, recall@5, recall@10.
inline constexpr std::array<std::string_view, 6> kMetricNames{"ndcg@5", "ndcg@10", "map@5",
                                                              "map@10", "recall@5", "recall@10"};
std::array<double, 6> metric_values(const QueryMetrics& m);

struct MetricsReport {
    std::string strategy_tag;
    std::map<std::string, QueryMetrics> per_query;
    QueryMetrics aggregate;  // unweighted means over per_query
    TokenLedger tokens;
    std::vector<std::string> warnings;
};

/// Scores each run query present in `qrels`; absent queries are skipped with a
/// warning. With `corpus`, doc_ids missing from it are reported as warnings.
MetricsReport evaluate_run(std::span<const RunResult> run, const Qrels& qrels, const Corpus* corpus = nullptr,
                           GainFunction gain = GainFunction::Linear, Execution execution = Execution::Parallel);

/// Display convention: value x 100 with one decimal.
std::string format_metric(double value);

/// total_tokens x price / 1e6
double cost_of(std::int64_t tokens, double price_per_million);
/// "$x.xx", rounded half away from zero.
std::string format_cost(double dollars);
/// "1.01M" style, two decimals in millions.
std::string format_tokens(std::int64_t tokens);

/// Aligned per-query table followed by the mean row.
std::string format_report_table(const MetricsReport& report);
/// One JSON object per line: each query, then {"query_id": "mean", ...}.
std::string format_report_jsonl(const MetricsReport& report);

struct ComparisonRow {
    std::string method;
    double ndcg10 = 0;
    double map10 = 0;
    double recall10 = 0;
    std::int64_t tokens = 0;
};

/// Method | N@10 | M@10 | R@10 | Token Usage | Cost. Empty input gives an empty string.
std::string token_comparison_table(std::span<const ComparisonRow> rows, double price_per_million);

/// Method label for a strategy tag: Vanilla, Sliding, CoRank, Both.
std::string method_label(std::string_view strategy_tag);

}  // namespace corank
