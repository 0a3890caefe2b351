#include "corank/eval.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "corank/error.hpp"

namespace corank {

GainFunction parse_gain(std::string_view text)
{
    if (text == "linear") {
        return GainFunction::Linear;
    }
    if (text == "exponential") {
        return GainFunction::Exponential;
    }
    throw ConfigError(fmt::format("unknown gain '{}' (expected linear or exponential)", text));
}

namespace {

double gain_of(int grade, GainFunction gain)
{
    if (grade <= 0) {
        return 0.0;
    }
    return gain == GainFunction::Linear ? static_cast<double>(grade) : std::exp2(grade) - 1.0;
}

int grade_of(const Qrels::Grades& grades, const std::string& doc_id)
{
    auto it = grades.find(doc_id);
    return it == grades.end() ? 0 : it->second;
}

std::size_t relevant_count(const Qrels::Grades& grades)
{
    return static_cast<std::size_t>(
        std::count_if(grades.begin(), grades.end(), [](const auto& g) { return g.second > 0; }));
}

/// Grades of the first k ranked documents; repeats of a doc_id count as non-relevant.
std::vector<int> top_grades(std::span<const std::string> ranking, const Qrels::Grades& grades, std::size_t k)
{
    const auto n = std::min(k, ranking.size());
    std::vector<int> out(n, 0);
    std::unordered_set<std::string_view> seen;
    for (std::size_t i = 0; i < n; ++i) {
        if (seen.insert(ranking[i]).second) {
            out[i] = grade_of(grades, ranking[i]);
        }
    }
    return out;
}

}  // namespace

double ndcg_at_k(std::span<const std::string> ranking, const Qrels::Grades& grades, std::size_t k, GainFunction gain)
{
    if (k == 0) {
        throw Error("ndcg_at_k needs k >= 1");
    }
    std::vector<int> ideal;
    for (const auto& [doc, grade] : grades) {
        if (grade > 0) {
            ideal.push_back(grade);
        }
    }
    if (ideal.empty()) {
        return 0.0;
    }
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    double idcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, ideal.size()); ++i) {
        idcg += gain_of(ideal[i], gain) / std::log2(static_cast<double>(i) + 2.0);
    }
    double dcg = 0.0;
    const auto got = top_grades(ranking, grades, k);
    for (std::size_t i = 0; i < got.size(); ++i) {
        dcg += gain_of(got[i], gain) / std::log2(static_cast<double>(i) + 2.0);
    }
    return dcg / idcg;
}

double map_at_k(std::span<const std::string> ranking, const Qrels::Grades& grades, std::size_t k)
{
    if (k == 0) {
        throw Error("map_at_k needs k >= 1");
    }
    const auto total = relevant_count(grades);
    if (total == 0) {
        return 0.0;
    }
    double sum = 0.0;
    std::size_t hits = 0;
    const auto got = top_grades(ranking, grades, k);
    for (std::size_t i = 0; i < got.size(); ++i) {
        if (got[i] > 0) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(std::min(total, k));
}

double recall_at_k(std::span<const std::string> ranking, const Qrels::Grades& grades, std::size_t k)
{
    if (k == 0) {
        throw Error("recall_at_k needs k >= 1");
    }
    const auto total = relevant_count(grades);
    if (total == 0) {
        return 0.0;
    }
    const auto got = top_grades(ranking, grades, k);
    const auto hits = std::count_if(got.begin(), got.end(), [](int g) { return g > 0; });
    return static_cast<double>(hits) / static_cast<double>(total);
}

std::array<double, 6> metric_values(const QueryMetrics& m)
{
    return {m.ndcg5, m.ndcg10, m.map5, m.map10, m.recall5, m.recall10};
}

namespace {

QueryMetrics score_query(std::span<const std::string> ranking, const Qrels::Grades& grades, GainFunction gain)
{
    return QueryMetrics{ndcg_at_k(ranking, grades, 5, gain), ndcg_at_k(ranking, grades, 10, gain),
                        map_at_k(ranking, grades, 5),         map_at_k(ranking, grades, 10),
                        recall_at_k(ranking, grades, 5),      recall_at_k(ranking, grades, 10)};
}

void warn(MetricsReport& report, std::string message)
{
    spdlog::warn("{}", message);
    report.warnings.push_back(std::move(message));
}

}  // namespace

MetricsReport evaluate_run(std::span<const RunResult> run, const Qrels& qrels, const Corpus* corpus,
                           GainFunction gain, Execution execution)
{
    MetricsReport report;
    std::vector<const RunResult*> scored;
    std::unordered_set<std::string_view> seen_queries;
    for (const auto& result : run) {
        if (!seen_queries.insert(result.query_id).second) {
            throw Error("run contains query " + result.query_id + " more than once");
        }
        if (report.strategy_tag.empty()) {
            report.strategy_tag = result.strategy_tag;
        }
        report.tokens.merge(result.token_usage);
        if (!qrels.contains(result.query_id)) {
            warn(report, fmt::format("query {} has no judgments; skipped", result.query_id));
            continue;
        }
        if (corpus != nullptr) {
            for (const auto& doc : result.ranking) {
                if (corpus->find(doc) == nullptr) {
                    warn(report, fmt::format("query {} ranks unknown document {}; treated as non-relevant",
                                             result.query_id, doc));
                }
            }
        }
        scored.push_back(&result);
    }

    std::vector<QueryMetrics> metrics(scored.size());
    const auto n = static_cast<std::int64_t>(scored.size());
    if (execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t i = 0; i < n; ++i) {
            const auto& r = *scored[static_cast<std::size_t>(i)];
            metrics[static_cast<std::size_t>(i)] = score_query(r.ranking, qrels.grades(r.query_id), gain);
        }
    } else {
        for (std::int64_t i = 0; i < n; ++i) {
            const auto& r = *scored[static_cast<std::size_t>(i)];
            metrics[static_cast<std::size_t>(i)] = score_query(r.ranking, qrels.grades(r.query_id), gain);
        }
    }

    for (std::size_t i = 0; i < scored.size(); ++i) {
        report.per_query.emplace(scored[i]->query_id, metrics[i]);
    }
    if (!report.per_query.empty()) {
        std::array<double, 6> sums{};
        for (const auto& [qid, m] : report.per_query) {
            const auto v = metric_values(m);
            for (std::size_t j = 0; j < v.size(); ++j) {
                sums[j] += v[j];
            }
        }
        const auto count = static_cast<double>(report.per_query.size());
        auto& a = report.aggregate;
        a = QueryMetrics{sums[0] / count, sums[1] / count, sums[2] / count,
                         sums[3] / count, sums[4] / count, sums[5] / count};
    }
    return report;
}

std::string format_metric(double value) { return fmt::format("{:.1f}", value * 100.0); }

double cost_of(std::int64_t tokens, double price_per_million)
{
    return static_cast<double>(tokens) * price_per_million / 1e6;
}

std::string format_cost(double dollars) { return fmt::format("${:.2f}", std::round(dollars * 100.0) / 100.0); }

std::string format_tokens(std::int64_t tokens) { return fmt::format("{:.2f}M", static_cast<double>(tokens) / 1e6); }

namespace {

std::string render_table(const std::vector<std::vector<std::string>>& rows)
{
    if (rows.empty()) {
        return {};
    }
    std::vector<std::size_t> widths(rows.front().size(), 0);
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            widths[c] = std::max(widths[c], row[c].size());
        }
    }
    std::string out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::string line;
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            if (c == 0) {
                line += fmt::format("{:<{}}", rows[r][c], widths[c]);
            } else {
                line += fmt::format("  {:>{}}", rows[r][c], widths[c]);
            }
        }
        out += line + "\n";
        if (r == 0) {
            std::size_t total = 0;
            for (auto w : widths) {
                total += w;
            }
            out += std::string(total + 2 * (widths.size() - 1), '-') + "\n";
        }
    }
    return out;
}

}  // namespace

std::string format_report_table(const MetricsReport& report)
{
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"query"};
    header.insert(header.end(), kMetricNames.begin(), kMetricNames.end());
    rows.push_back(std::move(header));
    auto add = [&](const std::string& label, const QueryMetrics& m) {
        std::vector<std::string> row{label};
        for (double v : metric_values(m)) {
            row.push_back(format_metric(v));
        }
        rows.push_back(std::move(row));
    };
    for (const auto& [qid, m] : report.per_query) {
        add(qid, m);
    }
    add("mean", report.aggregate);
    return render_table(rows);
}

std::string format_report_jsonl(const MetricsReport& report)
{
    std::string out;
    auto line = [&](const std::string& label, const QueryMetrics& m) {
        nlohmann::ordered_json j;
        j["query_id"] = label;
        const auto v = metric_values(m);
        for (std::size_t i = 0; i < v.size(); ++i) {
            j[std::string(kMetricNames[i])] = v[i];
        }
        out += j.dump() + "\n";
    };
    for (const auto& [qid, m] : report.per_query) {
        line(qid, m);
    }
    line("mean", report.aggregate);
    return out;
}

std::string method_label(std::string_view strategy_tag)
{
    if (strategy_tag == "vanilla") {
        return "Vanilla";
    }
    if (strategy_tag == "sliding") {
        return "Sliding";
    }
    if (strategy_tag == "corank") {
        return "CoRank";
    }
    if (strategy_tag == "corank_sliding") {
        return "Both";
    }
    return std::string(strategy_tag);
}

std::string token_comparison_table(std::span<const ComparisonRow> rows, double price_per_million)
{
    if (rows.empty()) {
        return {};
    }
    std::vector<std::vector<std::string>> table{{"Method", "N@10", "M@10", "R@10", "Token Usage", "Cost"}};
    for (const auto& r : rows) {
        table.push_back({r.method, format_metric(r.ndcg10), format_metric(r.map10), format_metric(r.recall10),
                         format_tokens(r.tokens), format_cost(cost_of(r.tokens, price_per_million))});
    }
    return render_table(table);
}

}  // namespace corank
