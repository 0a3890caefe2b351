#include <doctest.h>

#include <cmath>
#include <random>

#include "corank/error.hpp"
#include "corank/eval.hpp"
#include "support/random_cases.hpp"
#include "support/reference.hpp"

using namespace corank;

namespace {

Qrels::Grades grades(std::initializer_list<std::pair<const std::string, int>> g) { return Qrels::Grades(g); }

}  // namespace

TEST_CASE("ndcg hand values")
{
    const std::vector<std::string> ranking{"a", "b", "c", "d"};
    CHECK(ndcg_at_k(ranking, grades({{"b", 1}}), 10) == doctest::Approx(1.0 / std::log2(3.0)).epsilon(1e-12));
    CHECK(ndcg_at_k(ranking, grades({{"b", 1}}), 10) == doctest::Approx(0.6309).epsilon(1e-4));
    CHECK(ndcg_at_k(ranking, grades({{"a", 1}, {"b", 1}}), 10) == 1.0);
    CHECK(ndcg_at_k(ranking, grades({}), 10) == 0.0);
    CHECK(ndcg_at_k(ranking, grades({{"a", 0}, {"zz", 0}}), 10) == 0.0);
    // grades sorted descending for the ideal: 2 at rank 1, 1 at rank 2
    const double dcg = 1.0 + 2.0 / std::log2(3.0);
    const double idcg = 2.0 + 1.0 / std::log2(3.0);
    CHECK(ndcg_at_k(ranking, grades({{"a", 1}, {"b", 2}}), 10) == doctest::Approx(dcg / idcg).epsilon(1e-12));
    const double exp_dcg = 1.0 + 3.0 / std::log2(3.0);
    const double exp_idcg = 3.0 + 1.0 / std::log2(3.0);
    CHECK(ndcg_at_k(ranking, grades({{"a", 1}, {"b", 2}}), 10, GainFunction::Exponential) ==
          doctest::Approx(exp_dcg / exp_idcg).epsilon(1e-12));
}

TEST_CASE("map hand values")
{
    const std::vector<std::string> ranking{"a", "b", "c", "d"};
    CHECK(map_at_k(ranking, grades({{"a", 1}}), 10) == 1.0);
    CHECK(map_at_k(ranking, grades({{"b", 1}, {"d", 1}}), 10) == 0.5);
    CHECK(map_at_k(ranking, grades({}), 10) == 0.0);
    // min(R, k) denominator: 3 relevant, k = 1
    CHECK(map_at_k(ranking, grades({{"a", 1}, {"b", 1}, {"c", 1}}), 1) == 1.0);
    CHECK(map_at_k(ranking, grades({{"b", 3}}), 10) == 0.5);
}

TEST_CASE("recall hand values and k boundary")
{
    const std::vector<std::string> ranking{"a", "b", "c", "d", "e", "f"};
    CHECK(recall_at_k(ranking, grades({{"a", 1}, {"c", 1}}), 10) == 1.0);
    CHECK(recall_at_k(ranking, grades({{"a", 1}, {"f", 1}}), 5) == 0.5);
    CHECK(recall_at_k(ranking, grades({{"f", 1}}), 5) == 0.0);
    CHECK(recall_at_k(ranking, grades({{"f", 1}}), 6) == 1.0);
    CHECK(recall_at_k(ranking, grades({}), 5) == 0.0);
}

TEST_CASE("k = 0 is rejected")
{
    const std::vector<std::string> ranking{"a"};
    CHECK_THROWS_AS((void)ndcg_at_k(ranking, grades({{"a", 1}}), 0), Error);
    CHECK_THROWS_AS((void)map_at_k(ranking, grades({{"a", 1}}), 0), Error);
    CHECK_THROWS_AS((void)recall_at_k(ranking, grades({{"a", 1}}), 0), Error);
}

TEST_CASE("metrics match the reference evaluator on random cases")
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        const auto c = testing::random_ranking_case(rng);
        const auto g = testing::to_grades(c.grades);
        CAPTURE(trial);
        CHECK(std::abs(ndcg_at_k(c.ranking, g, c.k) - ref::ndcg(c.ranking, c.grades, c.k)) < 1e-9);
        CHECK(std::abs(ndcg_at_k(c.ranking, g, c.k, GainFunction::Exponential) -
                       ref::ndcg(c.ranking, c.grades, c.k, true)) < 1e-9);
        CHECK(std::abs(map_at_k(c.ranking, g, c.k) - ref::average_precision(c.ranking, c.grades, c.k)) < 1e-9);
        CHECK(std::abs(recall_at_k(c.ranking, g, c.k) - ref::recall(c.ranking, c.grades, c.k)) < 1e-9);
    }
}

TEST_CASE("metric properties")
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        auto c = testing::random_ranking_case(rng);
        const auto g = testing::to_grades(c.grades);
        CAPTURE(trial);
        std::size_t relevant = 0;
        for (const auto& [d, grade] : g) {
            relevant += grade > 0 ? 1 : 0;
        }
        for (std::size_t k = 1; k <= 20; ++k) {
            const double n = ndcg_at_k(c.ranking, g, k);
            const double m = map_at_k(c.ranking, g, k);
            const double r = recall_at_k(c.ranking, g, k);
            CHECK((n >= 0.0 && n <= 1.0 + 1e-12));
            CHECK((m >= 0.0 && m <= 1.0 + 1e-12));
            CHECK((r >= 0.0 && r <= 1.0));
            // the ideal DCG stops growing once k covers every relevant doc
            if (k >= relevant) {
                CHECK(n <= ndcg_at_k(c.ranking, g, k + 1) + 1e-12);
            }
            CHECK(r <= recall_at_k(c.ranking, g, k + 1));
        }

        // relabeling doc ids changes nothing
        std::vector<std::string> relabeled;
        for (const auto& d : c.ranking) {
            relabeled.push_back("x-" + d);
        }
        Qrels::Grades g2;
        for (const auto& [d, grade] : g) {
            g2["x-" + d] = grade;
        }
        CHECK(ndcg_at_k(relabeled, g2, c.k) == ndcg_at_k(c.ranking, g, c.k));
        CHECK(map_at_k(relabeled, g2, c.k) == map_at_k(c.ranking, g, c.k));

        // a new top doc with the highest grade never hurts (with a lower grade
        // it can push better docs down and lower graded nDCG)
        int top_grade = 1;
        for (const auto& [d, grade] : g) {
            top_grade = std::max(top_grade, grade);
        }
        auto boosted = c.ranking;
        boosted.insert(boosted.begin(), "fresh");
        auto g3 = g;
        g3["fresh"] = top_grade;
        const auto& g_with = g3;
        CHECK(ndcg_at_k(boosted, g3, c.k) + 1e-12 >= ndcg_at_k(c.ranking, g_with, c.k));
        CHECK(map_at_k(boosted, g3, c.k) + 1e-12 >= map_at_k(c.ranking, g_with, c.k));
        CHECK(recall_at_k(boosted, g3, c.k) >= recall_at_k(c.ranking, g_with, c.k));
    }
}

TEST_CASE("a repeated document is counted once")
{
    const std::vector<std::string> ranking{"a", "a", "b"};
    CHECK(recall_at_k(ranking, grades({{"a", 1}, {"b", 1}}), 2) == 0.5);
    CHECK(ndcg_at_k(ranking, grades({{"a", 1}}), 10) == 1.0);
}

TEST_CASE("evaluate_run aggregates and warns")
{
    Qrels qrels;
    qrels.set("q1", "d1", 1);
    qrels.set("q2", "d9", 1);
    std::vector<RunResult> run{
        {"q1", {"d1", "d2"}, "t", {}},
        {"q2", {"d2", "d3"}, "t", {}},
        {"q3", {"d1"}, "t", {}},
    };
    run[0].token_usage.record("fine", 10, 1);
    run[1].token_usage.record("fine", 5, 1);
    Corpus corpus;
    for (const char* id : {"d1", "d2", "d3"}) {
        corpus.add(Document(id, "", "x"));
    }
    for (auto exec : {Execution::Serial, Execution::Parallel}) {
        const auto report = evaluate_run(run, qrels, &corpus, GainFunction::Linear, exec);
        CHECK(report.strategy_tag == "t");
        REQUIRE(report.per_query.size() == 2);
        CHECK(report.per_query.at("q1").ndcg10 == 1.0);
        CHECK(report.per_query.at("q2").ndcg10 == 0.0);
        CHECK(report.aggregate.ndcg10 == 0.5);
        CHECK(format_metric(report.aggregate.ndcg10) == "50.0");
        CHECK(report.tokens.total_tokens() == 17);
        CHECK(report.warnings.size() == 1);  // q3 has no judgments
    }

    std::vector<RunResult> unknown{{"q1", {"ghost", "d1"}, "t", {}}};
    const auto report = evaluate_run(unknown, qrels, &corpus);
    CHECK(report.warnings.size() == 1);
    CHECK(report.per_query.at("q1").map10 == 0.5);

    std::vector<RunResult> dup{{"q1", {"d1"}, "t", {}}, {"q1", {"d2"}, "t", {}}};
    CHECK_THROWS_AS((void)evaluate_run(dup, qrels), Error);
}

TEST_CASE("evaluate_run matches the reference on a synthetic 20-query set")
{
    std::mt19937_64 rng(99);
    Qrels qrels;
    std::vector<RunResult> run;
    std::vector<testing::RankingCase> cases;
    for (int q = 0; q < 20; ++q) {
        auto c = testing::random_ranking_case(rng);
        const std::string qid = "q" + std::to_string(q);
        c.grades["doc0"] = c.grades.count("doc0") ? c.grades["doc0"] : 0;  // every query judged
        for (const auto& [d, grade] : c.grades) {
            qrels.set(qid, d, grade);
        }
        run.push_back({qid, c.ranking, "synthetic", {}});
        cases.push_back(c);
    }
    const auto serial = evaluate_run(run, qrels, nullptr, GainFunction::Linear, Execution::Serial);
    const auto parallel = evaluate_run(run, qrels, nullptr, GainFunction::Linear, Execution::Parallel);
    CHECK(serial.per_query == parallel.per_query);
    CHECK(serial.aggregate == parallel.aggregate);
    double mean_ndcg10 = 0;
    for (int q = 0; q < 20; ++q) {
        const auto& got = serial.per_query.at("q" + std::to_string(q));
        const auto& c = cases[static_cast<std::size_t>(q)];
        CHECK(std::abs(got.ndcg5 - ref::ndcg(c.ranking, c.grades, 5)) < 1e-4);
        CHECK(std::abs(got.ndcg10 - ref::ndcg(c.ranking, c.grades, 10)) < 1e-4);
        CHECK(std::abs(got.map5 - ref::average_precision(c.ranking, c.grades, 5)) < 1e-4);
        CHECK(std::abs(got.map10 - ref::average_precision(c.ranking, c.grades, 10)) < 1e-4);
        CHECK(std::abs(got.recall5 - ref::recall(c.ranking, c.grades, 5)) < 1e-4);
        CHECK(std::abs(got.recall10 - ref::recall(c.ranking, c.grades, 10)) < 1e-4);
        mean_ndcg10 += ref::ndcg(c.ranking, c.grades, 10) / 20.0;
    }
    CHECK(std::abs(serial.aggregate.ndcg10 - mean_ndcg10) < 1e-9);
}

TEST_CASE("cost arithmetic")
{
    CHECK(format_cost(cost_of(29'610'000, 0.1)) == "$2.96");
    CHECK(format_cost(cost_of(29'610'000, 0.4)) == "$11.84");
    CHECK(format_cost(cost_of(0, 0.4)) == "$0.00");
    CHECK(format_cost(0.005) == "$0.01");
    CHECK(format_tokens(1'010'000) == "1.01M");
    CHECK(format_tokens(0) == "0.00M");
    CHECK(format_metric(0.4631) == "46.3");
}

TEST_CASE("token comparison table")
{
    CHECK(token_comparison_table({}, 0.4).empty());

    const std::vector<ComparisonRow> rows{
        {"Vanilla", 0.261, 0.2, 0.3, 1'010'000},
        {"Sliding", 0.3, 0.2, 0.3, 9'060'000},
        {"CoRank", 0.463, 0.2, 0.3, 3'600'000},
        {"Both", 0.45, 0.2, 0.3, 11'650'000},
    };
    const auto table = token_comparison_table(rows, 0.4);
    for (const char* cell : {"Method", "N@10", "Token Usage", "Cost", "$0.40", "$3.62", "$1.44", "$4.66", "1.01M",
                             "11.65M", "46.3"}) {
        CAPTURE(cell);
        CHECK(table.find(cell) != std::string::npos);
    }
    const std::vector<ComparisonRow> one{{"CoRank", 0.5, 0.5, 0.5, 100}};
    const auto single = token_comparison_table(one, 0.4);
    CHECK(std::count(single.begin(), single.end(), '\n') == 3);  // header, rule, one row

    CHECK(method_label("vanilla") == "Vanilla");
    CHECK(method_label("corank_sliding") == "Both");
}

TEST_CASE("report formats")
{
    Qrels qrels;
    qrels.set("q1", "d1", 1);
    std::vector<RunResult> run{{"q1", {"d1"}, "corank", {}}};
    const auto report = evaluate_run(run, qrels);
    const auto table = format_report_table(report);
    CHECK(table.find("100.0") != std::string::npos);
    CHECK(table.find("mean") != std::string::npos);
    const auto jsonl = format_report_jsonl(report);
    CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 2);
    CHECK(jsonl.find(R"("query_id":"mean")") != std::string::npos);
    CHECK(parse_gain("exponential") == GainFunction::Exponential);
    CHECK_THROWS((void)parse_gain("cubic"));
}
