// Serial reference kernels against their OpenMP versions, plus the end-to-end
// searches that use them.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "corank/embedding.hpp"
#include "corank/kernels.hpp"
#include "corank/retrieval.hpp"

using namespace corank;

namespace {

struct Bm25Input {
    std::vector<Posting> postings;
    std::vector<std::uint32_t> lengths;
    std::vector<double> scores;
};

Bm25Input bm25_input(std::size_t docs)
{
    std::mt19937_64 rng(1);
    Bm25Input in;
    in.lengths.resize(docs);
    for (auto& l : in.lengths) {
        l = static_cast<std::uint32_t>(50 + rng() % 400);
    }
    for (std::uint32_t d = 0; d < docs; ++d) {
        if (rng() % 3 == 0) {
            in.postings.push_back({d, static_cast<std::uint32_t>(1 + rng() % 8)});
        }
    }
    in.scores.assign(docs, 0.0);
    return in;
}

template <kernels::Bm25AccumulateFn Fn>
void BM_bm25_accumulate(benchmark::State& state)
{
    auto in = bm25_input(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        Fn(in.postings, 1.3, {}, in.lengths, 250.0, in.scores);
        benchmark::DoNotOptimize(in.scores.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(in.postings.size()));
}

struct CosineInput {
    std::vector<float> matrix, query;
    std::vector<double> norms, out;
    std::size_t dim = 256;
};

CosineInput cosine_input(std::size_t rows)
{
    std::mt19937_64 rng(2);
    std::normal_distribution<float> val;
    CosineInput in;
    in.matrix.resize(rows * in.dim);
    in.query.resize(in.dim);
    for (auto& x : in.matrix) {
        x = val(rng);
    }
    for (auto& x : in.query) {
        x = val(rng);
    }
    in.norms.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        in.norms[r] = kernels::norm(std::span<const float>(in.matrix).subspan(r * in.dim, in.dim));
    }
    in.out.resize(rows);
    return in;
}

template <kernels::CosineRowsFn Fn>
void BM_cosine_rows(benchmark::State& state)
{
    auto in = cosine_input(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        Fn(in.matrix, in.dim, in.norms, in.query, in.out);
        benchmark::DoNotOptimize(in.out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

Corpus synthetic_corpus(std::size_t docs)
{
    static const std::vector<std::string> vocab{"graph", "neural", "network", "text", "generation", "data",
                                                "retrieval", "rank", "model", "survey", "attention", "vision",
                                                "speech", "robot", "policy", "language", "sparse", "dense"};
    std::mt19937_64 rng(3);
    Corpus c;
    for (std::size_t i = 0; i < docs; ++i) {
        std::string text;
        for (int w = 0; w < 150; ++w) {
            text += vocab[rng() % vocab.size()] + " ";
        }
        c.add(Document("d" + std::to_string(i), "", text));
    }
    return c;
}

void BM_bm25_search(benchmark::State& state)
{
    static const auto index = build_index(synthetic_corpus(20000));
    const auto exec = state.range(0) == 0 ? Execution::Serial : Execution::Parallel;
    const Query q{"q", "graph neural retrieval survey"};
    for (auto _ : state) {
        benchmark::DoNotOptimize(bm25_search(index, q, 200, {}, exec));
    }
    state.SetLabel(state.range(0) == 0 ? "serial" : "openmp");
}

}  // namespace

BENCHMARK_TEMPLATE(BM_bm25_accumulate, kernels::serial::bm25_accumulate)->Arg(10000)->Arg(200000);
BENCHMARK_TEMPLATE(BM_bm25_accumulate, kernels::omp::bm25_accumulate)->Arg(10000)->Arg(200000);
BENCHMARK_TEMPLATE(BM_cosine_rows, kernels::serial::cosine_rows)->Arg(1000)->Arg(20000);
BENCHMARK_TEMPLATE(BM_cosine_rows, kernels::omp::cosine_rows)->Arg(1000)->Arg(20000);
BENCHMARK(BM_bm25_search)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
