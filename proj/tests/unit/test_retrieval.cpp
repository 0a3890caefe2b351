#include <doctest.h>

#include <random>

#include "corank/error.hpp"
#include "corank/fileio.hpp"
#include "corank/kernels.hpp"
#include "corank/retrieval.hpp"
#include "corank/text.hpp"
#include "support/reference.hpp"
#include "support/temp_dir.hpp"

using namespace corank;

namespace {

Corpus toy_corpus()
{
    Corpus c;
    c.add(Document("d1", "", "the cat sat on the mat"));
    c.add(Document("d2", "", "the dog chased the cat and the cat ran"));
    c.add(Document("d3", "", "a bird sang"));
    return c;
}

std::vector<std::vector<std::string>> tokens_of(const Corpus& c)
{
    std::vector<std::vector<std::string>> out;
    for (const auto& d : c) {
        out.push_back(word_tokens(d.title() + " " + d.text()));
    }
    return out;
}

Corpus random_corpus(std::mt19937_64& rng, std::size_t n)
{
    static const std::vector<std::string> vocab{"graph", "neural", "network", "text", "generation", "data",
                                                "augmentation", "retrieval", "rank", "model", "survey", "attention"};
    Corpus c;
    std::uniform_int_distribution<std::size_t> word(0, vocab.size() - 1);
    std::uniform_int_distribution<int> len(0, 30);
    for (std::size_t i = 0; i < n; ++i) {
        std::string text;
        const int l = len(rng);
        for (int w = 0; w < l; ++w) {
            text += vocab[word(rng)] + " ";
        }
        c.add(Document("doc" + std::to_string(i), "", text));
    }
    return c;
}

}  // namespace

TEST_CASE("index of a one-doc corpus")
{
    Corpus c;
    c.add(Document("x", "", "a b a"));
    const auto index = build_index(c);
    CHECK(index.postings.at("a") == std::vector<Posting>{{0, 2}});
    CHECK(index.postings.at("b") == std::vector<Posting>{{0, 1}});
    CHECK(index.doc_lengths == std::vector<std::uint32_t>{3});
    CHECK(index.avg_doc_length == 3.0);
    CHECK(build_index(c) == index);
}

TEST_CASE("empty documents have length 0 and no postings")
{
    Corpus c;
    c.add(Document("x", "", "alpha"));
    c.add(Document("y", "", ""));
    const auto index = build_index(c);
    CHECK(index.doc_lengths == std::vector<std::uint32_t>{1, 0});
    CHECK(index.postings.size() == 1);
    CHECK(index.doc_count() == 2);
    CHECK(index.avg_doc_length == 0.5);
}

TEST_CASE("bm25 idf")
{
    CHECK(bm25_idf(3, 2) == doctest::Approx(std::log(1.5 / 2.5 + 1.0)).epsilon(1e-15));
    CHECK(bm25_idf(10, 10) > 0.0);
}

TEST_CASE("bm25 scores on a toy corpus match hand values")
{
    const auto corpus = toy_corpus();
    const auto index = build_index(corpus);
    // "cat": df = 2 of N = 3, avg length = (6 + 9 + 3) / 3 = 6
    const double idf = std::log((3 - 2 + 0.5) / (2 + 0.5) + 1.0);
    const double d1 = idf * 1 * 2.2 / (1 + 1.2 * (0.25 + 0.75 * 6.0 / 6.0));
    const double d2 = idf * 2 * 2.2 / (2 + 1.2 * (0.25 + 0.75 * 9.0 / 6.0));
    const auto result = bm25_search(index, Query{"q", "cat"}, 10);
    REQUIRE(result.size() == 2);
    CHECK(result.entries[0].doc_id == "d2");
    CHECK(std::abs(result.entries[0].score - d2) < 1e-9);
    CHECK(std::abs(result.entries[1].score - d1) < 1e-9);

    const auto toks = tokens_of(corpus);
    CHECK(std::abs(ref::bm25(toks, 1, {"cat"}) - d2) < 1e-12);
}

TEST_CASE("bm25 edge cases")
{
    const auto index = build_index(toy_corpus());
    CHECK(bm25_search(index, Query{"q", "zebra"}, 10).entries.empty());
    CHECK(bm25_search(index, Query{"q", "!!!"}, 10).entries.empty());
    CHECK(bm25_search(index, Query{"q", "the cat bird a"}, 50).size() == 3);
    CHECK(bm25_search(index, Query{"q", "the cat bird a"}, 1).size() == 1);
    CHECK_THROWS((void)bm25_search(index, Query{"q", "cat"}, 0));
}

TEST_CASE("bm25 matches the reference on random corpora, serial and parallel")
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto corpus = random_corpus(rng, 40);
        const auto index = build_index(corpus);
        const auto toks = tokens_of(corpus);
        const Query q{"q", "graph neural graph survey attention"};
        const auto serial = bm25_search(index, q, 100, {}, Execution::Serial);
        const auto parallel = bm25_search(index, q, 100, {}, Execution::Parallel);
        CHECK(serial.entries == parallel.entries);
        CHECK(is_canonical(serial));
        std::size_t matching = 0;
        for (std::size_t d = 0; d < corpus.size(); ++d) {
            const double expected = ref::bm25(toks, d, word_tokens(q.text));
            if (expected > 0) {
                ++matching;
            }
            for (const auto& e : serial.entries) {
                if (e.doc_id == corpus[d].doc_id()) {
                    CHECK(std::abs(e.score - expected) < 1e-9);
                    CHECK(e.score > 0.0);
                }
            }
        }
        CHECK(serial.size() == matching);
    }
}

TEST_CASE("ties are broken by doc_id")
{
    Corpus c;
    c.add(Document("b", "", "same words"));
    c.add(Document("a", "", "same words"));
    const auto result = bm25_search(build_index(c), Query{"q", "same"}, 5);
    CHECK(result.doc_ids() == std::vector<std::string>{"a", "b"});
}

TEST_CASE("index save and load")
{
    testing::TempDir dir;
    std::mt19937_64 rng(5);
    const auto index = build_index(random_corpus(rng, 30));
    save_index(index, dir / "idx.bin");
    CHECK(load_index(dir / "idx.bin") == index);

    const auto bytes = read_file(dir / "idx.bin");
    write_file_atomic(dir / "short.bin", bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS((void)load_index(dir / "short.bin"), FormatError);
    write_file_atomic(dir / "foreign.bin", "not an index");
    CHECK_THROWS_AS((void)load_index(dir / "foreign.bin"), FormatError);
}

TEST_CASE("dense search")
{
    HashEmbedder embedder(128, 42);
    Corpus c;
    c.add(Document("d1", "", "graph neural networks for molecules"));
    c.add(Document("d2", "", "cooking with cast iron pans"));
    c.add(Document("d3", "", "transformers for text generation"));
    c.add(Document("d4", "", ""));
    DenseIndex index(c, embedder);
    CHECK(index.size() == 3);

    const auto hit = index.search(Query{"q", "cooking with cast iron pans"}, 3);
    CHECK(hit.entries.front().doc_id == "d2");
    CHECK(is_canonical(hit));

    // m = 1 is the brute-force argmax
    const Query q{"q", "neural text generation"};
    const auto qv = embedder.embed(q.text);
    std::string best;
    double best_score = -2;
    for (const auto& d : c) {
        if (d.text().empty()) {
            continue;
        }
        const double s = ref::cosine(qv.values, embedder.embed(d.text()).values);
        if (s > best_score) {
            best_score = s;
            best = d.doc_id();
        }
    }
    const auto top = dense_search(c, embedder, q, 1);
    REQUIRE(top.size() == 1);
    CHECK(top.entries[0].doc_id == best);
    CHECK(std::abs(top.entries[0].score - best_score) < 1e-6);

    CHECK(index.search(q, 10, Execution::Serial).entries == index.search(q, 10, Execution::Parallel).entries);
    CHECK(dense_search(Corpus{}, embedder, q, 5).entries.empty());
}

TEST_CASE("serial and OpenMP kernels agree bitwise")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<float> val(-1.0f, 1.0f);
    const std::size_t docs = 20000;
    std::vector<std::uint32_t> lengths(docs);
    for (auto& l : lengths) {
        l = static_cast<std::uint32_t>(rng() % 300);
    }
    std::vector<Posting> postings;
    for (std::uint32_t d = 0; d < docs; d += 2) {
        postings.push_back({d, static_cast<std::uint32_t>(1 + rng() % 5)});
    }
    std::vector<double> a(docs, 0.0), b(docs, 0.0);
    kernels::serial::bm25_accumulate(postings, 1.7, {}, lengths, 150.0, a);
    kernels::omp::bm25_accumulate(postings, 1.7, {}, lengths, 150.0, b);
    CHECK(a == b);

    const std::size_t rows = 1000, dim = 64;
    std::vector<float> matrix(rows * dim), query(dim);
    for (auto& x : matrix) {
        x = val(rng);
    }
    for (auto& x : query) {
        x = val(rng);
    }
    std::fill(matrix.begin(), matrix.begin() + dim, 0.0f);  // one zero row
    std::vector<double> norms(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        norms[r] = kernels::norm(std::span<const float>(matrix).subspan(r * dim, dim));
    }
    std::vector<double> cs(rows), co(rows);
    kernels::serial::cosine_rows(matrix, dim, norms, query, cs);
    kernels::omp::cosine_rows(matrix, dim, norms, query, co);
    CHECK(cs == co);
    CHECK(cs[0] == 0.0);
    std::vector<float> row1(matrix.begin() + dim, matrix.begin() + 2 * dim);
    CHECK(std::abs(cs[1] - ref::cosine(row1, query)) < 1e-6);
}
