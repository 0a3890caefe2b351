#include <doctest.h>

#include "corank/error.hpp"
#include "corank/extraction.hpp"
#include "corank/fileio.hpp"
#include "corank/prompts.hpp"
#include "support/temp_dir.hpp"

using namespace corank;

using Strings = std::vector<std::string>;

namespace {

Corpus small_corpus()
{
    Corpus c;
    c.add(Document("a", "Graph networks", "Graph neural networks learn molecular representations. "
                                          "We study message passing and benchmark on chemistry tasks."));
    c.add(Document("b", "Speech", "Self supervised speech models transfer to low resource languages. "
                                  "Results cover recognition and translation."));
    c.add(Document("c", "Robots", "Robot policies learned from demonstrations generalize to new objects. "
                                  "We add reward shaping and evaluate grasping."));
    return c;
}

}  // namespace

TEST_CASE("category parsing")
{
    CHECK(parse_category("NLP -> Text Generation -> Controllable Multi-Attribute Generation").levels ==
          std::array<std::string, 3>{"NLP", "Text Generation", "Controllable Multi-Attribute Generation"});
    CHECK(parse_category("1. NLP\n2. Text Generation\n3. Controllable Multi-Attribute Generation").levels ==
          std::array<std::string, 3>{"NLP", "Text Generation", "Controllable Multi-Attribute Generation"});
    CHECK(parse_category("Category: **A → B ⇒ C**").levels == std::array<std::string, 3>{"A", "B", "C"});
    CHECK(parse_category("Broad field: A\nSpecific area: B\nTopic: C").levels ==
          std::array<std::string, 3>{"A", "B", "C"});
    CHECK(parse_category("A -> B -> X -> C").levels == std::array<std::string, 3>{"A", "B", "C"});
    CHECK_THROWS_AS((void)parse_category("just one phrase"), ExtractionError);
    CHECK_THROWS_AS((void)parse_category("A -> B"), ExtractionError);
    CHECK_THROWS_AS((void)parse_category(""), ExtractionError);
    CHECK(parse_category("A -> B -> C").joined() == "A -> B -> C");
}

TEST_CASE("section parsing")
{
    Strings warnings;
    CHECK(parse_sections("1. Introduction\n2. Related Work\n3. Method\n4. Experiments\n5. Conclusion", &warnings) ==
          Strings{"Introduction", "Related Work", "Method", "Experiments", "Conclusion"});
    CHECK(warnings.empty());
    CHECK(parse_sections("Here are the sections:\n- **Intro**\n- Method", &warnings) == Strings{"Intro", "Method"});
    CHECK(warnings.size() == 1);
    CHECK(parse_sections("## Background\n## Model\n## Results") == Strings{"Background", "Model", "Results"});
    CHECK_THROWS_AS((void)parse_sections(""), ExtractionError);
    CHECK_THROWS_AS((void)parse_sections("  \n \n"), ExtractionError);
}

TEST_CASE("keyword parsing")
{
    std::string many;
    for (int i = 0; i < 34; ++i) {
        many += "term" + std::to_string(i) + ", ";
    }
    many += "TERM3";
    Strings warnings;
    const auto kws = parse_keywords(many, &warnings);
    CHECK(kws.size() == 34);
    CHECK(warnings.empty());

    CHECK(parse_keywords("Keywords: a, b, c", &warnings) == Strings{"a", "b", "c"});
    CHECK(warnings.size() == 1);
    CHECK(parse_keywords("- alpha\n- beta; gamma\n- \"delta\"") == Strings{"alpha", "beta", "gamma", "delta"});

    std::string twelve;
    for (int i = 0; i < 12; ++i) {
        twelve += (i ? ", " : "") + std::string("k") + std::to_string(i);
    }
    warnings.clear();
    CHECK(parse_keywords(twelve, &warnings).size() == 12);
    CHECK(warnings.size() == 1);
    CHECK_THROWS_AS((void)parse_keywords(""), ExtractionError);
}

TEST_CASE("pseudo query parsing")
{
    std::string twenty;
    for (int i = 1; i <= 20; ++i) {
        twenty += std::to_string(i) + ". query number " + std::to_string(i) + "\n";
    }
    Strings warnings;
    CHECK(parse_pseudo_queries(twenty, &warnings).size() == 20);
    CHECK(warnings.empty());
    CHECK(parse_pseudo_queries("1) first?\n2) second?", &warnings) == Strings{"first?", "second?"});
    CHECK(warnings.size() == 1);
    CHECK_THROWS_AS((void)parse_pseudo_queries(""), ExtractionError);
}

TEST_CASE("case-insensitive dedup")
{
    CHECK(dedup_case_insensitive({"A", "b", "a", " ", "B", "c"}) == Strings{"A", "b", "c"});
}

TEST_CASE("feature set validation")
{
    FeatureSet f;
    f.doc_id = "d";
    f.category.levels = {"A", "B", "C"};
    f.sections = {"s"};
    f.keywords = {"k"};
    f.pseudo_queries = {"q"};
    CHECK_NOTHROW(f.validate());
    auto g = f;
    g.keywords = {"k", "K"};
    CHECK_THROWS_AS(g.validate(), ExtractionError);
    g = f;
    g.sections = {" s"};
    CHECK_THROWS_AS(g.validate(), ExtractionError);
    g = f;
    g.pseudo_queries.clear();
    CHECK_THROWS_AS(g.validate(), ExtractionError);
    CHECK(feature_set_from_json(feature_set_to_json(f)) == f);
}

TEST_CASE("extract_features records provenance and tokens")
{
    MockBackend backend;
    ExtractionOptions opts;
    opts.model = "extractor-x";
    TokenLedger ledger;
    const auto doc = small_corpus()[0];
    const auto f = extract_features(doc, backend, opts, &ledger);
    CHECK(f.doc_id == "a");
    CHECK(f.extractor_model == "extractor-x");
    CHECK_NOTHROW(f.validate());
    CHECK(backend.calls() == 4);
    CHECK(ledger.stages().count("extraction") == 1);
}

TEST_CASE("extract_all: call accounting, resume and failures")
{
    testing::TempDir dir;
    const auto corpus = small_corpus();
    {
        MockBackend backend;
        FeatureStore store(dir / "f.jsonl");
        const auto report = extract_all(corpus, backend, store, {}, 2);
        CHECK(report.extracted == 3);
        CHECK(report.skipped == 0);
        CHECK(report.failures.empty());
        CHECK(backend.calls() == 12);
        CHECK(store.size() == 3);
        CHECK(report.feature_successes == std::array<std::size_t, 4>{3, 3, 3, 3});
    }
    const auto first = read_file(dir / "f.jsonl");
    {
        MockBackend backend;
        FeatureStore store(dir / "f.jsonl");
        const auto report = extract_all(corpus, backend, store, {}, 2);
        CHECK(report.extracted == 0);
        CHECK(report.skipped == 3);
        CHECK(backend.calls() == 0);
    }
    CHECK(read_file(dir / "f.jsonl") == first);

    MockBackend failing;
    failing.set_handler([](const ChatRequest& r) -> std::optional<std::string> {
        const auto parsed = parse_extraction_prompt(r.prompt);
        if (parsed && parsed->first == FeatureKind::Category && parsed->second.find("Self supervised speech") != std::string::npos) {
            return "no category here";
        }
        return std::nullopt;
    });
    FeatureStore store;
    const auto report = extract_all(corpus, failing, store, {}, 3);
    CHECK(report.extracted == 2);
    REQUIRE(report.failures.size() == 1);
    CHECK(report.failures[0].doc_id == "b");
    CHECK(store.size() == 2);
    CHECK_FALSE(store.contains("b"));
    CHECK(failing.calls() == 9);  // extraction stops at the failing feature
}

TEST_CASE("feature store rejects malformed lines")
{
    testing::TempDir dir;
    write_file_atomic(dir / "f.jsonl", "{\"doc_id\": \"x\"}\n");
    try {
        FeatureStore store(dir / "f.jsonl");
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.line() == 1);
    }
}
