#include <doctest.h>

#include <random>

#include "corank/error.hpp"
#include "corank/representation.hpp"
#include "corank/tokens.hpp"

using namespace corank;

namespace {

CategoryPath case_study_category()
{
    return CategoryPath{{"Natural Language Processing (NLP)", "Text Generation and Neural Machine Translation",
                         "Conditional VAE-Based Framework for Controllable and Scalable Multi-Attribute Text "
                         "Generation with Applications in Data Augmentation"}};
}

SelectedFeatures case_study_selection()
{
    SelectedFeatures s;
    s.keywords = {"Text Generation", "Multi-Attribute Control", "Data Augmentation", "Semantic Attributes"};
    s.section = "CGA for Data Augmentation in NLP Tasks";
    s.pseudo_query = "How can a conditional VAE control several attributes during text generation?";
    return s;
}

}  // namespace

TEST_CASE("form 4 reproduces the worked example")
{
    const auto r = build_representation(RepresentationForm::CategorySectionKeywords, "d1", case_study_category(),
                                        case_study_selection());
    CHECK(r.text ==
          "Natural Language Processing (NLP) -> Text Generation and Neural Machine Translation -> Conditional "
          "VAE-Based Framework for Controllable and Scalable Multi-Attribute Text Generation with Applications in "
          "Data Augmentation: CGA for Data Augmentation in NLP Tasks (Text Generation, Multi-Attribute Control, "
          "Data Augmentation, Semantic Attributes)");
    CHECK(r.doc_id == "d1");
    CHECK(r.token_estimate == count_tokens(r.text));
}

TEST_CASE("forms 1 to 3")
{
    const CategoryPath abc{{"A", "B", "C"}};
    auto sel = case_study_selection();
    CHECK(build_representation(RepresentationForm::Category, "d", abc, sel).text == "A -> B -> C");
    CHECK(build_representation(RepresentationForm::CategorySection, "d", abc, sel).text ==
          "A -> B -> C: CGA for Data Augmentation in NLP Tasks");
    CHECK(build_representation(RepresentationForm::PseudoQuery, "d", abc, sel).text == sel.pseudo_query);

    sel.keywords.clear();
    CHECK(build_representation(RepresentationForm::CategorySectionKeywords, "d", abc, sel).text ==
          build_representation(RepresentationForm::CategorySection, "d", abc, sel).text);
}

TEST_CASE("missing inputs name the form and field")
{
    auto sel = case_study_selection();
    sel.pseudo_query.clear();
    try {
        (void)build_representation(RepresentationForm::PseudoQuery, "d", case_study_category(), sel);
        FAIL("expected an error");
    } catch (const Error& e) {
        const std::string what = e.what();
        CHECK(what.find("form 1") != std::string::npos);
        CHECK(what.find("pseudo") != std::string::npos);
    }
    sel = case_study_selection();
    sel.section.clear();
    CHECK_THROWS_AS((void)build_representation(RepresentationForm::CategorySection, "d", case_study_category(), sel),
                    Error);
    CategoryPath blank{{"A", "", "C"}};
    CHECK_THROWS_AS((void)build_representation(RepresentationForm::Category, "d", blank, sel), Error);
}

TEST_CASE("token estimates grow with richer forms")
{
    std::mt19937_64 rng(12);
    const std::vector<std::string> words{"graph", "neural", "text", "data", "model", "vision", "speech"};
    auto phrase = [&](std::size_t n) {
        std::string s;
        for (std::size_t i = 0; i < n; ++i) {
            s += (i ? " " : "") + words[rng() % words.size()];
        }
        return s;
    };
    for (int trial = 0; trial < 200; ++trial) {
        CategoryPath cat{{phrase(1 + rng() % 4), phrase(1 + rng() % 6), phrase(1 + rng() % 12)}};
        SelectedFeatures sel;
        sel.section = phrase(1 + rng() % 8);
        sel.pseudo_query = phrase(1 + rng() % 10);
        for (std::size_t k = rng() % 6; k > 0; --k) {
            sel.keywords.push_back(phrase(1 + rng() % 3));
        }
        const auto f2 = build_representation(RepresentationForm::Category, "d", cat, sel);
        const auto f3 = build_representation(RepresentationForm::CategorySection, "d", cat, sel);
        const auto f4 = build_representation(RepresentationForm::CategorySectionKeywords, "d", cat, sel);
        CHECK(f2.token_estimate <= f3.token_estimate);
        CHECK(f3.token_estimate <= f4.token_estimate);
        CHECK(f4 == build_representation(RepresentationForm::CategorySectionKeywords, "d", cat, sel));
    }
}

TEST_CASE("form names")
{
    CHECK(parse_form("4") == RepresentationForm::CategorySectionKeywords);
    CHECK(parse_form("category_section") == RepresentationForm::CategorySection);
    CHECK(form_name(RepresentationForm::PseudoQuery) == "pseudo_query");
    CHECK_THROWS_AS((void)parse_form("5"), ConfigError);
}
