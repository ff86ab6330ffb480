#include <doctest.h>

#include "sqlfit/polyglot.hpp"
#include "support.hpp"

using namespace sqlfit;

namespace {

ExampleSet load_merge_set(const std::string& file, const std::string& language) {
    return load_examples(data_path(file), fixture_catalog(), language);
}

TranslationVariant variant(const std::string& language) {
    return {language, load_merge_set("merge_" + language + ".json", language)};
}

std::vector<TranslationVariant> all_variants() {
    return {variant("pt"), variant("es"), variant("fr")};
}

}  // namespace

TEST_CASE("the shipped translation fixtures align with the base set") {
    ExampleSet base = load_merge_set("merge_base_en.json", "en");
    REQUIRE(base.size() == 10);
    for (const TranslationVariant& v : all_variants()) {
        AlignmentReport report = align_translations(base, v);
        CHECK(report.language == v.language);
        CHECK(report.aligned());
    }
}

TEST_CASE("alignment reports every disagreement without throwing") {
    ExampleSet base = load_merge_set("merge_base_en.json", "en");
    TranslationVariant v = variant("pt");
    v.examples.examples[2].query = "SELECT name FROM department";
    v.examples.examples[7].db_id = "government";

    AlignmentReport report = align_translations(base, v);
    REQUIRE(report.mismatches.size() == 2);
    CHECK(report.mismatches[0].index == 2);
    CHECK(report.mismatches[0].kind == AlignmentMismatch::Kind::query_mismatch);
    CHECK(report.mismatches[1].index == 7);
    CHECK(report.mismatches[1].kind == AlignmentMismatch::Kind::db_id_mismatch);
    CHECK(report.mismatches[0].detail.find("SELECT name FROM department") !=
          std::string::npos);
}

TEST_CASE("length differences surface as missing or surplus entries") {
    ExampleSet base = load_merge_set("merge_base_en.json", "en");

    TranslationVariant short_v = variant("es");
    short_v.examples.examples.resize(8);
    AlignmentReport missing = align_translations(base, short_v);
    REQUIRE(missing.mismatches.size() == 2);
    CHECK(missing.mismatches[0].index == 8);
    CHECK(missing.mismatches[0].kind == AlignmentMismatch::Kind::missing_entry);
    CHECK(missing.mismatches[1].index == 9);

    TranslationVariant long_v = variant("es");
    long_v.examples.examples.push_back(long_v.examples.examples.back());
    AlignmentReport surplus = align_translations(base, long_v);
    REQUIRE(surplus.mismatches.size() == 1);
    CHECK(surplus.mismatches[0].index == 10);
    CHECK(surplus.mismatches[0].kind == AlignmentMismatch::Kind::surplus_entry);
}

TEST_CASE("merging produces base-then-variant blocks with language tags intact") {
    ExampleSet base = load_merge_set("merge_base_en.json", "en");
    ExampleSet merged = merge_multilingual(base, all_variants());

    REQUIRE(merged.size() == 40);  // 10 * (1 + 3)
    auto langs = merged.language_composition();
    CHECK(langs == std::map<std::string, std::size_t>{
                       {"en", 10}, {"es", 10}, {"fr", 10}, {"pt", 10}});

    // Block layout: base first, then variants in argument order.
    CHECK(merged.examples[0].language == "en");
    CHECK(merged.examples[10].language == "pt");
    CHECK(merged.examples[20].language == "es");
    CHECK(merged.examples[30].language == "fr");

    // Every merged record carries its gold query and db_id unchanged.
    for (std::size_t i = 0; i < 40; ++i) {
        CHECK(merged.examples[i].query == base.examples[i % 10].query);
        CHECK(merged.examples[i].db_id == base.examples[i % 10].db_id);
    }

    // The merged records persist with an explicit lang field.
    json doc = to_json(merged);
    CHECK(doc[0].at("lang") == "en");
    CHECK(doc[10].at("lang") == "pt");
}

TEST_CASE("filtering the merged set by language recovers each input in order") {
    ExampleSet base = load_merge_set("merge_base_en.json", "en");
    std::vector<TranslationVariant> variants = all_variants();
    ExampleSet merged = merge_multilingual(base, variants);

    ExampleSet back = merged.filter_language("en");
    REQUIRE(back.size() == base.size());
    for (std::size_t i = 0; i < base.size(); ++i)
        CHECK(back.examples[i].question == base.examples[i].question);

    for (const TranslationVariant& v : variants) {
        ExampleSet slice = merged.filter_language(v.language);
        REQUIRE(slice.size() == v.examples.size());
        for (std::size_t i = 0; i < slice.size(); ++i)
            CHECK(slice.examples[i].question == v.examples.examples[i].question);
    }
}

TEST_CASE("a misaligned variant makes the merge refuse with a citation") {
    ExampleSet base = load_merge_set("merge_base_en.json", "en");
    std::vector<TranslationVariant> variants = all_variants();
    variants[1].examples.examples[4].query = "SELECT 1";

    try {
        merge_multilingual(base, variants);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        std::string msg = e.what();
        CHECK(msg.find("'es'") != std::string::npos);
        CHECK(msg.find("index 4") != std::string::npos);
        CHECK(msg.find("1 mismatch") != std::string::npos);
    }
}

TEST_CASE("merging with no variants copies the base") {
    ExampleSet base = load_merge_set("merge_base_en.json", "en");
    ExampleSet merged = merge_multilingual(base, {});
    REQUIRE(merged.size() == base.size());
    for (std::size_t i = 0; i < base.size(); ++i)
        CHECK(merged.examples[i].equivalent(base.examples[i]));
}

TEST_CASE("translated questions survive the merge byte for byte") {
    // The Portuguese rendering of the budget question from the base set.
    ExampleSet base = load_merge_set("merge_base_en.json", "en");
    ExampleSet merged = merge_multilingual(base, all_variants());
    CHECK(merged.examples[0].question ==
          "What are the maximum and minimum budgets of the departments?");
    CHECK(merged.examples[10].question ==
          "Quais são os orçamentos máximo e mínimo dos departamentos?");
}
