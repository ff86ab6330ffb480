#include <doctest.h>

#include <set>

#include "sqlfit/budget.hpp"
#include "support.hpp"

using namespace sqlfit;

namespace {

// A two-column department schema, matching the canonical linearization
// example.
DatabaseSchema tiny_department() {
    json rec = json::parse(R"({
        "db_id": "tiny",
        "table_names": ["department"], "table_names_original": ["department"],
        "column_names": [[-1, "*"], [0, "budget in billions"], [0, "num employees"]],
        "column_names_original": [[-1, "*"], [0, "budget_in_billions"], [0, "num_employees"]],
        "column_types": ["text", "number", "number"],
        "primary_keys": [], "foreign_keys": []
    })");
    return parse_schema_catalog(json::array({rec}), "inline").databases[0];
}

std::set<std::size_t> rejected_set(const BudgetReport& report) {
    std::set<std::size_t> out;
    for (const BudgetEntry& e : report.entries)
        if (!e.fits) out.insert(e.example_index);
    return out;
}

}  // namespace

TEST_CASE("linearization follows the canonical serialization") {
    DatabaseSchema dept = tiny_department();
    CHECK(linearize("q", dept) == "q | department : budget_in_billions , num_employees");
    CHECK(linearize("", dept) == "department : budget_in_billions , num_employees");

    DatabaseSchema empty;
    CHECK(linearize("", empty) == "");
    CHECK(linearize("only the question", empty) == "only the question");

    // Table blocks are joined by exactly one delimiter per boundary.
    const DatabaseSchema& gov = fixture_catalog().at("government");
    std::string text = linearize("", gov);
    std::size_t delims = 0;
    for (std::size_t p = text.find(" | "); p != std::string::npos; p = text.find(" | ", p + 1))
        ++delims;
    CHECK(delims == gov.tables.size() - 1);
    CHECK(text.find("*") == std::string::npos);  // star column never serialized
}

TEST_CASE("approximate tokenizer applies the ceil(len/4) word rule") {
    ApproximateTokenizer tok;
    CHECK(tok.count("") == 0);
    CHECK(tok.count("abcdefgh") == 2);
    CHECK(tok.count("abc") == 1);
    CHECK(tok.count("abcd efgh") == 2);
    CHECK(tok.count("a , b") == 3);  // punctuation costs one token apiece
    CHECK(tok.count("q | department : budget_in_billions , num_employees") == 16);
    CHECK(tok.count("   \t\n  ") == 0);
    // Non-ASCII text groups into words by codepoint count.
    CHECK(tok.count("são") == 1);       // 3 codepoints
    CHECK(tok.count("orçamentos") == 3);  // 10 codepoints
}

TEST_CASE("token counts never shrink when text is appended") {
    ApproximateTokenizer tok;
    const DatabaseSchema& gov = fixture_catalog().at("government");
    std::string schema_part = linearize("", gov);
    for (const char* q : {"What is the budget?", "", "¿Cuál es el presupuesto máximo?"}) {
        std::string joined = linearize(q, gov);
        CHECK(tok.count(joined) >= tok.count(schema_part));
        CHECK(tok.count(joined) >= tok.count(q));
    }
}

TEST_CASE("vocabulary tokenizer greedily prefers the longest entry") {
    VocabularyTokenizer tok = VocabularyTokenizer::from_file(data_path("vocab.txt"));
    CHECK(tok.vocabulary_size() > 0);
    CHECK(tok.count("") == 0);
    CHECK(tok.count("department : budget_in_billions") == 7);
    // "department" is one entry; its pieces "depart" + "ment" would be two.
    CHECK(tok.count("department") == 1);
    CHECK(tok.count("departments") == 2);  // "department" + "s"
    // Matching is case-sensitive; unknown codepoints cost one token each.
    CHECK(tok.count("Department") == 1 + tok.count("epartment"));
    CHECK(tok.count("ção") == 3);  // no entry covers these, one per codepoint
}

TEST_CASE("vocabulary construction rejects unusable inputs") {
    CHECK_THROWS_AS(VocabularyTokenizer::from_file("/nonexistent/vocab.txt"), ConfigError);
    CHECK_THROWS_AS(VocabularyTokenizer(std::vector<std::string>{}), ConfigError);
    CHECK_THROWS_AS(VocabularyTokenizer(std::vector<std::string>{"", ""}), ConfigError);
}

TEST_CASE("tokenizer specs build the right backend") {
    CHECK(make_tokenizer("approximate")->name() == "approximate");
    CHECK(make_tokenizer("vocabulary:" + data_path("vocab.txt"))->name() == "vocabulary");
    CHECK_THROWS_AS(make_tokenizer("huggingface"), ConfigError);
    CHECK_THROWS_AS(make_tokenizer("vocabulary:"), ConfigError);
}

TEST_CASE("classification splits the fixture corpus at the expected limits") {
    ApproximateTokenizer tok;
    const auto& cat = fixture_catalog();
    const auto& ex = fixture_examples();

    BudgetReport at512 = classify_examples(ex, cat, {512}, tok);
    CHECK(at512.used + at512.rejected == ex.size());
    CHECK(at512.rejected == 6);
    CHECK(at512.overflow_by_db ==
          std::map<std::string, std::size_t>{{"warehouse_wide", 5}, {"vault_wide", 1}});
    CHECK(at512.overflow_databases() ==
          std::vector<std::string>{"vault_wide", "warehouse_wide"});

    BudgetReport at2048 = classify_examples(ex, cat, {2048}, tok);
    CHECK(at2048.rejected == 1);
    CHECK(at2048.overflow_by_db == std::map<std::string, std::size_t>{{"vault_wide", 1}});

    // Entries stay in example order and reconcile with the totals.
    std::size_t rejected = 0;
    for (std::size_t i = 0; i < at512.entries.size(); ++i) {
        CHECK(at512.entries[i].example_index == i);
        if (!at512.entries[i].fits) ++rejected;
    }
    CHECK(rejected == at512.rejected);
}

TEST_CASE("raising the limit never rejects new examples") {
    ApproximateTokenizer tok;
    const auto& cat = fixture_catalog();
    const auto& ex = fixture_examples();
    std::set<std::size_t> previous;
    bool first = true;
    for (std::size_t limit : {2048, 1024, 512, 256, 128}) {
        std::set<std::size_t> rejected = rejected_set(classify_examples(ex, cat, {limit}, tok));
        if (!first) {
            // Lower limit: rejected set must contain everything above it.
            for (std::size_t i : previous) CHECK(rejected.count(i) == 1);
        }
        previous = rejected;
        first = false;
    }
}

TEST_CASE("classification is identical under a worker pool") {
    ApproximateTokenizer tok;
    BudgetReport serial = classify_examples(fixture_examples(), fixture_catalog(), {512}, tok, 1);
    BudgetReport pooled = classify_examples(fixture_examples(), fixture_catalog(), {512}, tok, 4);
    REQUIRE(serial.entries.size() == pooled.entries.size());
    for (std::size_t i = 0; i < serial.entries.size(); ++i) {
        CHECK(serial.entries[i].tokens == pooled.entries[i].tokens);
        CHECK(serial.entries[i].fits == pooled.entries[i].fits);
    }
}

TEST_CASE("a zero budget limit is a configuration error") {
    ApproximateTokenizer tok;
    CHECK_THROWS_AS(classify_examples(fixture_examples(), fixture_catalog(), {0}, tok),
                    ConfigError);
}
