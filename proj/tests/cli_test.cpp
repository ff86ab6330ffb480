#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sqlfit/cli.hpp"
#include "sqlfit/corpus.hpp"
#include "support.hpp"

using namespace sqlfit;

namespace {

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::main_entry(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) { return read_text_file(path); }

}  // namespace

TEST_CASE("help is available and lists every command") {
    CliResult top = run_cli({"--help"});
    CHECK(top.code == 0);
    for (const char* name :
         {"validate", "analyze-budget", "prune", "merge", "evaluate", "report"})
        CHECK(top.out.find(name) != std::string::npos);

    CliResult sub = run_cli({"prune", "--help"});
    CHECK(sub.code == 0);
    CHECK(sub.out.find("--star-policy") != std::string::npos);
}

TEST_CASE("bad invocations exit with the usage code and a diagnostic") {
    CHECK(run_cli({}).code == 1);
    CHECK(run_cli({"frobnicate"}).code == 1);

    CliResult missing = run_cli({"analyze-budget", "--limit", "512"});
    CHECK(missing.code == 1);
    CHECK(missing.err.find("--schemas") != std::string::npos);

    CliResult badflag = run_cli({"validate", "--schemas", data_path("tables.json"),
                                 "--examples", data_path("train_en.json"), "--frotz"});
    CHECK(badflag.code == 1);
}

TEST_CASE("analyze-budget writes the report and renders the drop table") {
    TempDir dir;
    CliResult r = run_cli({"analyze-budget", "--schemas", data_path("tables.json"),
                           "--examples", data_path("train_en.json"), "--limit", "512",
                           "--out", dir.path.string()});
    CHECK(r.code == 0);
    CHECK(r.err.empty());
    CHECK(r.out.find("token budget 512") != std::string::npos);
    CHECK(r.out.find("over budget 6") != std::string::npos);
    CHECK(r.out.find("warehouse_wide") != std::string::npos);

    json doc = load_json_file(dir.file("budget_report.json"));
    CHECK(doc.at("kind") == "budget");
    CHECK(doc.at("total") == 70);
    CHECK(doc.at("fits") == 64);
    CHECK(doc.at("over_budget") == 6);
    CHECK(doc.at("overflow_by_database").at("warehouse_wide") == 5);
    CHECK(doc.at("overflow_by_database").at("vault_wide") == 1);
    CHECK(doc.at("entries").size() == 70);
}

TEST_CASE("identical runs produce byte-identical machine reports") {
    TempDir a, b;
    std::vector<std::string> base = {"analyze-budget", "--schemas", data_path("tables.json"),
                                     "--examples", data_path("train_en.json"), "--limit", "512"};
    std::vector<std::string> first = base, second = base;
    first.insert(first.end(), {"--out", a.path.string()});
    second.insert(second.end(), {"--out", b.path.string(), "--jobs", "4"});
    REQUIRE(run_cli(first).code == 0);
    REQUIRE(run_cli(second).code == 0);
    CHECK(slurp(a.file("budget_report.json")) == slurp(b.file("budget_report.json")));
}

TEST_CASE("json format prints only the document") {
    TempDir dir;
    CliResult r = run_cli({"analyze-budget", "--schemas", data_path("tables.json"),
                           "--examples", data_path("train_en.json"), "--format", "json",
                           "--out", dir.path.string()});
    CHECK(r.code == 0);
    json doc = json::parse(r.out);
    CHECK(doc.at("kind") == "budget");
}

TEST_CASE("the margin flag narrows the effective budget") {
    TempDir dir;
    CliResult r = run_cli({"analyze-budget", "--schemas", data_path("tables.json"),
                           "--examples", data_path("train_en.json"), "--limit", "512",
                           "--margin", "100", "--out", dir.path.string()});
    CHECK(r.code == 0);
    json doc = load_json_file(dir.file("budget_report.json"));
    CHECK(doc.at("effective_limit") == 412);
    CHECK(r.out.find("margin 100") != std::string::npos);

    CliResult swallowed = run_cli({"analyze-budget", "--schemas", data_path("tables.json"),
                                   "--examples", data_path("train_en.json"), "--limit", "512",
                                   "--margin", "512", "--out", dir.path.string()});
    CHECK(swallowed.code == 2);
    CHECK(swallowed.err.find("margin") != std::string::npos);
}

TEST_CASE("the vocabulary tokenizer is selected through flags") {
    TempDir dir;
    CliResult bare = run_cli({"analyze-budget", "--schemas", data_path("tables.json"),
                              "--examples", data_path("train_en.json"), "--tokenizer",
                              "vocabulary", "--out", dir.path.string()});
    CHECK(bare.code == 1);
    CHECK(bare.err.find("--vocab") != std::string::npos);

    CliResult r = run_cli({"analyze-budget", "--schemas", data_path("tables.json"),
                           "--examples", data_path("train_en.json"), "--tokenizer", "vocabulary",
                           "--vocab", data_path("vocab.txt"), "--out", dir.path.string()});
    CHECK(r.code == 0);
    json doc = load_json_file(dir.file("budget_report.json"));
    CHECK(doc.at("tokenizer") == "vocabulary");
}

TEST_CASE("prune writes the FIT corpus next to its report") {
    TempDir dir;
    CliResult r = run_cli({"prune", "--schemas", data_path("tables.json"), "--examples",
                           data_path("train_en.json"), "--limit", "512", "--out",
                           dir.path.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("72 -> 16") != std::string::npos);
    CHECK(r.out.find("still over") != std::string::npos);  // the fully starred vault

    SchemaCatalog fit = load_schema_catalog(dir.file("fit_tables.json"));
    CHECK(fit.size() == 6);
    CHECK(fit.at("warehouse_wide").table_count() == 2);
    ExampleSet examples = load_examples(dir.file("fit_examples.json"), fit, "en");
    CHECK(examples.size() == 70);
    CHECK(validate_corpus(fit, examples).clean());

    json doc = load_json_file(dir.file("prune_report.json"));
    CHECK(doc.at("kind") == "prune");
    CHECK(doc.at("databases").size() == 2);
    CHECK(doc.at("examples_remapped") == 6);

    // A second pass over the FIT corpus finds nothing left to shrink.
    TempDir again;
    CliResult r2 = run_cli({"prune", "--schemas", dir.file("fit_tables.json"), "--examples",
                            dir.file("fit_examples.json"), "--limit", "512", "--out",
                            again.path.string()});
    CHECK(r2.code == 0);
    json doc2 = load_json_file(again.file("prune_report.json"));
    for (const json& db : doc2.at("databases")) {
        CHECK(db.at("db_id") == "vault_wide");  // unshrinkable, still flagged
        CHECK(db.at("tables_before") == db.at("tables_after"));
    }
}

TEST_CASE("validate reports clean fixtures and rejects corrupted ones") {
    TempDir dir;
    CliResult clean = run_cli({"validate", "--schemas", data_path("tables.json"), "--examples",
                               data_path("train_en.json"), "--out", dir.path.string()});
    CHECK(clean.code == 0);
    CHECK(clean.out.find("70 gold queries parse") != std::string::npos);
    CHECK(clean.out.find("clean") != std::string::npos);

    json broken = json::array();
    broken.push_back({{"db_id", "scratch"},
                      {"question", "who?"},
                      {"query", "SELECT nonexistent FROM t"}});
    write_json_file_atomic(dir.file("broken.json"), broken);
    CliResult bad = run_cli({"validate", "--schemas", data_path("tables.json"), "--examples",
                             dir.file("broken.json"), "--out", dir.path.string()});
    CHECK(bad.code == 2);
    CHECK(bad.out.find("query_parse_failure") != std::string::npos);
    json doc = load_json_file(dir.file("validation_report.json"));
    CHECK(doc.at("files").at(0).at("defects").size() == 1);
}

TEST_CASE("merge combines the quad fixtures and refuses misalignment") {
    TempDir dir;
    CliResult r = run_cli({"merge", "--schemas", data_path("tables.json"), "--base",
                           data_path("merge_base_en.json"), "--lang", "en", "--variant",
                           "pt=" + data_path("merge_pt.json"), "--variant",
                           "es=" + data_path("merge_es.json"), "--variant",
                           "fr=" + data_path("merge_fr.json"), "--out", dir.path.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("merged 40 example(s)") != std::string::npos);
    json merged = load_json_file(dir.file("merged_examples.json"));
    REQUIRE(merged.size() == 40);
    CHECK(merged.at(0).at("lang") == "en");
    CHECK(merged.at(10).at("lang") == "pt");

    json tampered = load_json_file(data_path("merge_pt.json"));
    tampered.at(3)["query"] = "SELECT name FROM department";
    write_json_file_atomic(dir.file("tampered_pt.json"), tampered);
    CliResult bad = run_cli({"merge", "--schemas", data_path("tables.json"), "--base",
                             data_path("merge_base_en.json"), "--variant",
                             "pt=" + dir.file("tampered_pt.json"), "--out", dir.path.string()});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("misaligned") != std::string::npos);

    CliResult badspec = run_cli({"merge", "--schemas", data_path("tables.json"), "--base",
                                 data_path("merge_base_en.json"), "--variant", "no-separator",
                                 "--out", dir.path.string()});
    CHECK(badspec.code == 1);
}

TEST_CASE("evaluate renders the per-difficulty table") {
    TempDir dir;
    CliResult r = run_cli({"evaluate", "--schemas", data_path("tables.json"), "--gold",
                           data_path("merge_base_en.json"), "--pred", data_path("preds_gold.sql"),
                           "--out", dir.path.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("exact set match") != std::string::npos);
    CHECK(r.out.find("1.000") != std::string::npos);
    json doc = load_json_file(dir.file("eval_report.json"));
    CHECK(doc.at("kind") == "eval");
    CHECK(doc.at("overall") == 1.0);
    CHECK(doc.at("by_difficulty").at("easy").at("count") == 8);
    CHECK(doc.at("by_difficulty").at("medium").at("count") == 2);

    write_text_file_atomic(dir.file("short.sql"), "SELECT name FROM singer\n");
    CliResult mismatch = run_cli({"evaluate", "--schemas", data_path("tables.json"), "--gold",
                                  data_path("merge_base_en.json"), "--pred", dir.file("short.sql"),
                                  "--out", dir.path.string()});
    CHECK(mismatch.code == 1);
}

TEST_CASE("report renders any machine report it is handed") {
    TempDir dir;
    REQUIRE(run_cli({"analyze-budget", "--schemas", data_path("tables.json"), "--examples",
                     data_path("train_en.json"), "--out", dir.path.string()})
                .code == 0);
    CliResult r = run_cli({"report", "--input", dir.file("budget_report.json")});
    CHECK(r.code == 0);
    CHECK(r.out.find("token budget 512") != std::string::npos);

    write_json_file_atomic(dir.file("odd.json"), json{{"kind", "mystery"}});
    CHECK(run_cli({"report", "--input", dir.file("odd.json")}).code == 2);
    CHECK(run_cli({"report", "--input", dir.file("absent.json")}).code == 3);
}

TEST_CASE("the output directory falls back to the environment") {
    TempDir dir;
    setenv("SQLFIT_OUTPUT_DIR", dir.path.string().c_str(), 1);
    cli::RunConfig cfg = cli::parse_args({"analyze-budget", "--schemas", "s.json", "--examples",
                                          "e.json"});
    unsetenv("SQLFIT_OUTPUT_DIR");
    CHECK(cfg.output_dir == dir.path.string());
    CHECK(cfg.command == "analyze-budget");

    cli::RunConfig flag = cli::parse_args({"analyze-budget", "--schemas", "s.json", "--examples",
                                           "e.json", "--out", "elsewhere"});
    CHECK(flag.output_dir == "elsewhere");
}

TEST_CASE("a failed run leaves no partial artifacts behind") {
    TempDir dir;
    CliResult r = run_cli({"analyze-budget", "--schemas", data_path("tables.json"), "--examples",
                           dir.file("missing.json"), "--out", dir.path.string()});
    CHECK(r.code == 3);
    CHECK(!std::filesystem::exists(dir.file("budget_report.json")));
    CHECK(!std::filesystem::exists(dir.file("budget_report.json.tmp")));
}
