#include "sqlfit/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iomanip>

#include "sqlfit/budget.hpp"
#include "sqlfit/corpus.hpp"
#include "sqlfit/errors.hpp"
#include "sqlfit/matcheval.hpp"
#include "sqlfit/polyglot.hpp"
#include "sqlfit/pruner.hpp"

namespace sqlfit::cli {

namespace {

namespace fs = std::filesystem;

std::string out_path(const RunConfig& cfg, const std::string& name) {
    return (fs::path(cfg.output_dir) / name).string();
}

std::unique_ptr<Tokenizer> build_tokenizer(const RunConfig& cfg) {
    if (cfg.tokenizer == "vocabulary") {
        if (cfg.vocabulary_path.empty())
            throw UsageError("--tokenizer vocabulary requires --vocab <file>");
        return make_tokenizer("vocabulary:" + cfg.vocabulary_path);
    }
    return make_tokenizer(cfg.tokenizer);
}

TokenBudget effective_budget(const RunConfig& cfg) {
    if (cfg.margin >= cfg.limit)
        throw ConfigError("margin " + std::to_string(cfg.margin) +
                          " leaves no room under limit " + std::to_string(cfg.limit));
    return TokenBudget{cfg.limit - cfg.margin};
}

// ------------------------------------------------------- machine reports

const char* entry_kind_name(ValidationEntry::Kind kind) {
    switch (kind) {
        case ValidationEntry::Kind::unresolved_db: return "unresolved_db";
        case ValidationEntry::Kind::index_out_of_range: return "index_out_of_range";
        case ValidationEntry::Kind::query_parse_failure: return "query_parse_failure";
    }
    return "?";
}

json budget_report_json(const BudgetReport& report, const RunConfig& cfg) {
    json doc;
    doc["kind"] = "budget";
    doc["limit"] = cfg.limit;
    doc["margin"] = cfg.margin;
    doc["effective_limit"] = report.budget.limit;
    doc["tokenizer"] = report.tokenizer_name;
    doc["total"] = report.entries.size();
    doc["fits"] = report.used;
    doc["over_budget"] = report.rejected;
    json by_db = json::object();
    for (const auto& [db_id, count] : report.overflow_by_db) by_db[db_id] = count;
    doc["overflow_by_database"] = by_db;
    json entries = json::array();
    for (const BudgetEntry& e : report.entries)
        entries.push_back({{"index", e.example_index},
                           {"db_id", e.db_id},
                           {"tokens", e.tokens},
                           {"fits", e.fits}});
    doc["entries"] = entries;
    return doc;
}

json prune_report_json(const PruneReport& report) {
    json doc;
    doc["kind"] = "prune";
    doc["limit"] = report.budget.limit;
    doc["tokenizer"] = report.tokenizer_name;
    doc["examples_remapped"] = report.examples_remapped;
    json databases = json::array();
    for (const PrunedDatabase& db : report.databases) {
        json row;
        row["db_id"] = db.db_id;
        row["tables_before"] = db.tables_before;
        row["tables_after"] = db.tables_after;
        row["columns_before"] = db.columns_before;
        row["columns_after"] = db.columns_after;
        row["deleted_tables"] = db.deleted_tables;
        row["deleted_columns"] = db.deleted_columns;
        row["dropped_foreign_keys"] = db.dropped_foreign_keys;
        row["overflow_before"] = db.overflow_before;
        row["overflow_after"] = db.overflow_after;
        row["residual_overflow"] = db.residual_overflow;
        databases.push_back(row);
    }
    doc["databases"] = databases;
    return doc;
}

json eval_report_json(const EvalReport& report) {
    json doc;
    doc["kind"] = "eval";
    doc["total"] = report.all.count;
    doc["matched"] = report.all.matched;
    doc["overall"] = report.all.rate();
    json buckets = json::object();
    for (DifficultyLevel level : {DifficultyLevel::easy, DifficultyLevel::medium,
                                  DifficultyLevel::hard, DifficultyLevel::extra}) {
        const EvalReport::Bucket& b = report.bucket(level);
        buckets[to_string(level)] = {
            {"count", b.count}, {"matched", b.matched}, {"rate", b.rate()}};
    }
    doc["by_difficulty"] = buckets;
    json verdicts = json::array();
    for (const ExampleVerdict& v : report.verdicts) {
        json row;
        row["index"] = v.index;
        row["difficulty"] = to_string(v.difficulty);
        row["matched"] = v.matched;
        if (!v.error.empty()) row["error"] = v.error;
        verdicts.push_back(row);
    }
    doc["verdicts"] = verdicts;
    return doc;
}

// ---------------------------------------------------------- human tables

std::string rate3(double rate) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.3f", rate);
    return buf;
}

std::string arrow(const json& row, const char* before, const char* after) {
    return row.at(before).dump() + " -> " + row.at(after).dump();
}

void render_budget(const json& doc, std::ostream& out) {
    out << "token budget " << doc.at("limit").get<std::size_t>();
    if (std::size_t margin = doc.value("margin", std::size_t{0}); margin > 0)
        out << " (margin " << margin << ", effective "
            << doc.at("effective_limit").get<std::size_t>() << ")";
    out << ", tokenizer " << doc.at("tokenizer").get<std::string>() << "\n";
    out << "fits " << doc.at("fits") << " | over budget " << doc.at("over_budget")
        << " | total " << doc.at("total") << "\n";

    const json& by_db = doc.at("overflow_by_database");
    if (by_db.empty()) {
        out << "every example fits the budget\n";
        return;
    }
    std::vector<std::pair<std::string, std::size_t>> rows;
    for (auto it = by_db.begin(); it != by_db.end(); ++it)
        rows.emplace_back(it.key(), it.value().get<std::size_t>());
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    std::size_t width = std::string("database").size();
    for (const auto& [db_id, count] : rows) width = std::max(width, db_id.size());
    out << "\n  " << std::left << std::setw(static_cast<int>(width)) << "database"
        << "  over budget\n";
    for (const auto& [db_id, count] : rows)
        out << "  " << std::left << std::setw(static_cast<int>(width)) << db_id << "  " << count
            << "\n";
}

void render_prune(const json& doc, std::ostream& out) {
    out << "schema pruning, budget " << doc.at("limit").get<std::size_t>() << ", tokenizer "
        << doc.at("tokenizer").get<std::string>() << "\n";
    const json& databases = doc.at("databases");
    if (databases.empty()) {
        out << "no database needed pruning\n";
        return;
    }
    std::vector<std::array<std::string, 5>> rows;
    rows.push_back({"database", "tables", "columns", "dropped fks", "over budget"});
    std::size_t residual = 0;
    for (const json& db : databases) {
        std::string overflow = arrow(db, "overflow_before", "overflow_after");
        if (db.at("residual_overflow").get<bool>()) {
            overflow += "  (still over)";
            ++residual;
        }
        rows.push_back({db.at("db_id").get<std::string>(), arrow(db, "tables_before", "tables_after"),
                        arrow(db, "columns_before", "columns_after"),
                        db.at("dropped_foreign_keys").dump(), overflow});
    }
    std::array<std::size_t, 5> widths{};
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
    for (const auto& row : rows) {
        out << " ";
        for (std::size_t c = 0; c < row.size(); ++c)
            out << "  " << std::left << std::setw(static_cast<int>(widths[c])) << row[c];
        out << "\n";
    }
    out << "remapped " << doc.at("examples_remapped") << " example(s)";
    if (residual > 0) out << "; " << residual << " database(s) still over budget";
    out << "\n";
}

void render_eval(const json& doc, std::ostream& out) {
    out << "exact set match without values\n";
    const json& buckets = doc.at("by_difficulty");
    out << std::left << std::setw(8) << "" << std::right;
    for (const char* name : {"easy", "medium", "hard", "extra", "all"})
        out << std::setw(8) << name;
    out << "\n" << std::left << std::setw(8) << "  count" << std::right;
    for (const char* name : {"easy", "medium", "hard", "extra"})
        out << std::setw(8) << buckets.at(name).at("count").dump();
    out << std::setw(8) << doc.at("total").dump();
    out << "\n" << std::left << std::setw(8) << "  match" << std::right;
    for (const char* name : {"easy", "medium", "hard", "extra"}) {
        const json& b = buckets.at(name);
        bool empty = b.at("count").get<std::size_t>() == 0;
        out << std::setw(8) << (empty ? "-" : rate3(b.at("rate").get<double>()));
    }
    bool empty = doc.at("total").get<std::size_t>() == 0;
    out << std::setw(8) << (empty ? "-" : rate3(doc.at("overall").get<double>())) << "\n";
}

void render_validation(const json& doc, std::ostream& out) {
    for (const json& file : doc.at("files")) {
        out << file.at("path").get<std::string>() << ": ";
        if (file.contains("load_error")) {
            out << "failed to load: " << file.at("load_error").get<std::string>() << "\n";
            continue;
        }
        out << file.at("examples_checked") << " example(s) checked, " << file.at("queries_parsed")
            << " gold queries parse";
        const json& defects = file.at("defects");
        if (defects.empty()) {
            out << "; clean\n";
            continue;
        }
        out << "; " << defects.size() << " defect(s)\n";
        for (const json& d : defects)
            out << "  example " << d.at("example_index") << " [" << d.at("db_id").get<std::string>()
                << "] " << d.at("kind").get<std::string>() << ": "
                << d.at("detail").get<std::string>() << "\n";
    }
}

void render_report(const json& doc, std::ostream& out) {
    if (!doc.is_object() || !doc.contains("kind") || !doc.at("kind").is_string())
        throw ValidationError("report file has no 'kind' field");
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "budget") return render_budget(doc, out);
    if (kind == "prune") return render_prune(doc, out);
    if (kind == "eval") return render_eval(doc, out);
    if (kind == "validation") return render_validation(doc, out);
    throw ValidationError("unknown report kind '" + kind + "'");
}

// Renders to stdout per --format and records the artifact on disk. In json
// mode stdout carries nothing but the document, so it can be piped.
void emit(const RunConfig& cfg, const json& doc, const std::string& artifact, std::ostream& out) {
    write_json_file_atomic(out_path(cfg, artifact), doc);
    if (cfg.format == "json") {
        out << doc.dump(2) << "\n";
    } else {
        render_report(doc, out);
        out << "wrote " << out_path(cfg, artifact) << "\n";
    }
}

// --------------------------------------------------------------- commands

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
    SchemaCatalog catalog = load_schema_catalog(cfg.schemas_path);
    json files = json::array();
    bool clean = true;
    for (const std::string& path : cfg.example_paths) {
        json row;
        row["path"] = path;
        try {
            ExampleSet set = load_examples(path, catalog, cfg.language);
            ValidationReport report = validate_corpus(catalog, set, cfg.jobs);
            row["examples_checked"] = report.examples_checked;
            row["queries_parsed"] = report.queries_parsed;
            json defects = json::array();
            for (const ValidationEntry& e : report.entries)
                defects.push_back({{"example_index", e.example_index},
                                   {"db_id", e.db_id},
                                   {"kind", entry_kind_name(e.kind)},
                                   {"detail", e.detail}});
            row["defects"] = defects;
            if (!report.clean()) clean = false;
        } catch (const Error& e) {
            row["load_error"] = e.what();
            clean = false;
        }
        files.push_back(row);
    }
    json doc;
    doc["kind"] = "validation";
    doc["files"] = files;
    emit(cfg, doc, "validation_report.json", out);
    return clean ? 0 : 2;
}

int cmd_analyze_budget(const RunConfig& cfg, std::ostream& out) {
    SchemaCatalog catalog = load_schema_catalog(cfg.schemas_path);
    ExampleSet examples = load_examples(cfg.examples_path, catalog, cfg.language);
    std::unique_ptr<Tokenizer> tokenizer = build_tokenizer(cfg);
    BudgetReport report =
        classify_examples(examples, catalog, effective_budget(cfg), *tokenizer, cfg.jobs);
    emit(cfg, budget_report_json(report, cfg), "budget_report.json", out);
    return 0;
}

int cmd_prune(const RunConfig& cfg, std::ostream& out) {
    SchemaCatalog catalog = load_schema_catalog(cfg.schemas_path);
    ExampleSet examples = load_examples(cfg.examples_path, catalog, cfg.language);
    std::unique_ptr<Tokenizer> tokenizer = build_tokenizer(cfg);
    RetentionPolicy policy;
    policy.keep_primary_keys = !cfg.drop_primary_keys;
    policy.keep_foreign_keys_between_retained_tables = !cfg.drop_foreign_keys;
    policy.star_policy = cfg.star_policy == "columns-only"
                             ? RetentionPolicy::StarPolicy::columns_only
                             : RetentionPolicy::StarPolicy::keep_all_columns_of_star_tables;
    FitResult fit = emit_fit_corpus(catalog, examples, effective_budget(cfg), *tokenizer, policy,
                                    cfg.prune_all, cfg.jobs);
    persist(fit.catalog, out_path(cfg, "fit_tables.json"));
    persist(fit.examples, out_path(cfg, "fit_examples.json"));
    if (cfg.format != "json")
        out << "wrote " << out_path(cfg, "fit_tables.json") << "\n"
            << "wrote " << out_path(cfg, "fit_examples.json") << "\n";
    emit(cfg, prune_report_json(fit.report), "prune_report.json", out);
    return 0;
}

int cmd_merge(const RunConfig& cfg, std::ostream& out) {
    SchemaCatalog catalog = load_schema_catalog(cfg.schemas_path);
    ExampleSet base = load_examples(cfg.base_path, catalog, cfg.language);
    std::vector<TranslationVariant> variants;
    for (const std::string& spec : cfg.variant_specs) {
        std::size_t eq = spec.find('=');
        std::string lang = spec.substr(0, eq);
        std::string path = spec.substr(eq + 1);
        variants.push_back({lang, load_examples(path, catalog, lang)});
    }
    ExampleSet merged = merge_multilingual(base, variants);
    persist(merged, out_path(cfg, "merged_examples.json"));
    out << "merged " << merged.size() << " example(s):";
    for (const auto& [lang, count] : merged.language_composition())
        out << " " << lang << " " << count;
    out << "\n";
    out << "wrote " << out_path(cfg, "merged_examples.json") << "\n";
    return 0;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
    SchemaCatalog catalog = load_schema_catalog(cfg.schemas_path);
    ExampleSet gold = load_examples(cfg.gold_path, catalog, cfg.language);
    std::vector<std::string> predictions = load_predictions(cfg.predictions_path);
    EvalReport report = evaluate(gold, predictions, catalog, cfg.jobs);
    emit(cfg, eval_report_json(report), "eval_report.json", out);
    return 0;
}

int cmd_report(const RunConfig& cfg, std::ostream& out) {
    render_report(load_json_file(cfg.report_path), out);
    return 0;
}

}  // namespace

RunConfig parse_args(const std::vector<std::string>& args) {
    RunConfig cfg;
    CLI::App app{"Corpus toolkit for text-to-SQL datasets: token-budget analysis, schema "
                 "pruning, multilingual merging, and exact-set-match scoring.",
                 "sqlfit"};
    app.require_subcommand(1);

    auto add_schemas = [&](CLI::App* cmd) {
        cmd->add_option("--schemas", cfg.schemas_path, "schema catalog (tables.json)")->required();
    };
    auto add_lang = [&](CLI::App* cmd, const char* help) {
        cmd->add_option("--lang", cfg.language, help);
    };
    auto add_jobs = [&](CLI::App* cmd) {
        cmd->add_option("--jobs", cfg.jobs, "worker threads (default 1)")
            ->check(CLI::Range(1u, 256u));
    };
    auto add_output = [&](CLI::App* cmd) {
        cmd->add_option("--out", cfg.output_dir,
                        "output directory (default: $SQLFIT_OUTPUT_DIR, else .)");
        cmd->add_option("--format", cfg.format, "stdout rendering: human | json")
            ->check(CLI::IsMember({"human", "json"}));
    };
    auto add_budget_flags = [&](CLI::App* cmd) {
        cmd->add_option("--limit", cfg.limit, "token budget (default 512)");
        cmd->add_option("--margin", cfg.margin, "tokens reserved for special tokens");
        cmd->add_option("--tokenizer", cfg.tokenizer, "approximate | vocabulary")
            ->check(CLI::IsMember({"approximate", "vocabulary"}));
        cmd->add_option("--vocab", cfg.vocabulary_path, "subword list, one entry per line");
    };

    CLI::App* validate = app.add_subcommand(
        "validate", "check schema integrity and parse every gold query");
    add_schemas(validate);
    validate->add_option("--examples", cfg.example_paths, "example file, repeatable")->required();
    add_lang(validate, "language tag for files without one (default en)");
    add_jobs(validate);
    add_output(validate);

    CLI::App* analyze = app.add_subcommand(
        "analyze-budget", "count linearized tokens and split examples at the budget");
    add_schemas(analyze);
    analyze->add_option("--examples", cfg.examples_path, "example file")->required();
    add_lang(analyze, "language tag for files without one (default en)");
    add_budget_flags(analyze);
    add_jobs(analyze);
    add_output(analyze);

    CLI::App* prune = app.add_subcommand(
        "prune", "shrink over-budget schemas to what their queries use and remap");
    add_schemas(prune);
    prune->add_option("--examples", cfg.examples_path, "example file")->required();
    add_lang(prune, "language tag for files without one (default en)");
    add_budget_flags(prune);
    prune->add_flag("--prune-all", cfg.prune_all,
                    "prune every database with examples, not only overflowing ones");
    prune->add_flag("--drop-primary-keys", cfg.drop_primary_keys,
                    "do not force-retain primary key columns");
    prune->add_flag("--drop-foreign-keys", cfg.drop_foreign_keys,
                    "do not force-retain foreign key endpoints");
    prune->add_option("--star-policy", cfg.star_policy, "keep-all | columns-only")
        ->check(CLI::IsMember({"keep-all", "columns-only"}));
    add_jobs(prune);
    add_output(prune);

    CLI::App* merge = app.add_subcommand(
        "merge", "combine a base example set with aligned translations");
    add_schemas(merge);
    merge->add_option("--base", cfg.base_path, "base-language example file")->required();
    add_lang(merge, "base language tag (default en)");
    merge->add_option("--variant", cfg.variant_specs, "translated variant as lang=path, repeatable")
        ->required();
    add_output(merge);

    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "score predicted SQL with exact set match without values");
    add_schemas(evaluate);
    evaluate->add_option("--gold", cfg.gold_path, "gold example file")->required();
    evaluate->add_option("--pred", cfg.predictions_path, "predictions, one SQL per line")
        ->required();
    add_lang(evaluate, "language tag for the gold file (default en)");
    add_jobs(evaluate);
    add_output(evaluate);

    CLI::App* report = app.add_subcommand(
        "report", "render a machine-readable report as a table");
    report->add_option("--input", cfg.report_path, "report file written by another command")
        ->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        std::vector<CLI::App*> parsed = app.get_subcommands();
        cfg.help_text = parsed.empty() ? app.help() : parsed.front()->help();
        return cfg;
    } catch (const CLI::CallForAllHelp&) {
        cfg.help_text = app.help("", CLI::AppFormatMode::All);
        return cfg;
    } catch (const CLI::ParseError& e) {
        throw UsageError(std::string(e.what()) + "\n\n" + app.help());
    }

    for (CLI::App* sub : app.get_subcommands()) cfg.command = sub->get_name();
    for (const std::string& spec : cfg.variant_specs) {
        std::size_t eq = spec.find('=');
        if (eq == 0 || eq == std::string::npos || eq + 1 == spec.size())
            throw UsageError("--variant expects lang=path, got '" + spec + "'");
    }
    if (cfg.output_dir.empty()) {
        const char* env = std::getenv("SQLFIT_OUTPUT_DIR");
        cfg.output_dir = (env != nullptr && *env != '\0') ? env : ".";
    }
    return cfg;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (!cfg.help_text.empty()) {
            out << cfg.help_text;
            return 0;
        }
        if (cfg.command == "validate") return cmd_validate(cfg, out);
        if (cfg.command == "analyze-budget") return cmd_analyze_budget(cfg, out);
        if (cfg.command == "prune") return cmd_prune(cfg, out);
        if (cfg.command == "merge") return cmd_merge(cfg, out);
        if (cfg.command == "evaluate") return cmd_evaluate(cfg, out);
        if (cfg.command == "report") return cmd_report(cfg, out);
        throw UsageError("unknown command '" + cfg.command + "'");
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 3;
    }
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return run(parse_args(args), out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace sqlfit::cli
