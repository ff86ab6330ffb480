// Python bindings for the toolkit's main operations. Reports cross the
// boundary as plain dicts shaped like the CLI's machine-readable files;
// corpora stay as opaque handles so round trips never lose unknown fields.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sqlfit/budget.hpp"
#include "sqlfit/corpus.hpp"
#include "sqlfit/errors.hpp"
#include "sqlfit/matcheval.hpp"
#include "sqlfit/polyglot.hpp"
#include "sqlfit/pruner.hpp"
#include "sqlfit/sqlgrammar.hpp"

namespace py = pybind11;
using namespace sqlfit;

namespace {

RetentionPolicy make_policy(const std::string& star_policy, bool keep_primary_keys,
                            bool keep_foreign_keys) {
    if (star_policy != "keep-all" && star_policy != "columns-only")
        throw ConfigError("star_policy must be 'keep-all' or 'columns-only', got '" +
                          star_policy + "'");
    RetentionPolicy policy;
    policy.keep_primary_keys = keep_primary_keys;
    policy.keep_foreign_keys_between_retained_tables = keep_foreign_keys;
    policy.star_policy = star_policy == "columns-only"
                             ? RetentionPolicy::StarPolicy::columns_only
                             : RetentionPolicy::StarPolicy::keep_all_columns_of_star_tables;
    return policy;
}

py::dict budget_report_dict(const BudgetReport& report) {
    py::dict d;
    d["limit"] = report.budget.limit;
    d["tokenizer"] = report.tokenizer_name;
    d["total"] = report.entries.size();
    d["fits"] = report.used;
    d["over_budget"] = report.rejected;
    py::dict by_db;
    for (const auto& [db_id, count] : report.overflow_by_db) by_db[py::str(db_id)] = count;
    d["overflow_by_database"] = by_db;
    py::list entries;
    for (const BudgetEntry& e : report.entries) {
        py::dict row;
        row["index"] = e.example_index;
        row["db_id"] = e.db_id;
        row["tokens"] = e.tokens;
        row["fits"] = e.fits;
        entries.append(row);
    }
    d["entries"] = entries;
    return d;
}

py::dict prune_report_dict(const PruneReport& report) {
    py::dict d;
    d["limit"] = report.budget.limit;
    d["tokenizer"] = report.tokenizer_name;
    d["examples_remapped"] = report.examples_remapped;
    py::list databases;
    for (const PrunedDatabase& db : report.databases) {
        py::dict row;
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
        databases.append(row);
    }
    d["databases"] = databases;
    return d;
}

py::dict eval_report_dict(const EvalReport& report) {
    py::dict d;
    d["total"] = report.all.count;
    d["matched"] = report.all.matched;
    d["overall"] = report.all.rate();
    py::dict buckets;
    for (DifficultyLevel level : {DifficultyLevel::easy, DifficultyLevel::medium,
                                  DifficultyLevel::hard, DifficultyLevel::extra}) {
        const EvalReport::Bucket& b = report.bucket(level);
        py::dict bucket;
        bucket["count"] = b.count;
        bucket["matched"] = b.matched;
        bucket["rate"] = b.rate();
        buckets[py::str(to_string(level))] = bucket;
    }
    d["by_difficulty"] = buckets;
    py::list verdicts;
    for (const ExampleVerdict& v : report.verdicts) {
        py::dict row;
        row["index"] = v.index;
        row["difficulty"] = to_string(v.difficulty);
        row["matched"] = v.matched;
        if (!v.error.empty()) row["error"] = v.error;
        verdicts.append(row);
    }
    d["verdicts"] = verdicts;
    return d;
}

const char* entry_kind_name(ValidationEntry::Kind kind) {
    switch (kind) {
        case ValidationEntry::Kind::unresolved_db: return "unresolved_db";
        case ValidationEntry::Kind::index_out_of_range: return "index_out_of_range";
        case ValidationEntry::Kind::query_parse_failure: return "query_parse_failure";
    }
    return "?";
}

py::dict validation_report_dict(const ValidationReport& report) {
    py::dict d;
    d["examples_checked"] = report.examples_checked;
    d["queries_parsed"] = report.queries_parsed;
    d["clean"] = report.clean();
    py::list defects;
    for (const ValidationEntry& e : report.entries) {
        py::dict row;
        row["example_index"] = e.example_index;
        row["db_id"] = e.db_id;
        row["kind"] = entry_kind_name(e.kind);
        row["detail"] = e.detail;
        defects.append(row);
    }
    d["defects"] = defects;
    return d;
}

py::dict alignment_dict(const AlignmentReport& report) {
    py::dict d;
    d["language"] = report.language;
    d["aligned"] = report.aligned();
    py::list mismatches;
    for (const AlignmentMismatch& m : report.mismatches) {
        py::dict row;
        row["index"] = m.index;
        switch (m.kind) {
            case AlignmentMismatch::Kind::db_id_mismatch: row["kind"] = "db_id_mismatch"; break;
            case AlignmentMismatch::Kind::query_mismatch: row["kind"] = "query_mismatch"; break;
            case AlignmentMismatch::Kind::missing_entry: row["kind"] = "missing_entry"; break;
            case AlignmentMismatch::Kind::surplus_entry: row["kind"] = "surplus_entry"; break;
        }
        row["detail"] = m.detail;
        mismatches.append(row);
    }
    d["mismatches"] = mismatches;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Corpus toolkit for text-to-SQL datasets: token-budget analysis, schema "
              "pruning, multilingual merging, and exact-set-match scoring.";

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<UsageError>(m, "UsageError", base);
    py::register_exception<ParseError>(m, "ParseError", base);
    py::register_exception<ResolutionError>(m, "ResolutionError", base);
    py::register_exception<ValidationError>(m, "ValidationError", base);
    py::register_exception<ConfigError>(m, "ConfigError", base);
    py::register_exception<IoError>(m, "IoError", base);

    py::class_<DatabaseSchema>(m, "DatabaseSchema")
        .def_readonly("db_id", &DatabaseSchema::db_id)
        .def("table_count", &DatabaseSchema::table_count)
        .def("column_count", &DatabaseSchema::column_count)
        .def("table_names",
             [](const DatabaseSchema& schema) {
                 std::vector<std::string> names;
                 for (const TableRef& t : schema.tables) names.push_back(t.original_name);
                 return names;
             })
        .def("column_names", [](const DatabaseSchema& schema) {
            std::vector<std::pair<int, std::string>> names;
            for (const ColumnRef& c : schema.columns)
                names.emplace_back(c.table_index, c.original_name);
            return names;
        });

    py::class_<SchemaCatalog>(m, "SchemaCatalog")
        .def("__len__", &SchemaCatalog::size)
        .def("__contains__",
             [](const SchemaCatalog& catalog, const std::string& db_id) {
                 return catalog.find(db_id) != nullptr;
             })
        .def("db_ids",
             [](const SchemaCatalog& catalog) {
                 std::vector<std::string> ids;
                 for (const DatabaseSchema& db : catalog.databases) ids.push_back(db.db_id);
                 return ids;
             })
        .def("at", &SchemaCatalog::at, py::arg("db_id"),
             py::return_value_policy::reference_internal);

    py::class_<ExampleSet>(m, "ExampleSet")
        .def("__len__", &ExampleSet::size)
        .def("language_composition", &ExampleSet::language_composition)
        .def("filter_language", &ExampleSet::filter_language, py::arg("language"))
        .def("example",
             [](const ExampleSet& set, std::size_t i) {
                 if (i >= set.size()) throw py::index_error();
                 const Example& e = set.examples[i];
                 py::dict d;
                 d["db_id"] = e.db_id;
                 d["question"] = e.question;
                 d["query"] = e.query;
                 d["lang"] = e.language;
                 return d;
             },
             py::arg("index"))
        .def("queries", [](const ExampleSet& set) {
            std::vector<std::string> out;
            for (const Example& e : set.examples) out.push_back(e.query);
            return out;
        });

    m.def("load_schema_catalog", &load_schema_catalog, py::arg("path"));
    m.def("load_examples", &load_examples, py::arg("path"), py::arg("catalog"),
          py::arg("language") = "en");
    m.def("persist_catalog",
          [](const SchemaCatalog& catalog, const std::string& path) { persist(catalog, path); },
          py::arg("catalog"), py::arg("path"));
    m.def("persist_examples",
          [](const ExampleSet& examples, const std::string& path) { persist(examples, path); },
          py::arg("examples"), py::arg("path"));

    m.def("validate_corpus",
          [](const SchemaCatalog& catalog, const ExampleSet& examples, unsigned jobs) {
              return validation_report_dict(validate_corpus(catalog, examples, jobs));
          },
          py::arg("catalog"), py::arg("examples"), py::arg("jobs") = 1);

    m.def("linearize", &linearize, py::arg("question"), py::arg("schema"));
    m.def("count_tokens",
          [](const std::string& text, const std::string& tokenizer) {
              return make_tokenizer(tokenizer)->count(text);
          },
          py::arg("text"), py::arg("tokenizer") = "approximate");
    m.def("classify_examples",
          [](const ExampleSet& examples, const SchemaCatalog& catalog, std::size_t limit,
             const std::string& tokenizer, unsigned jobs) {
              return budget_report_dict(classify_examples(examples, catalog, TokenBudget{limit},
                                                          *make_tokenizer(tokenizer), jobs));
          },
          py::arg("examples"), py::arg("catalog"), py::arg("limit") = 512,
          py::arg("tokenizer") = "approximate", py::arg("jobs") = 1);

    m.def("emit_fit_corpus",
          [](const SchemaCatalog& catalog, const ExampleSet& examples, std::size_t limit,
             const std::string& tokenizer, const std::string& star_policy,
             bool keep_primary_keys, bool keep_foreign_keys, bool prune_all, unsigned jobs) {
              FitResult fit = emit_fit_corpus(
                  catalog, examples, TokenBudget{limit}, *make_tokenizer(tokenizer),
                  make_policy(star_policy, keep_primary_keys, keep_foreign_keys), prune_all, jobs);
              return py::make_tuple(std::move(fit.catalog), std::move(fit.examples),
                                    prune_report_dict(fit.report));
          },
          py::arg("catalog"), py::arg("examples"), py::arg("limit") = 512,
          py::arg("tokenizer") = "approximate", py::arg("star_policy") = "keep-all",
          py::arg("keep_primary_keys") = true, py::arg("keep_foreign_keys") = true,
          py::arg("prune_all") = false, py::arg("jobs") = 1);

    m.def("align_translations",
          [](const ExampleSet& base, const std::string& language, const ExampleSet& examples) {
              return alignment_dict(align_translations(base, {language, examples}));
          },
          py::arg("base"), py::arg("language"), py::arg("examples"));
    m.def("merge_multilingual",
          [](const ExampleSet& base,
             const std::vector<std::pair<std::string, ExampleSet>>& variants) {
              std::vector<TranslationVariant> list;
              for (const auto& [language, examples] : variants)
                  list.push_back({language, examples});
              return merge_multilingual(base, list);
          },
          py::arg("base"), py::arg("variants"));

    m.def("evaluate",
          [](const ExampleSet& gold, const std::vector<std::string>& predictions,
             const SchemaCatalog& catalog, unsigned jobs) {
              return eval_report_dict(evaluate(gold, predictions, catalog, jobs));
          },
          py::arg("gold"), py::arg("predictions"), py::arg("catalog"), py::arg("jobs") = 1);
    m.def("load_predictions", &load_predictions, py::arg("path"));

    m.def("canonical_sql",
          [](const std::string& query, const DatabaseSchema& schema) {
              return sql::render_sql(sql::parse_sql(query, schema));
          },
          py::arg("query"), py::arg("schema"));
    m.def("exact_set_match",
          [](const std::string& gold, const std::string& pred, const DatabaseSchema& schema) {
              return exact_set_match(canonicalize(sql::parse_sql(gold, schema), schema),
                                     canonicalize(sql::parse_sql(pred, schema), schema));
          },
          py::arg("gold"), py::arg("pred"), py::arg("schema"));
    m.def("classify_difficulty",
          [](const std::string& query, const DatabaseSchema& schema) {
              return to_string(classify_difficulty(sql::parse_sql(query, schema)));
          },
          py::arg("query"), py::arg("schema"));
    m.def("extract_refs",
          [](const std::string& query, const DatabaseSchema& schema) {
              sql::RefSet refs = sql::extract_refs(query, schema);
              py::dict d;
              d["tables"] = refs.tables;
              d["columns"] = refs.columns;
              d["star_tables"] = refs.star_tables;
              d["uses_star"] = refs.uses_star;
              return d;
          },
          py::arg("query"), py::arg("schema"));
}
