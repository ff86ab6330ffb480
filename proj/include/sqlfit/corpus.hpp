#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sqlfit/errors.hpp"

namespace sqlfit {

/// Order-preserving JSON value; key order matters for stable file diffs.
using json = nlohmann::ordered_json;

enum class ColumnType { text, number, time, boolean, others };

ColumnType column_type_from_string(const std::string& s);
std::string to_string(ColumnType t);

/// One column of a database schema. Index 0 of every schema is the star
/// column: table_index -1, name "*".
struct ColumnRef {
    int table_index = -1;
    std::string name;           // human-readable variant
    std::string original_name;  // identifier used in SQL
    ColumnType column_type = ColumnType::text;

    bool is_star() const { return table_index < 0; }
    friend bool operator==(const ColumnRef&, const ColumnRef&) = default;
};

struct TableRef {
    std::string name;
    std::string original_name;
    friend bool operator==(const TableRef&, const TableRef&) = default;
};

struct DatabaseSchema {
    std::string db_id;
    std::vector<TableRef> tables;
    std::vector<ColumnRef> columns;                 // columns[0] is the star column
    std::vector<int> primary_keys;                  // column indices, input order kept
    std::vector<std::pair<int, int>> foreign_keys;  // (column, referenced column)
    json raw;  // source record; unknown fields ride along to persist

    int table_count() const { return static_cast<int>(tables.size()); }
    int column_count() const { return static_cast<int>(columns.size()); }
    /// Column indices belonging to one table, in schema order.
    std::vector<int> columns_of_table(int table_index) const;
    /// Case-insensitive lookup by original table name; -1 when absent.
    int find_table(const std::string& original_name) const;
    /// Case-insensitive lookup by original column name within a table; -1 when absent.
    int find_column(int table_index, const std::string& original_name) const;

    bool equivalent(const DatabaseSchema& other) const;
};

struct SchemaCatalog {
    std::vector<DatabaseSchema> databases;  // file order
    std::string provenance;                 // source path

    const DatabaseSchema* find(const std::string& db_id) const;
    const DatabaseSchema& at(const std::string& db_id) const;
    std::size_t size() const { return databases.size(); }
};

struct Example {
    std::string db_id;
    std::string question;
    std::string language;  // tag such as en/pt/es/fr
    std::string query;     // gold SQL text
    std::optional<json> structured_sql;  // index-bearing tree, Spider "sql" layout
    json raw;  // source record; unknown fields ride along to persist

    bool equivalent(const Example& other) const;
};

struct ExampleSet {
    std::vector<Example> examples;
    std::string split_label;  // train/dev/...

    std::size_t size() const { return examples.size(); }
    /// language tag -> number of examples carrying it
    std::map<std::string, std::size_t> language_composition() const;
    /// Examples whose language tag equals `language`, in order.
    ExampleSet filter_language(const std::string& language) const;
};

struct ValidationEntry {
    std::size_t example_index = 0;
    std::string db_id;
    enum class Kind { unresolved_db, index_out_of_range, query_parse_failure } kind;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationEntry> entries;
    std::size_t examples_checked = 0;
    std::size_t queries_parsed = 0;  // gold queries that parse and resolve

    bool clean() const { return entries.empty(); }
};

// ---------------------------------------------------------------- loading

SchemaCatalog load_schema_catalog(const std::string& path);
SchemaCatalog parse_schema_catalog(const json& doc, const std::string& provenance);

ExampleSet load_examples(const std::string& path, const SchemaCatalog& catalog,
                         const std::string& language);
ExampleSet parse_examples(const json& doc, const SchemaCatalog& catalog,
                          const std::string& language, const std::string& provenance);

// ---------------------------------------------------------------- persisting

void persist(const SchemaCatalog& catalog, const std::string& path);
void persist(const ExampleSet& examples, const std::string& path);
json to_json(const SchemaCatalog& catalog);
json to_json(const ExampleSet& examples);

// ---------------------------------------------------------------- validation

ValidationReport validate_corpus(const SchemaCatalog& catalog, const ExampleSet& examples,
                                 unsigned jobs = 1);

// --------------------------------------------------- structured sql walking
//
// The structured sql tree is carried opaquely except for the slots that hold
// table/column indices (the Spider "sql" layout). walk_structured_indices
// visits every such slot; the callback may rewrite the index in place.

enum class IndexKind { table, column };
void walk_structured_indices(json& sql, const std::function<void(IndexKind, json&)>& visit);
void walk_structured_indices(const json& sql,
                             const std::function<void(IndexKind, const json&)>& visit);

// ---------------------------------------------------------------- file utils

std::string read_text_file(const std::string& path);
void write_text_file_atomic(const std::string& path, const std::string& content);
json load_json_file(const std::string& path);
void write_json_file_atomic(const std::string& path, const json& doc);

}  // namespace sqlfit
