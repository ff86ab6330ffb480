#pragma once

// Schema pruning and index remapping: aggregate which tables and columns a
// database's gold queries actually use, cut everything else under a
// retention policy, and rewrite the structured-sql indices of every example
// against the pruned schema. Driving this over a whole corpus produces the
// FIT variant, where databases with over-budget linearizations shrink until
// their examples fit (or are flagged as residual overflows).

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sqlfit/budget.hpp"
#include "sqlfit/corpus.hpp"

namespace sqlfit {

struct UsageProfile {
    std::string db_id;
    std::set<std::string> used_tables;                            // original names
    std::set<std::pair<std::string, std::string>> used_columns;   // (table, column)
    std::set<std::string> star_tables;  // tables a star reference fully exposes
};

struct RetentionPolicy {
    enum class StarPolicy {
        keep_all_columns_of_star_tables,  // a starred table keeps every column
        columns_only,                     // stars grant nothing beyond named columns
    };

    bool keep_primary_keys = true;
    bool keep_foreign_keys_between_retained_tables = true;
    StarPolicy star_policy = StarPolicy::keep_all_columns_of_star_tables;
};

// Old index → new index for everything the pruned schema kept. Both maps
// are injective and order-preserving; the star column always maps 0 → 0.
struct IndexMap {
    std::map<int, int> table_map;
    std::map<int, int> column_map;

    bool is_identity() const;
};

struct PrunedDatabase {
    std::string db_id;
    int tables_before = 0, tables_after = 0;
    int columns_before = 0, columns_after = 0;
    std::vector<std::string> deleted_tables;
    std::vector<std::string> deleted_columns;  // "table.column"
    std::size_t dropped_foreign_keys = 0;
    std::size_t overflow_before = 0;  // over-budget examples prior to pruning
    std::size_t overflow_after = 0;   // still over budget afterwards
    bool residual_overflow = false;
};

struct PruneReport {
    TokenBudget budget;
    std::string tokenizer_name;
    std::vector<PrunedDatabase> databases;  // one row per pruned database
    std::size_t examples_remapped = 0;

    bool any_residual_overflow() const;
    const PrunedDatabase* find(const std::string& db_id) const;
};

// Union of extract_refs over every gold query in the slice; all examples
// must belong to `schema`'s database and parse. A query that fails to parse
// raises a validation error naming the offending example.
UsageProfile aggregate_usage(const ExampleSet& slice, const DatabaseSchema& schema);

// Retained tables are exactly the used tables; retained columns are the
// used columns plus whatever the policy adds (primary keys of retained
// tables, foreign-key endpoints when both tables survive, all columns of
// star tables). Relative order is preserved, foreign keys with a deleted
// endpoint are dropped, and the returned IndexMap covers exactly the
// retained indices.
std::pair<DatabaseSchema, IndexMap> prune_schema(const DatabaseSchema& schema,
                                                 const UsageProfile& usage,
                                                 const RetentionPolicy& policy);

// Rewrites every structured-sql index through the map of the example's
// database; examples of databases without a map pass through untouched, and
// question/query text is never altered. An index missing from its map is a
// validation error naming the example (it means pruning deleted something
// still referenced).
ExampleSet remap_examples(const ExampleSet& examples,
                          const std::map<std::string, IndexMap>& maps);

struct FitResult {
    SchemaCatalog catalog;
    ExampleSet examples;
    PruneReport report;
};

// The FIT pipeline: classify examples against the budget; for every
// database owning at least one overflow example (or every database with
// examples, when prune_all is set), aggregate usage over ALL its examples,
// prune once per database, and remap. Databases without overflow pass
// through untouched. Examples still over budget afterwards are flagged as
// residual overflows, never dropped. Running the pipeline on its own output
// changes nothing.
FitResult emit_fit_corpus(const SchemaCatalog& catalog, const ExampleSet& examples,
                          TokenBudget budget, const Tokenizer& tokenizer,
                          const RetentionPolicy& policy, bool prune_all = false,
                          unsigned jobs = 1);

}  // namespace sqlfit
