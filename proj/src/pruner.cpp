#include "sqlfit/pruner.hpp"

#include <algorithm>

#include "sqlfit/sqlgrammar.hpp"
#include "sqlfit/util.hpp"

namespace sqlfit {

bool IndexMap::is_identity() const {
    for (const auto& [from, to] : table_map)
        if (from != to) return false;
    for (const auto& [from, to] : column_map)
        if (from != to) return false;
    return true;
}

bool PruneReport::any_residual_overflow() const {
    return std::any_of(databases.begin(), databases.end(),
                       [](const PrunedDatabase& db) { return db.residual_overflow; });
}

const PrunedDatabase* PruneReport::find(const std::string& db_id) const {
    for (const auto& db : databases)
        if (db.db_id == db_id) return &db;
    return nullptr;
}

UsageProfile aggregate_usage(const ExampleSet& slice, const DatabaseSchema& schema) {
    UsageProfile profile;
    profile.db_id = schema.db_id;
    for (std::size_t i = 0; i < slice.size(); ++i) {
        const Example& e = slice.examples[i];
        if (e.db_id != schema.db_id)
            throw ValidationError("example " + std::to_string(i) + " belongs to '" + e.db_id +
                                  "', not '" + schema.db_id + "'");
        sql::RefSet refs;
        try {
            refs = sql::extract_refs(e.query, schema);
        } catch (const Error& err) {
            throw ValidationError("cannot aggregate usage for example " + std::to_string(i) +
                                  " of '" + schema.db_id + "': " + err.what());
        }
        profile.used_tables.insert(refs.tables.begin(), refs.tables.end());
        profile.used_columns.insert(refs.columns.begin(), refs.columns.end());
        profile.star_tables.insert(refs.star_tables.begin(), refs.star_tables.end());
    }
    return profile;
}

std::pair<DatabaseSchema, IndexMap> prune_schema(const DatabaseSchema& schema,
                                                 const UsageProfile& usage,
                                                 const RetentionPolicy& policy) {
    // The profile must speak this schema's language before anything is cut.
    std::map<std::string, int> table_index;
    for (const std::string& name : usage.used_tables) {
        int ti = schema.find_table(name);
        if (ti < 0)
            throw ValidationError("usage profile names unknown table '" + name + "' in '" +
                                  schema.db_id + "'");
        table_index[name] = ti;
    }
    std::set<int> used_column_ids;
    for (const auto& [table, column] : usage.used_columns) {
        auto it = table_index.find(table);
        if (it == table_index.end())
            throw ValidationError("usage profile references column of unused table '" + table +
                                  "' in '" + schema.db_id + "'");
        int ci = schema.find_column(it->second, column);
        if (ci < 0)
            throw ValidationError("usage profile names unknown column '" + table + "." + column +
                                  "' in '" + schema.db_id + "'");
        used_column_ids.insert(ci);
    }

    std::vector<bool> keep_table(schema.table_count(), false);
    for (const auto& [name, ti] : table_index) keep_table[ti] = true;
    std::vector<bool> starred(schema.table_count(), false);
    if (policy.star_policy == RetentionPolicy::StarPolicy::keep_all_columns_of_star_tables) {
        for (const std::string& name : usage.star_tables) {
            int ti = schema.find_table(name);
            if (ti >= 0 && keep_table[ti]) starred[ti] = true;
        }
    }

    std::set<int> pk_ids(schema.primary_keys.begin(), schema.primary_keys.end());
    std::vector<bool> keep_column(schema.column_count(), false);
    keep_column[0] = true;  // star column
    for (int ci = 1; ci < schema.column_count(); ++ci) {
        int ti = schema.columns[ci].table_index;
        if (!keep_table[ti]) continue;
        if (used_column_ids.count(ci)) keep_column[ci] = true;
        else if (policy.keep_primary_keys && pk_ids.count(ci)) keep_column[ci] = true;
        else if (starred[ti]) keep_column[ci] = true;
    }
    if (policy.keep_foreign_keys_between_retained_tables) {
        for (const auto& [a, b] : schema.foreign_keys) {
            if (keep_table[schema.columns[a].table_index] &&
                keep_table[schema.columns[b].table_index]) {
                keep_column[a] = true;
                keep_column[b] = true;
            }
        }
    }

    DatabaseSchema pruned;
    pruned.db_id = schema.db_id;
    pruned.raw = schema.raw;
    IndexMap map;
    for (int ti = 0; ti < schema.table_count(); ++ti) {
        if (!keep_table[ti]) continue;
        map.table_map[ti] = static_cast<int>(pruned.tables.size());
        pruned.tables.push_back(schema.tables[ti]);
    }
    for (int ci = 0; ci < schema.column_count(); ++ci) {
        if (!keep_column[ci]) continue;
        map.column_map[ci] = static_cast<int>(pruned.columns.size());
        ColumnRef col = schema.columns[ci];
        if (ci > 0) col.table_index = map.table_map.at(col.table_index);
        pruned.columns.push_back(std::move(col));
    }
    for (int pk : schema.primary_keys) {
        if (keep_column[pk]) pruned.primary_keys.push_back(map.column_map.at(pk));
    }
    for (const auto& [a, b] : schema.foreign_keys) {
        if (keep_column[a] && keep_column[b])
            pruned.foreign_keys.emplace_back(map.column_map.at(a), map.column_map.at(b));
    }
    return {std::move(pruned), std::move(map)};
}

ExampleSet remap_examples(const ExampleSet& examples,
                          const std::map<std::string, IndexMap>& maps) {
    ExampleSet out = examples;
    for (std::size_t i = 0; i < out.size(); ++i) {
        Example& e = out.examples[i];
        auto map_it = maps.find(e.db_id);
        if (map_it == maps.end() || !e.structured_sql) continue;
        const IndexMap& map = map_it->second;
        walk_structured_indices(*e.structured_sql, [&](IndexKind kind, json& slot) {
            if (!slot.is_number_integer()) return;
            int old_index = slot.get<int>();
            const auto& m = kind == IndexKind::table ? map.table_map : map.column_map;
            auto it = m.find(old_index);
            if (it == m.end())
                throw ValidationError(
                    "example " + std::to_string(i) + " of '" + e.db_id + "' references " +
                    (kind == IndexKind::table ? "table" : "column") + " index " +
                    std::to_string(old_index) + ", which the pruned schema no longer has");
            slot = it->second;
        });
        e.raw["sql"] = *e.structured_sql;
    }
    return out;
}

FitResult emit_fit_corpus(const SchemaCatalog& catalog, const ExampleSet& examples,
                          TokenBudget budget, const Tokenizer& tokenizer,
                          const RetentionPolicy& policy, bool prune_all, unsigned jobs) {
    BudgetReport before = classify_examples(examples, catalog, budget, tokenizer, jobs);

    std::set<std::string> targets;
    if (prune_all) {
        for (const Example& e : examples.examples) targets.insert(e.db_id);
    } else {
        for (const auto& [db_id, n] : before.overflow_by_db) targets.insert(db_id);
    }

    FitResult result;
    result.catalog = catalog;
    result.report.budget = budget;
    result.report.tokenizer_name = tokenizer.name();

    std::map<std::string, IndexMap> maps;
    for (const std::string& db_id : targets) {
        const DatabaseSchema& schema = catalog.at(db_id);
        ExampleSet slice;
        for (const Example& e : examples.examples)
            if (e.db_id == db_id) slice.examples.push_back(e);

        UsageProfile usage = aggregate_usage(slice, schema);
        auto [pruned, map] = prune_schema(schema, usage, policy);

        PrunedDatabase row;
        row.db_id = db_id;
        row.tables_before = schema.table_count();
        row.tables_after = pruned.table_count();
        row.columns_before = schema.column_count() - 1;  // star column is bookkeeping
        row.columns_after = pruned.column_count() - 1;
        for (int ti = 0; ti < schema.table_count(); ++ti) {
            if (!map.table_map.count(ti))
                row.deleted_tables.push_back(schema.tables[ti].original_name);
        }
        for (int ci = 1; ci < schema.column_count(); ++ci) {
            if (!map.column_map.count(ci))
                row.deleted_columns.push_back(
                    schema.tables[schema.columns[ci].table_index].original_name + "." +
                    schema.columns[ci].original_name);
        }
        row.dropped_foreign_keys = schema.foreign_keys.size() - pruned.foreign_keys.size();
        auto overflow_it = before.overflow_by_db.find(db_id);
        row.overflow_before = overflow_it == before.overflow_by_db.end() ? 0 : overflow_it->second;

        for (DatabaseSchema& db : result.catalog.databases) {
            if (db.db_id == db_id) db = std::move(pruned);
        }
        maps[db_id] = std::move(map);
        result.report.databases.push_back(std::move(row));
    }

    result.examples = remap_examples(examples, maps);
    for (const Example& e : result.examples.examples)
        if (maps.count(e.db_id)) ++result.report.examples_remapped;

    BudgetReport after =
        classify_examples(result.examples, result.catalog, budget, tokenizer, jobs);
    for (PrunedDatabase& row : result.report.databases) {
        auto it = after.overflow_by_db.find(row.db_id);
        row.overflow_after = it == after.overflow_by_db.end() ? 0 : it->second;
        row.residual_overflow = row.overflow_after > 0;
    }
    return result;
}

}  // namespace sqlfit
