#include "sqlfit/corpus.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "sqlfit/sqlgrammar.hpp"
#include "sqlfit/util.hpp"

namespace fs = std::filesystem;

namespace sqlfit {

namespace {

const char* kSchemaKeys[] = {"column_names", "column_names_original", "column_types",
                             "db_id",        "foreign_keys",          "primary_keys",
                             "table_names",  "table_names_original"};
const char* kExampleKeys[] = {"db_id", "question", "query", "sql", "lang"};

std::string record_context(const std::string& provenance, std::size_t index) {
    return provenance + ", record " + std::to_string(index);
}

const json& require_field(const json& rec, const char* field, const std::string& ctx) {
    auto it = rec.find(field);
    if (it == rec.end())
        throw ParseError(ctx + ": missing field '" + std::string(field) + "'");
    return *it;
}

json extra_fields(const json& raw, const char* const* known, std::size_t n_known) {
    json out = json::object();
    if (!raw.is_object()) return out;
    for (auto it = raw.begin(); it != raw.end(); ++it) {
        bool known_key = false;
        for (std::size_t i = 0; i < n_known; ++i) {
            if (it.key() == known[i]) { known_key = true; break; }
        }
        if (!known_key) out[it.key()] = it.value();
    }
    return out;
}

}  // namespace

ColumnType column_type_from_string(const std::string& s) {
    std::string v = to_lower(s);
    if (v == "text") return ColumnType::text;
    if (v == "number") return ColumnType::number;
    if (v == "time") return ColumnType::time;
    if (v == "boolean") return ColumnType::boolean;
    return ColumnType::others;
}

std::string to_string(ColumnType t) {
    switch (t) {
        case ColumnType::text: return "text";
        case ColumnType::number: return "number";
        case ColumnType::time: return "time";
        case ColumnType::boolean: return "boolean";
        case ColumnType::others: return "others";
    }
    return "others";
}

// ---------------------------------------------------------------- schema

std::vector<int> DatabaseSchema::columns_of_table(int table_index) const {
    std::vector<int> out;
    for (int i = 0; i < column_count(); ++i) {
        if (columns[i].table_index == table_index) out.push_back(i);
    }
    return out;
}

int DatabaseSchema::find_table(const std::string& original_name) const {
    for (int i = 0; i < table_count(); ++i) {
        if (iequals(tables[i].original_name, original_name)) return i;
    }
    return -1;
}

int DatabaseSchema::find_column(int table_index, const std::string& original_name) const {
    for (int i = 1; i < column_count(); ++i) {
        if (columns[i].table_index == table_index &&
            iequals(columns[i].original_name, original_name)) return i;
    }
    return -1;
}

bool DatabaseSchema::equivalent(const DatabaseSchema& other) const {
    return db_id == other.db_id && tables == other.tables && columns == other.columns &&
           primary_keys == other.primary_keys && foreign_keys == other.foreign_keys &&
           extra_fields(raw, kSchemaKeys, std::size(kSchemaKeys)) ==
               extra_fields(other.raw, kSchemaKeys, std::size(kSchemaKeys));
}

const DatabaseSchema* SchemaCatalog::find(const std::string& db_id) const {
    for (const auto& db : databases) {
        if (db.db_id == db_id) return &db;
    }
    return nullptr;
}

const DatabaseSchema& SchemaCatalog::at(const std::string& db_id) const {
    const DatabaseSchema* db = find(db_id);
    if (!db) throw ValidationError("unknown database id '" + db_id + "'");
    return *db;
}

bool Example::equivalent(const Example& other) const {
    return db_id == other.db_id && question == other.question && language == other.language &&
           query == other.query && structured_sql == other.structured_sql &&
           extra_fields(raw, kExampleKeys, std::size(kExampleKeys)) ==
               extra_fields(other.raw, kExampleKeys, std::size(kExampleKeys));
}

std::map<std::string, std::size_t> ExampleSet::language_composition() const {
    std::map<std::string, std::size_t> out;
    for (const auto& e : examples) ++out[e.language];
    return out;
}

ExampleSet ExampleSet::filter_language(const std::string& language) const {
    ExampleSet out;
    out.split_label = split_label;
    for (const auto& e : examples) {
        if (e.language == language) out.examples.push_back(e);
    }
    return out;
}

// ---------------------------------------------------------------- loading

SchemaCatalog parse_schema_catalog(const json& doc, const std::string& provenance) {
    if (!doc.is_array())
        throw ParseError(provenance + ": expected a top-level array of database records");
    SchemaCatalog catalog;
    catalog.provenance = provenance;
    std::set<std::string> seen_ids;
    for (std::size_t ri = 0; ri < doc.size(); ++ri) {
        const json& rec = doc[ri];
        std::string ctx = record_context(provenance, ri);
        if (!rec.is_object()) throw ParseError(ctx + ": record is not an object");

        DatabaseSchema db;
        db.raw = rec;
        const json& id = require_field(rec, "db_id", ctx);
        if (!id.is_string()) throw ParseError(ctx + ": field 'db_id' must be a string");
        db.db_id = id.get<std::string>();
        ctx += " (" + db.db_id + ")";
        if (!seen_ids.insert(db.db_id).second)
            throw ValidationError(provenance + ": duplicate db_id '" + db.db_id + "'");

        const json& tnames = require_field(rec, "table_names", ctx);
        const json& tnames_orig = require_field(rec, "table_names_original", ctx);
        if (!tnames.is_array() || !tnames_orig.is_array() || tnames.size() != tnames_orig.size())
            throw ParseError(ctx + ": field 'table_names'/'table_names_original' malformed");
        for (std::size_t i = 0; i < tnames.size(); ++i) {
            db.tables.push_back({tnames[i].get<std::string>(), tnames_orig[i].get<std::string>()});
        }

        const json& cnames = require_field(rec, "column_names", ctx);
        const json& cnames_orig = require_field(rec, "column_names_original", ctx);
        const json& ctypes = require_field(rec, "column_types", ctx);
        if (!cnames.is_array() || !cnames_orig.is_array() || cnames.size() != cnames_orig.size() ||
            !ctypes.is_array() || ctypes.size() != cnames.size())
            throw ParseError(ctx + ": field 'column_names'/'column_names_original'/'column_types' malformed");
        for (std::size_t i = 0; i < cnames.size(); ++i) {
            const json& c = cnames[i];
            const json& co = cnames_orig[i];
            if (!c.is_array() || c.size() != 2 || !co.is_array() || co.size() != 2)
                throw ParseError(ctx + ": field 'column_names', entry " + std::to_string(i) +
                                 " must be [table_index, name]");
            ColumnRef col;
            col.table_index = c[0].get<int>();
            col.name = c[1].get<std::string>();
            col.original_name = co[1].get<std::string>();
            col.column_type = column_type_from_string(ctypes[i].get<std::string>());
            if (col.table_index != co[0].get<int>())
                throw ParseError(ctx + ": column " + std::to_string(i) +
                                 " has inconsistent table indices");
            db.columns.push_back(col);
        }

        if (db.columns.empty() || !db.columns[0].is_star() || db.columns[0].original_name != "*")
            throw ValidationError(ctx + ": column 0 must be the star column");
        for (std::size_t i = 1; i < db.columns.size(); ++i) {
            const ColumnRef& col = db.columns[i];
            if (col.table_index < 0 || col.table_index >= db.table_count())
                throw ValidationError(ctx + ": column " + std::to_string(i) + " ('" +
                                      col.original_name + "') references missing table " +
                                      std::to_string(col.table_index));
            if (col.original_name.empty())
                throw ValidationError(ctx + ": column " + std::to_string(i) + " has an empty name");
        }

        const json& pks = require_field(rec, "primary_keys", ctx);
        if (!pks.is_array()) throw ParseError(ctx + ": field 'primary_keys' must be an array");
        for (const json& k : pks) {
            int idx = k.get<int>();
            if (idx <= 0 || idx >= db.column_count())
                throw ValidationError(ctx + ": primary key index " + std::to_string(idx) +
                                      " does not name a column");
            db.primary_keys.push_back(idx);
        }
        const json& fks = require_field(rec, "foreign_keys", ctx);
        if (!fks.is_array()) throw ParseError(ctx + ": field 'foreign_keys' must be an array");
        for (const json& pair : fks) {
            if (!pair.is_array() || pair.size() != 2)
                throw ParseError(ctx + ": foreign key entries must be [column, column]");
            int a = pair[0].get<int>();
            int b = pair[1].get<int>();
            if (a <= 0 || a >= db.column_count() || b <= 0 || b >= db.column_count())
                throw ValidationError(ctx + ": foreign key [" + std::to_string(a) + ", " +
                                      std::to_string(b) + "] does not name existing columns");
            db.foreign_keys.emplace_back(a, b);
        }

        catalog.databases.push_back(std::move(db));
    }
    return catalog;
}

SchemaCatalog load_schema_catalog(const std::string& path) {
    return parse_schema_catalog(load_json_file(path), path);
}

ExampleSet parse_examples(const json& doc, const SchemaCatalog& catalog,
                          const std::string& language, const std::string& provenance) {
    if (!doc.is_array())
        throw ParseError(provenance + ": expected a top-level array of example records");
    ExampleSet set;
    set.split_label = fs::path(provenance).stem().string();
    std::vector<std::size_t> unknown_db;
    for (std::size_t ri = 0; ri < doc.size(); ++ri) {
        const json& rec = doc[ri];
        std::string ctx = record_context(provenance, ri);
        if (!rec.is_object()) throw ParseError(ctx + ": record is not an object");

        Example e;
        e.raw = rec;
        const json& id = require_field(rec, "db_id", ctx);
        const json& question = require_field(rec, "question", ctx);
        const json& query = require_field(rec, "query", ctx);
        if (!id.is_string()) throw ParseError(ctx + ": field 'db_id' must be a string");
        if (!question.is_string()) throw ParseError(ctx + ": field 'question' must be a string");
        if (!query.is_string()) throw ParseError(ctx + ": field 'query' must be a string");
        e.db_id = id.get<std::string>();
        e.question = question.get<std::string>();
        e.query = query.get<std::string>();
        if (rec.contains("sql") && !rec["sql"].is_null()) e.structured_sql = rec["sql"];
        if (rec.contains("lang") && rec["lang"].is_string())
            e.language = rec["lang"].get<std::string>();
        else
            e.language = language;

        if (!catalog.find(e.db_id)) unknown_db.push_back(ri);
        set.examples.push_back(std::move(e));
    }
    if (!unknown_db.empty()) {
        std::ostringstream msg;
        msg << provenance << ": " << unknown_db.size()
            << " example(s) reference databases missing from the catalog (records";
        for (std::size_t i : unknown_db) msg << " " << i;
        msg << ")";
        throw ValidationError(msg.str());
    }
    return set;
}

ExampleSet load_examples(const std::string& path, const SchemaCatalog& catalog,
                         const std::string& language) {
    return parse_examples(load_json_file(path), catalog, language, path);
}

// ---------------------------------------------------------------- persisting

json to_json(const SchemaCatalog& catalog) {
    json out = json::array();
    for (const auto& db : catalog.databases) {
        json rec = db.raw.is_object() ? db.raw : json::object();
        json cn = json::array(), cno = json::array(), ct = json::array();
        for (const auto& col : db.columns) {
            cn.push_back(json::array({col.table_index, col.name}));
            cno.push_back(json::array({col.table_index, col.original_name}));
            ct.push_back(to_string(col.column_type));
        }
        json tn = json::array(), tno = json::array();
        for (const auto& t : db.tables) {
            tn.push_back(t.name);
            tno.push_back(t.original_name);
        }
        json fk = json::array();
        for (const auto& [a, b] : db.foreign_keys) fk.push_back(json::array({a, b}));
        rec["column_names"] = std::move(cn);
        rec["column_names_original"] = std::move(cno);
        rec["column_types"] = std::move(ct);
        rec["db_id"] = db.db_id;
        rec["foreign_keys"] = std::move(fk);
        rec["primary_keys"] = db.primary_keys;
        rec["table_names"] = std::move(tn);
        rec["table_names_original"] = std::move(tno);
        out.push_back(std::move(rec));
    }
    return out;
}

json to_json(const ExampleSet& examples) {
    json out = json::array();
    for (const auto& e : examples.examples) {
        json rec = e.raw.is_object() ? e.raw : json::object();
        rec["db_id"] = e.db_id;
        rec["question"] = e.question;
        rec["query"] = e.query;
        rec["lang"] = e.language;
        if (e.structured_sql) rec["sql"] = *e.structured_sql;
        out.push_back(std::move(rec));
    }
    return out;
}

void persist(const SchemaCatalog& catalog, const std::string& path) {
    write_json_file_atomic(path, to_json(catalog));
}

void persist(const ExampleSet& examples, const std::string& path) {
    write_json_file_atomic(path, to_json(examples));
}

// ---------------------------------------------------------------- validation

ValidationReport validate_corpus(const SchemaCatalog& catalog, const ExampleSet& examples,
                                 unsigned jobs) {
    ValidationReport report;
    report.examples_checked = examples.size();
    std::vector<std::vector<ValidationEntry>> slots(examples.size());
    std::vector<char> parsed(examples.size(), 0);

    parallel_for(examples.size(), jobs, [&](std::size_t i) {
        const Example& e = examples.examples[i];
        auto& out = slots[i];
        const DatabaseSchema* db = catalog.find(e.db_id);
        if (!db) {
            out.push_back({i, e.db_id, ValidationEntry::Kind::unresolved_db,
                           "db_id does not resolve in the catalog"});
            return;
        }
        if (e.structured_sql) {
            try {
                walk_structured_indices(
                    *e.structured_sql, [&](IndexKind kind, const json& slot) {
                        if (!slot.is_number_integer()) return;
                        int idx = slot.get<int>();
                        int limit = kind == IndexKind::table ? db->table_count()
                                                             : db->column_count();
                        int lo = kind == IndexKind::table ? 0 : 0;  // star column is index 0
                        if (idx < lo || idx >= limit) {
                            out.push_back({i, e.db_id, ValidationEntry::Kind::index_out_of_range,
                                           std::string(kind == IndexKind::table ? "table" : "column") +
                                               " index " + std::to_string(idx) +
                                               " exceeds schema size"});
                        }
                    });
            } catch (const Error& err) {
                out.push_back({i, e.db_id, ValidationEntry::Kind::index_out_of_range,
                               std::string("malformed structured sql: ") + err.what()});
            }
        }
        try {
            sql::parse_sql(e.query, *db);
            parsed[i] = 1;
        } catch (const Error& err) {
            out.push_back({i, e.db_id, ValidationEntry::Kind::query_parse_failure, err.what()});
        }
    });

    for (std::size_t i = 0; i < examples.size(); ++i) {
        report.queries_parsed += parsed[i];
        for (auto& entry : slots[i]) report.entries.push_back(std::move(entry));
    }
    return report;
}

// --------------------------------------------------- structured sql walking

namespace {

using Visit = std::function<void(IndexKind, json&)>;

void walk_col_unit(json& cu, const Visit& visit);
void walk_sql_node(json& sql, const Visit& visit);

void walk_val_unit(json& vu, const Visit& visit) {
    if (!vu.is_array() || vu.size() < 2)
        throw ValidationError("val_unit must be [op, col_unit, col_unit|null]");
    walk_col_unit(vu[1], visit);
    if (vu.size() >= 3 && !vu[2].is_null()) walk_col_unit(vu[2], visit);
}

void walk_col_unit(json& cu, const Visit& visit) {
    if (!cu.is_array() || cu.size() < 2)
        throw ValidationError("col_unit must be [agg, column, distinct]");
    visit(IndexKind::column, cu[1]);
}

void walk_condition(json& cond, const Visit& visit) {
    if (!cond.is_array()) throw ValidationError("condition must be an array");
    for (std::size_t i = 0; i < cond.size(); i += 2) {
        json& unit = cond[i];
        if (!unit.is_array() || unit.size() < 4)
            throw ValidationError("cond_unit must be [not, op, val_unit, val1, val2]");
        walk_val_unit(unit[2], visit);
        for (std::size_t v = 3; v < unit.size() && v < 5; ++v) {
            json& val = unit[v];
            if (val.is_array()) walk_col_unit(val, visit);
            else if (val.is_object()) walk_sql_node(val, visit);
        }
    }
}

void walk_sql_node(json& sql, const Visit& visit) {
    if (sql.is_null()) return;
    if (!sql.is_object()) throw ValidationError("sql node must be an object");
    if (sql.contains("select") && sql["select"].is_array() && sql["select"].size() == 2) {
        for (json& item : sql["select"][1]) {
            if (!item.is_array() || item.size() != 2)
                throw ValidationError("select item must be [agg, val_unit]");
            walk_val_unit(item[1], visit);
        }
    }
    if (sql.contains("from") && sql["from"].is_object()) {
        json& from = sql["from"];
        if (from.contains("table_units")) {
            for (json& tu : from["table_units"]) {
                if (!tu.is_array() || tu.size() != 2)
                    throw ValidationError("table_unit must be [kind, ref]");
                if (tu[0] == "table_unit") visit(IndexKind::table, tu[1]);
                else if (tu[0] == "sql") walk_sql_node(tu[1], visit);
            }
        }
        if (from.contains("conds")) walk_condition(from["conds"], visit);
    }
    if (sql.contains("where")) walk_condition(sql["where"], visit);
    if (sql.contains("having")) walk_condition(sql["having"], visit);
    if (sql.contains("groupBy")) {
        for (json& cu : sql["groupBy"]) walk_col_unit(cu, visit);
    }
    if (sql.contains("orderBy") && sql["orderBy"].is_array() && sql["orderBy"].size() == 2) {
        for (json& vu : sql["orderBy"][1]) walk_val_unit(vu, visit);
    }
    for (const char* arm : {"intersect", "union", "except"}) {
        if (sql.contains(arm) && !sql[arm].is_null()) walk_sql_node(sql[arm], visit);
    }
}

}  // namespace

void walk_structured_indices(json& sql, const std::function<void(IndexKind, json&)>& visit) {
    walk_sql_node(sql, visit);
}

void walk_structured_indices(const json& sql,
                             const std::function<void(IndexKind, const json&)>& visit) {
    // The mutable walker never writes; it only hands out slots.
    walk_sql_node(const_cast<json&>(sql),
                  [&visit](IndexKind k, json& slot) { visit(k, slot); });
}

// ---------------------------------------------------------------- file utils

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("I/O failure while reading '" + path + "'");
    return buf.str();
}

void write_text_file_atomic(const std::string& path, const std::string& content) {
    fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw IoError("I/O failure while writing '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw IoError("cannot rename '" + tmp.string() + "' to '" + path + "': " + ec.message());
    }
}

json load_json_file(const std::string& path) {
    std::string text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const nlohmann::json::parse_error& err) {
        throw ParseError(path + ": " + err.what(), err.byte);
    }
}

void write_json_file_atomic(const std::string& path, const json& doc) {
    write_text_file_atomic(path, doc.dump(2) + "\n");
}

}  // namespace sqlfit
