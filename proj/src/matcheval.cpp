#include "sqlfit/matcheval.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "sqlfit/util.hpp"

namespace sqlfit {

using sql::Agg;
using sql::BoolExpr;
using sql::ColumnRefExpr;
using sql::ColUnit;
using sql::CmpOp;
using sql::Comparison;
using sql::Condition;
using sql::OrderDir;
using sql::QueryAst;
using sql::SelectCore;
using sql::SelectItem;
using sql::SetOp;
using sql::TableEntry;
using sql::ValueUnit;

namespace {

const char* set_op_name(SetOp op) {
    switch (op) {
        case SetOp::intersect: return "INTERSECT";
        case SetOp::union_: return "UNION";
        case SetOp::union_all: return "UNION ALL";
        case SetOp::except: return "EXCEPT";
    }
    return "?";
}

// Canonical identity of a column: resolved original names, lowercased, so
// alias choices and name casing never affect matching.
std::string column_canon(const ColumnRefExpr& ref, const DatabaseSchema& schema) {
    if (ref.is_star()) {
        if (ref.table_index >= 0)
            return to_lower(schema.tables[ref.table_index].original_name) + ".*";
        return "*";
    }
    if (ref.column_index < 1 || ref.table_index < 0) return "?." + ref.column_text;
    return to_lower(schema.tables[ref.table_index].original_name) + "." +
           to_lower(schema.columns[ref.column_index].original_name);
}

std::string col_unit_canon(const ColUnit& unit, const DatabaseSchema& schema) {
    std::string col = column_canon(unit.col, schema);
    if (unit.distinct) col = "DISTINCT " + col;
    if (unit.agg == Agg::none) return col;
    return to_string(unit.agg) + "(" + col + ")";
}

std::string value_unit_canon(const ValueUnit& vu, const DatabaseSchema& schema) {
    std::string out = col_unit_canon(vu.first, schema);
    if (vu.arith)
        out += " " + to_string(vu.arith->op) + " " + col_unit_canon(vu.arith->rhs, schema);
    return out;
}

std::string select_item_canon(const SelectItem& item, const DatabaseSchema& schema) {
    std::string value = value_unit_canon(item.value, schema);
    if (item.agg == Agg::none) return value;
    return to_string(item.agg) + "(" + (item.distinct ? "DISTINCT " : "") + value + ")";
}

ComponentSets canonicalize_query(const QueryAst& ast, const DatabaseSchema& schema);

std::string operand_canon(const sql::Operand& op, const DatabaseSchema& schema) {
    if (op.literal) {
        // IS [NOT] NULL keeps its NULL: that is structure, not a value.
        return op.literal->kind == sql::Literal::Kind::null ? "NULL" : "VALUE";
    }
    if (op.value) return value_unit_canon(*op.value, schema);
    return "(" + canonical_string(canonicalize_query(*op.subquery, schema)) + ")";
}

std::string comparison_canon(const Comparison& cmp, const DatabaseSchema& schema) {
    switch (cmp.op) {
        case CmpOp::exists:
            return std::string(cmp.negated ? "NOT " : "") + "EXISTS " +
                   operand_canon(cmp.rhs[0], schema);
        case CmpOp::between:
            return value_unit_canon(*cmp.lhs, schema) + (cmp.negated ? " NOT" : "") +
                   " BETWEEN " + operand_canon(cmp.rhs[0], schema) + " AND " +
                   operand_canon(cmp.rhs[1], schema);
        case CmpOp::in: {
            std::string rhs;
            if (cmp.rhs.size() == 1 && cmp.rhs[0].subquery) {
                rhs = operand_canon(cmp.rhs[0], schema);
            } else {
                rhs = "VALUE";  // literal lists collapse: length is a value detail
            }
            return value_unit_canon(*cmp.lhs, schema) + (cmp.negated ? " NOT" : "") + " IN " + rhs;
        }
        case CmpOp::like:
            return value_unit_canon(*cmp.lhs, schema) + (cmp.negated ? " NOT" : "") + " LIKE " +
                   operand_canon(cmp.rhs[0], schema);
        case CmpOp::is:
            return value_unit_canon(*cmp.lhs, schema) + " IS " + (cmp.negated ? "NOT " : "") +
                   "NULL";
        default:
            return value_unit_canon(*cmp.lhs, schema) + " " + to_string(cmp.op) + " " +
                   operand_canon(cmp.rhs[0], schema);
    }
}

std::multiset<std::string> conjunct_canons(const Condition& cond, const DatabaseSchema& schema);

// OR arms, each rendered as its sorted AND-chain.
void or_arm_canons(const Condition& cond, const DatabaseSchema& schema,
                   std::vector<std::string>& arms) {
    if (cond.boolean && cond.boolean->op == BoolExpr::Op::or_) {
        or_arm_canons(*cond.boolean->lhs, schema, arms);
        or_arm_canons(*cond.boolean->rhs, schema, arms);
        return;
    }
    arms.push_back(join(conjunct_canons(cond, schema), " AND "));
}

std::multiset<std::string> conjunct_canons(const Condition& cond, const DatabaseSchema& schema) {
    std::multiset<std::string> out;
    if (cond.boolean) {
        if (cond.boolean->op == BoolExpr::Op::and_) {
            out = conjunct_canons(*cond.boolean->lhs, schema);
            out.merge(conjunct_canons(*cond.boolean->rhs, schema));
        } else {
            std::vector<std::string> arms;
            or_arm_canons(cond, schema, arms);
            std::sort(arms.begin(), arms.end());
            out.insert("(" + join(arms, " OR ") + ")");
        }
        return out;
    }
    out.insert(comparison_canon(*cond.comparison, schema));
    return out;
}

void collect_keywords(const Condition& cond, std::set<std::string>& kw) {
    if (cond.boolean) {
        if (cond.boolean->op == BoolExpr::Op::or_) kw.insert("or");
        collect_keywords(*cond.boolean->lhs, kw);
        collect_keywords(*cond.boolean->rhs, kw);
        return;
    }
    const Comparison& cmp = *cond.comparison;
    if (cmp.negated) kw.insert("not");
    if (cmp.op == CmpOp::in) kw.insert("in");
    if (cmp.op == CmpOp::like) kw.insert("like");
    if (cmp.op == CmpOp::exists) kw.insert("exists");
}

ComponentSets canonicalize_core(const SelectCore& core, const DatabaseSchema& schema) {
    ComponentSets cs;
    cs.select_distinct = core.distinct;
    if (core.distinct) cs.keywords.insert("distinct");
    for (const SelectItem& item : core.items)
        cs.select_set.insert(select_item_canon(item, schema));
    for (const TableEntry& entry : core.from) {
        if (entry.is_subquery) {
            cs.from_tables.insert(
                "(" + canonical_string(canonicalize_query(*entry.subquery, schema)) + ")");
        } else {
            cs.from_tables.insert(to_lower(schema.tables[entry.table_index].original_name));
        }
        if (entry.join_cond) {
            // JOIN conditions restate key relationships; the prediction is
            // judged on the table set it joins, not the ON spelling.
            collect_keywords(*entry.join_cond, cs.keywords);
        }
    }
    if (core.where) {
        cs.where_set = conjunct_canons(*core.where, schema);
        cs.keywords.insert("where");
        collect_keywords(*core.where, cs.keywords);
    }
    for (const ColUnit& cu : core.group_by) cs.group_by_set.insert(col_unit_canon(cu, schema));
    if (!core.group_by.empty()) cs.keywords.insert("group");
    if (core.having) {
        cs.having_set = conjunct_canons(*core.having, schema);
        cs.keywords.insert("having");
        collect_keywords(*core.having, cs.keywords);
    }
    for (const sql::OrderItem& item : core.order_by) {
        cs.order_by.push_back(value_unit_canon(item.value, schema) + " " + to_string(item.dir));
        cs.keywords.insert(item.dir == OrderDir::asc ? "order asc" : "order desc");
    }
    cs.has_limit = core.limit.has_value();
    if (cs.has_limit) cs.keywords.insert("limit");
    return cs;
}

ComponentSets canonicalize_query(const QueryAst& ast, const DatabaseSchema& schema) {
    if (ast.set_expr) {
        ComponentSets cs;
        cs.set_op = set_op_name(ast.set_expr->op);
        cs.arms.push_back(canonicalize_query(*ast.set_expr->lhs, schema));
        cs.arms.push_back(canonicalize_query(*ast.set_expr->rhs, schema));
        cs.keywords.insert(to_lower(cs.set_op));
        return cs;
    }
    return canonicalize_core(*ast.core, schema);
}

}  // namespace

std::string canonical_string(const ComponentSets& cs) {
    if (!cs.set_op.empty()) {
        return "(" + canonical_string(cs.arms[0]) + ") " + cs.set_op + " (" +
               canonical_string(cs.arms[1]) + ")";
    }
    std::ostringstream out;
    out << "select" << (cs.select_distinct ? " distinct" : "") << "=["
        << join(cs.select_set, "; ") << "]";
    out << " from=[" << join(cs.from_tables, "; ") << "]";
    if (!cs.where_set.empty()) out << " where=[" << join(cs.where_set, "; ") << "]";
    if (!cs.group_by_set.empty()) out << " group=[" << join(cs.group_by_set, "; ") << "]";
    if (!cs.having_set.empty()) out << " having=[" << join(cs.having_set, "; ") << "]";
    if (!cs.order_by.empty()) out << " order=[" << join(cs.order_by, "; ") << "]";
    if (cs.has_limit) out << " limit";
    return out.str();
}

ComponentSets canonicalize(const QueryAst& ast, const DatabaseSchema& schema) {
    return canonicalize_query(ast, schema);
}

bool exact_set_match(const ComponentSets& gold, const ComponentSets& pred) {
    return gold == pred;
}

std::string to_string(DifficultyLevel level) {
    switch (level) {
        case DifficultyLevel::easy: return "easy";
        case DifficultyLevel::medium: return "medium";
        case DifficultyLevel::hard: return "hard";
        case DifficultyLevel::extra: return "extra";
    }
    return "?";
}

namespace {

struct CoreStats {
    int or_count = 0;
    int like_count = 0;
    int subquery_count = 0;
    int agg_count = 0;
    int where_leaves = 0;
};

void scan_condition(const Condition& cond, CoreStats& stats, int* leaf_counter) {
    if (cond.boolean) {
        if (cond.boolean->op == BoolExpr::Op::or_) ++stats.or_count;
        scan_condition(*cond.boolean->lhs, stats, leaf_counter);
        scan_condition(*cond.boolean->rhs, stats, leaf_counter);
        return;
    }
    const Comparison& cmp = *cond.comparison;
    if (leaf_counter) ++*leaf_counter;
    if (cmp.op == CmpOp::like) ++stats.like_count;
    if (cmp.lhs) {
        if (cmp.lhs->first.agg != Agg::none) ++stats.agg_count;
        if (cmp.lhs->arith && cmp.lhs->arith->rhs.agg != Agg::none) ++stats.agg_count;
    }
    for (const sql::Operand& op : cmp.rhs) {
        if (op.subquery) ++stats.subquery_count;
        if (op.value && op.value->first.agg != Agg::none) ++stats.agg_count;
    }
}

void count_value_unit_aggs(const ValueUnit& vu, CoreStats& stats) {
    if (vu.first.agg != Agg::none) ++stats.agg_count;
    if (vu.arith && vu.arith->rhs.agg != Agg::none) ++stats.agg_count;
}

}  // namespace

DifficultyCounts difficulty_counts(const QueryAst& gold) {
    DifficultyCounts counts;
    const SelectCore& core = gold.leftmost_core();
    if (gold.set_expr) ++counts.nesting_components;

    CoreStats stats;
    for (const TableEntry& entry : core.from) {
        if (entry.is_subquery) ++stats.subquery_count;
        if (entry.join_cond) scan_condition(*entry.join_cond, stats, nullptr);
    }
    if (core.where) scan_condition(*core.where, stats, &stats.where_leaves);
    if (core.having) scan_condition(*core.having, stats, nullptr);
    for (const SelectItem& item : core.items) {
        if (item.agg != Agg::none) ++stats.agg_count;
        count_value_unit_aggs(item.value, stats);
    }
    for (const ColUnit& cu : core.group_by)
        if (cu.agg != Agg::none) ++stats.agg_count;
    for (const sql::OrderItem& item : core.order_by) count_value_unit_aggs(item.value, stats);

    counts.clause_components = (core.where ? 1 : 0) + (core.group_by.empty() ? 0 : 1) +
                               (core.order_by.empty() ? 0 : 1) + (core.limit ? 1 : 0) +
                               static_cast<int>(core.from.size()) - 1 + stats.or_count +
                               stats.like_count;
    counts.nesting_components += stats.subquery_count;
    counts.extra_components = (stats.agg_count > 1 ? 1 : 0) + (core.items.size() > 1 ? 1 : 0) +
                              (stats.where_leaves > 1 ? 1 : 0) + (core.group_by.size() > 1 ? 1 : 0);
    return counts;
}

DifficultyLevel classify_difficulty(const QueryAst& gold) {
    DifficultyCounts c = difficulty_counts(gold);
    const int c1 = c.clause_components, c2 = c.nesting_components, c3 = c.extra_components;
    if (c1 <= 1 && c2 == 0 && c3 == 0) return DifficultyLevel::easy;
    if (c2 == 0 && ((c3 <= 2 && c1 <= 1) || (c1 <= 2 && c3 < 2))) return DifficultyLevel::medium;
    if ((c2 == 0 && ((c3 > 2 && c1 <= 2) || (c1 > 2 && c1 <= 3 && c3 <= 2))) ||
        (c1 <= 1 && c3 == 0 && c2 <= 1))
        return DifficultyLevel::hard;
    return DifficultyLevel::extra;
}

EvalReport evaluate(const ExampleSet& gold, const std::vector<std::string>& predictions,
                    const SchemaCatalog& catalog, unsigned jobs) {
    if (predictions.size() != gold.size())
        throw UsageError("prediction count (" + std::to_string(predictions.size()) +
                         ") does not match gold example count (" + std::to_string(gold.size()) +
                         ")");
    EvalReport report;
    report.verdicts.resize(gold.size());

    parallel_for(gold.size(), jobs, [&](std::size_t i) {
        const Example& e = gold.examples[i];
        const DatabaseSchema* db = catalog.find(e.db_id);
        if (!db)
            throw ValidationError("gold example " + std::to_string(i) +
                                  " references unknown database '" + e.db_id + "'");
        QueryAst gold_ast;
        try {
            gold_ast = sql::parse_sql(e.query, *db);
        } catch (const Error& err) {
            throw ValidationError("gold query of example " + std::to_string(i) +
                                  " does not parse: " + err.what());
        }
        ExampleVerdict verdict;
        verdict.index = i;
        verdict.difficulty = classify_difficulty(gold_ast);
        try {
            QueryAst pred_ast = sql::parse_sql(predictions[i], *db);
            verdict.matched =
                exact_set_match(canonicalize(gold_ast, *db), canonicalize(pred_ast, *db));
        } catch (const Error& err) {
            verdict.matched = false;
            verdict.error = err.what();
        }
        report.verdicts[i] = std::move(verdict);
    });

    for (const ExampleVerdict& v : report.verdicts) {
        auto& bucket = report.by_difficulty[static_cast<std::size_t>(v.difficulty)];
        ++bucket.count;
        ++report.all.count;
        if (v.matched) {
            ++bucket.matched;
            ++report.all.matched;
        }
    }
    return report;
}

std::vector<std::string> load_predictions(const std::string& path) {
    std::string text = read_text_file(path);
    std::vector<std::string> lines;
    std::string line;
    for (char c : text) {
        if (c == '\n') {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            lines.push_back(std::move(line));
            line.clear();
        } else {
            line += c;
        }
    }
    if (!line.empty()) {
        if (line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

}  // namespace sqlfit
