#pragma once

// Parser, canonical renderer, and schema-reference extraction for the SQL
// subset that appears in Spider-style corpora: single SELECT cores connected
// by INTERSECT / UNION [ALL] / EXCEPT, inner JOIN chains, WHERE / GROUP BY /
// HAVING / ORDER BY / LIMIT, aggregates, arithmetic between two column
// operands, BETWEEN / IN / LIKE / IS NULL / EXISTS, and nested subqueries.
//
// Parsing always resolves column and table references against a concrete
// DatabaseSchema; a query that names unknown tables or columns does not
// parse. Every resolved column carries the schema indices it points at, so
// downstream passes (usage profiling, pruning, evaluation) never re-derive
// name lookups.

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sqlfit/corpus.hpp"
#include "sqlfit/errors.hpp"

namespace sqlfit::sql {

// Aggregate applied to a column operand. `none` means the bare column.
enum class Agg { none, max, min, count, sum, avg };

enum class ArithOp { plus, minus, times, divide };

enum class CmpOp { between, eq, gt, lt, ge, le, ne, in, like, is, exists };

enum class SetOp { intersect, union_, union_all, except };

enum class OrderDir { asc, desc };

std::string to_string(Agg a);
std::string to_string(ArithOp op);
std::string to_string(CmpOp op);
std::string to_string(OrderDir dir);

struct SelectCore;
struct QueryAst;
using SubqueryPtr = std::shared_ptr<QueryAst>;

// A column mention, resolved against the schema. `column_index` 0 is the
// star column; a star qualified with a table ("t.*") keeps the qualifier's
// table index while still pointing at column 0. Columns produced by a
// FROM-subquery alias have table_index -1 and carry the subquery's output
// column resolution in `column_index`.
struct ColumnRefExpr {
    std::string qualifier;    // alias or table text as written, lowercased ("" if bare)
    std::string column_text;  // column as written, lowercased ("*" for star)
    int table_index = -1;     // schema table the reference lands on (-1 for bare star)
    int column_index = 0;     // schema column index (0 for star)

    bool is_star() const { return column_text == "*"; }
    bool operator==(const ColumnRefExpr&) const = default;
};

struct ColUnit {
    Agg agg = Agg::none;
    bool distinct = false;
    ColumnRefExpr col;

    bool operator==(const ColUnit&) const = default;
};

// A value expression: a column unit, optionally combined with a second one
// through an arithmetic operator (Spider never nests arithmetic deeper).
struct ValueUnit {
    ColUnit first;
    struct Arith {
        ArithOp op;
        ColUnit rhs;
        bool operator==(const Arith&) const = default;
    };
    std::optional<Arith> arith;

    bool operator==(const ValueUnit&) const = default;
};

// One projection of a SELECT list. Aggregates over a single column live in
// the ColUnit (`count(name)` sets value.first.agg); `agg` here is only set
// when the aggregate wraps an arithmetic unit, as in `sum(a - b)`, so every
// query has exactly one representation.
struct SelectItem {
    Agg agg = Agg::none;
    bool distinct = false;  // DISTINCT inside an arithmetic-wrapping aggregate
    ValueUnit value;

    bool operator==(const SelectItem&) const = default;
};

struct Literal {
    enum class Kind { string, integer, real, null };
    Kind kind = Kind::integer;
    std::string text;  // lexeme without quotes; numbers keep their spelling

    bool operator==(const Literal&) const = default;
};

struct Comparison;
struct BoolExpr;

// One side of a comparison: a literal, a column expression, or a subquery.
struct Operand {
    std::optional<Literal> literal;
    std::optional<ValueUnit> value;
    SubqueryPtr subquery;

    bool operator==(const Operand& other) const;
};

struct Comparison {
    bool negated = false;  // NOT IN, NOT LIKE, NOT BETWEEN, IS NOT NULL, NOT EXISTS
    CmpOp op = CmpOp::eq;
    std::optional<ValueUnit> lhs;  // absent for EXISTS
    std::vector<Operand> rhs;      // 1 operand; 2 for BETWEEN; n for IN (...)

    bool operator==(const Comparison&) const = default;
};

struct Condition;
using ConditionPtr = std::shared_ptr<Condition>;

struct BoolExpr {
    enum class Op { and_, or_ };
    Op op = Op::and_;
    ConditionPtr lhs;
    ConditionPtr rhs;

    bool operator==(const BoolExpr& other) const;
};

struct Condition {
    // Exactly one of the two is active.
    std::optional<Comparison> comparison;
    std::optional<BoolExpr> boolean;

    bool operator==(const Condition&) const = default;
};

// One entry of the FROM clause: a physical table or a parenthesized
// subquery, either optionally aliased, with the ON condition that joined it
// to the chain (absent for the first entry and for unconditioned joins).
struct TableEntry {
    bool is_subquery = false;
    int table_index = -1;       // schema index for physical tables
    std::string table_text;     // original-cased text as written
    std::string alias;          // lowercased alias ("" if none)
    SubqueryPtr subquery;       // for FROM (SELECT ...)
    ConditionPtr join_cond;     // ON ... attached to this entry

    bool operator==(const TableEntry& other) const;
};

struct OrderItem {
    ValueUnit value;
    OrderDir dir = OrderDir::asc;

    bool operator==(const OrderItem&) const = default;
};

struct SelectCore {
    bool distinct = false;
    std::vector<SelectItem> items;
    std::vector<TableEntry> from;
    ConditionPtr where;
    std::vector<ColUnit> group_by;
    ConditionPtr having;
    std::vector<OrderItem> order_by;
    std::optional<long long> limit;

    bool operator==(const SelectCore& other) const;
};

struct QueryAst {
    // Either a single core, or a set operation over two subtrees.
    std::optional<SelectCore> core;
    struct SetExpr {
        SetOp op;
        SubqueryPtr lhs;
        SubqueryPtr rhs;
        bool operator==(const SetExpr& other) const;
    };
    std::optional<SetExpr> set_expr;

    bool is_set_op() const { return set_expr.has_value(); }
    // The syntactically first SELECT core (left arm of nested set ops).
    const SelectCore& leftmost_core() const;

    bool operator==(const QueryAst&) const = default;
};

// Tables and columns a query touches, keyed by schema original names.
// `star_tables` lists the tables whose full column set a bare or qualified
// star exposes; they also appear in `tables`.
struct RefSet {
    std::set<std::string> tables;
    std::set<std::pair<std::string, std::string>> columns;  // (table, column)
    bool uses_star = false;
    std::set<std::string> star_tables;

    bool operator==(const RefSet&) const = default;
};

// Parses `query` and resolves every table and column reference against
// `schema`. Lexical or grammatical problems raise ParseError with the
// offending offset; unknown or ambiguous names raise ResolutionError.
QueryAst parse_sql(const std::string& query, const DatabaseSchema& schema);

// Canonical text form: uppercase keywords, lowercase identifiers, single
// spacing, explicit ASC/DESC, double-quoted strings. Rendering then
// reparsing yields an equal tree, and rendering is idempotent.
std::string render_sql(const QueryAst& ast);

// Every table and column the query references, including subqueries and set
// operation arms.
RefSet extract_refs(const QueryAst& ast, const DatabaseSchema& schema);

// Convenience: parse, then extract.
RefSet extract_refs(const std::string& query, const DatabaseSchema& schema);

}  // namespace sqlfit::sql
