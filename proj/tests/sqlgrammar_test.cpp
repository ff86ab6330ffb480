#include <doctest.h>

#include "sqlfit/sqlgrammar.hpp"
#include "support.hpp"

using namespace sqlfit;
using namespace sqlfit::sql;

namespace {

const DatabaseSchema& db(const std::string& id) { return fixture_catalog().at(id); }

std::string canon(const std::string& query, const std::string& db_id) {
    return render_sql(parse_sql(query, db(db_id)));
}

}  // namespace

TEST_CASE("every fixture gold query parses, and parse-render-parse is stable") {
    const SchemaCatalog& cat = fixture_catalog();
    for (const Example& e : fixture_examples().examples) {
        CAPTURE(e.query);
        QueryAst first = parse_sql(e.query, cat.at(e.db_id));
        std::string rendered = render_sql(first);
        QueryAst second = parse_sql(rendered, cat.at(e.db_id));
        CHECK(first == second);
        CHECK(render_sql(second) == rendered);  // rendering is idempotent
    }
}

TEST_CASE("canonical form uppercases keywords and lowercases identifiers") {
    CHECK(canon("select Name from SINGER where AGE > 20", "music_fest") ==
          "SELECT name FROM singer WHERE age > 20");
    CHECK(canon("SELECT T1.name FROM singer AS T1", "music_fest") ==
          "SELECT t1.name FROM singer AS t1");
    CHECK(canon("SELECT max(budget_in_billions) ,  min(budget_in_billions) FROM department",
                "government") ==
          "SELECT MAX(budget_in_billions), MIN(budget_in_billions) FROM department");
}

TEST_CASE("operator and quote spellings collapse to one form") {
    const DatabaseSchema& gov = db("government");
    CHECK(parse_sql("SELECT name FROM head WHERE age <> 50", gov) ==
          parse_sql("SELECT name FROM head WHERE age != 50", gov));
    CHECK(parse_sql("SELECT name FROM head WHERE born_state = 'Ohio'", gov) ==
          parse_sql("SELECT name FROM head WHERE born_state = \"Ohio\"", gov));
    CHECK(canon("SELECT name FROM head WHERE born_state = 'Ohio'", "government") ==
          "SELECT name FROM head WHERE born_state = \"Ohio\"");
}

TEST_CASE("order by directions render explicitly") {
    CHECK(canon("SELECT name FROM singer ORDER BY age", "music_fest") ==
          "SELECT name FROM singer ORDER BY age ASC");
    CHECK(canon("SELECT name FROM singer ORDER BY age DESC, name", "music_fest") ==
          "SELECT name FROM singer ORDER BY age DESC, name ASC");
}

TEST_CASE("aggregate structure lands in the column unit") {
    QueryAst q = parse_sql("SELECT count(DISTINCT country) FROM singer", db("music_fest"));
    const SelectCore& core = q.leftmost_core();
    REQUIRE(core.items.size() == 1);
    CHECK(core.items[0].agg == Agg::none);
    CHECK(core.items[0].value.first.agg == Agg::count);
    CHECK(core.items[0].value.first.distinct);
    CHECK(core.items[0].value.first.col.column_text == "country");
}

TEST_CASE("arithmetic between aggregates keeps both operands") {
    QueryAst q = parse_sql("SELECT max(capacity) - min(capacity) FROM venue", db("music_fest"));
    const SelectItem& item = q.leftmost_core().items[0];
    CHECK(item.value.first.agg == Agg::max);
    REQUIRE(item.value.arith.has_value());
    CHECK(item.value.arith->op == ArithOp::minus);
    CHECK(item.value.arith->rhs.agg == Agg::min);
    CHECK(render_sql(q) == "SELECT MAX(capacity) - MIN(capacity) FROM venue");
}

TEST_CASE("aggregates over arithmetic stay on the select item") {
    QueryAst q = parse_sql("SELECT sum(sales - year) FROM album", db("music_fest"));
    const SelectItem& item = q.leftmost_core().items[0];
    CHECK(item.agg == Agg::sum);
    CHECK(item.value.arith.has_value());
    CHECK(render_sql(q) == "SELECT SUM(sales - year) FROM album");
}

TEST_CASE("select-level DISTINCT absorbs the parenthesized column form") {
    QueryAst a = parse_sql("SELECT DISTINCT(country) FROM singer", db("music_fest"));
    QueryAst b = parse_sql("SELECT DISTINCT country FROM singer", db("music_fest"));
    CHECK(a == b);
    CHECK(render_sql(a) == "SELECT DISTINCT country FROM singer");
}

TEST_CASE("negated predicate forms render canonically") {
    CHECK(canon("SELECT name FROM singer WHERE name NOT LIKE 'A%'", "music_fest") ==
          "SELECT name FROM singer WHERE name NOT LIKE \"A%\"");
    CHECK(canon("SELECT name FROM singer WHERE age NOT BETWEEN 20 AND 30", "music_fest") ==
          "SELECT name FROM singer WHERE age NOT BETWEEN 20 AND 30");
    CHECK(canon("SELECT name FROM singer WHERE age IS NOT NULL", "music_fest") ==
          "SELECT name FROM singer WHERE age IS NOT NULL");
    CHECK(canon("SELECT name FROM singer WHERE country IN ('France', 'Japan')", "music_fest") ==
          "SELECT name FROM singer WHERE country IN (\"France\", \"Japan\")");
}

TEST_CASE("subqueries parse in every operand position") {
    const DatabaseSchema& music = db("music_fest");
    QueryAst scalar =
        parse_sql("SELECT name FROM singer WHERE age > (SELECT avg(age) FROM singer)", music);
    const Comparison& cmp = *scalar.leftmost_core().where->comparison;
    REQUIRE(cmp.rhs.size() == 1);
    CHECK(cmp.rhs[0].subquery != nullptr);

    QueryAst in_sub = parse_sql(
        "SELECT name FROM singer WHERE id NOT IN (SELECT singer_id FROM album)", music);
    CHECK(in_sub.leftmost_core().where->comparison->negated);

    QueryAst from_sub = parse_sql(
        "SELECT count(*) FROM (SELECT singer_id FROM album GROUP BY singer_id HAVING count(*) > 1)",
        music);
    CHECK(from_sub.leftmost_core().from[0].is_subquery);
}

TEST_CASE("set operations chain left-associatively") {
    QueryAst q = parse_sql(
        "SELECT name FROM singer UNION SELECT venue_name FROM venue "
        "EXCEPT SELECT city FROM venue",
        db("music_fest"));
    REQUIRE(q.is_set_op());
    CHECK(q.set_expr->op == SetOp::except);
    REQUIRE(q.set_expr->lhs->is_set_op());
    CHECK(q.set_expr->lhs->set_expr->op == SetOp::union_);
    CHECK(q.leftmost_core().items[0].value.first.col.column_text == "name");
    CHECK(render_sql(q) ==
          "SELECT name FROM singer UNION SELECT venue_name FROM venue "
          "EXCEPT SELECT city FROM venue");
}

TEST_CASE("UNION ALL is distinct from UNION") {
    const DatabaseSchema& music = db("music_fest");
    QueryAst all = parse_sql("SELECT name FROM singer UNION ALL SELECT city FROM venue", music);
    QueryAst plain = parse_sql("SELECT name FROM singer UNION SELECT city FROM venue", music);
    CHECK(all.set_expr->op == SetOp::union_all);
    CHECK(!(all == plain));
    CHECK(render_sql(all) == "SELECT name FROM singer UNION ALL SELECT city FROM venue");
}

TEST_CASE("boolean precedence puts AND above OR") {
    QueryAst q = parse_sql(
        "SELECT name FROM singer WHERE age < 18 OR age > 60 AND country = 'Japan'",
        db("music_fest"));
    const Condition& cond = *q.leftmost_core().where;
    REQUIRE(cond.boolean.has_value());
    CHECK(cond.boolean->op == BoolExpr::Op::or_);
    CHECK(cond.boolean->rhs->boolean.has_value());  // the AND subtree
    CHECK(render_sql(q) ==
          "SELECT name FROM singer WHERE age < 18 OR age > 60 AND country = \"Japan\"");
}

TEST_CASE("unknown names fail resolution") {
    const DatabaseSchema& music = db("music_fest");
    CHECK_THROWS_AS(parse_sql("SELECT nonexistent FROM singer", music), ResolutionError);
    CHECK_THROWS_AS(parse_sql("SELECT name FROM no_such_table", music), ResolutionError);
    CHECK_THROWS_AS(parse_sql("SELECT t9.name FROM singer AS t1", music), ResolutionError);
    CHECK_THROWS_AS(parse_sql("SELECT singer.capacity FROM singer", music), ResolutionError);
}

TEST_CASE("ambiguous unqualified columns are rejected with candidates") {
    try {
        parse_sql("SELECT id FROM singer JOIN album ON singer.id = album.singer_id",
                  db("music_fest"));
        FAIL("expected ResolutionError");
    } catch (const ResolutionError& e) {
        std::string msg = e.what();
        CHECK(msg.find("ambiguous") != std::string::npos);
        CHECK(msg.find("singer.id") != std::string::npos);
        CHECK(msg.find("album.id") != std::string::npos);
    }
}

TEST_CASE("duplicate aliases in one FROM clause are rejected") {
    CHECK_THROWS_AS(
        parse_sql("SELECT t1.name FROM singer AS t1 JOIN album AS t1 ON t1.id = t1.singer_id",
                  db("music_fest")),
        ResolutionError);
}

TEST_CASE("syntax errors carry the offending offset") {
    try {
        parse_sql("SELECT name FROM singer WHERE", db("music_fest"));
        FAIL("expected ParseError");
    } catch (const ResolutionError&) {
        FAIL("expected a plain ParseError");
    } catch (const ParseError& e) {
        CHECK(e.position() != ParseError::npos);
    }
    CHECK_THROWS_AS(parse_sql("", db("music_fest")), ParseError);
    CHECK_THROWS_AS(parse_sql("SELECT name FROM singer extra garbage ^", db("music_fest")),
                    ParseError);
    CHECK_THROWS_AS(parse_sql("SELECT name FROM singer WHERE name = 'unterminated",
                              db("music_fest")),
                    ParseError);
}

TEST_CASE("trailing semicolons are accepted") {
    CHECK(canon("SELECT name FROM singer;", "music_fest") == "SELECT name FROM singer");
}

TEST_CASE("resolved references carry schema indices") {
    const DatabaseSchema& gov = db("government");
    QueryAst q = parse_sql(
        "SELECT T1.name FROM department AS T1 JOIN management AS T2 "
        "ON T1.department_id = T2.department_id",
        gov);
    const SelectCore& core = q.leftmost_core();
    int dept = gov.find_table("department");
    CHECK(core.from[0].table_index == dept);
    const ColumnRefExpr& name_ref = core.items[0].value.first.col;
    CHECK(name_ref.table_index == dept);
    CHECK(gov.columns[name_ref.column_index].original_name == "name");
}

TEST_CASE("reference extraction finds tables and columns") {
    const DatabaseSchema& gov = db("government");
    RefSet refs = extract_refs("SELECT max(budget_in_billions), min(budget_in_billions) "
                               "FROM department", gov);
    CHECK(refs.tables == std::set<std::string>{"department"});
    CHECK(refs.columns ==
          std::set<std::pair<std::string, std::string>>{{"department", "budget_in_billions"}});
    CHECK(!refs.uses_star);
}

TEST_CASE("a bare star exposes every table in scope") {
    RefSet refs = extract_refs("SELECT * FROM singer", db("music_fest"));
    CHECK(refs.uses_star);
    CHECK(refs.star_tables == std::set<std::string>{"singer"});
    CHECK(refs.tables == std::set<std::string>{"singer"});

    RefSet join_refs = extract_refs(
        "SELECT * FROM singer AS t1 JOIN album AS t2 ON t1.id = t2.singer_id",
        db("music_fest"));
    CHECK(join_refs.star_tables == std::set<std::string>{"album", "singer"});
}

TEST_CASE("a star under an aggregate observes rows, not columns") {
    // count(*) survives any column pruning, so it must not pin table widths.
    RefSet refs = extract_refs("SELECT count(*) FROM singer", db("music_fest"));
    CHECK(refs.uses_star);
    CHECK(refs.star_tables.empty());
    CHECK(refs.tables == std::set<std::string>{"singer"});

    RefSet having_refs = extract_refs(
        "SELECT country FROM singer GROUP BY country HAVING count(*) > 2", db("music_fest"));
    CHECK(having_refs.star_tables.empty());
}

TEST_CASE("a qualified star exposes just its table") {
    RefSet refs = extract_refs(
        "SELECT t1.* FROM singer AS t1 JOIN album AS t2 ON t1.id = t2.singer_id",
        db("music_fest"));
    CHECK(refs.uses_star);
    CHECK(refs.star_tables == std::set<std::string>{"singer"});
    CHECK(refs.tables == std::set<std::string>{"album", "singer"});
}

TEST_CASE("extraction descends into subqueries and set arms") {
    RefSet refs = extract_refs(
        "SELECT name FROM singer WHERE id IN (SELECT singer_id FROM album) "
        "UNION SELECT venue_name FROM venue",
        db("music_fest"));
    CHECK(refs.tables == std::set<std::string>{"album", "singer", "venue"});
    CHECK(refs.columns.count({"album", "singer_id"}) == 1);
    CHECK(refs.columns.count({"venue", "venue_name"}) == 1);
}

TEST_CASE("join conditions count as references") {
    RefSet refs = extract_refs(
        "SELECT t1.name FROM singer AS t1 JOIN album AS t2 ON t1.id = t2.singer_id",
        db("music_fest"));
    CHECK(refs.columns.count({"singer", "id"}) == 1);
    CHECK(refs.columns.count({"album", "singer_id"}) == 1);
}

TEST_CASE("unqualified columns resolve through FROM subquery outputs") {
    RefSet refs = extract_refs(
        "SELECT singer_id FROM (SELECT singer_id FROM album GROUP BY singer_id)",
        db("music_fest"));
    CHECK(refs.columns.count({"album", "singer_id"}) == 1);
}
