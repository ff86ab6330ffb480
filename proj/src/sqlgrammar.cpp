#include "sqlfit/sqlgrammar.hpp"

#include <array>
#include <cctype>
#include <sstream>

#include "sqlfit/util.hpp"

namespace sqlfit::sql {

std::string to_string(Agg a) {
    switch (a) {
        case Agg::none: return "";
        case Agg::max: return "MAX";
        case Agg::min: return "MIN";
        case Agg::count: return "COUNT";
        case Agg::sum: return "SUM";
        case Agg::avg: return "AVG";
    }
    return "";
}

std::string to_string(ArithOp op) {
    switch (op) {
        case ArithOp::plus: return "+";
        case ArithOp::minus: return "-";
        case ArithOp::times: return "*";
        case ArithOp::divide: return "/";
    }
    return "?";
}

std::string to_string(CmpOp op) {
    switch (op) {
        case CmpOp::between: return "BETWEEN";
        case CmpOp::eq: return "=";
        case CmpOp::gt: return ">";
        case CmpOp::lt: return "<";
        case CmpOp::ge: return ">=";
        case CmpOp::le: return "<=";
        case CmpOp::ne: return "!=";
        case CmpOp::in: return "IN";
        case CmpOp::like: return "LIKE";
        case CmpOp::is: return "IS";
        case CmpOp::exists: return "EXISTS";
    }
    return "?";
}

std::string to_string(OrderDir dir) { return dir == OrderDir::asc ? "ASC" : "DESC"; }

// ------------------------------------------------------------- deep equality

bool Operand::operator==(const Operand& other) const {
    if (literal != other.literal || value != other.value) return false;
    if (!subquery != !other.subquery) return false;
    return !subquery || *subquery == *other.subquery;
}

bool BoolExpr::operator==(const BoolExpr& other) const {
    if (op != other.op) return false;
    return lhs && other.lhs && rhs && other.rhs && *lhs == *other.lhs && *rhs == *other.rhs;
}

bool TableEntry::operator==(const TableEntry& other) const {
    if (is_subquery != other.is_subquery || table_index != other.table_index ||
        !iequals(table_text, other.table_text) || alias != other.alias)
        return false;
    if (!subquery != !other.subquery || !join_cond != !other.join_cond) return false;
    if (subquery && !(*subquery == *other.subquery)) return false;
    if (join_cond && !(*join_cond == *other.join_cond)) return false;
    return true;
}

bool SelectCore::operator==(const SelectCore& other) const {
    if (distinct != other.distinct || items != other.items || from != other.from ||
        group_by != other.group_by || order_by != other.order_by || limit != other.limit)
        return false;
    if (!where != !other.where || !having != !other.having) return false;
    if (where && !(*where == *other.where)) return false;
    if (having && !(*having == *other.having)) return false;
    return true;
}

bool QueryAst::SetExpr::operator==(const SetExpr& other) const {
    return op == other.op && lhs && other.lhs && rhs && other.rhs && *lhs == *other.lhs &&
           *rhs == *other.rhs;
}

const SelectCore& QueryAst::leftmost_core() const {
    const QueryAst* q = this;
    while (q->set_expr) q = q->set_expr->lhs.get();
    return *q->core;
}

// --------------------------------------------------------------------- lexer

namespace {

struct Token {
    enum class Kind { word, number, string, punct, end };
    Kind kind = Kind::end;
    std::string text;   // as written (strings: unquoted content)
    std::string lower;  // lowercase form, for keyword and name matching
    std::size_t offset = 0;
};

bool word_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

std::vector<Token> lex(const std::string& text) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        Token tok;
        tok.offset = i;
        if (word_start(c)) {
            std::size_t start = i;
            while (i < n && word_char(text[i])) ++i;
            tok.kind = Token::Kind::word;
            tok.text = text.substr(start, i - start);
            tok.lower = to_lower(tok.text);
        } else if (digit(c) || (c == '.' && i + 1 < n && digit(text[i + 1]))) {
            std::size_t start = i;
            while (i < n && digit(text[i])) ++i;
            if (i < n && text[i] == '.') {
                ++i;
                while (i < n && digit(text[i])) ++i;
            }
            tok.kind = Token::Kind::number;
            tok.text = text.substr(start, i - start);
            tok.lower = tok.text;
        } else if (c == '\'' || c == '"') {
            char quote = c;
            ++i;
            std::string value;
            bool closed = false;
            while (i < n) {
                if (text[i] == quote) {
                    if (i + 1 < n && text[i + 1] == quote) {  // doubled quote escape
                        value += quote;
                        i += 2;
                        continue;
                    }
                    ++i;
                    closed = true;
                    break;
                }
                value += text[i++];
            }
            if (!closed) throw ParseError("unterminated string literal", tok.offset);
            tok.kind = Token::Kind::string;
            tok.text = value;
            tok.lower = value;
        } else {
            static const char* two_char[] = {"!=", "<>", "<=", ">="};
            std::string pair = text.substr(i, 2);
            std::string sym;
            for (const char* p : two_char) {
                if (pair == p) sym = p;
            }
            if (sym.empty()) {
                static const std::string singles = "()<>=,;*+-/.";
                if (singles.find(c) == std::string::npos)
                    throw ParseError(std::string("unexpected character '") + c + "' in query",
                                     tok.offset);
                sym = std::string(1, c);
            }
            i += sym.size();
            tok.kind = Token::Kind::punct;
            tok.text = sym == "<>" ? "!=" : sym;
            tok.lower = tok.text;
        }
        out.push_back(std::move(tok));
    }
    Token end_tok;
    end_tok.kind = Token::Kind::end;
    end_tok.offset = n;
    out.push_back(end_tok);
    return out;
}

// -------------------------------------------------------------------- parser

const std::array<std::pair<const char*, Agg>, 5> kAggs = {{{"max", Agg::max},
                                                           {"min", Agg::min},
                                                           {"count", Agg::count},
                                                           {"sum", Agg::sum},
                                                           {"avg", Agg::avg}}};

// Words that terminate a table reference, so they are never read as a bare
// (AS-less) alias.
bool reserved_after_table(const std::string& w) {
    static const std::set<std::string> words = {
        "join",  "inner", "left",  "right",     "full",  "cross", "outer", "natural",
        "on",    "where", "group", "having",    "order", "limit", "and",   "or",
        "as",    "select", "from", "intersect", "union", "except", "not",  "set"};
    return words.count(w) > 0;
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    QueryAst parse_query() {
        QueryAst q = parse_set_expr();
        accept_punct(";");
        if (!at_end())
            throw ParseError("unexpected trailing input '" + peek().text + "'", peek().offset);
        return q;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    bool at_end() const { return peek().kind == Token::Kind::end; }
    const Token& advance() { return toks_[pos_++]; }

    bool is_word(const char* w, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == Token::Kind::word && t.lower == w;
    }
    bool is_punct(const char* p, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == Token::Kind::punct && t.text == p;
    }
    bool accept_word(const char* w) {
        if (!is_word(w)) return false;
        ++pos_;
        return true;
    }
    bool accept_punct(const char* p) {
        if (!is_punct(p)) return false;
        ++pos_;
        return true;
    }
    void expect_word(const char* w) {
        if (!accept_word(w))
            throw ParseError("expected '" + to_upper(w) + "' but found '" + peek().text + "'",
                             peek().offset);
    }
    void expect_punct(const char* p) {
        if (!accept_punct(p))
            throw ParseError("expected '" + std::string(p) + "' but found '" + peek().text + "'",
                             peek().offset);
    }
    Token expect_name(const char* what) {
        if (peek().kind != Token::Kind::word)
            throw ParseError("expected " + std::string(what) + " but found '" + peek().text + "'",
                             peek().offset);
        return advance();
    }

    std::optional<Agg> agg_ahead() const {
        if (peek().kind != Token::Kind::word || !is_punct("(", 1)) return std::nullopt;
        for (const auto& [name, agg] : kAggs) {
            if (peek().lower == name) return agg;
        }
        return std::nullopt;
    }

    QueryAst parse_set_expr() {
        QueryAst left = parse_set_arm();
        while (true) {
            SetOp op;
            if (accept_word("intersect")) {
                op = SetOp::intersect;
            } else if (accept_word("union")) {
                op = accept_word("all") ? SetOp::union_all : SetOp::union_;
            } else if (accept_word("except")) {
                op = SetOp::except;
            } else {
                break;
            }
            QueryAst right = parse_set_arm();
            QueryAst combined;
            combined.set_expr = QueryAst::SetExpr{op, std::make_shared<QueryAst>(std::move(left)),
                                                  std::make_shared<QueryAst>(std::move(right))};
            left = std::move(combined);
        }
        return left;
    }

    QueryAst parse_set_arm() {
        if (is_punct("(") && is_word("select", 1)) {
            expect_punct("(");
            QueryAst q = parse_set_expr();
            expect_punct(")");
            return q;
        }
        QueryAst q;
        q.core = parse_core();
        return q;
    }

    SelectCore parse_core() {
        SelectCore core;
        expect_word("select");
        core.distinct = accept_word("distinct");
        core.items.push_back(parse_select_item());
        while (accept_punct(",")) core.items.push_back(parse_select_item());
        expect_word("from");
        core.from.push_back(parse_table_entry());
        while (true) {
            bool inner = is_word("inner") && is_word("join", 1);
            if (inner) advance();
            if (!accept_word("join")) break;
            TableEntry entry = parse_table_entry();
            if (accept_word("on")) entry.join_cond = std::make_shared<Condition>(parse_condition());
            core.from.push_back(std::move(entry));
        }
        if (accept_word("where"))
            core.where = std::make_shared<Condition>(parse_condition());
        if (accept_word("group")) {
            expect_word("by");
            core.group_by.push_back(parse_col_operand());
            while (accept_punct(",")) core.group_by.push_back(parse_col_operand());
        }
        if (accept_word("having"))
            core.having = std::make_shared<Condition>(parse_condition());
        if (accept_word("order")) {
            expect_word("by");
            core.order_by.push_back(parse_order_item());
            while (accept_punct(",")) core.order_by.push_back(parse_order_item());
        }
        if (accept_word("limit")) {
            if (peek().kind != Token::Kind::number)
                throw ParseError("expected a number after LIMIT", peek().offset);
            core.limit = std::stoll(advance().text);
        }
        return core;
    }

    SelectItem parse_select_item() {
        SelectItem item;
        if (auto agg = agg_ahead()) {
            advance();
            expect_punct("(");
            bool distinct = accept_word("distinct");
            ValueUnit vu = parse_value_unit();
            expect_punct(")");
            if (!vu.arith && vu.first.agg == Agg::none) {
                vu.first.agg = *agg;
                vu.first.distinct = vu.first.distinct || distinct;
            } else {
                item.agg = *agg;
                item.distinct = distinct;
            }
            item.value = std::move(vu);
            // Arithmetic may continue past the aggregate, as in max(a) - min(a).
            if (auto op = accept_arith_op()) {
                if (item.agg != Agg::none || item.value.arith)
                    throw ParseError("arithmetic deeper than one operator is not supported",
                                     peek().offset);
                item.value.arith = ValueUnit::Arith{*op, parse_col_operand()};
            }
        } else {
            item.value = parse_value_unit();
        }
        return item;
    }

    std::optional<ArithOp> accept_arith_op() {
        if (accept_punct("+")) return ArithOp::plus;
        if (accept_punct("-")) return ArithOp::minus;
        if (accept_punct("*")) return ArithOp::times;
        if (accept_punct("/")) return ArithOp::divide;
        return std::nullopt;
    }

    OrderItem parse_order_item() {
        OrderItem item;
        item.value = parse_value_unit();
        if (accept_word("desc")) item.dir = OrderDir::desc;
        else if (accept_word("asc")) item.dir = OrderDir::asc;
        return item;
    }

    ValueUnit parse_value_unit() {
        ValueUnit vu;
        if (is_punct("(") && !is_word("select", 1)) {
            expect_punct("(");
            vu = parse_value_unit();
            expect_punct(")");
        } else {
            vu.first = parse_col_operand();
        }
        if (auto op = accept_arith_op()) {
            if (vu.arith)
                throw ParseError("arithmetic deeper than one operator is not supported",
                                 peek().offset);
            vu.arith = ValueUnit::Arith{*op, parse_col_operand()};
        }
        return vu;
    }

    ColUnit parse_col_operand() {
        ColUnit unit;
        if (auto agg = agg_ahead()) {
            unit.agg = *agg;
            advance();
            expect_punct("(");
            unit.distinct = accept_word("distinct");
            unit.col = parse_column_ref();
            expect_punct(")");
        } else {
            unit.col = parse_column_ref();
        }
        return unit;
    }

    ColumnRefExpr parse_column_ref() {
        ColumnRefExpr ref;
        if (accept_punct("*")) {
            ref.column_text = "*";
            return ref;
        }
        Token first = expect_name("a column name");
        if (accept_punct(".")) {
            ref.qualifier = first.lower;
            if (accept_punct("*")) {
                ref.column_text = "*";
            } else {
                ref.column_text = expect_name("a column name").lower;
                ref.column_index = -1;
            }
        } else {
            ref.column_text = first.lower;
            ref.column_index = -1;
        }
        return ref;
    }

    TableEntry parse_table_entry() {
        TableEntry entry;
        if (is_punct("(") && is_word("select", 1)) {
            expect_punct("(");
            entry.is_subquery = true;
            entry.subquery = std::make_shared<QueryAst>(parse_set_expr());
            expect_punct(")");
        } else {
            entry.table_text = expect_name("a table name").text;
        }
        if (accept_word("as")) {
            entry.alias = expect_name("an alias").lower;
        } else if (peek().kind == Token::Kind::word && !reserved_after_table(peek().lower)) {
            entry.alias = advance().lower;
        }
        return entry;
    }

    Condition parse_condition() { return parse_or(); }

    Condition parse_or() {
        Condition left = parse_and();
        while (accept_word("or")) {
            BoolExpr be;
            be.op = BoolExpr::Op::or_;
            be.lhs = std::make_shared<Condition>(std::move(left));
            be.rhs = std::make_shared<Condition>(parse_and());
            left = Condition{};
            left.boolean = std::move(be);
        }
        return left;
    }

    Condition parse_and() {
        Condition left = parse_predicate();
        while (accept_word("and")) {
            BoolExpr be;
            be.op = BoolExpr::Op::and_;
            be.lhs = std::make_shared<Condition>(std::move(left));
            be.rhs = std::make_shared<Condition>(parse_predicate());
            left = Condition{};
            left.boolean = std::move(be);
        }
        return left;
    }

    Condition parse_predicate() {
        Comparison cmp;
        if (is_word("exists") || (is_word("not") && is_word("exists", 1))) {
            cmp.negated = accept_word("not");
            expect_word("exists");
            cmp.op = CmpOp::exists;
            cmp.rhs.push_back(parse_subquery_operand());
            Condition c;
            c.comparison = std::move(cmp);
            return c;
        }
        cmp.lhs = parse_value_unit();
        if (accept_word("not")) {
            cmp.negated = true;
            if (!is_word("in") && !is_word("like") && !is_word("between"))
                throw ParseError("expected IN, LIKE or BETWEEN after NOT", peek().offset);
        }
        if (accept_word("between")) {
            cmp.op = CmpOp::between;
            cmp.rhs.push_back(parse_operand());
            expect_word("and");
            cmp.rhs.push_back(parse_operand());
        } else if (accept_word("in")) {
            cmp.op = CmpOp::in;
            if (is_punct("(") && is_word("select", 1)) {
                cmp.rhs.push_back(parse_subquery_operand());
            } else {
                expect_punct("(");
                cmp.rhs.push_back(parse_literal_operand());
                while (accept_punct(",")) cmp.rhs.push_back(parse_literal_operand());
                expect_punct(")");
            }
        } else if (accept_word("like")) {
            cmp.op = CmpOp::like;
            cmp.rhs.push_back(parse_operand());
        } else if (accept_word("is")) {
            cmp.op = CmpOp::is;
            cmp.negated = accept_word("not");
            expect_word("null");
            Operand null_op;
            null_op.literal = Literal{Literal::Kind::null, "NULL"};
            cmp.rhs.push_back(std::move(null_op));
        } else if (peek().kind == Token::Kind::punct) {
            std::string sym = peek().text;
            if (sym == "=") cmp.op = CmpOp::eq;
            else if (sym == "!=") cmp.op = CmpOp::ne;
            else if (sym == ">") cmp.op = CmpOp::gt;
            else if (sym == "<") cmp.op = CmpOp::lt;
            else if (sym == ">=") cmp.op = CmpOp::ge;
            else if (sym == "<=") cmp.op = CmpOp::le;
            else
                throw ParseError("expected a comparison operator, found '" + sym + "'",
                                 peek().offset);
            advance();
            cmp.rhs.push_back(parse_operand());
        } else {
            throw ParseError("expected a comparison operator, found '" + peek().text + "'",
                             peek().offset);
        }
        Condition c;
        c.comparison = std::move(cmp);
        return c;
    }

    Operand parse_subquery_operand() {
        expect_punct("(");
        Operand op;
        op.subquery = std::make_shared<QueryAst>(parse_set_expr());
        expect_punct(")");
        return op;
    }

    Operand parse_literal_operand() {
        Operand op;
        op.literal = parse_literal();
        return op;
    }

    Literal parse_literal() {
        if (peek().kind == Token::Kind::string) {
            return Literal{Literal::Kind::string, advance().text};
        }
        bool negative = false;
        if (is_punct("-") && peek(1).kind == Token::Kind::number) {
            advance();
            negative = true;
        } else if (is_punct("+") && peek(1).kind == Token::Kind::number) {
            advance();
        }
        if (peek().kind == Token::Kind::number) {
            std::string text = advance().text;
            if (negative) text = "-" + text;
            Literal::Kind kind = text.find('.') == std::string::npos ? Literal::Kind::integer
                                                                     : Literal::Kind::real;
            return Literal{kind, text};
        }
        if (accept_word("null")) return Literal{Literal::Kind::null, "NULL"};
        throw ParseError("expected a literal value, found '" + peek().text + "'", peek().offset);
    }

    Operand parse_operand() {
        if (is_punct("(") && is_word("select", 1)) return parse_subquery_operand();
        Operand op;
        const Token& t = peek();
        if (t.kind == Token::Kind::string || t.kind == Token::Kind::number ||
            is_word("null") ||
            ((is_punct("-") || is_punct("+")) && peek(1).kind == Token::Kind::number)) {
            op.literal = parse_literal();
            return op;
        }
        op.value = parse_value_unit();
        return op;
    }
};

// ---------------------------------------------------------------- resolution

struct ScopeEntry {
    std::string key;  // lowercase alias, or lowercase table name when unaliased
    int table_index = -1;
    const SelectCore* subquery = nullptr;  // output columns of a FROM subquery
};

struct Scope {
    const DatabaseSchema& schema;
    const Scope* parent = nullptr;
    std::vector<ScopeEntry> entries;
};

void resolve_query(QueryAst& q, const DatabaseSchema& schema, const Scope* parent);
void resolve_condition(Condition& cond, Scope& scope);

// A FROM-subquery output column that matches `name`: the select item whose
// underlying column is written with that name. Returns nullptr if nothing
// matches (computed outputs such as count(*) cannot be referenced by name).
const ColumnRefExpr* subquery_output(const SelectCore& core, const std::string& name) {
    for (const auto& item : core.items) {
        const ColumnRefExpr& col = item.value.first.col;
        if (!col.is_star() && col.column_text == name) return &col;
    }
    return nullptr;
}

void resolve_column(ColumnRefExpr& ref, Scope& scope) {
    if (ref.is_star()) {
        if (ref.qualifier.empty()) return;  // bare star: scope-wide, resolved at use sites
        for (const Scope* s = &scope; s; s = s->parent) {
            for (const auto& e : s->entries) {
                if (e.key != ref.qualifier) continue;
                ref.table_index = e.table_index;  // -1 for subquery aliases
                return;
            }
        }
        throw ResolutionError("unknown table or alias '" + ref.qualifier + "'");
    }
    if (!ref.qualifier.empty()) {
        for (const Scope* s = &scope; s; s = s->parent) {
            for (const auto& e : s->entries) {
                if (e.key != ref.qualifier) continue;
                if (e.subquery) {
                    const ColumnRefExpr* out = subquery_output(*e.subquery, ref.column_text);
                    if (!out)
                        throw ResolutionError("subquery alias '" + ref.qualifier +
                                              "' exposes no column '" + ref.column_text + "'");
                    ref.table_index = out->table_index;
                    ref.column_index = out->column_index;
                    return;
                }
                int ci = scope.schema.find_column(e.table_index, ref.column_text);
                if (ci < 0)
                    throw ResolutionError("table '" +
                                          scope.schema.tables[e.table_index].original_name +
                                          "' has no column '" + ref.column_text + "'");
                ref.table_index = e.table_index;
                ref.column_index = ci;
                return;
            }
        }
        throw ResolutionError("unknown table or alias '" + ref.qualifier + "'");
    }
    for (const Scope* s = &scope; s; s = s->parent) {
        struct Hit {
            std::string key;
            int table_index;
            int column_index;
        };
        std::vector<Hit> hits;
        for (const auto& e : s->entries) {
            if (e.subquery) {
                if (const ColumnRefExpr* out = subquery_output(*e.subquery, ref.column_text))
                    hits.push_back({e.key, out->table_index, out->column_index});
                continue;
            }
            int ci = s->schema.find_column(e.table_index, ref.column_text);
            if (ci >= 0) hits.push_back({e.key, e.table_index, ci});
        }
        if (hits.size() > 1) {
            std::ostringstream msg;
            msg << "ambiguous column '" << ref.column_text << "' (candidates:";
            for (const auto& h : hits) msg << " " << h.key << "." << ref.column_text;
            msg << ")";
            throw ResolutionError(msg.str());
        }
        if (hits.size() == 1) {
            ref.table_index = hits[0].table_index;
            ref.column_index = hits[0].column_index;
            return;
        }
    }
    throw ResolutionError("unknown column '" + ref.column_text + "'");
}

void resolve_value_unit(ValueUnit& vu, Scope& scope) {
    resolve_column(vu.first.col, scope);
    if (vu.arith) resolve_column(vu.arith->rhs.col, scope);
}

void resolve_operand(Operand& op, Scope& scope) {
    if (op.value) resolve_value_unit(*op.value, scope);
    if (op.subquery) resolve_query(*op.subquery, scope.schema, &scope);
}

void resolve_condition(Condition& cond, Scope& scope) {
    if (cond.boolean) {
        resolve_condition(*cond.boolean->lhs, scope);
        resolve_condition(*cond.boolean->rhs, scope);
        return;
    }
    Comparison& cmp = *cond.comparison;
    if (cmp.lhs) resolve_value_unit(*cmp.lhs, scope);
    for (Operand& op : cmp.rhs) resolve_operand(op, scope);
}

void resolve_core(SelectCore& core, const DatabaseSchema& schema, const Scope* parent) {
    Scope scope{schema, parent, {}};
    for (TableEntry& entry : core.from) {
        ScopeEntry se;
        if (entry.is_subquery) {
            resolve_query(*entry.subquery, schema, parent);
            se.subquery = &entry.subquery->leftmost_core();
            se.key = entry.alias;
        } else {
            int ti = schema.find_table(entry.table_text);
            if (ti < 0) throw ResolutionError("unknown table '" + entry.table_text + "'");
            entry.table_index = ti;
            se.table_index = ti;
            se.key = entry.alias.empty() ? to_lower(entry.table_text) : entry.alias;
        }
        if (!se.key.empty()) {
            for (const auto& existing : scope.entries) {
                if (existing.key == se.key)
                    throw ResolutionError("duplicate table alias '" + se.key + "' in FROM");
            }
        }
        scope.entries.push_back(se);
        if (entry.join_cond) resolve_condition(*entry.join_cond, scope);
    }
    for (SelectItem& item : core.items) resolve_value_unit(item.value, scope);
    if (core.where) resolve_condition(*core.where, scope);
    for (ColUnit& cu : core.group_by) resolve_column(cu.col, scope);
    if (core.having) resolve_condition(*core.having, scope);
    for (OrderItem& item : core.order_by) resolve_value_unit(item.value, scope);
}

void resolve_query(QueryAst& q, const DatabaseSchema& schema, const Scope* parent) {
    if (q.set_expr) {
        resolve_query(*q.set_expr->lhs, schema, parent);
        resolve_query(*q.set_expr->rhs, schema, parent);
        return;
    }
    resolve_core(*q.core, schema, parent);
}

}  // namespace

QueryAst parse_sql(const std::string& query, const DatabaseSchema& schema) {
    Parser parser(lex(query));
    QueryAst ast = parser.parse_query();
    resolve_query(ast, schema, nullptr);
    return ast;
}

// ------------------------------------------------------------------ renderer

namespace {

std::string render_query(const QueryAst& ast);
std::string render_condition(const Condition& cond);

std::string render_column(const ColumnRefExpr& ref) {
    if (ref.qualifier.empty()) return ref.column_text;
    return ref.qualifier + "." + ref.column_text;
}

std::string render_col_unit(const ColUnit& unit) {
    std::string col = render_column(unit.col);
    if (unit.agg == Agg::none)
        return unit.distinct ? "DISTINCT " + col : col;
    return to_string(unit.agg) + "(" + (unit.distinct ? "DISTINCT " : "") + col + ")";
}

std::string render_value_unit(const ValueUnit& vu) {
    std::string out = render_col_unit(vu.first);
    if (vu.arith)
        out += " " + to_string(vu.arith->op) + " " + render_col_unit(vu.arith->rhs);
    return out;
}

std::string render_select_item(const SelectItem& item) {
    if (item.agg == Agg::none) return render_value_unit(item.value);
    return to_string(item.agg) + "(" + (item.distinct ? "DISTINCT " : "") +
           render_value_unit(item.value) + ")";
}

std::string render_literal(const Literal& lit) {
    switch (lit.kind) {
        case Literal::Kind::null: return "NULL";
        case Literal::Kind::string: {
            std::string escaped;
            for (char c : lit.text) {
                if (c == '"') escaped += '"';
                escaped += c;
            }
            return "\"" + escaped + "\"";
        }
        default: return lit.text;
    }
}

std::string render_operand(const Operand& op) {
    if (op.literal) return render_literal(*op.literal);
    if (op.value) return render_value_unit(*op.value);
    return "(" + render_query(*op.subquery) + ")";
}

std::string render_comparison(const Comparison& cmp) {
    switch (cmp.op) {
        case CmpOp::exists:
            return std::string(cmp.negated ? "NOT " : "") + "EXISTS " + render_operand(cmp.rhs[0]);
        case CmpOp::between:
            return render_value_unit(*cmp.lhs) + (cmp.negated ? " NOT" : "") + " BETWEEN " +
                   render_operand(cmp.rhs[0]) + " AND " + render_operand(cmp.rhs[1]);
        case CmpOp::in: {
            std::string rhs;
            if (cmp.rhs.size() == 1 && cmp.rhs[0].subquery) {
                rhs = render_operand(cmp.rhs[0]);
            } else {
                std::vector<std::string> parts;
                for (const Operand& op : cmp.rhs) parts.push_back(render_operand(op));
                rhs = "(" + join(parts, ", ") + ")";
            }
            return render_value_unit(*cmp.lhs) + (cmp.negated ? " NOT" : "") + " IN " + rhs;
        }
        case CmpOp::like:
            return render_value_unit(*cmp.lhs) + (cmp.negated ? " NOT" : "") + " LIKE " +
                   render_operand(cmp.rhs[0]);
        case CmpOp::is:
            return render_value_unit(*cmp.lhs) + " IS " + (cmp.negated ? "NOT " : "") + "NULL";
        default:
            return render_value_unit(*cmp.lhs) + " " + to_string(cmp.op) + " " +
                   render_operand(cmp.rhs[0]);
    }
}

std::string render_condition(const Condition& cond) {
    if (cond.boolean) {
        const char* glue = cond.boolean->op == BoolExpr::Op::and_ ? " AND " : " OR ";
        return render_condition(*cond.boolean->lhs) + glue + render_condition(*cond.boolean->rhs);
    }
    return render_comparison(*cond.comparison);
}

std::string render_table_entry(const TableEntry& entry) {
    std::string out = entry.is_subquery ? "(" + render_query(*entry.subquery) + ")"
                                        : to_lower(entry.table_text);
    if (!entry.alias.empty()) out += " AS " + entry.alias;
    return out;
}

std::string render_core(const SelectCore& core) {
    std::string out = "SELECT ";
    if (core.distinct) out += "DISTINCT ";
    std::vector<std::string> items;
    for (const auto& item : core.items) items.push_back(render_select_item(item));
    out += join(items, ", ") + " FROM " + render_table_entry(core.from[0]);
    for (std::size_t i = 1; i < core.from.size(); ++i) {
        out += " JOIN " + render_table_entry(core.from[i]);
        if (core.from[i].join_cond) out += " ON " + render_condition(*core.from[i].join_cond);
    }
    if (core.where) out += " WHERE " + render_condition(*core.where);
    if (!core.group_by.empty()) {
        std::vector<std::string> cols;
        for (const auto& cu : core.group_by) cols.push_back(render_col_unit(cu));
        out += " GROUP BY " + join(cols, ", ");
    }
    if (core.having) out += " HAVING " + render_condition(*core.having);
    if (!core.order_by.empty()) {
        std::vector<std::string> parts;
        for (const auto& item : core.order_by)
            parts.push_back(render_value_unit(item.value) + " " + to_string(item.dir));
        out += " ORDER BY " + join(parts, ", ");
    }
    if (core.limit) out += " LIMIT " + std::to_string(*core.limit);
    return out;
}

std::string render_query(const QueryAst& ast) {
    if (!ast.set_expr) return render_core(*ast.core);
    const auto& se = *ast.set_expr;
    std::string op;
    switch (se.op) {
        case SetOp::intersect: op = "INTERSECT"; break;
        case SetOp::union_: op = "UNION"; break;
        case SetOp::union_all: op = "UNION ALL"; break;
        case SetOp::except: op = "EXCEPT"; break;
    }
    return render_query(*se.lhs) + " " + op + " " + render_query(*se.rhs);
}

}  // namespace

std::string render_sql(const QueryAst& ast) { return render_query(ast); }

// ------------------------------------------------------------ ref extraction

namespace {

void collect_query(const QueryAst& ast, const DatabaseSchema& schema, RefSet& out);

void collect_core(const SelectCore& core, const DatabaseSchema& schema, RefSet& out) {
    std::vector<int> physical;
    for (const TableEntry& entry : core.from) {
        if (entry.is_subquery) {
            collect_query(*entry.subquery, schema, out);
        } else {
            physical.push_back(entry.table_index);
            out.tables.insert(schema.tables[entry.table_index].original_name);
        }
    }

    // width_observed: the star's full column list is visible in the result.
    // count(*) and friends only observe row counts, so they never force a
    // table's full width to survive pruning.
    auto add_column = [&](const ColumnRefExpr& ref, bool width_observed) {
        if (ref.is_star()) {
            out.uses_star = true;
            if (ref.table_index >= 0) {
                const std::string& name = schema.tables[ref.table_index].original_name;
                out.tables.insert(name);
                if (width_observed) out.star_tables.insert(name);
            } else if (ref.qualifier.empty() && width_observed) {
                for (int ti : physical)
                    out.star_tables.insert(schema.tables[ti].original_name);
            }
            return;
        }
        if (ref.column_index < 1) return;  // unresolvable subquery outputs
        const std::string& table = schema.tables[ref.table_index].original_name;
        out.tables.insert(table);
        out.columns.emplace(table, schema.columns[ref.column_index].original_name);
    };
    auto add_col_unit = [&](const ColUnit& cu, bool aggregated) {
        add_column(cu.col, !aggregated && cu.agg == Agg::none);
    };
    auto add_value_unit = [&](const ValueUnit& vu, bool aggregated) {
        add_col_unit(vu.first, aggregated);
        if (vu.arith) add_col_unit(vu.arith->rhs, aggregated);
    };
    std::function<void(const Condition&)> add_condition = [&](const Condition& cond) {
        if (cond.boolean) {
            add_condition(*cond.boolean->lhs);
            add_condition(*cond.boolean->rhs);
            return;
        }
        const Comparison& cmp = *cond.comparison;
        if (cmp.lhs) add_value_unit(*cmp.lhs, false);
        for (const Operand& op : cmp.rhs) {
            if (op.value) add_value_unit(*op.value, false);
            if (op.subquery) collect_query(*op.subquery, schema, out);
        }
    };

    for (const TableEntry& entry : core.from) {
        if (entry.join_cond) add_condition(*entry.join_cond);
    }
    for (const SelectItem& item : core.items)
        add_value_unit(item.value, item.agg != Agg::none);
    if (core.where) add_condition(*core.where);
    for (const ColUnit& cu : core.group_by) add_col_unit(cu, false);
    if (core.having) add_condition(*core.having);
    for (const OrderItem& item : core.order_by) add_value_unit(item.value, false);
}

void collect_query(const QueryAst& ast, const DatabaseSchema& schema, RefSet& out) {
    if (ast.set_expr) {
        collect_query(*ast.set_expr->lhs, schema, out);
        collect_query(*ast.set_expr->rhs, schema, out);
        return;
    }
    collect_core(*ast.core, schema, out);
}

}  // namespace

RefSet extract_refs(const QueryAst& ast, const DatabaseSchema& schema) {
    RefSet out;
    collect_query(ast, schema, out);
    return out;
}

RefSet extract_refs(const std::string& query, const DatabaseSchema& schema) {
    return extract_refs(parse_sql(query, schema), schema);
}

}  // namespace sqlfit::sql
