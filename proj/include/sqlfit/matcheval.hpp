#pragma once

// Exact set match without values: predicted SQL is decomposed into
// order-insensitive component sets with every literal replaced by a
// placeholder, then compared component by component against the gold
// decomposition. Includes the standard four-level difficulty classification
// of gold queries and whole-set evaluation with a per-difficulty breakdown.

#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sqlfit/corpus.hpp"
#include "sqlfit/sqlgrammar.hpp"

namespace sqlfit {

// Canonical decomposition of one query. Set-operation queries store the
// operator plus both arms' decompositions; plain queries fill the clause
// components. Elements are canonical strings over resolved
// "table.column" names with literals collapsed to VALUE, so equality of two
// ComponentSets is exactly the match decision. AND-connected WHERE/HAVING
// conjuncts form a set; an OR group collapses into a single element that
// preserves the OR structure (with sorted arms), since OR changes meaning.
// Subqueries nested in conditions are canonicalized inline into their
// conjunct's string; ORDER BY keeps its order and LIMIT only its presence.
struct ComponentSets {
    std::string set_op;               // "", "INTERSECT", "UNION", "UNION ALL", "EXCEPT"
    std::vector<ComponentSets> arms;  // exactly two when set_op is nonempty

    bool select_distinct = false;
    std::multiset<std::string> select_set;
    std::multiset<std::string> from_tables;
    std::multiset<std::string> where_set;
    std::multiset<std::string> group_by_set;
    std::multiset<std::string> having_set;
    std::vector<std::string> order_by;
    bool has_limit = false;
    std::set<std::string> keywords;  // clause/operator presence summary

    bool operator==(const ComponentSets&) const = default;
};

// Deterministic flat rendering of a decomposition; used to embed nested
// subqueries in conjunct strings and handy in test failure output.
std::string canonical_string(const ComponentSets& components);

ComponentSets canonicalize(const sql::QueryAst& ast, const DatabaseSchema& schema);

// True iff every component matches, recursively through set-operation arms.
// Symmetric and reflexive; literal values never participate.
bool exact_set_match(const ComponentSets& gold, const ComponentSets& pred);

enum class DifficultyLevel { easy, medium, hard, extra };

std::string to_string(DifficultyLevel level);

// The three component counts behind the difficulty rule, measured on the
// leftmost SELECT core of the gold query:
//   clause_components:  WHERE present + GROUP BY present + ORDER BY present
//                       + LIMIT present + number of JOINed tables beyond the
//                       first + OR connectives + LIKE predicates
//   nesting_components: subqueries in FROM/WHERE/HAVING/ON, plus 1 if the
//                       query is a set operation (regardless of chain length)
//   extra_components:   one each for: more than one aggregate in the query,
//                       more than one select column, more than one WHERE
//                       conjunct, more than one GROUP BY column
struct DifficultyCounts {
    int clause_components = 0;
    int nesting_components = 0;
    int extra_components = 0;
};

DifficultyCounts difficulty_counts(const sql::QueryAst& gold);

// Rule table (c1 = clause, c2 = nesting, c3 = extra):
//   easy    c1 <= 1 and c2 = 0 and c3 = 0
//   medium  c2 = 0 and (c3 <= 2 and c1 <= 1, or c1 <= 2 and c3 < 2)
//   hard    c2 = 0 and (c3 > 2 and c1 <= 2, or 2 < c1 <= 3 and c3 <= 2),
//           or c1 <= 1 and c3 = 0 and c2 <= 1
//   extra   everything beyond hard's bounds
// Tiers are tested in that order; the first that fits wins.
DifficultyLevel classify_difficulty(const sql::QueryAst& gold);

struct ExampleVerdict {
    std::size_t index = 0;
    DifficultyLevel difficulty = DifficultyLevel::easy;
    bool matched = false;
    std::string error;  // parse/resolution failure of the prediction, if any
};

struct EvalReport {
    struct Bucket {
        std::size_t count = 0;
        std::size_t matched = 0;
        double rate() const { return count == 0 ? 0.0 : double(matched) / double(count); }
    };

    std::array<Bucket, 4> by_difficulty;  // indexed by DifficultyLevel
    Bucket all;
    std::vector<ExampleVerdict> verdicts;

    const Bucket& bucket(DifficultyLevel level) const {
        return by_difficulty[static_cast<std::size_t>(level)];
    }
};

// Scores predictions[i] against gold example i. Predictions that fail to
// parse or resolve count as non-matches (the failure is recorded on the
// verdict); a gold query that fails is a corpus defect and throws. The
// prediction list must be exactly as long as the gold set.
EvalReport evaluate(const ExampleSet& gold, const std::vector<std::string>& predictions,
                    const SchemaCatalog& catalog, unsigned jobs = 1);

// One prediction per line, aligned with gold example order; blank lines are
// kept (they score as unparseable non-matches) so alignment never drifts.
std::vector<std::string> load_predictions(const std::string& path);

}  // namespace sqlfit
