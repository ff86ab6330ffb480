#pragma once

// Token-budget analysis: turn question + schema into the flat text a
// parser-encoder would consume, count its tokens under a pluggable
// tokenizer, and split an example set into fitting and overflowing parts.
//
// Counts cover content tokens only; callers who need headroom for a model's
// special tokens should lower the limit accordingly (the CLI exposes a
// --margin flag for exactly that).

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sqlfit/corpus.hpp"
#include "sqlfit/errors.hpp"

namespace sqlfit {

struct TokenBudget {
    std::size_t limit = 512;
};

class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    // Deterministic: the same text always yields the same count.
    virtual std::size_t count(const std::string& text) const = 0;
    virtual std::string name() const = 0;
};

// Closed-form subword estimate, no external data: a word is a maximal run
// of alphanumerics, underscores, or non-ASCII characters; each word costs
// ceil(codepoints / 4) tokens; every other printable character costs one
// token of its own; whitespace separates and costs nothing.
class ApproximateTokenizer final : public Tokenizer {
public:
    std::size_t count(const std::string& text) const override;
    std::string name() const override { return "approximate"; }
};

// Greedy longest-match against a user-supplied subword list (UTF-8, one
// entry per line, matched case-sensitively). ASCII whitespace is skipped
// between matches; a position no entry covers costs one token and advances
// one codepoint.
class VocabularyTokenizer final : public Tokenizer {
public:
    explicit VocabularyTokenizer(std::vector<std::string> entries);
    static VocabularyTokenizer from_file(const std::string& path);

    std::size_t count(const std::string& text) const override;
    std::string name() const override { return "vocabulary"; }
    std::size_t vocabulary_size() const { return entry_count_; }

private:
    // Prefix trie; nodes are indices into `nodes_`, node 0 is the root.
    struct Node {
        std::map<char, int> next;
        bool terminal = false;
    };
    std::vector<Node> nodes_;
    std::size_t entry_count_ = 0;
};

// Builds a tokenizer from its textual spec: "approximate", or
// "vocabulary:<path>" for a vocabulary file. Anything else is a
// configuration error.
std::unique_ptr<Tokenizer> make_tokenizer(const std::string& spec);

// Canonical serialization: the question (when nonempty), then one block per
// table in schema order, "table : col1 , col2 , ...", all joined by " | ".
// Column lists use original names in schema order; the star column is
// omitted. Empty question and table-less schema produce "".
std::string linearize(const std::string& question, const DatabaseSchema& schema);

struct BudgetEntry {
    std::size_t example_index = 0;
    std::string db_id;
    std::size_t tokens = 0;
    bool fits = true;
};

struct BudgetReport {
    TokenBudget budget;
    std::string tokenizer_name;
    std::vector<BudgetEntry> entries;  // one per example, input order
    std::map<std::string, std::size_t> overflow_by_db;  // only databases with rejects
    std::size_t used = 0;
    std::size_t rejected = 0;

    std::vector<std::string> overflow_databases() const;  // sorted db ids
};

// Counts linearize(question, schema) for every example and classifies it
// against the budget. `jobs` fans counting out over a worker pool; results
// are merged in input order either way.
BudgetReport classify_examples(const ExampleSet& examples, const SchemaCatalog& catalog,
                               TokenBudget budget, const Tokenizer& tokenizer,
                               unsigned jobs = 1);

}  // namespace sqlfit
