#include "sqlfit/budget.hpp"

#include <cctype>

#include "sqlfit/util.hpp"

namespace sqlfit {

namespace {

bool ascii_space(unsigned char c) { return c < 0x80 && std::isspace(c); }

// Word characters per the approximate tokenizer's rule. Non-ASCII bytes
// always extend the current word, so accented and non-Latin text groups
// into words instead of splintering per byte.
bool word_byte(unsigned char c) {
    return c >= 0x80 || std::isalnum(c) || c == '_';
}

bool continuation_byte(unsigned char c) { return (c & 0xC0) == 0x80; }

}  // namespace

std::size_t ApproximateTokenizer::count(const std::string& text) const {
    std::size_t total = 0;
    std::size_t word_codepoints = 0;
    auto flush_word = [&] {
        if (word_codepoints > 0) {
            total += (word_codepoints + 3) / 4;
            word_codepoints = 0;
        }
    };
    for (unsigned char c : text) {
        if (continuation_byte(c)) continue;  // already counted at the lead byte
        if (ascii_space(c)) {
            flush_word();
        } else if (word_byte(c)) {
            ++word_codepoints;
        } else {
            flush_word();
            ++total;  // standalone punctuation
        }
    }
    flush_word();
    return total;
}

VocabularyTokenizer::VocabularyTokenizer(std::vector<std::string> entries) {
    nodes_.emplace_back();
    for (const std::string& entry : entries) {
        if (entry.empty()) continue;
        int node = 0;
        for (char c : entry) {
            auto it = nodes_[node].next.find(c);
            if (it == nodes_[node].next.end()) {
                nodes_.emplace_back();
                it = nodes_[node].next.emplace(c, static_cast<int>(nodes_.size()) - 1).first;
            }
            node = it->second;
        }
        if (!nodes_[node].terminal) {
            nodes_[node].terminal = true;
            ++entry_count_;
        }
    }
    if (entry_count_ == 0)
        throw ConfigError("vocabulary is empty: no usable subword entries");
}

VocabularyTokenizer VocabularyTokenizer::from_file(const std::string& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const IoError& e) {
        throw ConfigError(std::string("cannot load vocabulary: ") + e.what());
    }
    std::vector<std::string> entries;
    std::string line;
    for (char c : text) {
        if (c == '\n') {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            entries.push_back(std::move(line));
            line.clear();
        } else {
            line += c;
        }
    }
    if (!line.empty()) {
        if (line.back() == '\r') line.pop_back();
        entries.push_back(std::move(line));
    }
    return VocabularyTokenizer(std::move(entries));
}

std::size_t VocabularyTokenizer::count(const std::string& text) const {
    std::size_t total = 0;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        if (ascii_space(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        // Longest trie match starting at i.
        std::size_t best = 0;
        int node = 0;
        for (std::size_t j = i; j < n; ++j) {
            auto it = nodes_[node].next.find(text[j]);
            if (it == nodes_[node].next.end()) break;
            node = it->second;
            if (nodes_[node].terminal) best = j - i + 1;
        }
        ++total;
        if (best > 0) {
            i += best;
        } else {
            ++i;  // unknown codepoint: one token, skip it whole
            while (i < n && continuation_byte(static_cast<unsigned char>(text[i]))) ++i;
        }
    }
    return total;
}

std::unique_ptr<Tokenizer> make_tokenizer(const std::string& spec) {
    if (spec == "approximate") return std::make_unique<ApproximateTokenizer>();
    const std::string prefix = "vocabulary:";
    if (spec.rfind(prefix, 0) == 0) {
        std::string path = spec.substr(prefix.size());
        if (path.empty())
            throw ConfigError("tokenizer spec 'vocabulary:' is missing the file path");
        return std::make_unique<VocabularyTokenizer>(VocabularyTokenizer::from_file(path));
    }
    throw ConfigError("unknown tokenizer '" + spec +
                      "' (expected 'approximate' or 'vocabulary:<path>')");
}

std::string linearize(const std::string& question, const DatabaseSchema& schema) {
    std::vector<std::string> segments;
    if (!question.empty()) segments.push_back(question);
    for (int ti = 0; ti < schema.table_count(); ++ti) {
        std::vector<std::string> cols;
        for (int ci : schema.columns_of_table(ti)) cols.push_back(schema.columns[ci].original_name);
        std::string block = schema.tables[ti].original_name;
        if (!cols.empty()) block += " : " + join(cols, " , ");
        segments.push_back(std::move(block));
    }
    return join(segments, " | ");
}

std::vector<std::string> BudgetReport::overflow_databases() const {
    std::vector<std::string> out;
    for (const auto& [db, n] : overflow_by_db) out.push_back(db);
    return out;
}

BudgetReport classify_examples(const ExampleSet& examples, const SchemaCatalog& catalog,
                               TokenBudget budget, const Tokenizer& tokenizer, unsigned jobs) {
    if (budget.limit < 1) throw ConfigError("token budget limit must be at least 1");
    BudgetReport report;
    report.budget = budget;
    report.tokenizer_name = tokenizer.name();
    report.entries.resize(examples.size());

    parallel_for(examples.size(), jobs, [&](std::size_t i) {
        const Example& e = examples.examples[i];
        const DatabaseSchema* db = catalog.find(e.db_id);
        if (!db)
            throw ValidationError("example " + std::to_string(i) + " references unknown database '" +
                                  e.db_id + "'");
        std::size_t tokens = tokenizer.count(linearize(e.question, *db));
        report.entries[i] = {i, e.db_id, tokens, tokens <= budget.limit};
    });

    for (const BudgetEntry& entry : report.entries) {
        if (entry.fits) {
            ++report.used;
        } else {
            ++report.rejected;
            ++report.overflow_by_db[entry.db_id];
        }
    }
    return report;
}

}  // namespace sqlfit
