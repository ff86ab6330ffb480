#pragma once

// Multilingual merging: a base example set plus positionally aligned
// translated variants (same db_id and gold query at every index, only the
// question text differs) combine into one set holding every language.

#include <string>
#include <vector>

#include "sqlfit/corpus.hpp"

namespace sqlfit {

struct TranslationVariant {
    std::string language;
    ExampleSet examples;  // i-th example translates the base's i-th
};

struct AlignmentMismatch {
    enum class Kind { db_id_mismatch, query_mismatch, missing_entry, surplus_entry };

    std::size_t index = 0;
    Kind kind = Kind::db_id_mismatch;
    std::string detail;
};

struct AlignmentReport {
    std::string language;
    std::vector<AlignmentMismatch> mismatches;

    bool aligned() const { return mismatches.empty(); }
};

// Compares variant to base index by index: db_id and gold query text must
// match exactly; question text is never compared. Length differences yield
// one missing-entry (variant too short) or surplus-entry (too long) record
// per index. Mismatches are reported, never thrown.
AlignmentReport align_translations(const ExampleSet& base, const TranslationVariant& variant);

// Concatenates base, then each variant in argument order, preserving
// per-example language tags; the result has |base| * (1 + |variants|)
// examples, and filtering it by any language tag recovers that input set in
// order. Refuses (validation error) if any variant fails alignment.
ExampleSet merge_multilingual(const ExampleSet& base,
                              const std::vector<TranslationVariant>& variants);

}  // namespace sqlfit
