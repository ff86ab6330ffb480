#include "sqlfit/polyglot.hpp"

#include <sstream>

namespace sqlfit {

AlignmentReport align_translations(const ExampleSet& base, const TranslationVariant& variant) {
    AlignmentReport report;
    report.language = variant.language;
    const std::size_t common = std::min(base.size(), variant.examples.size());
    for (std::size_t i = 0; i < common; ++i) {
        const Example& b = base.examples[i];
        const Example& v = variant.examples.examples[i];
        if (b.db_id != v.db_id) {
            report.mismatches.push_back({i, AlignmentMismatch::Kind::db_id_mismatch,
                                         "db_id '" + v.db_id + "' differs from base '" + b.db_id +
                                             "'"});
        }
        if (b.query != v.query) {
            report.mismatches.push_back({i, AlignmentMismatch::Kind::query_mismatch,
                                         "gold query '" + v.query + "' differs from base '" +
                                             b.query + "'"});
        }
    }
    for (std::size_t i = common; i < base.size(); ++i) {
        report.mismatches.push_back(
            {i, AlignmentMismatch::Kind::missing_entry, "variant has no entry at this index"});
    }
    for (std::size_t i = common; i < variant.examples.size(); ++i) {
        report.mismatches.push_back(
            {i, AlignmentMismatch::Kind::surplus_entry, "variant entry has no base counterpart"});
    }
    return report;
}

ExampleSet merge_multilingual(const ExampleSet& base,
                              const std::vector<TranslationVariant>& variants) {
    for (const TranslationVariant& variant : variants) {
        AlignmentReport report = align_translations(base, variant);
        if (!report.aligned()) {
            std::ostringstream msg;
            msg << "variant '" << variant.language << "' is misaligned with the base set ("
                << report.mismatches.size() << " mismatch(es); first at index "
                << report.mismatches.front().index << ": " << report.mismatches.front().detail
                << ")";
            throw ValidationError(msg.str());
        }
    }
    ExampleSet merged;
    merged.split_label = base.split_label;
    merged.examples.reserve(base.size() * (1 + variants.size()));
    merged.examples.insert(merged.examples.end(), base.examples.begin(), base.examples.end());
    for (const TranslationVariant& variant : variants) {
        merged.examples.insert(merged.examples.end(), variant.examples.examples.begin(),
                               variant.examples.examples.end());
    }
    return merged;
}

}  // namespace sqlfit
